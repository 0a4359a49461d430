//! Wave-operator diagnostics: Cauchy differences of `W(t) = U_S(t,1)* U(t)`,
//! the Cook integrand, the J-term divergence witness and the kappa sweep.

mod cauchy;
mod cook;
mod sweep;
mod witness;

pub use cauchy::{cauchy_difference, cauchy_matrix, cauchy_row, CauchyEntry, CheckpointStore, NoStore, RunKey, StoredRun};
pub use cook::{cook_constants, BOUND_ROUNDOFF, cook_integrand, cook_slope, CookConstants, CookSample};
pub use sweep::{decide, log_spaced, sweep_point, threshold_sweep, ConvergenceReport, SweepConfig, Verdict, TAIL_SLOPE_MARGIN};
pub use witness::{i_theta, j_curve, j_terms, tau_power_integral, JTermAccount, WitnessConstants};

/// Ordinary least-squares slope; `None` for fewer than two distinct points.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}
