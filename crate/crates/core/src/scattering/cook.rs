use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{CutoffFunction, PotentialSpec, WavePacket};
use crate::spectral::{mdfm_state, MdfmMode, SpectralState};
use crate::Complex64;

/// The three summands of the Cook derivative at `t = e^tau`, with their
/// envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CookSample {
    pub tau: f64,
    /// `|| V(t, t^(1/2) x) chi_eps(x / log t) U(t) phi ||`
    pub term_v: f64,
    /// `|| D_{p^2/2t}(chi_eps(x / log t)) U(t) phi ||`
    pub term_d: f64,
    /// `|| chi_eps(x / log t) U(t) x^2 phi || / (2 t (log t)^2)`
    pub term_x2: f64,
    /// `C_D / (t (log t)^2)`
    pub bound_d: f64,
    /// `C_x2 / (t (log t)^2)`
    pub bound_x2: f64,
    /// `C~ t^-1 (log t)^(-2+kappa)`, zero without a potential.
    pub envelope_v: f64,
}

/// Relative slack of the envelope checks.  `term_x2` meets its envelope
/// with equality up to transform roundoff.
pub const BOUND_ROUNDOFF: f64 = 1e-9;

impl CookSample {
    /// `term_d` and `term_x2` within their envelopes.
    pub fn within_bounds(&self) -> bool {
        self.term_d <= self.bound_d * (1.0 + BOUND_ROUNDOFF) && self.term_x2 <= self.bound_x2 * (1.0 + BOUND_ROUNDOFF)
    }
}

/// Constants of the `term_d` and `term_x2` envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CookConstants {
    /// `sup|chi'| ||x phi|| + sup|chi''| ||phi|| / 2`
    pub c_d: f64,
    /// `||x^2 phi|| / 2`
    pub c_x2: f64,
}

pub fn cook_constants(phi: &WavePacket) -> Result<CookConstants> {
    let chi = CutoffFunction::new(phi.eps())?;
    Ok(CookConstants {
        c_d: chi.sup_gradient() * phi.moment_norm(1) + 0.5 * chi.sup_laplacian() * phi.norm(),
        c_x2: 0.5 * phi.moment_norm(2),
    })
}

fn norm(values: impl Iterator<Item = Complex64>, dx: f64) -> f64 {
    (values.map(|v| v.norm_sqr()).sum::<f64>() * dx).sqrt()
}

/// Evaluates the three Cook terms for `U(e^tau) phi`.
///
/// The Heisenberg term uses `(x - (log t) p) U(t) phi = U(t) x phi`.
pub fn cook_integrand(phi: &WavePacket, tau: f64, potential: Option<&PotentialSpec>) -> Result<CookSample> {
    if !(tau.is_finite() && tau >= 2.0) {
        return Err(invalid("tau", format!("must be >= 2, got {tau}")));
    }
    let grid = *phi.grid();
    let dx = grid.spacing();
    let chi = CutoffFunction::new(phi.eps())?;
    let constants = cook_constants(phi)?;
    let t = tau.exp();
    let scale = 1.0 / (t * tau * tau);

    let u = mdfm_state(&SpectralState::from_packet(phi), tau, MdfmMode::Truncated)?;
    let ux = mdfm_state(&SpectralState::position(grid, phi.weighted(1))?, tau, MdfmMode::Truncated)?;
    let ux2 = mdfm_state(&SpectralState::position(grid, phi.weighted(2))?, tau, MdfmMode::Truncated)?;
    let xs = grid.positions();

    let term_v = match potential {
        None => 0.0,
        Some(v) => norm(
            xs.iter().zip(u.values()).map(|(&x, &w)| {
                w * (v.evaluate_sq(t, t * x * x) * chi.value(x / tau))
            }),
            dx,
        ),
    };
    let term_d = scale
        * norm(
            xs.iter()
                .zip(u.values().iter().zip(ux.values()))
                .map(|(&x, (&w, &wx))| {
                    let y = x / tau;
                    wx * chi.gradient(y) + Complex64::new(0.0, 0.5 * chi.laplacian(y)) * w
                }),
            dx,
        );
    let term_x2 = 0.5
        * scale
        * norm(
            xs.iter().zip(ux2.values()).map(|(&x, &w)| w * chi.value(x / tau)),
            dx,
        );
    let envelope_v = potential.map_or(0.0, |v| v.amplitude_high() * tau.powf(-2.0 + v.kappa()) / t);
    Ok(CookSample {
        tau,
        term_v,
        term_d,
        term_x2,
        bound_d: constants.c_d * scale,
        bound_x2: constants.c_x2 * scale,
        envelope_v,
    })
}

/// Least-squares slope of `log(t term_v)` against `log tau` over samples
/// with `tau` in `window`.
pub fn cook_slope(samples: &[CookSample], window: (f64, f64)) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|s| s.tau >= window.0 && s.tau <= window.1 && s.term_v > 0.0)
        .map(|s| (s.tau.ln(), s.tau + s.term_v.ln()))
        .unzip();
    super::fit_slope(&xs, &ys)
}
