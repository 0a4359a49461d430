use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evolution::effective_potential;
use crate::model::{PotentialSpec, WavePacket};
use crate::quadrature::integrate;

const QUAD_TOL: f64 = 1e-13;

/// Constants entering the divergence budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessConstants {
    pub c_low: f64,
    pub c_high: f64,
    pub outer: f64,
    pub eps: f64,
    pub kappa: f64,
    pub delta: f64,
    /// `C_L 2^(-2-kappa) R^-2 - delta C~_L eps^-2`
    pub gamma: f64,
}

impl WitnessConstants {
    pub fn new(potential: &PotentialSpec, outer: f64, eps: f64, delta: f64) -> Self {
        let kappa = potential.kappa();
        let c_low = potential.amplitude_low();
        let c_high = potential.amplitude_high();
        Self {
            c_low,
            c_high,
            outer,
            eps,
            kappa,
            delta,
            gamma: c_low * 2f64.powf(-2.0 - kappa) / (outer * outer) - delta * c_high / (eps * eps),
        }
    }
}

/// J-term budget over `[e^tau1, e^tau2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JTermAccount {
    pub tau1: f64,
    pub tau2: f64,
    /// `2^(-2-kappa) R^-2 C_L ||phi||^2 int tau^(-2+kappa) dtau`
    pub j1_lower: f64,
    /// `| int <V(t, t^(1/2) (log t) xi) phi^, phi^> dt |`
    pub j1_numeric: f64,
    /// `delta C~_L 4 eps^-2 ||phi||^2 int tau^(-2+kappa) dtau`
    pub j2_envelope: f64,
    /// `||x^2 phi|| ||phi|| / (2 log 2)`, with `||W+ phi||` replaced by `||phi||`.
    pub j3_bound: f64,
    pub constants: WitnessConstants,
}

/// `int_a^b tau^(-2+kappa) dtau` in closed form.
pub fn tau_power_integral(kappa: f64, a: f64, b: f64) -> f64 {
    if kappa == 1.0 {
        (b / a).ln()
    } else {
        (b.powf(kappa - 1.0) - a.powf(kappa - 1.0)) / (kappa - 1.0)
    }
}

/// `int_a^inf t^-1 (log t)^(-2+theta) dt = (log a)^(theta-1) / (1-theta)`.
pub fn i_theta(theta: f64, a: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(invalid("theta", "must be finite"));
    }
    if theta >= 1.0 {
        return Err(Error::DivergentIntegral { theta });
    }
    if !(a >= 2.0 && a.is_finite()) {
        return Err(invalid("a", format!("must be >= 2, got {a}")));
    }
    Ok(a.ln().powf(theta - 1.0) / (1.0 - theta))
}

/// `int <W(tau, tau xi) phi^, phi^> dxi` on the packet's momentum samples.
fn j1_density(potential: &PotentialSpec, weights: &[(f64, f64)], tau: f64) -> f64 {
    weights
        .iter()
        .map(|&(xi, w)| effective_potential(potential, tau, tau * xi) * w)
        .sum()
}

fn momentum_weights(phi: &WavePacket) -> Vec<(f64, f64)> {
    let grid = phi.grid();
    let dxi = grid.momentum_spacing();
    phi.spectrum()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm_sqr() > 0.0)
        .map(|(k, v)| (grid.momentum(k), v.norm_sqr() * dxi))
        .collect()
}

/// The J-term budget over `[tau1, tau2]`.
pub fn j_terms(
    phi: &WavePacket,
    tau1: f64,
    tau2: f64,
    potential: &PotentialSpec,
    delta: f64,
) -> Result<JTermAccount> {
    Ok(j_curve(phi, &[tau1, tau2], potential, delta)?.remove(0))
}

/// Cumulative J-term budgets from `taus[0]` to each later entry.
pub fn j_curve(
    phi: &WavePacket,
    taus: &[f64],
    potential: &PotentialSpec,
    delta: f64,
) -> Result<Vec<JTermAccount>> {
    let kappa = potential.kappa();
    if kappa < 1.0 {
        return Err(Error::ShortRangeInput { kappa });
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(invalid("delta", "must be finite and >= 0"));
    }
    if taus.len() < 2 || taus.windows(2).any(|w| w[0] >= w[1]) || taus[0] < 1.0 {
        return Err(invalid("taus", "need at least two increasing values >= 1"));
    }
    let constants = WitnessConstants::new(potential, phi.outer(), phi.eps(), delta);
    let mass = phi.norm().powi(2);
    let weights = momentum_weights(phi);
    let j3_bound = phi.moment_norm(2) * phi.norm() / (2.0 * 2f64.ln());
    let lower_rate = 2f64.powf(-2.0 - kappa) * constants.c_low * mass / (phi.outer() * phi.outer());
    let j2_rate = delta * constants.c_high * 4.0 * mass / (phi.eps() * phi.eps());

    let mut out = Vec::with_capacity(taus.len() - 1);
    let (mut numeric, mut power) = (0.0, 0.0);
    for w in taus.windows(2) {
        numeric += integrate(|s| j1_density(potential, &weights, s), w[0], w[1], QUAD_TOL)?;
        power += integrate(|s| s.powf(-2.0 + kappa), w[0], w[1], QUAD_TOL)?;
        out.push(JTermAccount {
            tau1: taus[0],
            tau2: w[1],
            j1_lower: lower_rate * power,
            j1_numeric: numeric.abs(),
            j2_envelope: j2_rate * power,
            j3_bound,
            constants,
        });
    }
    Ok(out)
}
