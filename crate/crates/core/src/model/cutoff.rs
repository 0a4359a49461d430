use serde::Serialize;

use crate::error::{invalid, Result};

/// Smooth radial step `chi_eps`: 0 for `|x| <= eps/2`, 1 for `|x| >= eps`.
///
/// The transition is `S(s) = f(s) / (f(s) + f(1 - s))` with
/// `f(s) = exp(-1/s)` and `s = (|x| - eps/2) / (eps/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffFunction {
    eps: f64,
}

/// `(f, f', f'')` for `f(s) = exp(-1/s)`, zero for `s <= 0`.
fn flank(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = (-1.0 / s).exp();
    let s2 = s * s;
    (f, f / s2, f * (1.0 / (s2 * s2) - 2.0 / (s2 * s)))
}

/// `(S, S', S'')` of the unit step on `[0, 1]`.
fn step(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (f, f1, f2) = flank(s);
    let (g0, g1, g2) = flank(1.0 - s);
    // g(s) = f(1 - s): g' = -f'(1 - s), g'' = f''(1 - s)
    let (g, g1, g2) = (g0, -g1, g2);
    let d = f + g;
    let d1 = f1 + g1;
    let num = f1 * g - f * g1;
    let num1 = f2 * g - f * g2;
    (f / d, num / (d * d), num1 / (d * d) - 2.0 * num * d1 / (d * d * d))
}

impl CutoffFunction {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(invalid("eps", format!("must be positive, got {eps}")));
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn local(&self, x: f64) -> f64 {
        (x.abs() - 0.5 * self.eps) / (0.5 * self.eps)
    }

    pub fn value(&self, x: f64) -> f64 {
        step(self.local(x)).0
    }

    /// `d chi / dx`.
    pub fn gradient(&self, x: f64) -> f64 {
        x.signum() * step(self.local(x)).1 * 2.0 / self.eps
    }

    /// `d^2 chi / dx^2`.
    pub fn laplacian(&self, x: f64) -> f64 {
        let k = 2.0 / self.eps;
        step(self.local(x)).2 * k * k
    }

    /// `sup |chi'|`, by dense sampling of the transition layer.
    pub fn sup_gradient(&self) -> f64 {
        sup_over_layer(|s| step(s).1.abs()) * 2.0 / self.eps
    }

    /// `sup |chi''|`.
    pub fn sup_laplacian(&self) -> f64 {
        let k = 2.0 / self.eps;
        sup_over_layer(|s| step(s).2.abs()) * k * k
    }
}

fn sup_over_layer(f: impl Fn(f64) -> f64) -> f64 {
    const SAMPLES: usize = 20_000;
    (1..SAMPLES)
        .map(|i| f(i as f64 / SAMPLES as f64))
        .fold(0.0, f64::max)
}
