//! Adaptive Gauss-Legendre quadrature.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{invalid, Result};

const ORDER: usize = 20;
const MAX_DEPTH: u32 = 40;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`, by Newton
/// iteration on `P_n` from the Chebyshev-like initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn panel(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    x.iter().zip(w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
}

/// `int_a^b f` to absolute tolerance `tol` by bisection on panels.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("limits", "must be finite"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    if a == b {
        return Ok(0.0);
    }
    let whole = panel(&mut f, a, b);
    recurse(&mut f, a, b, whole, tol, 0)
}

fn recurse(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = panel(f, a, m);
    let right = panel(f, m, b);
    let both = left + right;
    if (both - whole).abs() <= tol || depth >= MAX_DEPTH {
        if !both.is_finite() {
            return Err(invalid("integrand", "non-finite value"));
        }
        return Ok(both);
    }
    Ok(recurse(f, a, m, left, 0.5 * tol, depth + 1)? + recurse(f, m, b, right, 0.5 * tol, depth + 1)?)
}
