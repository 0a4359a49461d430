//! FFT plumbing shared by the packet builder, the spectral operators and the
//! time steppers.
//!
//! Position samples live at `x_j = (j - N/2) dx` and momentum samples at
//! `xi_k = (k - N/2) dxi` with `dxi = pi / L`; both are stored in centered
//! order.  The continuous transform is approximated with the unitary
//! normalisation `F[u](xi) = (2 pi)^(-1/2) * int u(x) exp(-i xi x) dx`.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse plans for one length, shared read-only between workers.
pub(crate) struct Plans {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

pub(crate) fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

#[inline]
fn alternate(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `exp(2 pi i c)` with the argument reduced to `[-1/2, 1/2]` cycles first.
#[inline]
pub(crate) fn cis_cycles(c: f64) -> Complex64 {
    let f = c - c.round();
    let (s, co) = (TAU * f).sin_cos();
    Complex64::new(co, s)
}

/// Centered position samples to centered momentum samples.
pub(crate) fn to_momentum(values: &[Complex64], dx: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(j, v)| v * alternate(j))
        .collect();
    plans(n).forward.process(&mut buf);
    let scale = dx / (2.0 * PI).sqrt();
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= scale * alternate(k);
    }
    buf
}

/// Centered momentum samples back to centered position samples.
pub(crate) fn to_position(values: &[Complex64], dxi: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(k, v)| v * alternate(k))
        .collect();
    plans(n).inverse.process(&mut buf);
    let scale = dxi / (2.0 * PI).sqrt();
    for (j, v) in buf.iter_mut().enumerate() {
        *v *= scale * alternate(j);
    }
    buf
}

/// Computes `out_j = sum_m a_m exp(2 pi i gamma (j - N/2)(m - N/2))` in
/// `O(N log N)` with Bluestein's factorisation
/// `p q = (p^2 + q^2 - (p - q)^2) / 2`.
pub(crate) fn chirp_sum(a: &[Complex64], gamma: f64) -> Vec<Complex64> {
    let n = a.len();
    let half = (n / 2) as i64;
    let m = (2 * n).next_power_of_two();
    let g = 0.5 * gamma;
    let chirp = |p: i64| cis_cycles(g * (p * p) as f64);

    let mut b = vec![Complex64::new(0.0, 0.0); m];
    for (j, v) in a.iter().enumerate() {
        b[j] = v * chirp(j as i64 - half);
    }
    let mut kernel = vec![Complex64::new(0.0, 0.0); m];
    for d in 0..n as i64 {
        let w = chirp(d).conj();
        kernel[d as usize] = w;
        if d > 0 {
            kernel[m - d as usize] = w;
        }
    }
    let p = plans(m);
    p.forward.process(&mut b);
    p.forward.process(&mut kernel);
    for (x, k) in b.iter_mut().zip(&kernel) {
        *x *= k;
    }
    p.inverse.process(&mut b);
    let inv_m = 1.0 / m as f64;
    (0..n)
        .map(|j| b[j] * chirp(j as i64 - half) * inv_m)
        .collect()
}

/// Plain `sum |v|^2 * weight`, the grid approximation of a squared L2 norm.
pub(crate) fn mass(values: &[Complex64], weight: f64) -> f64 {
    values.iter().map(|v| v.norm_sqr()).sum::<f64>() * weight
}
