//! Strang splitting on a periodic grid.
//!
//! With `x_j = (j - N/2) dx` the plain FFT differs from the centered transform
//! only by a sign `(-1)^k` that cancels between the forward and inverse
//! passes, so the kinetic factor is a diagonal multiply in natural frequency
//! order.  Consecutive half kinetic steps are merged.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::fourier::{self, cis_cycles};
use crate::model::GridSpec;
use crate::Complex64;

/// Diagonal position-space factor for one step: `W(s_mid, x_j)`.
pub(crate) trait PositionTerm {
    fn fill(&self, s_mid: f64, out: &mut [f64]);
    fn is_zero(&self) -> bool;
}

pub(crate) struct Outcome {
    pub values: Vec<Complex64>,
    pub norm_drift: f64,
    /// `(s_mid, || W(s_mid) u ||)` per step, when recorded.
    pub interaction: Vec<(f64, f64)>,
}

pub(crate) struct Splitter {
    grid: GridSpec,
    plans: Arc<fourier::Plans>,
    scratch: Vec<Complex64>,
    x2: Vec<f64>,
}

impl Splitter {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn new(grid: GridSpec) -> Self {
        let n = grid.points();
        let plans = fourier::plans(n);
        let len = plans
            .forward
            .get_inplace_scratch_len()
            .max(plans.inverse.get_inplace_scratch_len());
        let x2 = grid.positions().into_iter().map(|x| x * x).collect();
        Self {
            grid,
            plans,
            scratch: vec![Complex64::new(0.0, 0.0); len],
            x2,
        }
    }

    /// `exp(-i ds xi^2 / 2) / N` in natural FFT order.
    fn kinetic(&self, ds: f64) -> Vec<Complex64> {
        let n = self.grid.points() as i64;
        let dxi = self.grid.momentum_spacing();
        let c = -ds * dxi * dxi / (4.0 * PI);
        let inv = 1.0 / n as f64;
        (0..n)
            .map(|k| {
                let m = if k < n / 2 { k } else { k - n };
                cis_cycles(c * (m * m) as f64) * inv
            })
            .collect()
    }

    fn apply_kinetic(&mut self, w: &mut [Complex64], phase: &[Complex64]) {
        self.plans.forward.process_with_scratch(w, &mut self.scratch);
        for (v, p) in w.iter_mut().zip(phase) {
            *v *= p;
        }
        self.plans.inverse.process_with_scratch(w, &mut self.scratch);
    }

    /// Advances position values by `steps` Strang steps of size `ds` from `s0`.
    pub fn run(
        &mut self,
        w0: &[Complex64],
        s0: f64,
        ds: f64,
        steps: usize,
        term: &dyn PositionTerm,
        recorder: Option<&dyn PositionTerm>,
        guard: &mut dyn FnMut(f64, f64) -> crate::Result<()>,
    ) -> crate::Result<Outcome> {
        let dx = self.grid.spacing();
        let mut w = w0.to_vec();
        let half = self.kinetic(0.5 * ds);
        let full = self.kinetic(ds);
        let mut pot = vec![0.0; w.len()];
        let mut rec = vec![0.0; w.len()];
        let mut interaction = Vec::new();
        let mut norm_prev = fourier::mass(&w, dx).sqrt();
        let mut drift = 0.0;
        let zero = term.is_zero();

        if steps == 0 {
            return Ok(Outcome {
                values: w,
                norm_drift: 0.0,
                interaction,
            });
        }
        self.apply_kinetic(&mut w, &half);
        for i in 0..steps {
            let s_mid = s0 + (i as f64 + 0.5) * ds;
            if let Some(r) = recorder {
                r.fill(s_mid, &mut rec);
                let acc: f64 = w.iter().zip(&rec).map(|(v, p)| p * p * v.norm_sqr()).sum();
                interaction.push((s_mid, (acc * dx).sqrt()));
            }
            if !zero {
                term.fill(s_mid, &mut pot);
                for (v, p) in w.iter_mut().zip(&pot) {
                    let (s, c) = (-ds * p).sin_cos();
                    *v *= Complex64::new(c, s);
                }
            }
            let norm: f64 = fourier::mass(&w, dx).sqrt();
            drift += (norm - norm_prev).abs();
            norm_prev = norm;
            let second: f64 =
                w.iter().zip(&self.x2).map(|(v, x2)| x2 * v.norm_sqr()).sum::<f64>() * dx;
            let second = second / (norm * norm);
            guard(s_mid, second)?;
            if i + 1 < steps {
                self.apply_kinetic(&mut w, &full);
            } else {
                self.apply_kinetic(&mut w, &half);
            }
        }
        Ok(Outcome {
            values: w,
            norm_drift: drift,
            interaction,
        })
    }

    /// Relative momentum mass at `|xi| >= fraction * nyquist`.
    pub fn band_edge_mass(&mut self, w: &[Complex64], fraction: f64) -> f64 {
        let mut buf = w.to_vec();
        self.plans.forward.process_with_scratch(&mut buf, &mut self.scratch);
        let n = buf.len() as i64;
        let dxi = self.grid.momentum_spacing();
        let cut = fraction * self.grid.nyquist();
        let mut edge = 0.0;
        let mut total = 0.0;
        for (k, v) in buf.iter().enumerate() {
            let k = k as i64;
            let m = if k < n / 2 { k } else { k - n };
            let a = v.norm_sqr();
            total += a;
            if (m as f64 * dxi).abs() >= cut {
                edge += a;
            }
        }
        if total > 0.0 {
            edge / total
        } else {
            0.0
        }
    }
}
