//! Dormand-Prince 5(4) with step-size control and the continuous extension
//! of Hairer, Norsett & Wanner (dopri5 `contd5`).

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Difference between the 5th and embedded 4th order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step with enough data for 4th-order dense output.
#[derive(Debug, Clone)]
pub(crate) struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])))
        })
    }
}

/// Piecewise dense solution over `[t_start, t_end]`.
#[derive(Debug, Clone)]
pub(crate) struct DenseSolution<const N: usize> {
    pub steps: Vec<DenseStep<N>>,
    pub end: [f64; N],
}

impl<const N: usize> DenseSolution<N> {
    pub fn t_end(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.t1())
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        if t >= self.t_end() {
            return self.end;
        }
        let idx = self.steps.partition_point(|s| s.t1() <= t);
        self.steps[idx.min(self.steps.len() - 1)].eval(t)
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1 > t0` with mixed tolerance
/// `tol * (1 + |y|)` per component.
pub(crate) fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    t1: f64,
    y0: [f64; N],
    tol: f64,
) -> Result<DenseSolution<N>> {
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(t1 - t0, tol);
    let mut steps = Vec::new();
    let mut k = [[0.0; N]; 7];
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        if h <= 1e-15 * t.abs().max(1.0) {
            return Err(Error::ToleranceNotMet { t, h });
        }
        k[0] = k1;
        for s in 1..7 {
            let ys: [f64; N] = std::array::from_fn(|i| {
                y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>()
            });
            k[s] = f(t + C[s] * h, &ys);
        }
        // Row 6 of A holds the 5th-order weights, so stage 7 is evaluated at y_new.
        let y_new: [f64; N] =
            std::array::from_fn(|i| y[i] + h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>());
        let mut err = 0.0;
        for i in 0..N {
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = tol * (1.0 + y[i].abs().max(y_new[i].abs()));
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if err <= 1.0 {
            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k[0][i] - ydiff[i]);
            let rcont = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k[6][i] - bspl[i]),
                std::array::from_fn(|i| h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>()),
            ];
            steps.push(DenseStep { t0: t, h, rcont });
            t += h;
            y = y_new;
            k1 = k[6];
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(DenseSolution { steps, end: y })
}

fn initial_step(span: f64, tol: f64) -> f64 {
    (span * tol.powf(0.2)).min(span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_and_dense_output() {
        let sol = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, 10.0, [1.0, 0.0], 1e-12).unwrap();
        let end = sol.end;
        assert!((end[0] - 10f64.cos()).abs() < 1e-10);
        assert!((end[1] + 10f64.sin()).abs() < 1e-10);
        for i in 0..200 {
            let t = i as f64 * 0.0497;
            let y = sol.eval(t);
            assert!((y[0] - t.cos()).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn fifth_order_convergence() {
        // Fixed tolerance sweep: error should fall roughly like tol.
        let exact = (-2.0f64).exp();
        let mut last = f64::INFINITY;
        for tol in [1e-6, 1e-8, 1e-10] {
            let sol = integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, 2.0, [1.0], tol).unwrap();
            let err = (sol.end[0] - exact).abs();
            assert!(err < last);
            assert!(err < 10.0 * tol);
            last = err;
        }
    }
}
