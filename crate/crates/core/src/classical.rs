//! The classical equation `zeta'' + (k(t)/m) zeta = 0` with
//! `zeta_1(0) = 1, zeta_1'(0) = 0, zeta_2(0) = 0, zeta_2'(0) = 1`.
//!
//! On `[0, r0]` the equation is integrated numerically.  Beyond `r0` the
//! coefficient is `sigma / t^2` and the equation is of Euler type, so the
//! default solution continues with the exact matched closed form:
//! `t^(1/2) (A + B log t)` at critical coupling, `a t^(1-lambda) + b t^lambda`
//! otherwise.  The numeric continuation (in `s = log t`, where the Euler
//! equation has constant coefficients) is kept as a cross-check.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::CoefficientSchedule;
use crate::ode::{self, DenseSolution};

/// How the solution is continued beyond `r0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Continuation {
    Matched,
    Numeric,
}

/// Closed-form coefficients on `t >= r0` for `(zeta_1, zeta_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "form")]
pub enum MatchedCoefficients {
    /// `zeta_j = t^(1/2) (a[j] + b[j] log t)`
    Critical { a: [f64; 2], b: [f64; 2] },
    /// `zeta_j = a[j] t^(1-lambda) + b[j] t^lambda`
    NonCritical { lambda: f64, a: [f64; 2], b: [f64; 2] },
}

impl MatchedCoefficients {
    fn from_values(schedule: &CoefficientSchedule, at_r0: [f64; 4]) -> Self {
        let rho = schedule.r0();
        let pairs = [(at_r0[0], at_r0[1]), (at_r0[2], at_r0[3])];
        if schedule.is_critical() {
            let ell = rho.ln();
            let mut a = [0.0; 2];
            let mut b = [0.0; 2];
            for (j, (z, dz)) in pairs.into_iter().enumerate() {
                let u = z / rho.sqrt();
                b[j] = dz * rho.sqrt() - 0.5 * u;
                a[j] = u - b[j] * ell;
            }
            MatchedCoefficients::Critical { a, b }
        } else {
            let lambda = schedule.lambda();
            let mu = 1.0 - lambda;
            let mut a = [0.0; 2];
            let mut b = [0.0; 2];
            for (j, (z, dz)) in pairs.into_iter().enumerate() {
                let big_a = (rho * dz - lambda * z) / (mu - lambda);
                let big_b = z - big_a;
                a[j] = big_a / rho.powf(mu);
                b[j] = big_b / rho.powf(lambda);
            }
            MatchedCoefficients::NonCritical { lambda, a, b }
        }
    }

    /// `(zeta_1, zeta_1', zeta_2, zeta_2')` at `t >= r0`.
    pub fn evaluate(&self, t: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        match *self {
            MatchedCoefficients::Critical { a, b } => {
                let s = t.sqrt();
                let l = t.ln();
                for j in 0..2 {
                    out[2 * j] = s * (a[j] + b[j] * l);
                    out[2 * j + 1] = (0.5 * (a[j] + b[j] * l) + b[j]) / s;
                }
            }
            MatchedCoefficients::NonCritical { lambda, a, b } => {
                let mu = 1.0 - lambda;
                let tm = t.powf(mu);
                let tl = t.powf(lambda);
                for j in 0..2 {
                    out[2 * j] = a[j] * tm + b[j] * tl;
                    out[2 * j + 1] = (a[j] * mu * tm + b[j] * lambda * tl) / t;
                }
            }
        }
        out
    }
}

/// One sample `(t, zeta_1, zeta_1', zeta_2, zeta_2')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaSample {
    pub t: f64,
    pub zeta1: f64,
    pub dzeta1: f64,
    pub zeta2: f64,
    pub dzeta2: f64,
}

impl ZetaSample {
    fn new(t: f64, y: [f64; 4]) -> Self {
        Self {
            t,
            zeta1: y[0],
            dzeta1: y[1],
            zeta2: y[2],
            dzeta2: y[3],
        }
    }

    pub fn wronskian(&self) -> f64 {
        self.zeta1 * self.dzeta2 - self.zeta2 * self.dzeta1
    }
}

#[derive(Debug, Clone)]
pub struct ClassicalSolution {
    schedule: CoefficientSchedule,
    t_max: f64,
    continuation: Continuation,
    interior: DenseSolution<4>,
    /// Exterior numeric branch in `s = log t`, state `(w, dw/ds)` per solution.
    exterior: Option<DenseSolution<4>>,
    matched: MatchedCoefficients,
    samples: Vec<ZetaSample>,
}

const INTERIOR_SAMPLES: usize = 16;
const SAMPLES_PER_EFOLD: usize = 32;

/// Solves for `zeta_1, zeta_2` on `[0, t_max]` with the matched closed form
/// beyond `r0`.
pub fn solve_zeta(schedule: &CoefficientSchedule, t_max: f64, tol: f64) -> Result<ClassicalSolution> {
    solve_zeta_with(schedule, t_max, tol, Continuation::Matched)
}

pub fn solve_zeta_with(
    schedule: &CoefficientSchedule,
    t_max: f64,
    tol: f64,
    continuation: Continuation,
) -> Result<ClassicalSolution> {
    let r0 = schedule.r0();
    if !(t_max.is_finite() && t_max >= r0) {
        return Err(invalid("t_max", format!("must be >= r0 = {r0}, got {t_max}")));
    }
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(invalid("tol", format!("must lie in [1e-13, 1e-6], got {tol}")));
    }
    let sched = *schedule;
    let rhs = move |t: f64, y: &[f64; 4]| {
        let w2 = sched.frequency_squared(t);
        [y[1], -w2 * y[0], y[3], -w2 * y[2]]
    };
    let interior = ode::integrate(rhs, 0.0, r0, [1.0, 0.0, 0.0, 1.0], tol)?;
    let at_r0 = interior.end;
    let matched = MatchedCoefficients::from_values(schedule, at_r0);

    let exterior = match continuation {
        Continuation::Matched => None,
        Continuation::Numeric if t_max > r0 => {
            // t^2 zeta'' = w'' - w' with w(s) = zeta(e^s).
            let rhs_s = move |s: f64, y: &[f64; 4]| {
                let t = s.exp();
                let c = sched.frequency_squared(t) * t * t;
                [y[1], y[1] - c * y[0], y[3], y[3] - c * y[2]]
            };
            let y0 = [at_r0[0], r0 * at_r0[1], at_r0[2], r0 * at_r0[3]];
            Some(ode::integrate(rhs_s, r0.ln(), t_max.ln(), y0, tol)?)
        }
        Continuation::Numeric => None,
    };

    let mut sol = ClassicalSolution {
        schedule: *schedule,
        t_max,
        continuation,
        interior,
        exterior,
        matched,
        samples: Vec::new(),
    };
    let mut ts: Vec<f64> = (0..INTERIOR_SAMPLES)
        .map(|i| r0 * i as f64 / INTERIOR_SAMPLES as f64)
        .collect();
    let efolds = (t_max / r0).ln();
    let n_ext = (efolds * SAMPLES_PER_EFOLD as f64).ceil() as usize;
    ts.extend((0..=n_ext).map(|i| {
        if i == n_ext {
            t_max
        } else {
            r0 * (efolds * i as f64 / n_ext.max(1) as f64).exp()
        }
    }));
    sol.samples = ts.iter().map(|&t| ZetaSample::new(t, sol.state(t))).collect();
    Ok(sol)
}

impl ClassicalSolution {
    pub fn schedule(&self) -> &CoefficientSchedule {
        &self.schedule
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn continuation(&self) -> Continuation {
        self.continuation
    }

    pub fn matched(&self) -> &MatchedCoefficients {
        &self.matched
    }

    pub fn samples(&self) -> &[ZetaSample] {
        &self.samples
    }

    fn state(&self, t: f64) -> [f64; 4] {
        let r0 = self.schedule.r0();
        if t < r0 {
            return self.interior.eval(t);
        }
        match &self.exterior {
            Some(ext) => {
                let y = ext.eval(t.ln());
                [y[0], y[1] / t, y[2], y[3] / t]
            }
            None if t == r0 => self.interior.end,
            None => self.matched.evaluate(t),
        }
    }

    /// `(zeta_1, zeta_1', zeta_2, zeta_2')` at `0 <= t <= t_max`.
    pub fn evaluate(&self, t: f64) -> Result<ZetaSample> {
        if !(0.0..=self.t_max * (1.0 + 1e-12)).contains(&t) {
            return Err(invalid(
                "t",
                format!("must lie in [0, t_max = {}], got {t}", self.t_max),
            ));
        }
        Ok(ZetaSample::new(t, self.state(t)))
    }
}

/// Initial expectations `(x(0), p(0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryState {
    pub x0: f64,
    pub p0: f64,
}

/// `x(t) = zeta_1 x0 + zeta_2 p0 / m` and `p(t) = m x'(t)`.
pub fn classical_trajectory(
    sol: &ClassicalSolution,
    state: TrajectoryState,
    t: f64,
) -> Result<(f64, f64)> {
    if !(state.x0.is_finite() && state.p0.is_finite()) {
        return Err(invalid("state", "initial expectations must be finite"));
    }
    let z = sol.evaluate(t)?;
    let m = sol.schedule.mass();
    let x = z.zeta1 * state.x0 + z.zeta2 * state.p0 / m;
    let v = z.dzeta1 * state.x0 + z.dzeta2 * state.p0 / m;
    Ok((x, m * v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `sigma = 0`: `zeta_2` grows exactly linearly.
    Free,
    NonCritical,
    Critical,
}

/// Outcome of fitting `zeta_2` on a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitReport {
    pub regime: Regime,
    pub window: (f64, f64),
    /// Fitted `lambda` of the two-power model.
    pub lambda: f64,
    /// `1 - lambda`.
    pub dominant_exponent: f64,
    /// `B` in `zeta_2 ~ t^(1/2) (A + B log t)`.
    pub log_coefficient: f64,
    /// RMS residual of `log zeta_2` for the critical model.
    pub critical_residual: f64,
    /// RMS residual of `log zeta_2` for the two-power model.
    pub noncritical_residual: f64,
}

const FIT_SAMPLES: usize = 200;
/// The critical model has one parameter fewer; it wins unless the two-power
/// model is better by more than this margin.
const PARSIMONY_MARGIN: f64 = 1e-8;

/// Least-squares fits of `zeta_2` against the critical and the two-power
/// models on `[t_lo, t_hi]`.
pub fn fit_asymptotics(sol: &ClassicalSolution, window: (f64, f64)) -> Result<FitReport> {
    let (lo, hi) = window;
    let e2 = std::f64::consts::E.powi(2);
    let narrow = |reason: &str| Error::WindowTooNarrow {
        lo,
        hi,
        reason: reason.to_string(),
    };
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(narrow("bounds must be finite"));
    }
    if lo < e2 * sol.schedule.r0() * (1.0 - 1e-12) {
        return Err(narrow("t_lo must be at least e^2 * r0"));
    }
    if hi < e2 * lo * (1.0 - 1e-12) {
        return Err(narrow("t_hi must be at least e^2 * t_lo"));
    }
    if hi > sol.t_max * (1.0 + 1e-12) {
        return Err(narrow("t_hi exceeds the solved range"));
    }
    let ts: Vec<f64> = (0..FIT_SAMPLES)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (FIT_SAMPLES - 1) as f64).exp())
        .collect();
    let zs: Vec<f64> = ts
        .iter()
        .map(|&t| sol.evaluate(t.min(sol.t_max)).map(|z| z.zeta2))
        .collect::<Result<_>>()?;

    let (crit_ab, crit_res) = fit_two_basis(&ts, &zs, |t| t.sqrt(), |t| t.sqrt() * t.ln());

    let noncrit = |lambda: f64| {
        fit_two_basis(&ts, &zs, |t| t.powf(1.0 - lambda), |t| t.powf(lambda)).1
    };
    let lambda = minimise_lambda(noncrit);
    let nc_res = noncrit(lambda);

    let regime = if crit_res <= nc_res + PARSIMONY_MARGIN {
        Regime::Critical
    } else if lambda == 0.0 {
        Regime::Free
    } else {
        Regime::NonCritical
    };
    Ok(FitReport {
        regime,
        window,
        lambda,
        dominant_exponent: 1.0 - lambda,
        log_coefficient: crit_ab[1],
        critical_residual: crit_res,
        noncritical_residual: nc_res,
    })
}

/// Relative least squares for `z ~ c0 f0(t) + c1 f1(t)`; returns the
/// coefficients and the RMS residual of `log z`.
fn fit_two_basis(
    ts: &[f64],
    zs: &[f64],
    f0: impl Fn(f64) -> f64,
    f1: impl Fn(f64) -> f64,
) -> ([f64; 2], f64) {
    let (mut s00, mut s01, mut s11, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &z) in ts.iter().zip(zs) {
        let w = 1.0 / z;
        let (a, b) = (f0(t) * w, f1(t) * w);
        s00 += a * a;
        s01 += a * b;
        s11 += b * b;
        r0 += a;
        r1 += b;
    }
    let det = s00 * s11 - s01 * s01;
    let coef = if det.abs() <= 1e-300 || !det.is_finite() {
        [r0 / s00, 0.0]
    } else {
        [(r0 * s11 - r1 * s01) / det, (s00 * r1 - s01 * r0) / det]
    };
    let mut sum = 0.0;
    for (&t, &z) in ts.iter().zip(zs) {
        let model = coef[0] * f0(t) + coef[1] * f1(t);
        if model <= 0.0 || z <= 0.0 || !model.is_finite() {
            return (coef, f64::INFINITY);
        }
        sum += (z.ln() - model.ln()).powi(2);
    }
    (coef, (sum / ts.len() as f64).sqrt())
}

/// Scan `lambda` in `[0, 1/2)`, then golden-section refine around the best
/// sample.  The endpoint `lambda = 0` is kept exactly when it is as good.
fn minimise_lambda(f: impl Fn(f64) -> f64) -> f64 {
    const UPPER: f64 = 0.5 - 1e-6;
    const SCAN: usize = 100;
    let grid: Vec<f64> = (0..=SCAN).map(|i| UPPER * i as f64 / SCAN as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&l| f(l)).collect();
    let best = (0..=SCAN)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap_or(0);
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(SCAN)];
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let refined = 0.5 * (a + b);
    let f0 = vals[0];
    if f0 <= f(refined) + 1e-14 {
        0.0
    } else {
        refined
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn crit() -> CoefficientSchedule {
        CoefficientSchedule::critical(1.0).unwrap()
    }

    #[test]
    fn interior_closed_form() {
        let sol = solve_zeta(&crit(), 10.0, 1e-12).unwrap();
        let z = sol.evaluate(1.0).unwrap();
        assert!((z.zeta1 - 0.5f64.cos()).abs() < 1e-12);
        assert!((z.zeta2 - 2.0 * 0.5f64.sin()).abs() < 1e-12);
        // Dense output inside the interval.
        let z = sol.evaluate(0.37).unwrap();
        assert!((z.zeta1 - (0.185f64).cos()).abs() < 1e-11);
        assert!((z.dzeta2 - (0.185f64).cos()).abs() < 1e-11);
    }

    #[test]
    fn matched_coefficients() {
        let sol = solve_zeta(&crit(), E.powi(10), 1e-12).unwrap();
        let MatchedCoefficients::Critical { a, b } = *sol.matched() else {
            panic!("expected the critical closed form");
        };
        let (s, c) = 0.5f64.sin_cos();
        assert!((a[0] - c).abs() < 1e-12);
        assert!((b[0] - (-s / 2.0 - c / 2.0)).abs() < 1e-12);
        assert!((b[1] - 0.3981570).abs() < 1e-7);
        assert!((b[1] - (c - s)).abs() < 1e-12);
        let z = sol.evaluate(E * E).unwrap();
        assert!((z.zeta1 + E * s).abs() < 1e-11);
        assert!((z.zeta1 + 1.3032).abs() < 1e-4);
    }

    #[test]
    fn free_particle() {
        let s = CoefficientSchedule::new(0.0, 1.0).unwrap();
        let sol = solve_zeta(&s, 100.0, 1e-12).unwrap();
        for t in [0.3, 1.0, 7.0, 55.0] {
            let z = sol.evaluate(t).unwrap();
            assert!((z.zeta1 - 1.0).abs() < 1e-12);
            assert!((z.zeta2 - t).abs() < 1e-12 * t.max(1.0));
        }
        let (x, p) = classical_trajectory(&sol, TrajectoryState { x0: 0.0, p0: 1.0 }, 7.0).unwrap();
        assert!((x - 7.0).abs() < 1e-11 && (p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trajectory_at_origin_of_time() {
        let sol = solve_zeta(&crit(), 10.0, 1e-12).unwrap();
        let (x, p) = classical_trajectory(&sol, TrajectoryState { x0: 1.0, p0: 0.0 }, 0.0).unwrap();
        assert_eq!((x, p), (1.0, 0.0));
        assert!(classical_trajectory(&sol, TrajectoryState { x0: 1.0, p0: 0.0 }, 11.0).is_err());
    }

    #[test]
    fn critical_trajectory_growth() {
        let sol = solve_zeta(&crit(), E.powi(10), 1e-12).unwrap();
        let t = E.powi(10);
        let (x, _) = classical_trajectory(&sol, TrajectoryState { x0: 0.0, p0: 1.0 }, t).unwrap();
        let ratio = x / (t.sqrt() * t.ln());
        // zeta_2 = t^(1/2) (A + B log t): the ratio is B + A / log t.
        let (s, c) = 0.5f64.sin_cos();
        assert!((ratio - ((c - s) + 2.0 * s / 10.0)).abs() < 1e-10);
    }

    #[test]
    fn fit_windows_are_validated() {
        let sol = solve_zeta(&crit(), E.powi(10), 1e-12).unwrap();
        assert!(matches!(
            fit_asymptotics(&sol, (E.powi(1), E.powi(10))),
            Err(Error::WindowTooNarrow { .. })
        ));
        assert!(matches!(
            fit_asymptotics(&sol, (E.powi(5), E.powi(6))),
            Err(Error::WindowTooNarrow { .. })
        ));
    }

    #[test]
    fn fit_regimes() {
        let w = (E.powi(5), E.powi(10));
        let sol = solve_zeta(&crit(), E.powi(10), 1e-12).unwrap();
        let f = fit_asymptotics(&sol, w).unwrap();
        assert_eq!(f.regime, Regime::Critical);
        assert!((f.log_coefficient - 0.3981570).abs() < 1e-4 * 0.3981570);

        let s = CoefficientSchedule::new(3.0 / 16.0, 1.0).unwrap();
        let sol = solve_zeta(&s, E.powi(10), 1e-12).unwrap();
        let f = fit_asymptotics(&sol, w).unwrap();
        assert_eq!(f.regime, Regime::NonCritical);
        assert!((f.dominant_exponent - 0.75).abs() < 1e-3, "{f:?}");

        let s = CoefficientSchedule::new(0.0, 1.0).unwrap();
        let sol = solve_zeta(&s, E.powi(10), 1e-12).unwrap();
        let f = fit_asymptotics(&sol, w).unwrap();
        assert_eq!(f.regime, Regime::Free);
        assert_eq!(f.dominant_exponent, 1.0);
    }

    #[test]
    fn tolerance_range() {
        assert!(solve_zeta(&crit(), 10.0, 1e-3).is_err());
        assert!(solve_zeta(&crit(), 0.5, 1e-10).is_err());
    }
}
