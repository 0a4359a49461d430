use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cauchy::{cauchy_matrix, CauchyEntry, CheckpointStore};
use super::cook::{cook_integrand, cook_slope, CookSample};
use super::witness::{j_curve, tau_power_integral, JTermAccount, WitnessConstants};
use super::fit_slope;
use crate::error::{invalid, Result};
use crate::evolution::{ReducedEvolverConfig, DEFAULT_REDUCED_TOL};
use crate::model::{GridSpec, PotentialSpec, WavePacket};

/// Allowed excess of the tail slope over `-(1 - kappa)`.
pub const TAIL_SLOPE_MARGIN: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub grid: GridSpec,
    pub dtau: f64,
    pub tol: f64,
    pub max_refinements: u32,
    pub aliasing_limit: f64,
    pub tau_max: f64,
    /// Geometric checkpoint schedule.
    pub schedule: Vec<f64>,
    /// Longer schedule for `kappa` in `slow_range`, where divergence is only
    /// logarithmic.
    pub slow_schedule: Vec<f64>,
    pub slow_range: (f64, f64),
    /// The J2 probe `delta`.
    pub delta: f64,
    /// Window of the Cook slope fit.
    pub cook_window: (f64, f64),
    pub cook_points: usize,
}

impl SweepConfig {
    pub fn new(grid: GridSpec) -> Self {
        Self {
            grid,
            dtau: 0.05,
            tol: DEFAULT_REDUCED_TOL,
            max_refinements: 6,
            aliasing_limit: 1e-6,
            tau_max: 60.0,
            schedule: vec![5.0, 10.0, 20.0, 40.0],
            slow_schedule: vec![7.5, 15.0, 30.0, 60.0],
            slow_range: (1.0, 1.1),
            delta: 1e-3,
            cook_window: (8.0, 30.0),
            cook_points: 16,
        }
    }

    pub fn schedule_for(&self, kappa: f64) -> &[f64] {
        if kappa >= self.slow_range.0 && kappa <= self.slow_range.1 {
            &self.slow_schedule
        } else {
            &self.schedule
        }
    }

    pub fn evolver(&self, potential: Option<PotentialSpec>) -> ReducedEvolverConfig {
        let mut cfg = ReducedEvolverConfig::new(potential, self.grid, self.dtau);
        cfg.tol = self.tol;
        cfg.max_refinements = self.max_refinements;
        cfg.aliasing_limit = self.aliasing_limit;
        cfg.tau_max = self.tau_max;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("schedule", &self.schedule), ("slow_schedule", &self.slow_schedule)] {
            if s.len() < 3 {
                return Err(invalid(name, "needs at least three checkpoints"));
            }
            if s[0] < 2.0 || s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid(name, "must be increasing and start at tau >= 2"));
            }
            let q = s[1] / s[0];
            if s.windows(2).any(|w| ((w[1] / w[0]) - q).abs() > 1e-9 * q) {
                return Err(invalid(name, "must be geometric"));
            }
            if *s.last().unwrap() > self.tau_max {
                return Err(invalid(name, format!("exceeds tau_max = {}", self.tau_max)));
            }
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(invalid("delta", "must be finite and >= 0"));
        }
        if self.cook_points < 3 {
            return Err(invalid("cook_points", "need at least three"));
        }
        self.evolver(None).validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Convergent => "convergent",
            Verdict::Divergent => "divergent",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// The dichotomy's prediction: short range converges, long range does not.
    pub fn predicted(kappa: f64) -> Self {
        if kappa < 1.0 {
            Verdict::Convergent
        } else {
            Verdict::Divergent
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub kappa: f64,
    pub amplitude: f64,
    pub checkpoints: Vec<f64>,
    /// Upper triangle of `d(tau_i, tau_j)`, row-major.
    pub cauchy: Vec<CauchyEntry>,
    pub cook_samples: Vec<CookSample>,
    pub cook_slope: Option<f64>,
    /// Cumulative J-budgets from the first checkpoint; empty for short range.
    pub j1_curve: Vec<JTermAccount>,
    /// `||x^2 phi||`
    pub x2_norm: f64,
    pub constants: WitnessConstants,
    pub tol_conv: f64,
    pub verdict: Verdict,
    pub verdict_basis: Vec<String>,
}

impl ConvergenceReport {
    /// `d(tau_k, tau_{k+1})` along the schedule.
    pub fn consecutive(&self) -> Vec<CauchyEntry> {
        self.checkpoints
            .windows(2)
            .filter_map(|w| self.entry(w[0], w[1]))
            .collect()
    }

    pub fn entry(&self, tau1: f64, tau2: f64) -> Option<CauchyEntry> {
        self.cauchy.iter().copied().find(|e| e.tau1 == tau1 && e.tau2 == tau2)
    }

    pub fn final_cauchy(&self) -> Option<f64> {
        self.consecutive().last().map(|e| e.value)
    }

    /// Log-log slope of the consecutive differences against their left
    /// checkpoints.
    pub fn tail_slope(&self) -> Option<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .consecutive()
            .iter()
            .filter(|e| e.value > 0.0)
            .map(|e| (e.tau1.ln(), e.value.ln()))
            .unzip();
        fit_slope(&xs, &ys)
    }

    /// Log-log slope of the consecutive interaction parts against their left
    /// checkpoints: near `-(1 - kappa)` in both regimes.
    pub fn interaction_slope(&self) -> Option<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .consecutive()
            .iter()
            .filter(|e| e.interaction > 0.0)
            .map(|e| (e.tau1.ln(), e.interaction.ln()))
            .unzip();
        fit_slope(&xs, &ys)
    }

    /// Divergence floor per consecutive interval.
    pub fn floors(&self) -> Vec<f64> {
        self.checkpoints
            .windows(2)
            .map(|w| 0.5 * self.constants.gamma * tau_power_integral(self.kappa, w[0], w[1]))
            .collect()
    }

    /// Growth of `j1_lower` along the schedule: "bounded", "logarithmic" or
    /// "power(p)".
    pub fn j1_growth_class(&self) -> String {
        let mut prev = 0.0;
        let incs: Vec<f64> = self
            .j1_curve
            .iter()
            .map(|a| {
                let d = a.j1_lower - prev;
                prev = a.j1_lower;
                d
            })
            .collect();
        if incs.len() < 2 || self.kappa < 1.0 {
            return "bounded".into();
        }
        let q = self.checkpoints[1] / self.checkpoints[0];
        let r = (incs[incs.len() - 1] / incs[incs.len() - 2]).ln() / q.ln();
        if r.abs() < 1e-6 {
            "logarithmic".into()
        } else if r > 0.0 {
            format!("power({r:.2})")
        } else {
            "bounded".into()
        }
    }
}

/// Applies the verdict rules to the data stored in `report`.
pub fn decide(report: &ConvergenceReport) -> (Verdict, Vec<String>) {
    let kappa = report.kappa;
    let diffs = report.consecutive();
    let mut basis = Vec::new();
    if diffs.is_empty() {
        basis.push("no consecutive Cauchy differences".into());
        return (Verdict::Inconclusive, basis);
    }
    let last = diffs[diffs.len() - 1].value;
    if let Some(s) = report.interaction_slope() {
        basis.push(format!("interaction slope {s:.4} (not used by the rules)"));
    }
    if kappa < 1.0 {
        let mut ok = true;
        let below = last < report.tol_conv;
        basis.push(format!("final d = {last:.6e} {} tol_conv = {:.6e}", if below { "<" } else { ">=" }, report.tol_conv));
        ok &= below;
        if diffs.len() >= 2 {
            let prev = diffs[diffs.len() - 2].value;
            let dec = last < prev;
            basis.push(format!("last difference {} previous ({last:.6e} vs {prev:.6e})", if dec { "below" } else { "not below" }));
            ok &= dec;
        }
        let limit = -(1.0 - kappa) + TAIL_SLOPE_MARGIN;
        match report.tail_slope() {
            Some(s) => {
                let pass = s <= limit;
                basis.push(format!("tail slope {s:.4} {} {limit:.4}", if pass { "<=" } else { ">" }));
                ok &= pass;
            }
            None => {
                basis.push("tail slope unavailable".into());
                ok = false;
            }
        }
        return (if ok { Verdict::Convergent } else { Verdict::Inconclusive }, basis);
    }
    let mut ok = true;
    let gamma = report.constants.gamma;
    basis.push(format!("gamma = {gamma:.6e}"));
    if gamma <= 0.0 {
        basis.push("gamma <= 0: no witness floor".into());
        return (Verdict::Inconclusive, basis);
    }
    for (e, floor) in diffs.iter().zip(report.floors()) {
        let pass = e.value >= floor;
        basis.push(format!(
            "d({}, {}) = {:.6e} {} floor {floor:.6e}",
            e.tau1,
            e.tau2,
            e.value,
            if pass { ">=" } else { "<" }
        ));
        ok &= pass;
    }
    if report.j1_curve.is_empty() {
        basis.push("no J1 budget".into());
        ok = false;
    }
    for a in &report.j1_curve {
        let pass = a.j1_numeric >= a.j1_lower;
        if !pass {
            basis.push(format!("j1_numeric {:.6e} < j1_lower {:.6e} at tau {}", a.j1_numeric, a.j1_lower, a.tau2));
        }
        ok &= pass;
    }
    let mut prev = 0.0;
    let incs: Vec<f64> = report
        .j1_curve
        .iter()
        .map(|a| {
            let d = a.j1_lower - prev;
            prev = a.j1_lower;
            d
        })
        .collect();
    let grows = incs.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));
    basis.push(format!("j1_lower increments {}", if grows { "non-decreasing (divergent integral)" } else { "decaying" }));
    ok &= grows;
    (if ok { Verdict::Divergent } else { Verdict::Inconclusive }, basis)
}

/// `points` log-spaced values from `lo` to `hi`.
pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    if points < 2 {
        return vec![lo];
    }
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Runs every diagnostic for one `(kappa, C)`.
pub fn sweep_point(
    kappa: f64,
    amplitude: f64,
    phi: &WavePacket,
    config: &SweepConfig,
    store: &dyn CheckpointStore,
) -> Result<ConvergenceReport> {
    config.validate()?;
    if phi.grid() != &config.grid {
        return Err(invalid("grid", "packet and sweep grids differ"));
    }
    let potential = PotentialSpec::new(kappa, amplitude)?;
    let checkpoints = config.schedule_for(kappa).to_vec();
    let evolver = config.evolver(Some(potential));
    let cauchy = cauchy_matrix(phi, &checkpoints, &evolver, store)?;
    // Cook samples start no earlier than the fit window: at tau = 5 the
    // dilation of x^2 phi overflows the canonical grid.
    let first = checkpoints[0].max(config.cook_window.0).max(2.0);
    let cook_samples = log_spaced(first, *checkpoints.last().unwrap(), config.cook_points)
        .into_iter()
        .map(|tau| cook_integrand(phi, tau, Some(&potential)))
        .collect::<Result<Vec<_>>>()?;
    let j1_curve = if kappa >= 1.0 {
        j_curve(phi, &checkpoints, &potential, config.delta)?
    } else {
        Vec::new()
    };
    let x2_norm = phi.moment_norm(2);
    let last = *checkpoints.last().unwrap();
    let mut report = ConvergenceReport {
        kappa,
        amplitude,
        checkpoints,
        cook_slope: cook_slope(&cook_samples, config.cook_window),
        cauchy,
        cook_samples,
        j1_curve,
        x2_norm,
        constants: WitnessConstants::new(&potential, phi.outer(), phi.eps(), config.delta),
        tol_conv: 0.0,
        verdict: Verdict::Inconclusive,
        verdict_basis: Vec::new(),
    };
    let split = report
        .consecutive()
        .iter()
        .map(|e| e.splitting_error)
        .fold(0.0, f64::max);
    report.tol_conv = 10.0 * (split + x2_norm / (2.0 * last));
    let (verdict, basis) = decide(&report);
    report.verdict = verdict;
    report.verdict_basis = basis;
    Ok(report)
}

/// Runs [`sweep_point`] for every `(kappa, C)` on a pool of `jobs` threads.
///
/// A single amplitude is broadcast over all `kappas`; otherwise the lists are
/// zipped.  Results come back in input order whatever the completion order.
pub fn threshold_sweep(
    kappas: &[f64],
    amplitudes: &[f64],
    phi: &WavePacket,
    config: &SweepConfig,
    jobs: usize,
    store: &dyn CheckpointStore,
) -> Result<Vec<Result<ConvergenceReport>>> {
    if kappas.is_empty() {
        return Err(invalid("kappas", "sweep list is empty"));
    }
    if kappas.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
        return Err(invalid("kappas", "must be finite and >= 0"));
    }
    let points: Vec<(f64, f64)> = match amplitudes.len() {
        1 => kappas.iter().map(|&k| (k, amplitudes[0])).collect(),
        n if n == kappas.len() => kappas.iter().copied().zip(amplitudes.iter().copied()).collect(),
        _ => return Err(invalid("amplitudes", "give one amplitude or one per kappa")),
    };
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| invalid("jobs", e.to_string()))?;
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|&(k, c)| sweep_point(k, c, phi, config, store))
            .collect()
    }))
}
