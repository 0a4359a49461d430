//! Split-step solvers.
//!
//! The reduced dynamics `i d/dt u = [p^2/(2t) + V(t, t^(1/2) x)] u` is run in
//! `tau = log t`, where it reads `i d/dtau u = [p^2/2 + W(tau, x)] u` with
//! `W(tau, x) = e^tau V(e^tau, e^(tau/2) x)`.  The original dynamics
//! `p^2/2 + k(t) x^2/2 + V(t, x)` is kept for moderate horizons.

mod split;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{CoefficientSchedule, CutoffFunction, GridSpec, PotentialSpec};
use crate::spectral::{Side, SpectralState};
use crate::Complex64;
use split::{PositionTerm, Splitter};

/// Edge of the band watched for aliasing, as a fraction of Nyquist.
pub const ALIASING_BAND: f64 = 0.95;

/// Default step-halving tolerance (L2) for the reduced solver.
///
/// `W(tau, 0) = e^tau C` is a spike of width `e^(-tau/2)` that no grid
/// resolves; the phase it puts on the `x = 0` sample does not converge in
/// `dtau`.  Whatever amplitude reaches the origin is scrambled there, which
/// floors the refinement differences at about 1e-4 on `tau in [5, 10]`,
/// 3e-6 on `[7.5, 15]` and 2e-7 on `[10, 20]` (packet `[1, 4]`, C = 0.5).
/// Beyond `tau ~ 20` the scheme is cleanly second order.
pub const DEFAULT_REDUCED_TOL: f64 = 2.5e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedEvolverConfig {
    /// `None` is the free reduced flow.
    pub potential: Option<PotentialSpec>,
    pub grid: GridSpec,
    pub dtau: f64,
    pub tol: f64,
    pub checkpoints: Vec<f64>,
    pub tau_max: f64,
    pub max_refinements: u32,
    /// Largest tolerated relative momentum mass beyond [`ALIASING_BAND`].
    pub aliasing_limit: f64,
    /// Keep per-step `|| W u ||` samples.
    pub record_interaction: bool,
}

impl ReducedEvolverConfig {
    pub fn new(potential: Option<PotentialSpec>, grid: GridSpec, dtau: f64) -> Self {
        Self {
            potential,
            grid,
            dtau,
            tol: DEFAULT_REDUCED_TOL,
            checkpoints: Vec::new(),
            tau_max: 60.0,
            max_refinements: 6,
            aliasing_limit: 1e-6,
            record_interaction: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dtau.is_finite() && self.dtau > 0.0) {
            return Err(invalid("dtau", format!("must be positive, got {}", self.dtau)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if !(self.tau_max.is_finite() && self.tau_max >= 1.0) {
            return Err(invalid("tau_max", "must be at least 1"));
        }
        if !(self.aliasing_limit > 0.0) {
            return Err(invalid("aliasing_limit", "must be positive"));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("checkpoints", "must be strictly increasing"));
        }
        if let (Some(&a), Some(&b)) = (self.checkpoints.first(), self.checkpoints.last()) {
            if a < 1.0 || b > self.tau_max {
                return Err(invalid("checkpoints", "must lie in [1, tau_max]"));
            }
        }
        Ok(())
    }
}

/// Evolved values together with the bookkeeping of how they were obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    grid: GridSpec,
    values: Vec<Complex64>,
    pub tau: f64,
    pub norm_drift: f64,
    pub steps_taken: u64,
    /// Sum over solver calls of the last step-halving difference.
    pub splitting_error: f64,
    /// `(tau, || W(tau) u ||)` from the accepted run, if recorded.
    pub interaction: Vec<(f64, f64)>,
}

impl EvolutionState {
    pub fn new(state: &SpectralState, tau: f64) -> Result<Self> {
        let pos = state.to_position();
        Ok(Self {
            grid: *pos.grid(),
            values: pos.into_values(),
            tau,
            norm_drift: 0.0,
            steps_taken: 0,
            splitting_error: 0.0,
            interaction: Vec::new(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn to_spectral(&self) -> SpectralState {
        SpectralState::new(self.grid, self.values.clone(), Side::Position)
            .expect("grid and values agree")
    }
}

/// `W(tau, x) = e^tau V(e^tau, e^(tau/2) x)`.
pub fn effective_potential(potential: &PotentialSpec, tau: f64, x: f64) -> f64 {
    let t = tau.exp();
    t * potential.evaluate_sq(t, t * x * x)
}

/// `sup_x |W(tau, x) chi_eps(x / tau)|` over the grid points.
pub fn effective_potential_sup(
    potential: &PotentialSpec,
    tau: f64,
    eps: f64,
    grid: &GridSpec,
) -> Result<f64> {
    let chi = CutoffFunction::new(eps)?;
    Ok(grid
        .positions()
        .into_iter()
        .map(|x| (effective_potential(potential, tau, x) * chi.value(x / tau)).abs())
        .fold(0.0, f64::max))
}

struct Reduced {
    potential: Option<PotentialSpec>,
    x2: Vec<f64>,
}

impl PositionTerm for Reduced {
    fn fill(&self, tau: f64, out: &mut [f64]) {
        let Some(v) = &self.potential else {
            out.fill(0.0);
            return;
        };
        let t = tau.exp();
        let amp = v.amplitude(t) * v.sign() * t;
        for (o, &x2) in out.iter_mut().zip(&self.x2) {
            *o = amp * crate::model::profile_value(v.kappa(), t * x2);
        }
    }

    fn is_zero(&self) -> bool {
        self.potential.is_none()
    }
}

fn check_state(grid: &GridSpec, values: &[Complex64]) -> Result<()> {
    if values.len() != grid.points() {
        return Err(invalid("state", "sample count does not match the grid"));
    }
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(invalid("state", "contains non-finite samples"));
    }
    Ok(())
}

fn l2_distance(a: &[Complex64], b: &[Complex64], dx: f64) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() * dx).sqrt()
}

/// Step-halving driver shared by both solvers.
#[allow(clippy::too_many_arguments)]
fn refine(
    splitter: &mut Splitter,
    w0: &[Complex64],
    s0: f64,
    s1: f64,
    base_step: f64,
    tol: f64,
    max_refinements: u32,
    term: &dyn PositionTerm,
    recorder: Option<&dyn PositionTerm>,
    guard: &mut dyn FnMut(f64, f64) -> Result<()>,
) -> Result<(split::Outcome, u64, f64)> {
    let dx = splitter.grid().spacing();
    let span = s1 - s0;
    let mut n = ((span / base_step).ceil() as usize).max(1);
    if term.is_zero() {
        // Kinetic factors commute: one step is exact.
        let out = splitter.run(w0, s0, span, 1, term, recorder, &mut *guard)?;
        return Ok((out, 1, 0.0));
    }
    let mut prev = splitter.run(w0, s0, span / n as f64, n, term, None, &mut *guard)?;
    let mut taken = n as u64;
    let mut diff = f64::INFINITY;
    for _ in 0..max_refinements {
        n *= 2;
        let next = splitter.run(w0, s0, span / n as f64, n, term, recorder, &mut *guard)?;
        taken += n as u64;
        diff = l2_distance(&prev.values, &next.values, dx);
        if diff <= tol {
            return Ok((next, taken, diff));
        }
        prev = next;
    }
    Err(Error::StepUnderflow {
        tol,
        diff,
        dtau: span / n as f64,
    })
}

/// Integrates the reduced dynamics from `tau_from` to `tau_to`.
///
/// `tau_from` may be 0 (t = 1) so the reduced run can be compared with the
/// original dynamics from `t = 1`; the scattering diagnostics start at 1.
pub fn evolve_reduced(
    state: &EvolutionState,
    tau_from: f64,
    tau_to: f64,
    config: &ReducedEvolverConfig,
) -> Result<EvolutionState> {
    config.validate()?;
    if (state.tau - tau_from).abs() > 1e-12 * tau_from.abs().max(1.0) {
        return Err(invalid(
            "tau_from",
            format!("state is at tau = {}, not {tau_from}", state.tau),
        ));
    }
    if !(tau_from >= 0.0 && tau_from <= tau_to && tau_to <= config.tau_max) {
        return Err(invalid(
            "tau_to",
            format!("need 0 <= tau_from <= tau_to <= {}, got {tau_from}, {tau_to}", config.tau_max),
        ));
    }
    if state.grid != config.grid {
        return Err(invalid("grid", "state and configuration grids differ"));
    }
    check_state(&state.grid, &state.values)?;
    if tau_to == tau_from {
        return Ok(state.clone());
    }
    let term = Reduced {
        potential: config.potential,
        x2: config.grid.positions().into_iter().map(|x| x * x).collect(),
    };
    let w = state.values.clone();
    let mut splitter = Splitter::new(config.grid);
    let mut guard = |_: f64, _: f64| Ok(());
    let recorder: Option<&dyn PositionTerm> = if config.record_interaction {
        Some(&term)
    } else {
        None
    };
    let (out, taken, diff) = refine(
        &mut splitter,
        &w,
        tau_from,
        tau_to,
        config.dtau,
        config.tol,
        config.max_refinements,
        &term,
        recorder,
        &mut guard,
    )?;
    let edge = splitter.band_edge_mass(&out.values, ALIASING_BAND);
    if edge > config.aliasing_limit {
        return Err(Error::AliasingDetected {
            tau: tau_to,
            mass: edge,
        });
    }
    let values = out.values;
    let mut interaction = state.interaction.clone();
    interaction.extend(out.interaction);
    Ok(EvolutionState {
        grid: state.grid,
        values,
        tau: tau_to,
        norm_drift: state.norm_drift + out.norm_drift,
        steps_taken: state.steps_taken + taken,
        splitting_error: state.splitting_error + diff,
        interaction,
    })
}

/// Exactly `steps` Strang steps with no refinement or aliasing check; the
/// raw scheme, used for convergence-order studies.
pub fn evolve_reduced_fixed(
    state: &EvolutionState,
    tau_to: f64,
    steps: usize,
    potential: Option<&PotentialSpec>,
) -> Result<EvolutionState> {
    if !(tau_to >= state.tau) || steps == 0 {
        return Err(invalid("steps", "need tau_to >= tau and at least one step"));
    }
    let grid = state.grid;
    let term = Reduced {
        potential: potential.copied(),
        x2: grid.positions().into_iter().map(|x| x * x).collect(),
    };
    let w = state.values.clone();
    let mut splitter = Splitter::new(grid);
    let ds = (tau_to - state.tau) / steps as f64;
    let out = splitter.run(&w, state.tau, ds, steps, &term, None, &mut |_, _| Ok(()))?;
    let values = out.values;
    Ok(EvolutionState {
        grid,
        values,
        tau: tau_to,
        norm_drift: state.norm_drift + out.norm_drift,
        steps_taken: state.steps_taken + steps as u64,
        splitting_error: state.splitting_error,
        interaction: state.interaction.clone(),
    })
}

/// Evolves through every configured checkpoint in `(tau_from, tau_to]` and
/// returns the state at each of them, ending with `tau_to`.
pub fn evolve_reduced_checkpoints(
    state: &EvolutionState,
    tau_from: f64,
    tau_to: f64,
    config: &ReducedEvolverConfig,
) -> Result<Vec<EvolutionState>> {
    let mut stops: Vec<f64> = config
        .checkpoints
        .iter()
        .copied()
        .filter(|&c| c > tau_from && c < tau_to)
        .collect();
    stops.push(tau_to);
    let mut out = Vec::with_capacity(stops.len());
    let mut cur = state.clone();
    let mut from = tau_from;
    for s in stops {
        cur = evolve_reduced(&cur, from, s, config)?;
        from = s;
        out.push(cur.clone());
    }
    Ok(out)
}

/// Step control for [`evolve_full`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepControl {
    pub dt: f64,
    pub tol: f64,
    pub max_refinements: u32,
    pub record_interaction: bool,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            dt: 0.01,
            tol: 1e-8,
            max_refinements: 6,
            record_interaction: false,
        }
    }
}

/// State of the original dynamics at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    grid: GridSpec,
    values: Vec<Complex64>,
    pub t: f64,
    pub norm_drift: f64,
    pub steps_taken: u64,
    /// `(t, || V(t) psi ||)` at step midpoints, if recorded.
    pub interaction: Vec<(f64, f64)>,
}

impl FullState {
    pub fn new(state: &SpectralState, t: f64) -> Self {
        let pos = state.to_position();
        Self {
            grid: *pos.grid(),
            values: pos.into_values(),
            t,
            norm_drift: 0.0,
            steps_taken: 0,
            interaction: Vec::new(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn to_spectral(&self) -> SpectralState {
        SpectralState::new(self.grid, self.values.clone(), Side::Position)
            .expect("grid and values agree")
    }
}

struct Full {
    schedule: CoefficientSchedule,
    potential: Option<PotentialSpec>,
    x: Vec<f64>,
}

impl PositionTerm for Full {
    fn fill(&self, t: f64, out: &mut [f64]) {
        let k = 0.5 * self.schedule.frequency_squared(t);
        for (o, &x) in out.iter_mut().zip(&self.x) {
            *o = k * x * x + self.potential.map_or(0.0, |v| v.evaluate(t, x));
        }
    }

    fn is_zero(&self) -> bool {
        self.potential.is_none() && self.schedule.sigma() == 0.0
    }
}

/// The potential part of [`Full`], for interaction sampling.
struct PotentialOnly<'a>(&'a Full);

impl PositionTerm for PotentialOnly<'_> {
    fn fill(&self, t: f64, out: &mut [f64]) {
        for (o, &x) in out.iter_mut().zip(&self.0.x) {
            *o = self.0.potential.map_or(0.0, |v| v.evaluate(t, x));
        }
    }

    fn is_zero(&self) -> bool {
        self.0.potential.is_none()
    }
}

/// Integrates `i d/dt psi = [p^2/2 + k(t) x^2/2 + V(t, x)] psi` (unit mass).
pub fn evolve_full(
    state: &FullState,
    t_from: f64,
    t_to: f64,
    schedule: &CoefficientSchedule,
    potential: Option<&PotentialSpec>,
    control: &StepControl,
) -> Result<FullState> {
    if (state.t - t_from).abs() > 1e-12 * t_from.abs().max(1.0) {
        return Err(invalid("t_from", format!("state is at t = {}, not {t_from}", state.t)));
    }
    if !(t_from >= 0.0 && t_from <= t_to && t_to.is_finite()) {
        return Err(invalid("t_to", format!("need 0 <= t_from <= t_to, got {t_from}, {t_to}")));
    }
    if !(control.dt.is_finite() && control.dt > 0.0 && control.tol > 0.0) {
        return Err(invalid("control", "dt and tol must be positive"));
    }
    if schedule.mass() != 1.0 {
        return Err(invalid("schedule", "the split-step solver assumes unit mass"));
    }
    check_state(&state.grid, &state.values)?;
    if t_to == t_from {
        return Ok(state.clone());
    }
    let grid = state.grid;
    let term = Full {
        schedule: *schedule,
        potential: potential.copied(),
        x: grid.positions(),
    };
    let view = PotentialOnly(&term);
    let recorder: Option<&dyn PositionTerm> = if control.record_interaction {
        Some(&view)
    } else {
        None
    };
    let limit = (grid.half_width() / 3.0).powi(2);
    let mut guard = |t: f64, spread: f64| {
        if spread > limit {
            Err(Error::DomainEscape {
                t,
                spread: spread.sqrt(),
                limit: limit.sqrt(),
            })
        } else {
            Ok(())
        }
    };
    let w = state.values.clone();
    let mut splitter = Splitter::new(grid);
    let (out, taken, _) = refine(
        &mut splitter,
        &w,
        t_from,
        t_to,
        control.dt,
        control.tol,
        control.max_refinements,
        &term,
        recorder,
        &mut guard,
    )?;
    let values = out.values;
    let mut interaction = state.interaction.clone();
    interaction.extend(out.interaction);
    Ok(FullState {
        grid,
        values,
        t: t_to,
        norm_drift: state.norm_drift + out.norm_drift,
        steps_taken: state.steps_taken + taken,
        interaction,
    })
}
