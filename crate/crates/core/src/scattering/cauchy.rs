use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::evolution::{evolve_reduced, EvolutionState, ReducedEvolverConfig};
use crate::model::{GridSpec, PacketShape, PotentialSpec, WavePacket};
use crate::spectral::{free_reduced_propagate, mdfm_apply_log, MdfmMode, SpectralState};

/// Everything that determines one reduced run from `tau_seed` to
/// `tau_stop`; the cache key for [`CheckpointStore`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunKey {
    pub potential: Option<PotentialSpec>,
    pub grid: GridSpec,
    pub dtau: f64,
    pub tol: f64,
    pub max_refinements: u32,
    pub aliasing_limit: f64,
    pub eps: f64,
    pub outer: f64,
    pub shape: PacketShape,
    pub tau_seed: f64,
    pub tau_stop: f64,
}

impl RunKey {
    fn new(phi: &WavePacket, config: &ReducedEvolverConfig, seed: f64, stop: f64) -> Self {
        Self {
            potential: config.potential,
            grid: config.grid,
            dtau: config.dtau,
            tol: config.tol,
            max_refinements: config.max_refinements,
            aliasing_limit: config.aliasing_limit,
            eps: phi.eps(),
            outer: phi.outer(),
            shape: phi.shape(),
            tau_seed: seed,
            tau_stop: stop,
        }
    }
}

/// `U_S(e^stop, e^seed) U(e^seed) phi` and its bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredRun {
    pub state: SpectralState,
    pub splitting_error: f64,
    pub norm_drift: f64,
    pub steps_taken: u64,
}

/// Persistence for evolved checkpoints.  Implementations must hand back
/// exactly what was saved.
pub trait CheckpointStore: Sync {
    fn load(&self, key: &RunKey) -> Option<StoredRun>;
    fn save(&self, key: &RunKey, run: &StoredRun) -> Result<()>;
}

/// Stores nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoStore;

impl CheckpointStore for NoStore {
    fn load(&self, _: &RunKey) -> Option<StoredRun> {
        None
    }

    fn save(&self, _: &RunKey, _: &StoredRun) -> Result<()> {
        Ok(())
    }
}

/// One entry `d(tau1, tau2)` of the Cauchy matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyEntry {
    pub tau1: f64,
    pub tau2: f64,
    pub value: f64,
    /// `|| U_S(t2, t1) U(t1) phi - exp(-i (tau2 - tau1) p^2 / 2) U(t1) phi ||`:
    /// the same run against the free reduced flow, free of the truncation
    /// tail that dominates `value` on the free part.
    pub interaction: f64,
    /// Accumulated step-halving difference of the run behind `value`.
    pub splitting_error: f64,
    pub norm_drift: f64,
}

fn check_range(tau1: f64, tau2: f64, config: &ReducedEvolverConfig) -> Result<()> {
    if !(tau1 >= 1.0 && tau1 <= tau2 && tau2 <= config.tau_max) {
        return Err(invalid(
            "tau",
            format!("need 1 <= tau1 <= tau2 <= {}, got {tau1}, {tau2}", config.tau_max),
        ));
    }
    Ok(())
}

/// `|| U(e^tau2) phi - U_S(e^tau2, e^tau1) U(e^tau1) phi ||`, which equals
/// `|| W(t2) phi - W(t1) phi ||` by unitarity of `U_S`.
pub fn cauchy_difference(
    phi: &WavePacket,
    tau1: f64,
    tau2: f64,
    config: &ReducedEvolverConfig,
) -> Result<f64> {
    check_range(tau1, tau2, config)?;
    if tau1 == tau2 {
        return Ok(0.0);
    }
    Ok(cauchy_row(phi, tau1, &[tau2], config, &NoStore)?[0].value)
}

/// `d(seed, s)` for every `s` in `stops` (increasing), from one forward run.
pub fn cauchy_row(
    phi: &WavePacket,
    seed: f64,
    stops: &[f64],
    config: &ReducedEvolverConfig,
    store: &dyn CheckpointStore,
) -> Result<Vec<CauchyEntry>> {
    if let Some(&last) = stops.last() {
        check_range(seed, last, config)?;
    }
    if stops.windows(2).any(|w| w[0] >= w[1]) || stops.first().is_some_and(|&s| s <= seed) {
        return Err(invalid("stops", "must be increasing and beyond the seed"));
    }
    let seeded = mdfm_apply_log(phi, seed, MdfmMode::Truncated)?;
    let mut current: Option<EvolutionState> = None;
    let mut from = seed;
    let mut out = Vec::with_capacity(stops.len());
    for &stop in stops {
        let key = RunKey::new(phi, config, seed, stop);
        let run = match store.load(&key) {
            Some(run) => run,
            None => {
                let start = match current.take() {
                    Some(s) => s,
                    None => EvolutionState::new(&seeded, seed)?,
                };
                let next = evolve_reduced(&start, from, stop, config)?;
                let run = StoredRun {
                    state: next.to_spectral(),
                    splitting_error: next.splitting_error,
                    norm_drift: next.norm_drift,
                    steps_taken: next.steps_taken,
                };
                store.save(&key, &run)?;
                run
            }
        };
        let mut state = EvolutionState::new(&run.state, stop)?;
        state.splitting_error = run.splitting_error;
        state.norm_drift = run.norm_drift;
        state.steps_taken = run.steps_taken;
        let target = mdfm_apply_log(phi, stop, MdfmMode::Truncated)?;
        let free = free_reduced_propagate(&seeded, stop - seed)?;
        out.push(CauchyEntry {
            tau1: seed,
            tau2: stop,
            value: run.state.distance(&target)?,
            interaction: run.state.distance(&free)?,
            splitting_error: run.splitting_error,
            norm_drift: run.norm_drift,
        });
        current = Some(state);
        from = stop;
    }
    Ok(out)
}

/// All `d(tau_i, tau_j)`, `i < j`, in row-major order.  Rows are independent
/// and may run concurrently; the order of the result does not depend on it.
pub fn cauchy_matrix(
    phi: &WavePacket,
    checkpoints: &[f64],
    config: &ReducedEvolverConfig,
    store: &dyn CheckpointStore,
) -> Result<Vec<CauchyEntry>> {
    use rayon::prelude::*;
    let rows: Vec<Result<Vec<CauchyEntry>>> = (0..checkpoints.len().saturating_sub(1))
        .into_par_iter()
        .map(|i| cauchy_row(phi, checkpoints[i], &checkpoints[i + 1..], config, store))
        .collect();
    let mut out = Vec::new();
    for row in rows {
        out.extend(row?);
    }
    Ok(out)
}
