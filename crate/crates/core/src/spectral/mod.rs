//! Fourier-side operator algebra: gauge multiplication `M(t)`, dilation
//! `D(t)`, the transform `F`, the exact reduced free propagator and the
//! factorised forms `M D F M` and `U(t) = M(log t) D(log t) F`.

mod dump;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use dump::{read_state, write_state, Precision};

use crate::error::{invalid, Error, Result};
use crate::fourier::{self, cis_cycles};
use crate::model::{CutoffFunction, GridSpec, WavePacket};
use crate::Complex64;

/// Relative mass a dilation may push off the grid before it is refused.
pub const DILATION_LOSS_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Position,
    Momentum,
}

/// Grid samples of a state together with the variable they are sampled in.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    grid: GridSpec,
    values: Vec<Complex64>,
    side: Side,
}

impl SpectralState {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, side: Side) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(invalid(
                "values",
                format!("expected {} samples, got {}", grid.points(), values.len()),
            ));
        }
        Ok(Self { grid, values, side })
    }

    pub fn position(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        Self::new(grid, values, Side::Position)
    }

    pub fn momentum(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        Self::new(grid, values, Side::Momentum)
    }

    pub fn from_packet(phi: &WavePacket) -> Self {
        Self {
            grid: *phi.grid(),
            values: phi.values().to_vec(),
            side: Side::Position,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn side(&self) -> Side {
        self.side
    }

    fn weight(&self) -> f64 {
        match self.side {
            Side::Position => self.grid.spacing(),
            Side::Momentum => self.grid.momentum_spacing(),
        }
    }

    fn coordinate(&self, j: usize) -> f64 {
        match self.side {
            Side::Position => self.grid.position(j),
            Side::Momentum => self.grid.momentum(j),
        }
    }

    pub fn norm(&self) -> f64 {
        fourier::mass(&self.values, self.weight()).sqrt()
    }

    /// `int y^power |u(y)|^2 dy` in the state's own variable.
    pub fn moment(&self, power: i32) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(j, v)| self.coordinate(j).powi(power) * v.norm_sqr())
            .sum::<f64>()
            * self.weight()
    }

    /// L2 distance to a state sampled on the same grid and side.
    pub fn distance(&self, other: &SpectralState) -> Result<f64> {
        if self.grid != other.grid || self.side != other.side {
            return Err(invalid("other", "states live on different grids or sides"));
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((sum * self.weight()).sqrt())
    }

    pub fn to_position(&self) -> SpectralState {
        match self.side {
            Side::Position => self.clone(),
            Side::Momentum => fourier_transform(self),
        }
    }

    pub fn to_momentum(&self) -> SpectralState {
        match self.side {
            Side::Momentum => self.clone(),
            Side::Position => fourier_transform(self),
        }
    }
}

fn require_position(state: &SpectralState) -> Result<()> {
    match state.side {
        Side::Position => Ok(()),
        Side::Momentum => Err(invalid("state", "expected a position-space state")),
    }
}

/// Multiplies by `exp(sign * i x^2 / (2t))`.
pub fn gauge_multiply(state: &SpectralState, t: f64, sign: i8) -> Result<SpectralState> {
    if t == 0.0 {
        return Err(Error::ZeroTime);
    }
    if !t.is_finite() {
        return Err(invalid("t", "must be finite"));
    }
    if sign != 1 && sign != -1 {
        return Err(invalid("sign", format!("must be +1 or -1, got {sign}")));
    }
    require_position(state)?;
    let mut out = state.clone();
    apply_gauge(&mut out.values, &state.grid, t, f64::from(sign));
    Ok(out)
}

fn apply_gauge(values: &mut [Complex64], grid: &GridSpec, t: f64, sign: f64) {
    let n = values.len() as i64;
    let dx = grid.spacing();
    // x^2 / (2t) radians = (j - N/2)^2 dx^2 / (4 pi t) cycles.
    let c = sign * dx * dx / (4.0 * PI * t);
    for (j, v) in values.iter_mut().enumerate() {
        let m = j as i64 - n / 2;
        *v *= cis_cycles(c * (m * m) as f64);
    }
}

/// Unitary transform: position samples to momentum samples and back.
pub fn fourier_transform(state: &SpectralState) -> SpectralState {
    let (values, side) = match state.side {
        Side::Position => (
            fourier::to_momentum(&state.values, state.grid.spacing()),
            Side::Momentum,
        ),
        Side::Momentum => (
            fourier::to_position(&state.values, state.grid.momentum_spacing()),
            Side::Position,
        ),
    };
    SpectralState {
        grid: state.grid,
        values,
        side,
    }
}

/// `(i t)^(-1/2)` on the principal branch, `t > 0`.
fn dilation_prefactor(t: f64) -> Complex64 {
    Complex64::from_polar(t.sqrt().recip(), -0.25 * PI)
}

/// `(D(t) u)(x) = (i t)^(-1/2) u(x / t)`, returned on the position grid.
///
/// A position-side input is resampled at `x_j / t` by band-limited
/// interpolation.  A momentum-side input `v(xi)` is read as a function of
/// the position variable, which is how `D` acts after `F` in the factorised
/// propagator.  Both evaluations are single chirp sums.
pub fn dilate(state: &SpectralState, t: f64) -> Result<SpectralState> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid("t", format!("dilation scale must be positive, got {t}")));
    }
    let grid = state.grid;
    let n = grid.points();
    let dx = grid.spacing();
    let dxi = grid.momentum_spacing();
    let pre = dilation_prefactor(t);
    let total = fourier::mass(&state.values, state.weight());

    let (values, lost) = match state.side {
        Side::Position => {
            let spec = fourier::to_momentum(&state.values, dx);
            // Mass beyond |x| = L / t is pushed out of the box; momenta beyond
            // t * nyquist would alias after compression.
            let out_x = outside(&state.values, |j| grid.position(j).abs() >= grid.half_width() / t) * dx;
            let out_k = outside(&spec, |k| grid.momentum(k).abs() >= t * grid.nyquist()) * dxi;
            let scale = pre * (dxi / (2.0 * PI).sqrt());
            // The chirp sum is periodic in x / t; u vanishes outside the box.
            let vals = fourier::chirp_sum(&spec, 1.0 / (n as f64 * t))
                .into_iter()
                .enumerate()
                .map(|(j, v)| {
                    if grid.position(j).abs() / t >= grid.half_width() {
                        Complex64::new(0.0, 0.0)
                    } else {
                        v * scale
                    }
                })
                .collect();
            (vals, out_x + out_k)
        }
        Side::Momentum => {
            let pos = fourier::to_position(&state.values, dxi);
            // The output samples v(x_j / t) only cover |xi| < L / t, and the
            // result oscillates with frequencies up to (position extent) / t.
            let out_k = outside(&state.values, |k| grid.momentum(k).abs() >= grid.half_width() / t) * dxi;
            let out_x = outside(&pos, |j| grid.position(j).abs() >= t * grid.nyquist()) * dx;
            let scale = pre * (dx / (2.0 * PI).sqrt());
            // Periodic in x / t with period 2 nyquist; v is band-limited.
            let vals = fourier::chirp_sum(&pos, -dx * dx / (2.0 * PI * t))
                .into_iter()
                .enumerate()
                .map(|(j, v)| {
                    if grid.position(j).abs() / t >= grid.nyquist() {
                        Complex64::new(0.0, 0.0)
                    } else {
                        v * scale
                    }
                })
                .collect();
            (vals, out_x + out_k)
        }
    };
    if total > 0.0 && lost > DILATION_LOSS_LIMIT * total {
        return Err(Error::ScaleOverflow {
            scale: t,
            lost: lost / total,
        });
    }
    Ok(SpectralState {
        grid,
        values,
        side: Side::Position,
    })
}

fn outside(values: &[Complex64], pred: impl Fn(usize) -> bool) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|(j, _)| pred(*j))
        .map(|(_, v)| v.norm_sqr())
        .sum()
}

/// `exp(-i tau p^2 / 2)`, applied as the diagonal phase in Fourier space.
/// The output is on the same side as the input.
pub fn free_reduced_propagate(state: &SpectralState, tau: f64) -> Result<SpectralState> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid("tau", format!("must be finite and >= 0, got {tau}")));
    }
    if tau == 0.0 {
        return Ok(state.clone());
    }
    let mut spec = state.to_momentum();
    kinetic_phase(&mut spec.values, &spec.grid, tau);
    Ok(match state.side {
        Side::Momentum => spec,
        Side::Position => fourier_transform(&spec),
    })
}

/// Multiplies centered momentum samples by `exp(-i tau xi^2 / 2)`.
pub(crate) fn kinetic_phase(values: &mut [Complex64], grid: &GridSpec, tau: f64) {
    let n = values.len() as i64;
    let dxi = grid.momentum_spacing();
    let c = -tau * dxi * dxi / (4.0 * PI);
    for (k, v) in values.iter_mut().enumerate() {
        let m = k as i64 - n / 2;
        *v *= cis_cycles(c * (m * m) as f64);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MdfmMode {
    /// `M D F M`, equal to `exp(-i tau p^2 / 2)`.
    Full,
    /// `U = M D F`, without the trailing gauge factor.
    Truncated,
}

/// Factorised free propagator at `t = e^tau`.
pub fn mdfm_apply(phi: &WavePacket, t: f64, mode: MdfmMode) -> Result<SpectralState> {
    if !(t.is_finite() && t >= 1.0) {
        return Err(invalid("t", format!("must be >= 1, got {t}")));
    }
    mdfm_apply_log(phi, t.ln(), mode)
}

/// [`mdfm_apply`] parametrised by `tau = log t`.
pub fn mdfm_apply_log(phi: &WavePacket, tau: f64, mode: MdfmMode) -> Result<SpectralState> {
    mdfm_state(&SpectralState::from_packet(phi), tau, mode)
}

/// [`mdfm_apply_log`] on an arbitrary position-space state.
pub fn mdfm_state(state: &SpectralState, tau: f64, mode: MdfmMode) -> Result<SpectralState> {
    require_position(state)?;
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid("tau", format!("must be finite and >= 0, got {tau}")));
    }
    if tau == 0.0 {
        return match mode {
            MdfmMode::Full => Ok(state.clone()),
            MdfmMode::Truncated => Err(Error::DegenerateTime),
        };
    }
    let mut u = state.clone();
    if mode == MdfmMode::Full {
        apply_gauge(&mut u.values, &u.grid, tau, 1.0);
    }
    let mut out = dilate(&fourier_transform(&u), tau)?;
    apply_gauge(&mut out.values, &out.grid, tau, 1.0);
    Ok(out)
}

/// `|| (1 - chi_eps(x / log t)) u ||`.
pub fn mass_below_cutoff(state: &SpectralState, t: f64, eps: f64) -> Result<f64> {
    if !(t.is_finite() && t >= std::f64::consts::E * (1.0 - 1e-15)) {
        return Err(invalid("t", format!("must be >= e, got {t}")));
    }
    require_position(state)?;
    let chi = CutoffFunction::new(eps)?;
    let tau = t.ln();
    let grid = state.grid;
    let sum: f64 = state
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| (1.0 - chi.value(grid.position(j) / tau)).powi(2) * v.norm_sqr())
        .sum();
    Ok((sum * grid.spacing()).sqrt())
}
