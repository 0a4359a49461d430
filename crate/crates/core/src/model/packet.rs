use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::GridSpec;
use crate::error::{invalid, Error, Result};
use crate::fourier;

/// Default bump sharpness.  With the canonical annulus `[1, 4]` the position
/// tails are below 1e-12 beyond |x| ~ 50.
pub const DEFAULT_SHARPNESS: f64 = 10.0;

/// Fraction of the Nyquist momentum a packet's outer radius may use.
pub const NYQUIST_MARGIN: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PacketSide {
    /// Bumps on both `[2 eps, R]` and `[-R, -2 eps]`.
    #[default]
    Both,
    Positive,
    Negative,
}

/// Annular bump `exp(-a / (1 - s^2))` in Fourier space, `s` mapping
/// `[2 eps, R]` onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketShape {
    pub side: PacketSide,
    /// The `a` above; larger values concentrate the bump and shorten the
    /// position-space tails.
    pub sharpness: f64,
    /// Position of the packet centre (a phase `exp(-i xi x0)` in Fourier space).
    pub offset: f64,
}

impl Default for PacketShape {
    fn default() -> Self {
        Self {
            side: PacketSide::Both,
            sharpness: DEFAULT_SHARPNESS,
            offset: 0.0,
        }
    }
}

impl PacketShape {
    pub fn side(side: PacketSide) -> Self {
        Self {
            side,
            ..Self::default()
        }
    }
}

/// Unit-norm state whose Fourier transform is supported in
/// `2 eps <= |xi| <= R`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    eps: f64,
    outer: f64,
    shape: PacketShape,
    grid: GridSpec,
    values: Vec<Complex64>,
    spectrum: Vec<Complex64>,
}

fn bump(s: f64, sharpness: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-sharpness / (1.0 - s * s)).exp()
    }
}

/// Builds the packet in Fourier space and inverts it onto the grid.
pub fn make_packet(eps: f64, outer: f64, grid: GridSpec, shape: PacketShape) -> Result<WavePacket> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid("eps", format!("must be positive, got {eps}")));
    }
    if !(shape.sharpness.is_finite() && shape.sharpness > 0.0) {
        return Err(invalid("sharpness", "must be positive"));
    }
    if !shape.offset.is_finite() || shape.offset.abs() >= 0.5 * grid.half_width() {
        return Err(invalid("offset", "must be finite and inside half the box"));
    }
    if 2.0 * eps >= outer {
        return Err(Error::AnnulusEmpty {
            inner: 2.0 * eps,
            outer,
        });
    }
    let limit = NYQUIST_MARGIN * grid.nyquist();
    if outer > limit {
        return Err(Error::AnnulusTooWide { outer, limit });
    }

    let centre = 0.5 * (2.0 * eps + outer);
    let width = 0.5 * (outer - 2.0 * eps);
    let mut spectrum: Vec<Complex64> = grid
        .momenta()
        .into_iter()
        .map(|xi| {
            let pos = bump((xi - centre) / width, shape.sharpness);
            let neg = bump((xi + centre) / width, shape.sharpness);
            let amp = match shape.side {
                PacketSide::Both => pos + neg,
                PacketSide::Positive => pos,
                PacketSide::Negative => neg,
            };
            Complex64::from_polar(amp, -xi * shape.offset)
        })
        .collect();
    let dxi = grid.momentum_spacing();
    let norm = fourier::mass(&spectrum, dxi).sqrt();
    if norm == 0.0 {
        return Err(invalid("outer", "annulus contains no momentum samples"));
    }
    for v in spectrum.iter_mut() {
        *v /= norm;
    }
    let values = fourier::to_position(&spectrum, dxi);
    Ok(WavePacket {
        eps,
        outer,
        shape,
        grid,
        values,
        spectrum,
    })
}

/// Fixed ten-packet test corpus on `grid`.
///
/// Inner radii 0.25 and 0.5, outer radii 2 to 4, symmetric and one-sided,
/// a few offsets.  Sharpness times the bump half-width is kept near 12 so the
/// position tails fall below 1e-12 within |x| ~ 60.
pub fn packet_corpus(grid: GridSpec) -> Result<Vec<WavePacket>> {
    let specs: [(f64, f64, PacketSide, f64, f64); 10] = [
        (0.5, 4.0, PacketSide::Both, 10.0, 0.0),
        (0.25, 2.0, PacketSide::Both, 16.0, 0.0),
        (0.5, 3.0, PacketSide::Positive, 12.0, 0.0),
        (0.5, 3.0, PacketSide::Negative, 12.0, 0.0),
        (0.25, 4.0, PacketSide::Both, 7.0, 0.0),
        (0.5, 2.5, PacketSide::Positive, 16.0, 2.0),
        (0.25, 3.0, PacketSide::Both, 10.0, -3.0),
        (0.5, 4.0, PacketSide::Negative, 10.0, 1.0),
        (0.25, 2.5, PacketSide::Positive, 12.0, -1.5),
        (0.5, 3.5, PacketSide::Both, 10.0, 0.5),
    ];
    specs
        .iter()
        .map(|&(eps, outer, side, sharpness, offset)| {
            make_packet(
                eps,
                outer,
                grid,
                PacketShape {
                    side,
                    sharpness,
                    offset,
                },
            )
        })
        .collect()
}

impl WavePacket {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Outer Fourier radius `R`.
    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn shape(&self) -> PacketShape {
        self.shape
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Position samples.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Momentum samples in centered order; exactly zero off the annulus.
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn norm(&self) -> f64 {
        fourier::mass(&self.values, self.grid.spacing()).sqrt()
    }

    /// `|| x^power phi ||`.
    pub fn moment_norm(&self, power: i32) -> f64 {
        let dx = self.grid.spacing();
        let sum: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| self.grid.position(j).powi(2 * power) * v.norm_sqr())
            .sum();
        (sum * dx).sqrt()
    }

    /// `x^power * phi` on the grid.
    pub fn weighted(&self, power: i32) -> Vec<Complex64> {
        self.values
            .iter()
            .enumerate()
            .map(|(j, v)| v * self.grid.position(j).powi(power))
            .collect()
    }

    /// `int xi^power |phi^(xi)|^2 dxi`.
    pub fn momentum_moment(&self, power: i32) -> f64 {
        let dxi = self.grid.momentum_spacing();
        self.spectrum
            .iter()
            .enumerate()
            .map(|(k, v)| self.grid.momentum(k).powi(power) * v.norm_sqr())
            .sum::<f64>()
            * dxi
    }
}
