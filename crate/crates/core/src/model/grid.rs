use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Result};

/// Periodic grid on `[-L, L)` with `points` samples per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    dimension: usize,
    half_width: f64,
    points: usize,
}

impl GridSpec {
    /// One-dimensional grid; `points` must be a power of two, at least 16.
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        Self::with_dimension(1, half_width, points)
    }

    pub fn with_dimension(dimension: usize, half_width: f64, points: usize) -> Result<Self> {
        if dimension != 1 {
            return Err(invalid(
                "dimension",
                format!("only one-dimensional grids are supported, got {dimension}"),
            ));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(invalid(
                "half_width",
                format!("must be positive, got {half_width}"),
            ));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(invalid(
                "points",
                format!("must be a power of two >= 16, got {points}"),
            ));
        }
        Ok(Self {
            dimension,
            half_width,
            points,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// `dx = 2L / N`
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// `dxi = pi / L`
    pub fn momentum_spacing(&self) -> f64 {
        PI / self.half_width
    }

    /// `pi / dx`
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    pub fn position(&self, j: usize) -> f64 {
        (j as f64 - (self.points / 2) as f64) * self.spacing()
    }

    pub fn momentum(&self, k: usize) -> f64 {
        (k as f64 - (self.points / 2) as f64) * self.momentum_spacing()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.position(j)).collect()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.momentum(k)).collect()
    }

    /// Same box, twice the points.
    pub fn refined(&self) -> Self {
        Self {
            points: self.points * 2,
            ..*self
        }
    }
}
