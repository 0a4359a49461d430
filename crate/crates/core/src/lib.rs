//! Numerical laboratory for wave operators of a critically time-decaying
//! harmonic oscillator perturbed by log-power potentials
//! `V ~ (1+|x|)^-2 (log(1+|x|))^kappa`.
//!
//! The crate is split the same way the computation is:
//!
//! * [`model`]: coefficient schedules, potentials, grids, packets, cutoffs.
//! * [`classical`]: the classical equation `zeta'' + k(t)/m zeta = 0`.
//! * [`spectral`]: gauge multiplication, dilation, Fourier transform and the
//!   factorised free propagator.
//! * [`evolution`]: split-step solvers for the reduced and the original
//!   dynamics.
//! * [`scattering`]: Cauchy differences, Cook integrands, the divergence
//!   witness and the kappa sweep.

pub mod classical;
pub mod error;
pub mod evolution;
mod fourier;
pub mod model;
mod ode;
pub mod quadrature;
pub mod scattering;
pub mod spectral;

pub use error::{Error, Result};
pub use rustfft::num_complex::Complex64;
