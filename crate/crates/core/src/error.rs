use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("annulus is empty: 2*eps = {inner} must be below R = {outer}")]
    AnnulusEmpty { inner: f64, outer: f64 },

    #[error("annulus outer radius {outer} exceeds the usable band {limit} of the grid")]
    AnnulusTooWide { outer: f64, limit: f64 },

    #[error("adaptive step size underflowed at t = {t} (h = {h:e})")]
    ToleranceNotMet { t: f64, h: f64 },

    #[error("fit window ({lo}, {hi}) is too narrow: {reason}")]
    WindowTooNarrow { lo: f64, hi: f64, reason: String },

    #[error("gauge multiplication needs a nonzero time")]
    ZeroTime,

    #[error("dilation by {scale} pushes {lost:e} of the norm outside the grid")]
    ScaleOverflow { scale: f64, lost: f64 },

    #[error("truncated map is undefined at t = 1 (log t = 0)")]
    DegenerateTime,

    #[error("step refinement did not reach tolerance {tol:e} (last difference {diff:e} at dtau = {dtau:e})")]
    StepUnderflow { tol: f64, diff: f64, dtau: f64 },

    #[error("momentum mass {mass:e} within 5% of the Nyquist limit at tau = {tau}")]
    AliasingDetected { tau: f64, mass: f64 },

    #[error("position spread {spread} left the trusted domain (limit {limit}) at t = {t}")]
    DomainEscape { t: f64, spread: f64, limit: f64 },

    #[error("integral of tau^(theta-2) diverges for theta = {theta} >= 1")]
    DivergentIntegral { theta: f64 },

    #[error("divergence witness needs a long-range potential, got kappa = {kappa} < 1")]
    ShortRangeInput { kappa: f64 },

    #[error("state dump: {0}")]
    Dump(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
