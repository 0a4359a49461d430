use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Radius beyond which the realised profile is checked against the
/// `(1+|x|)^-2 (log(1+|x|))^kappa` envelope.
pub const X_FAR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeClass {
    /// `kappa < 1`
    Short,
    /// `kappa >= 1`
    Long,
}

/// Bounded time factor multiplying the spatial profile.
///
/// The realised factor is `1 + (high/low - 1) * h(t)` with `h` in `[0, 1]`,
/// so the sandwich constants stay `amplitude_low` and `amplitude_high`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TimeModulation {
    #[default]
    Constant,
    /// `h(t) = (1 + cos(frequency * log|t|)) / 2` for `|t| >= 1`, `1` inside.
    LogPeriodic { frequency: f64 },
}

/// A potential `V(t, x) = sign * C(t) * profile(x)` of log power `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSpec {
    kappa: f64,
    amplitude_low: f64,
    amplitude_high: f64,
    sign: f64,
    modulation: TimeModulation,
}

impl PotentialSpec {
    /// Repulsive, unmodulated potential with `C = C~ = amplitude`.
    pub fn new(kappa: f64, amplitude: f64) -> Result<Self> {
        Self::with_bounds(kappa, amplitude, amplitude)
    }

    pub fn with_bounds(kappa: f64, low: f64, high: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(invalid("kappa", format!("must be >= 0, got {kappa}")));
        }
        if !(low.is_finite() && low > 0.0) {
            return Err(invalid(
                "amplitude_low",
                format!("must be positive, got {low}"),
            ));
        }
        if !(high.is_finite() && high >= low) {
            return Err(invalid(
                "amplitude_high",
                format!("must be finite and >= amplitude_low = {low}, got {high}"),
            ));
        }
        Ok(Self {
            kappa,
            amplitude_low: low,
            amplitude_high: high,
            sign: 1.0,
            modulation: TimeModulation::Constant,
        })
    }

    /// `+1` for `V >= 0`, `-1` for the negated family.
    pub fn with_sign(mut self, sign: i8) -> Result<Self> {
        self.sign = match sign {
            1 => 1.0,
            -1 => -1.0,
            other => return Err(invalid("sign", format!("must be +1 or -1, got {other}"))),
        };
        Ok(self)
    }

    pub fn with_modulation(mut self, modulation: TimeModulation) -> Result<Self> {
        if let TimeModulation::LogPeriodic { frequency } = modulation {
            if !frequency.is_finite() {
                return Err(invalid("frequency", "must be finite"));
            }
        }
        self.modulation = modulation;
        Ok(self)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn amplitude_low(&self) -> f64 {
        self.amplitude_low
    }

    pub fn amplitude_high(&self) -> f64 {
        self.amplitude_high
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn modulation(&self) -> TimeModulation {
        self.modulation
    }

    pub fn range_class(&self) -> RangeClass {
        if self.kappa < 1.0 {
            RangeClass::Short
        } else {
            RangeClass::Long
        }
    }

    /// Smooth global profile
    /// `(1 + x^2)^-1 * (log(e^2 + x^2) / 2)^kappa`, equal to 1 at the origin.
    pub fn profile(&self, x: f64) -> f64 {
        profile(self.kappa, x * x)
    }

    /// Reference envelope `(1+|x|)^-2 (log(1+|x|))^kappa`.
    pub fn envelope(&self, x: f64) -> f64 {
        let a = x.abs();
        (1.0 + a).powi(-2) * (1.0 + a).ln().powf(self.kappa)
    }

    /// Realised amplitude `C(t)`, between `amplitude_low` and `amplitude_high`.
    pub fn amplitude(&self, t: f64) -> f64 {
        let h = match self.modulation {
            TimeModulation::Constant => 0.0,
            TimeModulation::LogPeriodic { frequency } => {
                let at = t.abs();
                if at < 1.0 {
                    1.0
                } else {
                    0.5 * (1.0 + (frequency * at.ln()).cos())
                }
            }
        };
        self.amplitude_low * (1.0 + (self.amplitude_high / self.amplitude_low - 1.0) * h)
    }

    /// `V(t, x)`.
    pub fn evaluate(&self, t: f64, x: f64) -> f64 {
        self.sign * self.amplitude(t) * self.profile(x)
    }

    /// `V(t, x)` given `x^2`; avoids squaring large scaled coordinates twice.
    pub(crate) fn evaluate_sq(&self, t: f64, x2: f64) -> f64 {
        self.sign * self.amplitude(t) * profile(self.kappa, x2)
    }

    /// `sup_x profile(x)`.
    pub fn profile_sup(&self) -> f64 {
        profile_sup(self.kappa)
    }

    /// A finite bound on `sup_{t,x} |V|`.
    pub fn sup_abs(&self) -> f64 {
        self.amplitude_high * self.profile_sup()
    }
}

pub(crate) fn profile(kappa: f64, x2: f64) -> f64 {
    const E2: f64 = std::f64::consts::E * std::f64::consts::E;
    let log_part = 0.5 * (E2 + x2).ln();
    log_part.powf(kappa) / (1.0 + x2)
}

fn profile_sup(kappa: f64) -> f64 {
    // Scan u = x^2 on a log grid, then refine the best bracket by golden section.
    let f = |u: f64| profile(kappa, u);
    let mut best = f(0.0);
    let samples: Vec<f64> = (0..=400).map(|i| 10f64.powf(-6.0 + 0.05 * i as f64)).collect();
    let mut best_i = None;
    for (i, &u) in samples.iter().enumerate() {
        let v = f(u);
        if v > best {
            best = v;
            best_i = Some(i);
        }
    }
    if let Some(i) = best_i {
        let lo = if i == 0 { 0.0 } else { samples[i - 1] };
        let hi = samples[(i + 1).min(samples.len() - 1)];
        let (mut a, mut b) = (lo, hi);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let u = 0.5 * (a + b);
        if f(u) > best {
            best = f(u);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalised_at_origin() {
        for kappa in [0.0, 0.5, 1.0, 1.5, 3.0] {
            let v = PotentialSpec::new(kappa, 1.0).unwrap();
            assert!((v.evaluate(3.0, 0.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn envelope_ratio_far_out() {
        let v = PotentialSpec::new(1.0, 1.0).unwrap();
        for x in [1e3, 1e4, 1e6, 1e8] {
            let ratio = v.evaluate(0.0, x) * (1.0 + x).powi(2) / (1.0 + x).ln();
            assert!((ratio - 1.0).abs() < 0.05, "x = {x}: {ratio}");
        }
    }

    #[test]
    fn range_class_split_at_one() {
        assert_eq!(PotentialSpec::new(0.999, 1.0).unwrap().range_class(), RangeClass::Short);
        assert_eq!(PotentialSpec::new(1.0, 1.0).unwrap().range_class(), RangeClass::Long);
        assert_eq!(PotentialSpec::new(0.0, 1.0).unwrap().range_class(), RangeClass::Short);
    }

    #[test]
    fn validation() {
        assert!(PotentialSpec::with_bounds(1.0, 2.0, 1.0).is_err());
        assert!(PotentialSpec::with_bounds(1.0, 0.0, 1.0).is_err());
        assert!(PotentialSpec::new(-0.1, 1.0).is_err());
        assert!(PotentialSpec::new(1.0, 1.0).unwrap().with_sign(0).is_err());
    }

    #[test]
    fn sup_is_attained_somewhere() {
        for kappa in [0.0, 1.0, 5.0, 20.0] {
            let v = PotentialSpec::new(kappa, 1.0).unwrap();
            let sup = v.profile_sup();
            let scan = (0..20000)
                .map(|i| v.profile(10f64.powf(-3.0 + i as f64 * 5e-4)))
                .fold(0.0f64, f64::max);
            assert!(sup >= scan * (1.0 - 1e-9), "kappa {kappa}: {sup} < {scan}");
            assert!(sup <= scan * 1.01 + 1e-12);
        }
    }

    #[test]
    fn modulation_stays_between_constants() {
        let v = PotentialSpec::with_bounds(1.2, 0.5, 0.8)
            .unwrap()
            .with_modulation(TimeModulation::LogPeriodic { frequency: 2.0 })
            .unwrap();
        for i in 0..500 {
            let t = 1.0 + i as f64 * 0.37;
            let c = v.amplitude(t);
            assert!((0.5..=0.8 + 1e-15).contains(&c));
        }
    }

    proptest! {
        #[test]
        fn sandwich_beyond_x_far(kappa in 0.0f64..3.0, low in 0.1f64..2.0, spread in 1.0f64..3.0,
                                 lx in 3.0f64..8.0, sign in prop::bool::ANY) {
            let high = low * spread;
            let v = PotentialSpec::with_bounds(kappa, low, high).unwrap()
                .with_sign(if sign { 1 } else { -1 }).unwrap()
                .with_modulation(TimeModulation::LogPeriodic { frequency: 1.3 }).unwrap();
            let x = 10f64.powf(lx);
            for t in [1.0, 7.5, 1e4] {
                let ratio = v.evaluate(t, x).abs() / v.envelope(x);
                prop_assert!(ratio >= 0.5 * low && ratio <= 2.0 * high, "ratio {}", ratio);
                prop_assert!(v.evaluate(t, x).abs() <= v.sup_abs() * (1.0 + 1e-12));
            }
        }
    }
}
