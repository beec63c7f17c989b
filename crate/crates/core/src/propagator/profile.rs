use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::PropagateError;
use crate::theta::{self, ThetaSpec};

/// Period of the Paul drive in dimensionless time.
pub const PAUL_PERIOD: f64 = TAU;

/// A constant-β stretch of a piecewise profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Segment {
    pub duration: f64,
    pub beta: f64,
}

impl Segment {
    pub const fn new(duration: f64, beta: f64) -> Self {
        Segment { duration, beta }
    }
}

impl From<[f64; 2]> for Segment {
    fn from(a: [f64; 2]) -> Self {
        Segment { duration: a[0], beta: a[1] }
    }
}

impl From<Segment> for [f64; 2] {
    fn from(s: Segment) -> Self {
        [s.duration, s.beta]
    }
}

/// Linearly interpolated β samples, optionally declared periodic.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledProfile {
    tau: Vec<f64>,
    beta: Vec<f64>,
    period: Option<f64>,
}

impl SampledProfile {
    pub fn new(tau: Vec<f64>, beta: Vec<f64>, period: Option<f64>) -> Result<Self, PropagateError> {
        let bad = |m: &str| Err(PropagateError::InvalidProfile(m.to_string()));
        if tau.len() < 2 {
            return bad("sampled profile needs at least two points");
        }
        if tau.len() != beta.len() {
            return bad("sampled profile: tau and beta lengths differ");
        }
        if tau.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("sampled profile: tau grid must be strictly increasing");
        }
        if tau.iter().chain(beta.iter()).any(|x| !x.is_finite()) {
            return bad("sampled profile: non-finite sample");
        }
        if let Some(p) = period {
            let span = tau[tau.len() - 1] - tau[0];
            if !(p > 0.0) || span < p * (1.0 - 1e-12) {
                return bad("sampled profile: declared period must be positive and covered by the grid");
            }
        }
        Ok(SampledProfile { tau, beta, period })
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    fn wrap(&self, t: f64) -> f64 {
        match self.period {
            Some(p) => self.tau[0] + (t - self.tau[0]).rem_euclid(p),
            None => t,
        }
    }

    fn eval(&self, t: f64) -> Result<f64, PropagateError> {
        let t = self.wrap(t);
        let (lo, hi) = (self.tau[0], self.tau[self.tau.len() - 1]);
        if !(t >= lo && t <= hi) {
            return Err(PropagateError::OutOfDomain { tau: t, lo, hi });
        }
        let i = match self.tau.partition_point(|&x| x <= t) {
            0 => 0,
            n if n >= self.tau.len() => self.tau.len() - 2,
            n => n - 1,
        };
        let w = (t - self.tau[i]) / (self.tau[i + 1] - self.tau[i]);
        Ok(self.beta[i] + w * (self.beta[i + 1] - self.beta[i]))
    }
}

/// The elastic force β(τ) driving `dq/dτ = p`, `dp/dτ = -β(τ) q`.
#[derive(Clone, Debug)]
pub enum BetaProfile {
    Constant {
        beta: f64,
    },
    /// `β(τ) = β₀ + 2β₁ cos τ`, period 2π.
    Paul {
        beta0: f64,
        beta1: f64,
    },
    /// Consecutive constant stretches starting at τ = 0, repeated with
    /// period equal to the total duration.
    PiecewiseConstant {
        segments: Vec<Segment>,
    },
    Sampled(SampledProfile),
    /// The even β(τ) generated by a designed θ(τ) on `[-T, T]`.
    FromTheta(ThetaSpec),
}

impl BetaProfile {
    pub fn paul(beta0: f64, beta1: f64) -> Self {
        BetaProfile::Paul { beta0, beta1 }
    }

    pub fn constant(beta: f64) -> Self {
        BetaProfile::Constant { beta }
    }

    pub fn piecewise(segments: Vec<Segment>) -> Result<Self, PropagateError> {
        if segments.is_empty() {
            return Err(PropagateError::InvalidProfile("piecewise profile has no segments".into()));
        }
        if segments.iter().any(|s| !(s.duration > 0.0) || !s.duration.is_finite() || !s.beta.is_finite()) {
            return Err(PropagateError::InvalidProfile(
                "piecewise segments need finite positive durations and finite beta".into(),
            ));
        }
        Ok(BetaProfile::PiecewiseConstant { segments })
    }

    /// Natural period, if the profile has one.
    pub fn period(&self) -> Option<f64> {
        match self {
            BetaProfile::Constant { .. } => None,
            BetaProfile::Paul { .. } => Some(PAUL_PERIOD),
            BetaProfile::PiecewiseConstant { segments } => Some(segments.iter().map(|s| s.duration).sum()),
            BetaProfile::Sampled(s) => s.period(),
            BetaProfile::FromTheta(_) => None,
        }
    }

    pub fn eval(&self, tau: f64) -> Result<f64, PropagateError> {
        match self {
            BetaProfile::Constant { beta } => Ok(*beta),
            BetaProfile::Paul { beta0, beta1 } => Ok(beta0 + 2.0 * beta1 * tau.cos()),
            BetaProfile::PiecewiseConstant { segments } => {
                let period: f64 = segments.iter().map(|s| s.duration).sum();
                let mut t = tau.rem_euclid(period);
                for s in segments {
                    if t < s.duration {
                        return Ok(s.beta);
                    }
                    t -= s.duration;
                }
                Ok(segments[segments.len() - 1].beta)
            }
            BetaProfile::Sampled(s) => s.eval(tau),
            BetaProfile::FromTheta(spec) => {
                let t = tau.abs();
                if t > spec.half_width() * (1.0 + 1e-12) {
                    return Err(PropagateError::OutOfDomain { tau, lo: -spec.half_width(), hi: spec.half_width() });
                }
                theta::beta_from_theta(spec, t.min(spec.half_width())).map_err(PropagateError::Theta)
            }
        }
    }

    /// Times in the open interval `(a, b)` where β is not smooth.
    pub(crate) fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut push_periodic = |offsets: &[f64], base: f64, period: Option<f64>| match period {
            Some(p) => {
                let first = ((a - base) / p).floor() as i64;
                let last = ((b - base) / p).ceil() as i64;
                for n in first..=last {
                    for &o in offsets {
                        let t = base + n as f64 * p + o;
                        if t > a && t < b {
                            out.push(t);
                        }
                    }
                }
            }
            None => out.extend(offsets.iter().map(|o| base + o).filter(|&t| t > a && t < b)),
        };
        match self {
            BetaProfile::PiecewiseConstant { segments } => {
                let mut acc = 0.0;
                let mut offsets = vec![0.0];
                for s in &segments[..segments.len() - 1] {
                    acc += s.duration;
                    offsets.push(acc);
                }
                push_periodic(&offsets, 0.0, self.period());
            }
            BetaProfile::Sampled(s) => {
                let offsets: Vec<f64> = s.tau.iter().map(|t| t - s.tau[0]).collect();
                push_periodic(&offsets, s.tau[0], s.period);
            }
            _ => {}
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Mirror-symmetry probe on `[0, half_width]`: the largest
    /// `|β(τ) - β(-τ)|` over `probes` points.
    pub fn symmetry_defect(&self, half_width: f64, probes: usize) -> Result<(f64, f64), PropagateError> {
        // Irrational offset keeps probes off grid and segment boundaries.
        const OFFSET: f64 = 0.618_033_988_749_894_8;
        let mut worst = (0.0, 0.0);
        for i in 0..probes {
            let t = half_width * (i as f64 + OFFSET) / probes as f64;
            let d = (self.eval(t)? - self.eval(-t)?).abs();
            if d > worst.1 {
                worst = (t, d);
            }
        }
        Ok(worst)
    }
}

/// JSON form of a profile, tagged by `"type"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileJson {
    Constant {
        beta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        period: Option<f64>,
    },
    Paul {
        beta0: f64,
        beta1: f64,
    },
    Piecewise {
        segments: Vec<Segment>,
    },
    Sampled {
        tau: Vec<f64>,
        beta: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        period: Option<f64>,
    },
}

impl ProfileJson {
    /// Builds the profile plus an explicitly declared period for constant profiles.
    pub fn into_profile(self) -> Result<(BetaProfile, Option<f64>), PropagateError> {
        Ok(match self {
            ProfileJson::Constant { beta, period } => (BetaProfile::constant(beta), period),
            ProfileJson::Paul { beta0, beta1 } => (BetaProfile::paul(beta0, beta1), None),
            ProfileJson::Piecewise { segments } => (BetaProfile::piecewise(segments)?, None),
            ProfileJson::Sampled { tau, beta, period } => {
                (BetaProfile::Sampled(SampledProfile::new(tau, beta, period)?), None)
            }
        })
    }
}
