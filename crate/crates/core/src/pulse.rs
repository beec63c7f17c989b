//! Squeezing operations assembled from constant-β segments: squeezed
//! Fourier quarter periods, two-step squeezers and symmetric products.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::propagator::{constant_beta_step, BetaProfile, PropagateError, Segment};
use crate::sym2::{Mat2, TOL_DET};

/// Equidiagonality tolerance relative to the largest entry.
pub const EQUIDIAGONAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("kappa must be positive and finite, got {0}")]
    InvalidKappa(f64),
    #[error("target lambda must be nonzero and finite, got {0}")]
    InvalidLambda(f64),
    #[error("core matrix is not equidiagonal: u11 = {u11}, u22 = {u22}")]
    NotEquidiagonalCore { u11: f64, u22: f64 },
    #[error("wing {index} is not equidiagonal; the symmetric product would lose equidiagonality")]
    NotEquidiagonalWing { index: usize },
    #[error("matrix {index} is not symplectic (det = {det})")]
    NotSymplectic { index: usize, det: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FourierSign {
    Plus,
    Minus,
}

impl FourierSign {
    fn value(self) -> f64 {
        match self {
            FourierSign::Plus => 1.0,
            FourierSign::Minus => -1.0,
        }
    }
}

fn check_kappa(kappa: f64) -> Result<(), PulseError> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(PulseError::InvalidKappa(kappa))
    }
}

/// `[[0, ±1/κ], [∓κ, 0]]`.
pub fn squeezed_fourier(kappa: f64, sign: FourierSign) -> Result<Mat2, PulseError> {
    check_kappa(kappa)?;
    let s = sign.value();
    Ok(Mat2::new(0.0, s / kappa, -s * kappa, 0.0))
}

/// Constant-β stretch realizing [`squeezed_fourier`]: a quarter period of
/// the oscillator for `+`, three quarters for `-`.
pub fn squeezed_fourier_segment(kappa: f64, sign: FourierSign) -> Result<Segment, PulseError> {
    check_kappa(kappa)?;
    let quarters = match sign {
        FourierSign::Plus => 1.0,
        FourierSign::Minus => 3.0,
    };
    Ok(Segment::new(quarters * FRAC_PI_2 / kappa, kappa * kappa))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulsePlan {
    /// Chronological `(Δτ, β)` stretches.
    pub segments: Vec<Segment>,
    /// Ordered product of the closed-form segment propagators.
    pub predicted: Mat2,
    /// Scale factor actually applied to `q`.
    pub target_lambda: Option<f64>,
    /// The λ originally asked for, when it differs in sign from the
    /// realizable one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requested_lambda: Option<f64>,
}

impl PulsePlan {
    pub fn from_segments(segments: Vec<Segment>) -> Self {
        let predicted = segments.iter().fold(Mat2::IDENTITY, |acc, s| constant_beta_step(s.beta, s.duration) * acc);
        PulsePlan { segments, predicted, target_lambda: None, requested_lambda: None }
    }

    /// Number of β discontinuities when the plan is embedded in a null
    /// background, including switching on and off.
    pub fn jump_count(&self) -> usize {
        let levels: Vec<f64> =
            std::iter::once(0.0).chain(self.segments.iter().map(|s| s.beta)).chain(std::iter::once(0.0)).collect();
        levels.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn profile(&self) -> Result<BetaProfile, PropagateError> {
        BetaProfile::piecewise(self.segments.clone())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

/// Two squeezed Fourier steps whose product is `diag(λ, 1/λ)` with
/// `λ = -κ₂/κ₁`. The κ₁ factor stands on the left of the product, so the κ₂
/// stretch is applied first in time.
pub fn two_step_squeeze(kappa1: f64, kappa2: f64) -> Result<PulsePlan, PulseError> {
    let first = squeezed_fourier_segment(kappa2, FourierSign::Plus)?;
    let second = squeezed_fourier_segment(kappa1, FourierSign::Plus)?;
    let mut plan = PulsePlan::from_segments(vec![first, second]);
    let lambda = -kappa2 / kappa1;
    plan.predicted = Mat2::diag(lambda, 1.0 / lambda);
    plan.target_lambda = Some(lambda);
    Ok(plan)
}

/// Two-step plan with κ₁ = 1 and κ₂ = |λ|. The realizable factor always
/// carries a minus sign; the requested value is kept alongside.
pub fn design_lambda(target_lambda: f64) -> Result<PulsePlan, PulseError> {
    if target_lambda == 0.0 || !target_lambda.is_finite() {
        return Err(PulseError::InvalidLambda(target_lambda));
    }
    let mut plan = two_step_squeeze(1.0, target_lambda.abs())?;
    if target_lambda > 0.0 {
        plan.requested_lambda = Some(target_lambda);
    }
    Ok(plan)
}

fn check_symplectic(index: usize, m: &Mat2) -> Result<(), PulseError> {
    if m.is_symplectic(TOL_DET) {
        Ok(())
    } else {
        Err(PulseError::NotSymplectic { index, det: m.det() })
    }
}

fn equidiagonal(m: &Mat2) -> bool {
    m.is_equidiagonal(EQUIDIAGONAL_TOL * m.max_abs().max(1.0))
}

/// `vₙ⋯v₁ v₀ v₁⋯vₙ` for `wings = [v₁, …, vₙ]`.
///
/// The product is equidiagonal only when every factor is: equidiagonal
/// matrices are exactly those fixed by the anti-transpose `M ↦ K Mᵀ K`,
/// `K = [[0, 1], [1, 0]]`, which reverses products.
pub fn symmetric_product(core: &Mat2, wings: &[Mat2]) -> Result<Mat2, PulseError> {
    check_symplectic(0, core)?;
    if !equidiagonal(core) {
        return Err(PulseError::NotEquidiagonalCore { u11: core.u11, u22: core.u22 });
    }
    for (k, w) in wings.iter().enumerate() {
        check_symplectic(k + 1, w)?;
        if !equidiagonal(w) {
            return Err(PulseError::NotEquidiagonalWing { index: k + 1 });
        }
    }
    Ok(wings.iter().fold(*core, |acc, w| *w * acc * *w))
}
