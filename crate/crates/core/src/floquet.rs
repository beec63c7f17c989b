//! Monodromy matrices of periodic profiles and the three-class motion
//! classification by the stability trace `Γ = Tr u(T + τ₀, τ₀)`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::propagator::{self, BetaProfile, IntegratorConfig, PropagateError};
use crate::sym2::{EigenStructure, Mat2, Sym2Error, TOL_DET, TOL_GAMMA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FloquetError {
    #[error("profile has no declared period; supply one explicitly")]
    NotPeriodic,
    #[error("invalid period {0}")]
    InvalidPeriod(f64),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Sym2(#[from] Sym2Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MotionClass {
    /// `|Γ| < 2`: bounded oscillation.
    #[serde(rename = "I")]
    IStable,
    /// `|Γ| = 2` within the threshold band.
    #[serde(rename = "II")]
    IIThreshold,
    /// `|Γ| > 2`: one quadrature expands, the other contracts.
    #[serde(rename = "III")]
    IIISqueezing,
}

impl MotionClass {
    pub fn from_gamma(gamma: f64, tol_gamma: f64) -> Self {
        let d = gamma.abs() - 2.0;
        if d.abs() <= tol_gamma {
            MotionClass::IIThreshold
        } else if d < 0.0 {
            MotionClass::IStable
        } else {
            MotionClass::IIISqueezing
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MotionClass::IStable => "I",
            MotionClass::IIThreshold => "II",
            MotionClass::IIISqueezing => "III",
        }
    }
}

impl fmt::Display for MotionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub gamma: f64,
    pub motion_class: MotionClass,
    /// `None` when the monodromy matrix is a nontrivial Jordan block at the
    /// threshold and has a single eigenrow.
    pub eigen: Option<EigenStructure>,
    pub tau0: f64,
    pub period: f64,
    pub matrix: Mat2,
}

impl MonodromyReport {
    /// Classifies an already computed one-period propagator.
    pub fn from_matrix(matrix: Mat2, tau0: f64, period: f64, tol_det: f64) -> Result<Self, FloquetError> {
        let gamma = matrix.trace();
        let motion_class = MotionClass::from_gamma(gamma, TOL_GAMMA);
        let eigen = match matrix.eigen_with(tol_det, TOL_GAMMA) {
            Ok(e) => Some(e),
            Err(Sym2Error::DefectiveMatrix { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        Ok(MonodromyReport { gamma, motion_class, eigen, tau0, period, matrix })
    }
}

/// Determinant tolerance for integrated matrices: the integrator error
/// dominates the exact-construction tolerance.
fn integrated_tol_det(cfg: &IntegratorConfig) -> f64 {
    TOL_DET.max(100.0 * cfg.nominal_tol())
}

/// Monodromy over the profile's own period.
pub fn monodromy(profile: &BetaProfile, tau0: f64, cfg: &IntegratorConfig) -> Result<MonodromyReport, FloquetError> {
    let period = profile.period().ok_or(FloquetError::NotPeriodic)?;
    monodromy_over(profile, period, tau0, cfg)
}

/// Monodromy over an explicitly supplied period (needed for constant
/// profiles, which are periodic with any `T > 0`).
pub fn monodromy_over(
    profile: &BetaProfile,
    period: f64,
    tau0: f64,
    cfg: &IntegratorConfig,
) -> Result<MonodromyReport, FloquetError> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(FloquetError::InvalidPeriod(period));
    }
    let matrix = propagator::propagate(profile, tau0, tau0 + period, cfg)?;
    MonodromyReport::from_matrix(matrix, tau0, period, integrated_tol_det(cfg))
}

/// `max |Γ(τ₀ᵢ) - Γ(τ₀ⱼ)|` over the given start times.
pub fn gamma_invariance_check(
    profile: &BetaProfile,
    tau0_list: &[f64],
    cfg: &IntegratorConfig,
) -> Result<f64, FloquetError> {
    let period = profile.period().ok_or(FloquetError::NotPeriodic)?;
    gamma_spread_over(profile, period, tau0_list, cfg)
}

pub fn gamma_spread_over(
    profile: &BetaProfile,
    period: f64,
    tau0_list: &[f64],
    cfg: &IntegratorConfig,
) -> Result<f64, FloquetError> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &t0 in tau0_list {
        let g = monodromy_over(profile, period, t0, cfg)?.gamma;
        lo = lo.min(g);
        hi = hi.max(g);
    }
    Ok(if tau0_list.is_empty() { 0.0 } else { hi - lo })
}
