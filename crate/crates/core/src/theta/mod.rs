//! Exact inverse design on symmetric intervals.
//!
//! For an even β(τ) the propagator `u(τ, -τ)` is equidiagonal and fully
//! determined by the single function `θ(τ) = u₁₂(τ, -τ)`:
//!
//! ```text
//! u₁₁ = u₂₂ = θ'/2,   u₂₁ = ((θ'/2)² - 1) / θ,
//! β = -θ''/(2θ) + ((θ'/2)² - 1) / θ².
//! ```
//!
//! Any sufficiently smooth θ with `θ(0) = 0`, `θ'(0) = 2` and `θ' = ±2`
//! wherever θ vanishes therefore defines a control field β that realizes the
//! whole family of matrices exactly.

mod spec;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use spec::{
    OddPolynomial, SampledTheta, SineTheta, ThetaDerivs, ThetaFamily, ThetaFunction, ThetaJson, ThetaSource, ThetaSpec,
};
pub use validate::{
    validate_theta, Clause, FourierPoint, StationaryPoint, ThetaValidityReport, ZeroCrossing, RELATION_TOL,
};

use crate::propagator::{self, BetaProfile, IntegratorConfig, PropagateError};
use crate::sym2::Mat2;

/// Below this |θ| the quotient formulas switch to their limit forms.
pub const THETA_SINGULAR_TOL: f64 = 1e-6;
/// Allowed deviation of `|θ'|` from 2 at a zero of θ.
pub const ZERO_SLOPE_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThetaError {
    #[error("theta vanishes at tau = {tau} with theta' = {slope}; a removable zero needs theta' = ±2")]
    SingularTheta { tau: f64, slope: f64 },
    #[error("tau = {tau} outside [0, {half_width}]")]
    OutOfRange { tau: f64, half_width: f64 },
    #[error("invalid theta specification: {0}")]
    InvalidSpec(String),
    #[error("forward integration failed: {0}")]
    Integration(Box<PropagateError>),
}

fn check_range(spec: &ThetaSpec, tau: f64) -> Result<(), ThetaError> {
    let t = spec.half_width();
    if !(tau >= 0.0 && tau <= t * (1.0 + 1e-12)) {
        return Err(ThetaError::OutOfRange { tau, half_width: t });
    }
    Ok(())
}

fn near_removable_zero(d: &ThetaDerivs, tau: f64) -> Result<bool, ThetaError> {
    if d.theta.abs() >= THETA_SINGULAR_TOL {
        return Ok(false);
    }
    if (d.d1.abs() - 2.0).abs() <= ZERO_SLOPE_TOL {
        Ok(true)
    } else {
        Err(ThetaError::SingularTheta { tau, slope: d.d1 })
    }
}

/// β(τ) from the derivatives of θ.
///
/// Near a zero of θ (with `θ' = ±2`) the numerator vanishes to second order
/// and the quotient is replaced by its limit `-θ'''/(4θ')`, accurate to
/// `O(|θ|)`.
pub fn beta_from_derivs(d: &ThetaDerivs, tau: f64) -> Result<f64, ThetaError> {
    if near_removable_zero(d, tau)? {
        return Ok(-d.d3 / (4.0 * d.d1));
    }
    let half_slope = 0.5 * d.d1;
    Ok(-d.d2 / (2.0 * d.theta) + (half_slope * half_slope - 1.0) / (d.theta * d.theta))
}

/// The control field β(τ) that realizes `θ` on `[-τ, τ]`.
pub fn beta_from_theta(spec: &ThetaSpec, tau: f64) -> Result<f64, ThetaError> {
    check_range(spec, tau)?;
    beta_from_derivs(&spec.derivs(tau), tau)
}

/// `u(τ, -τ) = [[θ'/2, θ], [u₂₁, θ'/2]]`.
pub fn u_from_theta(spec: &ThetaSpec, tau: f64) -> Result<Mat2, ThetaError> {
    check_range(spec, tau)?;
    let d = spec.derivs(tau);
    let diag = 0.5 * d.d1;
    let u21 = if near_removable_zero(&d, tau)? { 0.5 * d.d2 } else { (diag * diag - 1.0) / d.theta };
    Ok(Mat2::new(diag, d.theta, u21, diag))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    /// `(τ, ‖u_forward(τ, -τ) - u_from_theta(τ)‖_max)` per probe.
    pub probes: Vec<(f64, f64)>,
    pub max_residual: f64,
}

/// Probes used by [`verify_roundtrip`].
pub const ROUNDTRIP_PROBES: usize = 32;

/// Forward-integrates the designed β over `[-τ, τ]` for a grid of τ and
/// compares against the closed-form family.
pub fn verify_roundtrip(spec: &ThetaSpec, cfg: &IntegratorConfig) -> Result<RoundTripReport, ThetaError> {
    let report = validate_theta(spec, 64);
    if let Some(bad) = report.zero_crossings.iter().find(|z| !z.pass) {
        return Err(ThetaError::SingularTheta { tau: bad.tau, slope: bad.slope });
    }
    let profile = BetaProfile::FromTheta(spec.clone());
    let t = spec.half_width();
    let mut probes = Vec::with_capacity(ROUNDTRIP_PROBES);
    for i in 1..=ROUNDTRIP_PROBES {
        let tau = t * i as f64 / ROUNDTRIP_PROBES as f64;
        let forward = propagator::propagate(&profile, -tau, tau, cfg).map_err(|e| match e {
            PropagateError::Theta(t) => t,
            other => ThetaError::Integration(Box::new(other)),
        })?;
        let designed = u_from_theta(spec, tau)?;
        probes.push((tau, forward.max_abs_diff(&designed)));
    }
    let max_residual = probes.iter().fold(0.0_f64, |m, p| m.max(p.1));
    Ok(RoundTripReport { probes, max_residual })
}

/// θ(τ) = u₁₂(τ, -τ) read off a symmetric profile on the uniform grid
/// `k·T/n`, as a sampled spec.
pub fn extract_theta(
    profile: &BetaProfile,
    half_width: f64,
    intervals: usize,
    cfg: &IntegratorConfig,
) -> Result<ThetaSpec, PropagateError> {
    let tau: Vec<f64> = (0..=intervals).map(|k| half_width * k as f64 / intervals as f64).collect();
    let mats = propagator::propagate_symmetric_at(profile, &tau[1..], cfg)?;
    let theta: Vec<f64> = std::iter::once(0.0).chain(mats.iter().map(|m| m.u12)).collect();
    Ok(ThetaSpec::sampled(&tau, &theta)?)
}
