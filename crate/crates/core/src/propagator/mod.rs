//! Evolution matrices `u(τ, τ₀)` for `H(τ) = p²/2 + β(τ) q²/2`.
//!
//! Two integration routes are provided:
//!
//! * [`propagate`] integrates `du/dτ = Λ(τ) u` with `Λ = [[0, 1], [-β, 0]]`
//!   from `u(τ₀, τ₀) = 1`;
//! * [`propagate_symmetric`] integrates the anticommutator equation
//!   `du/dτ = Λ(τ) u + u Λ(τ)` for `u(τ, -τ)` on expanding symmetric
//!   intervals, valid when `β(τ) = β(-τ)`.
//!
//! For profiles with known discontinuities (piecewise-constant and sampled
//! profiles) the integrators always stop exactly on the breakpoints.

mod dop853_tableau;
mod ode;
mod profile;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use profile::{BetaProfile, ProfileJson, SampledProfile, Segment, PAUL_PERIOD};

use crate::sym2::Mat2;
use crate::theta::ThetaError;
use ode::{OdeFailure, State};

/// Mirrored probe points used to accept a profile as symmetric.
pub const SYMMETRY_PROBES: usize = 64;
/// Tolerance on `|β(τ) - β(-τ)|` at each probe.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagateError {
    #[error("tau = {tau} outside the profile domain [{lo}, {hi}]")]
    OutOfDomain { tau: f64, lo: f64, hi: f64 },
    #[error("integrator could not meet the requested tolerance near tau = {tau} (step {step:.3e})")]
    ToleranceNotMet { tau: f64, step: f64 },
    #[error("profile is not symmetric about tau = 0: |beta(t) - beta(-t)| = {defect:.3e} at t = {tau}")]
    NotSymmetricProfile { tau: f64, defect: f64 },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("interval must be positive, got {0}")]
    InvalidInterval(f64),
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

impl From<OdeFailure<PropagateError>> for PropagateError {
    fn from(f: OdeFailure<PropagateError>) -> Self {
        match f {
            OdeFailure::StepSize { t, h } => PropagateError::ToleranceNotMet { tau: t, step: h },
            OdeFailure::Rhs(e) => e,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Embedded 8(5,3) Dormand–Prince with step-size control.
    Adaptive,
    /// Exponential midpoint rule: each step is `exp(h Λ(τ + h/2))`, exactly
    /// symplectic and exact on constant stretches.
    FixedMagnus2,
    FixedRk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Fixed-step resolution relative to the profile period (2π when the
    /// profile has none).
    pub steps_per_period: usize,
    /// Rescale the result to unit determinant.
    pub renormalize_det: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Adaptive,
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            steps_per_period: 256,
            renormalize_det: false,
        }
    }
}

impl IntegratorConfig {
    pub fn adaptive(tol: f64) -> Self {
        IntegratorConfig { rel_tol: tol, abs_tol: tol, ..Default::default() }
    }

    pub fn magnus(steps_per_period: usize) -> Self {
        IntegratorConfig { method: Method::FixedMagnus2, steps_per_period, ..Default::default() }
    }

    pub fn rk4(steps_per_period: usize) -> Self {
        IntegratorConfig { method: Method::FixedRk4, steps_per_period, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), PropagateError> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(PropagateError::InvalidConfig("tolerances must be positive".into()));
        }
        if self.steps_per_period < 16 {
            return Err(PropagateError::InvalidConfig("steps_per_period must be at least 16".into()));
        }
        Ok(())
    }

    /// Representative tolerance of the configured method.
    pub fn nominal_tol(&self) -> f64 {
        self.rel_tol.max(self.abs_tol)
    }

    fn h_max(&self, profile: &BetaProfile) -> f64 {
        profile.period().unwrap_or(PAUL_PERIOD) / self.steps_per_period as f64
    }

    fn finish(&self, m: Mat2) -> Mat2 {
        let d = m.det();
        if self.renormalize_det && d > 0.0 {
            m.scale(1.0 / d.sqrt())
        } else {
            m
        }
    }
}

/// `[[cos κΔτ, sin κΔτ / κ], [-κ sin κΔτ, cos κΔτ]]`; `κ = 0` gives the free
/// particle `[[1, Δτ], [0, 1]]`.
pub fn closed_form_rotation(kappa: f64, delta_tau: f64) -> Mat2 {
    if kappa == 0.0 {
        return Mat2::new(1.0, delta_tau, 0.0, 1.0);
    }
    let (s, c) = (kappa * delta_tau).sin_cos();
    Mat2::new(c, s / kappa, -kappa * s, c)
}

/// Exact propagator of a constant β over `h`, for either sign of β.
pub fn constant_beta_step(beta: f64, h: f64) -> Mat2 {
    if beta > 0.0 {
        closed_form_rotation(beta.sqrt(), h)
    } else if beta < 0.0 {
        let k = (-beta).sqrt();
        let (s, c) = ((k * h).sinh(), (k * h).cosh());
        Mat2::new(c, s / k, k * s, c)
    } else {
        Mat2::new(1.0, h, 0.0, 1.0)
    }
}

fn rhs_forward(profile: &BetaProfile) -> impl Fn(f64, &State) -> Result<State, PropagateError> + '_ {
    move |t, u| {
        let b = profile.eval(t)?;
        Ok([u[2], u[3], -b * u[0], -b * u[1]])
    }
}

fn rhs_symmetric(profile: &BetaProfile) -> impl Fn(f64, &State) -> Result<State, PropagateError> + '_ {
    move |t, u| {
        let b = profile.eval(t)?;
        let diag = u[2] - b * u[1];
        let tr = u[0] + u[3];
        Ok([diag, tr, -b * tr, diag])
    }
}

/// `u(tau1, tau0)`. A backward interval is answered with the symplectic
/// inverse of the forward propagator.
pub fn propagate(profile: &BetaProfile, tau0: f64, tau1: f64, cfg: &IntegratorConfig) -> Result<Mat2, PropagateError> {
    cfg.validate()?;
    if !tau0.is_finite() || !tau1.is_finite() {
        return Err(PropagateError::InvalidInterval(tau1 - tau0));
    }
    if tau1 == tau0 {
        return Ok(Mat2::IDENTITY);
    }
    if tau1 < tau0 {
        return propagate(profile, tau1, tau0, cfg).map(|m| m.symplectic_inverse());
    }
    let mut stops = vec![tau0];
    stops.extend(merge_close(profile.breakpoints(tau0, tau1), &[tau0, tau1]));
    stops.push(tau1);

    let mut out = [1.0, 0.0, 0.0, 1.0];
    match cfg.method {
        Method::Adaptive => {
            ode::dop853(rhs_forward(profile), &stops, out, cfg.rel_tol, cfg.abs_tol, |_, y| out = *y)?;
        }
        Method::FixedRk4 => {
            ode::rk4(rhs_forward(profile), &stops, out, cfg.h_max(profile), |_, y| out = *y)?;
        }
        Method::FixedMagnus2 => {
            let h_max = cfg.h_max(profile);
            let mut m = Mat2::IDENTITY;
            for w in stops.windows(2) {
                let n = ode::substeps(w[1] - w[0], h_max);
                let h = (w[1] - w[0]) / n as f64;
                for j in 0..n {
                    let mid = w[0] + (j as f64 + 0.5) * h;
                    m = constant_beta_step(profile.eval(mid)?, h) * m;
                }
            }
            out = m.to_array();
        }
    }
    Ok(cfg.finish(Mat2::from_array(out)))
}

/// Breakpoints with those lying within rounding distance of a fixed stop or
/// of a previously kept breakpoint removed; a sliver segment of a few ulps
/// would otherwise stall the adaptive step control.
fn merge_close(mut bps: Vec<f64>, fixed: &[f64]) -> Vec<f64> {
    let scale = fixed.iter().chain(&bps).fold(1.0f64, |m, t| m.max(t.abs()));
    let eps = 1e-12 * scale;
    bps.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(bps.len());
    for b in bps {
        let near_fixed = fixed.iter().any(|f| (f - b).abs() <= eps);
        let near_prev = out.last().is_some_and(|p| b - p <= eps);
        if !near_fixed && !near_prev {
            out.push(b);
        }
    }
    out
}

/// `u(T, -T)` via the anticommutator equation.
pub fn propagate_symmetric(
    profile: &BetaProfile,
    half_width: f64,
    cfg: &IntegratorConfig,
) -> Result<Mat2, PropagateError> {
    let v = propagate_symmetric_at(profile, &[half_width], cfg)?;
    Ok(v[0])
}

/// `u(τ, -τ)` for each of the increasing, positive `taus`, from a single
/// integration of the anticommutator equation.
pub fn propagate_symmetric_at(
    profile: &BetaProfile,
    taus: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<Mat2>, PropagateError> {
    cfg.validate()?;
    let Some(&t_max) = taus.last() else {
        return Ok(vec![]);
    };
    if taus.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(PropagateError::InvalidInterval(taus.iter().cloned().fold(f64::NAN, f64::min)));
    }
    if taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(PropagateError::InvalidConfig("sample times must be increasing".into()));
    }
    let (at, defect) = profile.symmetry_defect(t_max, SYMMETRY_PROBES)?;
    if defect > SYMMETRY_TOL {
        return Err(PropagateError::NotSymmetricProfile { tau: at, defect });
    }

    // Integration stops: 0, every |breakpoint| in (0, t_max), and each sample.
    let mut bps: Vec<f64> = profile.breakpoints(0.0, t_max);
    bps.extend(profile.breakpoints(-t_max, 0.0).into_iter().map(|b| -b));
    let mut fixed = vec![0.0];
    fixed.extend_from_slice(taus);
    let mut stops = merge_close(bps, &fixed);
    stops.extend_from_slice(taus);
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.insert(0, 0.0);
    let wanted: Vec<usize> = taus.iter().map(|t| stops.partition_point(|s| s < t)).collect();

    let mut at_stop = vec![[0.0; 4]; stops.len()];
    let identity = [1.0, 0.0, 0.0, 1.0];
    match cfg.method {
        Method::Adaptive => {
            ode::dop853(rhs_symmetric(profile), &stops, identity, cfg.rel_tol, cfg.abs_tol, |i, y| at_stop[i] = *y)?;
        }
        Method::FixedRk4 => {
            ode::rk4(rhs_symmetric(profile), &stops, identity, cfg.h_max(profile), |i, y| at_stop[i] = *y)?;
        }
        Method::FixedMagnus2 => {
            // One step grows the interval on both sides: u ← E u E, E = exp(h Λ(mid)).
            let h_max = cfg.h_max(profile);
            let mut m = Mat2::IDENTITY;
            at_stop[0] = m.to_array();
            for (i, w) in stops.windows(2).enumerate() {
                let n = ode::substeps(w[1] - w[0], h_max);
                let h = (w[1] - w[0]) / n as f64;
                for j in 0..n {
                    let e = constant_beta_step(profile.eval(w[0] + (j as f64 + 0.5) * h)?, h);
                    m = e * m * e;
                }
                at_stop[i + 1] = m.to_array();
            }
        }
    }
    Ok(wanted.into_iter().map(|i| cfg.finish(Mat2::from_array(at_stop[i]))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn rotation_closed_form_examples() {
        let q = closed_form_rotation(1.0, FRAC_PI_2);
        assert!(q.max_abs_diff(&Mat2::new(0.0, 1.0, -1.0, 0.0)) < 1e-15);
        assert_eq!(closed_form_rotation(3.3, 0.0), Mat2::IDENTITY);
        assert!(closed_form_rotation(2.0, PI).max_abs_diff(&Mat2::IDENTITY) < 1e-15);
        assert_eq!(closed_form_rotation(0.0, 2.5), Mat2::new(1.0, 2.5, 0.0, 1.0));
    }

    #[test]
    fn hyperbolic_step_is_symplectic() {
        let m = constant_beta_step(-2.0, 1.3);
        assert!((m.det() - 1.0).abs() < 1e-13);
        assert!(m.u21 > 0.0);
    }

    #[test]
    fn empty_interval_is_identity() {
        let p = BetaProfile::paul(0.3, 0.2);
        assert_eq!(propagate(&p, 1.7, 1.7, &cfg()).unwrap(), Mat2::IDENTITY);
    }

    #[test]
    fn constant_matches_closed_form() {
        for &k in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            let p = BetaProfile::constant(k * k);
            for &t in &[0.7, 5.0, 20.0] {
                let u = propagate(&p, 0.0, t, &cfg()).unwrap();
                let d = u.max_abs_diff(&closed_form_rotation(k, t));
                assert!(d < 1e-8, "kappa {k} t {t}: {d:e}");
                assert!(u.det_defect() < 1e-9, "det drift {:e}", u.det_defect());
            }
        }
    }

    #[test]
    fn backward_is_inverse() {
        let p = BetaProfile::paul(0.8, 0.4);
        let f = propagate(&p, 0.3, 2.9, &cfg()).unwrap();
        let b = propagate(&p, 2.9, 0.3, &cfg()).unwrap();
        // The symplectic inverse gives f·b = det(f)·I exactly.
        assert!((f * b).max_abs_diff(&Mat2::IDENTITY.scale(f.det())) < 1e-12);
        assert!((f * b).max_abs_diff(&Mat2::IDENTITY) < 1e-9);
    }

    #[test]
    fn composition_property() {
        let p = BetaProfile::paul(1.1, -0.6);
        let (a, b, c) = (-0.4, 1.3, 5.0);
        let ac = propagate(&p, a, c, &cfg()).unwrap();
        let ab = propagate(&p, a, b, &cfg()).unwrap();
        let bc = propagate(&p, b, c, &cfg()).unwrap();
        assert!(ac.max_abs_diff(&(bc * ab)) < 1e-8);
    }

    #[test]
    fn methods_agree_on_paul() {
        let p = BetaProfile::paul(0.9, 0.3);
        let reference = propagate(&p, 0.0, 2.0 * PI, &IntegratorConfig::adaptive(1e-12)).unwrap();
        let magnus = propagate(&p, 0.0, 2.0 * PI, &IntegratorConfig::magnus(4096)).unwrap();
        let rk4 = propagate(&p, 0.0, 2.0 * PI, &IntegratorConfig::rk4(1024)).unwrap();
        assert!(reference.max_abs_diff(&magnus) < 1e-5);
        assert!(reference.max_abs_diff(&rk4) < 1e-9);
        // The exponential midpoint rule is symplectic step by step.
        assert!(magnus.det_defect() < 1e-12);
    }

    #[test]
    fn piecewise_equals_product_of_rotations() {
        let segs = vec![
            Segment { duration: 0.7, beta: 2.0 },
            Segment { duration: 1.1, beta: 0.25 },
            Segment { duration: 0.4, beta: -1.5 },
        ];
        let p = BetaProfile::piecewise(segs.clone()).unwrap();
        let exact = segs.iter().fold(Mat2::IDENTITY, |acc, s| constant_beta_step(s.beta, s.duration) * acc);
        let magnus = propagate(&p, 0.0, 2.2, &IntegratorConfig::magnus(64)).unwrap();
        assert!(magnus.max_abs_diff(&exact) < 1e-12);
        let adaptive = propagate(&p, 0.0, 2.2, &IntegratorConfig::adaptive(1e-12)).unwrap();
        assert!(adaptive.max_abs_diff(&exact) < 1e-10);
    }

    #[test]
    fn sampled_out_of_domain_is_reported() {
        let s = SampledProfile::new(vec![0.0, 1.0], vec![1.0, 1.0], None).unwrap();
        let r = propagate(&BetaProfile::Sampled(s), 0.0, 2.0, &cfg());
        assert!(matches!(r, Err(PropagateError::OutOfDomain { .. })));
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = IntegratorConfig { steps_per_period: 8, ..IntegratorConfig::magnus(8) };
        assert!(matches!(
            propagate(&BetaProfile::constant(1.0), 0.0, 1.0, &bad),
            Err(PropagateError::InvalidConfig(_))
        ));
        let bad = IntegratorConfig { rel_tol: 0.0, ..cfg() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn symmetric_constant_and_free() {
        let k = 1.3;
        let t = 0.9;
        let u = propagate_symmetric(&BetaProfile::constant(k * k), t, &cfg()).unwrap();
        assert!(u.max_abs_diff(&closed_form_rotation(k, 2.0 * t)) < 1e-9);
        let free = propagate_symmetric(&BetaProfile::constant(0.0), t, &cfg()).unwrap();
        assert!(free.max_abs_diff(&Mat2::new(1.0, 2.0 * t, 0.0, 1.0)) < 1e-12);
    }

    #[test]
    fn symmetric_route_matches_forward_route() {
        let p = BetaProfile::paul(0.6, -0.45);
        for cfg in [cfg(), IntegratorConfig::rk4(2048), IntegratorConfig::magnus(8192)] {
            let s = propagate_symmetric(&p, 2.4, &cfg).unwrap();
            let f = propagate(&p, -2.4, 2.4, &IntegratorConfig::adaptive(1e-12)).unwrap();
            assert!(s.max_abs_diff(&f) < 1e-5, "{:?}", cfg.method);
            assert!(s.is_equidiagonal(1e-12));
        }
    }

    #[test]
    fn symmetric_piecewise_palindrome_is_exact_with_magnus() {
        // β = 3 on |τ| < 0.5, β = -1 on 0.5 < |τ| < 1.2 (sampled as piecewise from -1.2)
        let s = SampledProfile::new(
            vec![-1.2, -0.5, -0.5 + 1e-13, 0.5 - 1e-13, 0.5, 1.2],
            vec![-1.0, -1.0, 3.0, 3.0, -1.0, -1.0],
            None,
        )
        .unwrap();
        let p = BetaProfile::Sampled(s);
        let u = propagate_symmetric(&p, 1.2, &cfg()).unwrap();
        let wing = constant_beta_step(-1.0, 0.7);
        let core = constant_beta_step(3.0, 1.0);
        let exact = wing * core * wing;
        assert!(u.max_abs_diff(&exact) < 1e-8, "{}", u.max_abs_diff(&exact));
    }

    #[test]
    fn asymmetric_profile_rejected() {
        let s = SampledProfile::new(vec![-2.0, 2.0], vec![0.0, 1.0], None).unwrap();
        let r = propagate_symmetric(&BetaProfile::Sampled(s), 1.0, &cfg());
        assert!(matches!(r, Err(PropagateError::NotSymmetricProfile { .. })));
        assert!(matches!(
            propagate_symmetric(&BetaProfile::constant(1.0), -1.0, &cfg()),
            Err(PropagateError::InvalidInterval(_))
        ));
    }
}
