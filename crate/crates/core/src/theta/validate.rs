//! Pointwise admissibility checks for a designed θ(τ).
//!
//! Three conditions are checked at refined special points of a probe grid:
//!
//! * (i) wherever θ = 0, θ' = ±2 (θ'(0) = 2 at the origin);
//! * (ii) wherever θ''' = 0, β' = 0;
//! * (iii) wherever θ' = 0 and θ ≠ 0, `βθ² = -θ''θ/2 - 1`.
//!
//! Condition (ii) is reported as stated, together with the residual of the
//! exact identity `β'θ = -θ'''/2 - 2βθ'` obtained by differentiating
//! `βθ² = -θθ''/2 + θ'²/4 - 1`. The identity shows that (ii) only holds
//! where `βθ' = 0`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{beta_from_derivs, beta_from_theta, ThetaSpec, ZERO_SLOPE_TOL};

/// Pass threshold for conditions (ii) and (iii).
pub const RELATION_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroCrossing {
    pub tau: f64,
    pub slope: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierPoint {
    pub tau: f64,
    pub theta: f64,
    pub beta: f64,
    /// `|βθ² + θ''θ/2 + 1|`.
    pub endpoint_residual: f64,
    /// `θ''θ = -2`, so that β vanishes there.
    pub beta_vanishes: bool,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub tau: f64,
    pub beta: f64,
    pub beta_prime: f64,
    /// `|β'θ + θ'''/2 + 2βθ'|`, zero up to differencing error.
    pub identity_residual: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clause {
    /// θ' = ±2 at every zero of θ.
    SlopeAtZero,
    /// β' = 0 wherever θ''' = 0.
    StationaryBeta,
    /// βθ² = -θ''θ/2 - 1 wherever θ' = 0.
    FourierEndpoint,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::SlopeAtZero => write!(f, "(i) theta' = ±2 wherever theta = 0"),
            Clause::StationaryBeta => write!(f, "(ii) beta' = 0 wherever theta''' = 0"),
            Clause::FourierEndpoint => write!(f, "(iii) beta theta^2 = -theta'' theta/2 - 1 wherever theta' = 0"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaValidityReport {
    pub probe_count: usize,
    pub zero_crossings: Vec<ZeroCrossing>,
    pub fourier_points: Vec<FourierPoint>,
    pub stationary_beta_points: Vec<StationaryPoint>,
    /// Probes where β could not be evaluated.
    pub singular_probes: Vec<f64>,
}

impl ThetaValidityReport {
    /// Condition (i) holds and β is finite on every probe: θ defines a
    /// usable control field.
    pub fn is_valid(&self) -> bool {
        self.zero_crossings.iter().all(|z| z.pass) && self.singular_probes.is_empty()
    }

    pub fn failed_clauses(&self) -> Vec<Clause> {
        let mut out = vec![];
        if !self.zero_crossings.iter().all(|z| z.pass) || !self.singular_probes.is_empty() {
            out.push(Clause::SlopeAtZero);
        }
        if !self.stationary_beta_points.iter().all(|s| s.pass) {
            out.push(Clause::StationaryBeta);
        }
        if !self.fourier_points.iter().all(|f| f.pass) {
            out.push(Clause::FourierEndpoint);
        }
        out
    }
}

/// Bisection for a sign change of `f` on `[a, b]`.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Exact zeros on the grid plus one refined root per sign change.
fn roots(f: impl Fn(f64) -> f64 + Copy, grid: &[f64]) -> Vec<f64> {
    let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let mut out = vec![];
    for i in 0..grid.len() {
        if vals[i] == 0.0 {
            out.push(grid[i]);
        } else if i + 1 < grid.len() && vals[i + 1] != 0.0 && (vals[i] < 0.0) != (vals[i + 1] < 0.0) {
            out.push(bisect(f, grid[i], grid[i + 1]));
        }
    }
    out
}

fn beta_prime(spec: &ThetaSpec, tau: f64) -> Option<f64> {
    let t_max = spec.half_width();
    let h = 1e-3 * t_max.min(1.0);
    // β is even, so points left of the origin mirror back into the domain.
    let b = |t: f64| beta_from_theta(spec, t.abs()).ok();
    if tau + 2.0 * h <= t_max {
        Some((b(tau - 2.0 * h)? - 8.0 * b(tau - h)? + 8.0 * b(tau + h)? - b(tau + 2.0 * h)?) / (12.0 * h))
    } else {
        let f = |k: f64| b(tau - k * h);
        Some((25.0 * f(0.0)? - 48.0 * f(1.0)? + 36.0 * f(2.0)? - 16.0 * f(3.0)? + 3.0 * f(4.0)?) / (12.0 * h))
    }
}

/// Checks conditions (i)–(iii) on a uniform grid of `probe_count + 1`
/// points over `[0, T]`, refining each special point by bisection.
pub fn validate_theta(spec: &ThetaSpec, probe_count: usize) -> ThetaValidityReport {
    let probe_count = probe_count.max(16);
    let t_max = spec.half_width();
    let grid: Vec<f64> = (0..=probe_count).map(|i| t_max * i as f64 / probe_count as f64).collect();
    let d = |t: f64| spec.derivs(t);

    let origin = d(0.0);
    let mut zero_crossings = vec![ZeroCrossing {
        tau: 0.0,
        slope: origin.d1,
        pass: origin.theta.abs() <= ZERO_SLOPE_TOL && (origin.d1 - 2.0).abs() <= ZERO_SLOPE_TOL,
    }];
    for tau in roots(|t| d(t).theta, &grid[1..]) {
        let slope = d(tau).d1;
        zero_crossings.push(ZeroCrossing { tau, slope, pass: (slope.abs() - 2.0).abs() <= ZERO_SLOPE_TOL });
    }

    let mut fourier_points = vec![];
    for tau in roots(|t| d(t).d1, &grid) {
        let p = d(tau);
        if p.theta.abs() < ZERO_SLOPE_TOL {
            continue;
        }
        let Ok(beta) = beta_from_derivs(&p, tau) else { continue };
        let endpoint_residual = (beta * p.theta * p.theta + 0.5 * p.d2 * p.theta + 1.0).abs();
        fourier_points.push(FourierPoint {
            tau,
            theta: p.theta,
            beta,
            endpoint_residual,
            beta_vanishes: (p.d2 * p.theta + 2.0).abs() <= RELATION_TOL,
            pass: endpoint_residual <= RELATION_TOL,
        });
    }

    let mut stationary_beta_points = vec![];
    for tau in roots(|t| d(t).d3, &grid) {
        let p = d(tau);
        let (Ok(beta), Some(bp)) = (beta_from_derivs(&p, tau), beta_prime(spec, tau)) else { continue };
        let identity_residual = (bp * p.theta + 0.5 * p.d3 + 2.0 * beta * p.d1).abs();
        stationary_beta_points.push(StationaryPoint {
            tau,
            beta,
            beta_prime: bp,
            identity_residual,
            pass: bp.abs() <= RELATION_TOL,
        });
    }

    let singular_probes = grid.iter().copied().filter(|&t| beta_from_theta(spec, t).is_err()).collect();

    ThetaValidityReport { probe_count, zero_crossings, fourier_points, stationary_beta_points, singular_probes }
}
