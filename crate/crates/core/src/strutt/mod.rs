//! Stability map of the Paul profile `β = β₀ + 2β₁ cos τ` over a fixed
//! interval: per-cell propagators, zero curves of `u₁₂` and `u₂₁`, and
//! their intersections where the propagator is diagonal.

mod curves;
mod export;
mod points;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curves::{trace_zero_curves, Element, ZeroCurve};
pub use export::{curves_csv, grid_csv, squeeze_json, svg_map};
pub use points::{find_squeeze_points, SqueezePoint};

use crate::floquet::MotionClass;
use crate::propagator::{self, BetaProfile, IntegratorConfig, PropagateError};
use crate::sym2::{Mat2, TOL_GAMMA};

pub const CURVE_TOL: f64 = 1e-8;
pub const POINT_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StruttError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("no sign change of {0} inside the squeezing region")]
    EmptyResult(Element),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
}

/// `n` equally spaced values from `min` to `max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, n: usize) -> Self {
        AxisRange { min, max, n }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.n == 1 {
            self.min
        } else if i + 1 == self.n {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn step(&self) -> f64 {
        if self.n > 1 {
            (self.max - self.min) / (self.n - 1) as f64
        } else {
            0.0
        }
    }

    fn validate(&self, name: &str) -> Result<(), StruttError> {
        let bad = |m: String| Err(StruttError::InvalidGrid(format!("{name}: {m}")));
        if !self.min.is_finite() || !self.max.is_finite() {
            return bad("non-finite bounds".into());
        }
        match self.n {
            0 => bad("needs at least one point".into()),
            1 if self.min != self.max => bad("a single point needs min = max".into()),
            1 => Ok(()),
            _ if self.max < self.min => bad(format!("max {} is below min {}", self.max, self.min)),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub beta0: AxisRange,
    pub beta1: AxisRange,
    /// Integration interval `(τ_start, τ_end)`.
    pub interval: (f64, f64),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            beta0: AxisRange::new(0.0, 2.0, 200),
            beta1: AxisRange::new(-1.6, 1.6, 200),
            interval: DEFAULT_INTERVAL,
        }
    }
}

pub const DEFAULT_INTERVAL: (f64, f64) = (PI / 2.0, 5.0 * PI / 2.0);

impl GridSpec {
    pub fn validate(&self) -> Result<(), StruttError> {
        self.beta0.validate("beta0")?;
        self.beta1.validate("beta1")?;
        let (a, b) = self.interval;
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(StruttError::InvalidGrid(format!("interval ({a}, {b})")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.beta0.n * self.beta1.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One grid node. `u`, `gamma` and `motion_class` are absent when the
/// propagation failed, in which case `error` carries the message.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub beta0: f64,
    pub beta1: f64,
    pub u: Option<Mat2>,
    pub gamma: Option<f64>,
    pub motion_class: Option<MotionClass>,
    pub error: Option<String>,
}

impl Cell {
    pub fn element(&self, e: Element) -> Option<f64> {
        self.u.map(|u| e.of(&u))
    }

    pub fn is_squeezing(&self) -> bool {
        self.motion_class == Some(MotionClass::IIISqueezing)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StruttGrid {
    pub spec: GridSpec,
    /// Row-major with β₀ varying fastest.
    pub cells: Vec<Cell>,
}

impl StruttGrid {
    pub fn index(&self, i0: usize, i1: usize) -> usize {
        i1 * self.spec.beta0.n + i0
    }

    pub fn cell(&self, i0: usize, i1: usize) -> &Cell {
        &self.cells[self.index(i0, i1)]
    }

    /// Cell whose node is closest to `(beta0, beta1)`.
    pub fn nearest(&self, beta0: f64, beta1: f64) -> &Cell {
        let pick = |r: &AxisRange, v: f64| {
            if r.n == 1 {
                0
            } else {
                (((v - r.min) / r.step()).round().max(0.0) as usize).min(r.n - 1)
            }
        };
        self.cell(pick(&self.spec.beta0, beta0), pick(&self.spec.beta1, beta1))
    }

    /// Diagonal of one grid cell, used as a proximity scale.
    pub fn cell_diagonal(&self) -> f64 {
        self.spec.beta0.step().hypot(self.spec.beta1.step())
    }
}

/// Settings for tracing and intersection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StruttConfig {
    pub integrator: IntegratorConfig,
    pub curve_tol: f64,
    pub point_tol: f64,
    pub max_newton_iter: usize,
}

impl Default for StruttConfig {
    fn default() -> Self {
        StruttConfig {
            integrator: IntegratorConfig::default(),
            curve_tol: CURVE_TOL,
            point_tol: POINT_TOL,
            max_newton_iter: 50,
        }
    }
}

/// `u(τ_end, τ_start)` for the Paul profile at `(β₀, β₁)`.
pub fn evaluate(beta0: f64, beta1: f64, interval: (f64, f64), cfg: &IntegratorConfig) -> Result<Mat2, PropagateError> {
    propagator::propagate(&BetaProfile::paul(beta0, beta1), interval.0, interval.1, cfg)
}

fn make_cell(beta0: f64, beta1: f64, interval: (f64, f64), cfg: &IntegratorConfig) -> Cell {
    match evaluate(beta0, beta1, interval, cfg) {
        Ok(u) => {
            let gamma = u.trace();
            Cell {
                beta0,
                beta1,
                u: Some(u),
                gamma: Some(gamma),
                motion_class: Some(MotionClass::from_gamma(gamma, TOL_GAMMA)),
                error: None,
            }
        }
        Err(e) => {
            log::warn!("cell ({beta0}, {beta1}) failed: {e}");
            Cell { beta0, beta1, u: None, gamma: None, motion_class: None, error: Some(e.to_string()) }
        }
    }
}

/// Propagates every grid node in parallel. Failures are recorded per cell.
pub fn scan(spec: &GridSpec, cfg: &IntegratorConfig) -> Result<StruttGrid, StruttError> {
    spec.validate()?;
    cfg.validate()?;
    let n0 = spec.beta0.n;
    let cells = (0..spec.len())
        .into_par_iter()
        .map(|k| make_cell(spec.beta0.value(k % n0), spec.beta1.value(k / n0), spec.interval, cfg))
        .collect();
    Ok(StruttGrid { spec: *spec, cells })
}
