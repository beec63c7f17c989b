use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ThetaError;

/// θ and its first three derivatives at one τ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaDerivs {
    pub theta: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// A designer-supplied θ(τ) with exact derivatives up to third order.
pub trait ThetaFunction: Send + Sync + fmt::Debug {
    fn derivs(&self, tau: f64) -> ThetaDerivs;
}

/// `θ(τ) = 2τ + Σ_k c_k τ^{2k+3}`: odd, so `θ(0) = 0` and `θ'(0) = 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct OddPolynomial {
    coeffs: Vec<f64>,
}

impl OddPolynomial {
    /// `coeffs[0]` multiplies `τ³`, `coeffs[1]` multiplies `τ⁵`, and so on.
    pub fn new(coeffs: Vec<f64>) -> Self {
        OddPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

impl ThetaFunction for OddPolynomial {
    fn derivs(&self, t: f64) -> ThetaDerivs {
        let mut d = ThetaDerivs { theta: 2.0 * t, d1: 2.0, d2: 0.0, d3: 0.0 };
        for (k, &c) in self.coeffs.iter().enumerate() {
            let n = (2 * k + 3) as i32;
            let nf = n as f64;
            d.theta += c * t.powi(n);
            d.d1 += c * nf * t.powi(n - 1);
            d.d2 += c * nf * (nf - 1.0) * t.powi(n - 2);
            d.d3 += c * nf * (nf - 1.0) * (nf - 2.0) * t.powi(n - 3);
        }
        d
    }
}

/// `θ(τ) = A sin(ωτ)`. `A = 1/κ, ω = 2κ` is the constant-β family; other
/// choices violate the slope condition at τ = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SineTheta {
    pub amplitude: f64,
    pub frequency: f64,
}

impl ThetaFunction for SineTheta {
    fn derivs(&self, t: f64) -> ThetaDerivs {
        let (a, w) = (self.amplitude, self.frequency);
        let (s, c) = (w * t).sin_cos();
        ThetaDerivs { theta: a * s, d1: a * w * c, d2: -a * w * w * s, d3: -a * w * w * w * c }
    }
}

/// θ sampled on the uniform grid `τ_k = k·h`, `k = 0..=n`, `τ_n = T`.
///
/// Derivatives come from 7-point Fornberg stencils on the odd extension
/// `θ(-τ) = -θ(τ)`; stencils become one-sided near `T`. The third
/// derivative is fourth-order accurate at the nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledTheta {
    step: f64,
    values: Vec<f64>,
}

const STENCIL: usize = 7;

impl SampledTheta {
    pub fn new(tau: &[f64], theta: &[f64]) -> Result<Self, ThetaError> {
        let bad = |m: &str| Err(ThetaError::InvalidSpec(m.to_string()));
        if tau.len() != theta.len() {
            return bad("tau and theta lengths differ");
        }
        if tau.len() < STENCIL {
            return bad("sampled theta needs at least 7 points");
        }
        if tau[0] != 0.0 {
            return bad("sampled theta grid must start at tau = 0");
        }
        let n = tau.len() - 1;
        let step = tau[n] / n as f64;
        if !(step > 0.0) || tau.iter().enumerate().any(|(k, t)| (t - k as f64 * step).abs() > 1e-9 * tau[n]) {
            return bad("sampled theta grid must be uniform and increasing");
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return bad("non-finite theta sample");
        }
        Ok(SampledTheta { step, values: theta.to_vec() })
    }

    pub fn half_width(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    fn node(&self, k: i64) -> f64 {
        if k < 0 {
            -self.values[(-k) as usize]
        } else {
            self.values[k as usize]
        }
    }

    pub fn derivs(&self, tau: f64) -> ThetaDerivs {
        let n = (self.values.len() - 1) as i64;
        let half = (STENCIL / 2) as i64;
        let centre = (tau / self.step).round() as i64;
        let first = (centre - half).min(n - 2 * half);
        let xs: Vec<f64> = (0..STENCIL as i64).map(|j| (first + j) as f64 * self.step).collect();
        let w = fornberg(tau, &xs, 3);
        let mut d = [0.0; 4];
        for (j, x) in (0..STENCIL as i64).map(|j| self.node(first + j)).enumerate() {
            for (order, acc) in d.iter_mut().enumerate() {
                *acc += w[order][j] * x;
            }
        }
        ThetaDerivs { theta: d[0], d1: d[1], d2: d[2], d3: d[3] }
    }
}

/// Finite-difference weights `c[k][j]` for the k-th derivative at `z` from
/// values at nodes `x[j]` (Fornberg's recursion).
pub(crate) fn fornberg(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Clone, Debug)]
pub enum ThetaSource {
    Analytic(Arc<dyn ThetaFunction>),
    Sampled(SampledTheta),
}

/// θ(τ) = u₁₂(τ, -τ) on `[0, T]`.
#[derive(Clone, Debug)]
pub struct ThetaSpec {
    half_width: f64,
    source: ThetaSource,
}

impl ThetaSpec {
    pub fn analytic(f: impl ThetaFunction + 'static, half_width: f64) -> Result<Self, ThetaError> {
        Self::checked(half_width, ThetaSource::Analytic(Arc::new(f)))
    }

    pub fn odd_poly(coeffs: Vec<f64>, half_width: f64) -> Result<Self, ThetaError> {
        Self::analytic(OddPolynomial::new(coeffs), half_width)
    }

    pub fn sine(amplitude: f64, frequency: f64, half_width: f64) -> Result<Self, ThetaError> {
        Self::analytic(SineTheta { amplitude, frequency }, half_width)
    }

    pub fn sampled(tau: &[f64], theta: &[f64]) -> Result<Self, ThetaError> {
        let s = SampledTheta::new(tau, theta)?;
        Self::checked(s.half_width(), ThetaSource::Sampled(s))
    }

    fn checked(half_width: f64, source: ThetaSource) -> Result<Self, ThetaError> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(ThetaError::InvalidSpec(format!("half width must be positive, got {half_width}")));
        }
        Ok(ThetaSpec { half_width, source })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn source(&self) -> &ThetaSource {
        &self.source
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.source, ThetaSource::Analytic(_))
    }

    pub fn derivs(&self, tau: f64) -> ThetaDerivs {
        match &self.source {
            ThetaSource::Analytic(f) => f.derivs(tau),
            ThetaSource::Sampled(s) => s.derivs(tau),
        }
    }
}

/// JSON form of a θ specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ThetaJson {
    Sampled {
        #[serde(rename = "T")]
        half_width: f64,
        tau: Vec<f64>,
        theta: Vec<f64>,
    },
    Analytic {
        #[serde(rename = "T", default = "default_half_width")]
        half_width: f64,
        #[serde(flatten)]
        family: ThetaFamily,
    },
}

fn default_half_width() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ThetaFamily {
    Poly { coeffs: Vec<f64> },
    Sine { amplitude: f64, frequency: f64 },
}

impl ThetaJson {
    pub fn into_spec(self) -> Result<ThetaSpec, ThetaError> {
        match self {
            ThetaJson::Sampled { half_width, tau, theta } => {
                let spec = ThetaSpec::sampled(&tau, &theta)?;
                if (spec.half_width() - half_width).abs() > 1e-9 * half_width.abs().max(1.0) {
                    return Err(ThetaError::InvalidSpec(format!(
                        "T = {half_width} does not match the last grid point {}",
                        spec.half_width()
                    )));
                }
                Ok(spec)
            }
            ThetaJson::Analytic { half_width, family: ThetaFamily::Poly { coeffs } } => {
                ThetaSpec::odd_poly(coeffs, half_width)
            }
            ThetaJson::Analytic { half_width, family: ThetaFamily::Sine { amplitude, frequency } } => {
                ThetaSpec::sine(amplitude, frequency, half_width)
            }
        }
    }
}
