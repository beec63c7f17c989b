//! Real 2×2 matrix algebra for linear canonical transformations of (q, p).
//!
//! Every evolution matrix in this crate is a [`Mat2`] acting on the column
//! vector `(q, p)ᵀ`. Symplecticity in two dimensions is just `det = 1`;
//! equidiagonal matrices (`u11 == u22`) form the family that is closed
//! under anticommutators and symmetric products.

use std::fmt;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance on `|det - 1|` for exactly constructed matrices.
pub const TOL_DET: f64 = 1e-9;
/// Default half-width of the `|Γ| = 2` threshold band.
pub const TOL_GAMMA: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Sym2Error {
    #[error("matrix is not symplectic: det = {det} (|det - 1| = {defect:.3e})")]
    NotSymplectic { det: f64, defect: f64 },
    #[error("matrix is defective at the stability threshold (trace {gamma}); only one eigenvector exists")]
    DefectiveMatrix { gamma: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
}

/// A real 2×2 matrix `[[u11, u12], [u21, u22]]`.
///
/// Serialized as a nested row array `[[u11, u12], [u21, u22]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Mat2 {
    pub u11: f64,
    pub u12: f64,
    pub u21: f64,
    pub u22: f64,
}

impl From<[[f64; 2]; 2]> for Mat2 {
    fn from(rows: [[f64; 2]; 2]) -> Self {
        Mat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }
}

impl From<Mat2> for [[f64; 2]; 2] {
    fn from(m: Mat2) -> Self {
        m.rows()
    }
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { u11: 1.0, u12: 0.0, u21: 0.0, u22: 1.0 };

    pub const fn new(u11: f64, u12: f64, u21: f64, u22: f64) -> Self {
        Mat2 { u11, u12, u21, u22 }
    }

    pub const fn identity() -> Self {
        Self::IDENTITY
    }

    pub const fn diag(a: f64, d: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, d)
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.u11, self.u12], [self.u21, self.u22]]
    }

    /// Entries in row-major order.
    pub fn to_array(&self) -> [f64; 4] {
        [self.u11, self.u12, self.u21, self.u22]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Mat2::new(a[0], a[1], a[2], a[3])
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        Mat2::new(
            self.u11 * other.u11 + self.u12 * other.u21,
            self.u11 * other.u12 + self.u12 * other.u22,
            self.u21 * other.u11 + self.u22 * other.u21,
            self.u21 * other.u12 + self.u22 * other.u22,
        )
    }

    pub fn det(&self) -> f64 {
        self.u11 * self.u22 - self.u12 * self.u21
    }

    pub fn trace(&self) -> f64 {
        self.u11 + self.u22
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.u11 * s, self.u12 * s, self.u21 * s, self.u22 * s)
    }

    /// `|det - 1|`.
    pub fn det_defect(&self) -> f64 {
        (self.det() - 1.0).abs()
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    pub fn is_equidiagonal(&self, tol: f64) -> bool {
        (self.u11 - self.u22).abs() <= tol
    }

    /// `a·b + b·a`.
    pub fn anticommutator(&self, other: &Mat2) -> Mat2 {
        self.mul(other) + other.mul(self)
    }

    /// Inverse of a unit-determinant matrix: swap the diagonal, negate the
    /// off-diagonal. Only the inverse when `det == 1`.
    pub fn symplectic_inverse(&self) -> Mat2 {
        Mat2::new(self.u22, -self.u12, -self.u21, self.u11)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Induced ∞-norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (self.u11.abs() + self.u12.abs()).max(self.u21.abs() + self.u22.abs())
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.to_array().iter().zip(other.to_array().iter()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Symplectic within `tol`, scaled by the squared entry magnitude for
    /// matrices whose entries exceed unity (the determinant of such a
    /// matrix cannot be computed more accurately than `ε·|u|²`).
    pub fn is_symplectic(&self, tol: f64) -> bool {
        self.is_finite() && self.det_defect() <= tol * self.max_abs().powi(2).max(1.0)
    }

    /// Eigenstructure with the default tolerances [`TOL_DET`] and [`TOL_GAMMA`].
    pub fn eigen(&self) -> Result<EigenStructure, Sym2Error> {
        self.eigen_with(TOL_DET, TOL_GAMMA)
    }

    /// Eigenvalues and left eigenrows, classified by the trace Γ.
    pub fn eigen_with(&self, tol_det: f64, tol_gamma: f64) -> Result<EigenStructure, Sym2Error> {
        if !self.is_finite() {
            return Err(Sym2Error::NonFinite);
        }
        if !self.is_symplectic(tol_det) {
            return Err(Sym2Error::NotSymplectic { det: self.det(), defect: self.det_defect() });
        }
        let gamma = self.trace();
        let abs_gamma = gamma.abs();

        if (abs_gamma - 2.0).abs() <= tol_gamma {
            let s = gamma.signum();
            let scalar = Mat2::diag(s, s);
            if self.max_abs_diff(&scalar) > tol_gamma.sqrt().max(1e-6) {
                return Err(Sym2Error::DefectiveMatrix { gamma });
            }
            let lambda = Complex64::new(s, 0.0);
            return Ok(EigenStructure {
                kind: EigenKind::RealUnit,
                sigma: 0.0,
                eigenvalues: [lambda, lambda],
                eigenrows: [
                    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                ],
            });
        }

        let (kind, sigma, eigenvalues) = if abs_gamma < 2.0 {
            let sigma = (gamma / 2.0).acos();
            (EigenKind::ComplexUnit, sigma, [Complex64::from_polar(1.0, sigma), Complex64::from_polar(1.0, -sigma)])
        } else {
            let sigma = (abs_gamma / 2.0).acosh();
            let s = gamma.signum();
            (
                EigenKind::RealReciprocal,
                sigma,
                [Complex64::new(s * (-sigma).exp(), 0.0), Complex64::new(s * sigma.exp(), 0.0)],
            )
        };
        let eigenrows = [self.left_eigenrow(eigenvalues[0]), self.left_eigenrow(eigenvalues[1])];
        Ok(EigenStructure { kind, sigma, eigenvalues, eigenrows })
    }

    /// Row vector `r` with `r·A = λ r`, normalized (see [`normalize_row`]).
    fn left_eigenrow(&self, lambda: Complex64) -> [Complex64; 2] {
        // r·(A - λI) = 0 has two (proportional) solutions; take the better conditioned one.
        let a = [Complex64::new(self.u21, 0.0), lambda - self.u11];
        let b = [lambda - self.u22, Complex64::new(self.u12, 0.0)];
        let na = a[0].norm().max(a[1].norm());
        let nb = b[0].norm().max(b[1].norm());
        normalize_row(if na >= nb { a } else { b })
    }
}

/// Scale so that the larger coefficient has modulus one, then rotate the
/// phase so that the first nonzero coefficient is real and positive.
pub fn normalize_row(row: [Complex64; 2]) -> [Complex64; 2] {
    let big = row[0].norm().max(row[1].norm());
    if big == 0.0 {
        return row;
    }
    let scaled = [row[0] / big, row[1] / big];
    let lead = if scaled[0].norm() > 1e-12 { scaled[0] } else { scaled[1] };
    let phase = lead.conj() / lead.norm();
    [scaled[0] * phase, scaled[1] * phase]
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::mul(&self, &rhs)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(self.u11 + rhs.u11, self.u12 + rhs.u12, self.u21 + rhs.u21, self.u22 + rhs.u22)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{:.6}, {:.6}], [{:.6}, {:.6}]]", self.u11, self.u12, self.u21, self.u22)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenKind {
    /// Eigenvalues `e^{±iσ}`, `0 < σ < π`.
    ComplexUnit,
    /// Both eigenvalues `+1` or both `-1`.
    RealUnit,
    /// Eigenvalues `±e^{-σ}`, `±e^{σ}`, `σ > 0`.
    RealReciprocal,
}

/// Eigenvalues and normalized left eigenrows `(c_q, c_p)`.
///
/// Ordering: for `RealReciprocal` the contracting pair (`|λ| = e^{-σ}`)
/// comes first; for `ComplexUnit` the `e^{+iσ}` pair comes first.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenStructure {
    pub kind: EigenKind,
    pub sigma: f64,
    #[serde(with = "complex_pair")]
    pub eigenvalues: [Complex64; 2],
    #[serde(with = "complex_rows")]
    pub eigenrows: [[Complex64; 2]; 2],
}

impl EigenStructure {
    /// Real eigenrows, available for the real kinds.
    pub fn real_rows(&self) -> Option<[[f64; 2]; 2]> {
        match self.kind {
            EigenKind::ComplexUnit => None,
            _ => Some([
                [self.eigenrows[0][0].re, self.eigenrows[0][1].re],
                [self.eigenrows[1][0].re, self.eigenrows[1][1].re],
            ]),
        }
    }

    /// `(λ⁻, λ⁺)` for the real reciprocal case.
    pub fn real_pair(&self) -> Option<(f64, f64)> {
        match self.kind {
            EigenKind::ComplexUnit => None,
            _ => Some((self.eigenvalues[0].re, self.eigenvalues[1].re)),
        }
    }
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64; 2], s: S) -> Result<S::Ok, S::Error> {
        [[v[0].re, v[0].im], [v[1].re, v[1].im]].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Complex64; 2], D::Error> {
        let a = <[[f64; 2]; 2]>::deserialize(d)?;
        Ok([Complex64::new(a[0][0], a[0][1]), Complex64::new(a[1][0], a[1][1])])
    }
}

mod complex_rows {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    type Rows = [[Complex64; 2]; 2];

    pub fn serialize<S: Serializer>(v: &Rows, s: S) -> Result<S::Ok, S::Error> {
        let flat: [[[f64; 2]; 2]; 2] = [
            [[v[0][0].re, v[0][0].im], [v[0][1].re, v[0][1].im]],
            [[v[1][0].re, v[1][0].im], [v[1][1].re, v[1][1].im]],
        ];
        flat.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rows, D::Error> {
        let a = <[[[f64; 2]; 2]; 2]>::deserialize(d)?;
        let c = |p: [f64; 2]| Complex64::new(p[0], p[1]);
        Ok([[c(a[0][0]), c(a[0][1])], [c(a[1][0]), c(a[1][1])]])
    }
}
