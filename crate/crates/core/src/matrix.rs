//! Dense complex matrices with certified Hermiticity, plus the repo-wide
//! matrix JSON schema `{"n": int, "entries": [[[re, im], ...], ...]}`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// General dense complex matrix (isometries, eigenbases, intermediate products).
pub type CMatrix = DMatrix<Complex64>;

/// Relative Hermiticity tolerance applied at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A square complex matrix equal to its conjugate transpose.
///
/// Construction through [`HermitianMatrix::new`] checks
/// `max |A[i][j] - conj(A[j][i])| <= 1e-12 * (1 + max |A[i][j]|)` and then
/// stores the exact Hermitian part `(A + A*) / 2`, so every stored value is
/// exactly self-adjoint in floating point.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    out
}

pub(crate) fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() == 0 {
            return Err(Error::InvalidMatrix("dimension must be at least 1".into()));
        }
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        let n = m.nrows();
        let mut deviation = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                deviation = deviation.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        let allowed = HERMITIAN_TOL * (1.0 + max_abs_entry(&m));
        if deviation > allowed {
            return Err(Error::NotHermitian { deviation, allowed });
        }
        Ok(Self {
            inner: hermitian_part(&m),
        })
    }

    /// Wraps a product that is Hermitian in exact arithmetic, discarding the
    /// anti-Hermitian rounding residue.
    pub(crate) fn from_computed(m: CMatrix) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self {
            inner: hermitian_part(&m),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        assert!(!diag.is_empty(), "diagonal must be non-empty");
        let n = diag.len();
        Self {
            inner: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(diag[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            inner: CMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.inner[(i, i)].re).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            inner: &self.inner * Complex64::new(s, 0.0),
        }
    }

    /// `A + s I`.
    pub fn shift(&self, s: f64) -> Self {
        let mut inner = self.inner.clone();
        for i in 0..self.dim() {
            inner[(i, i)] += Complex64::new(s, 0.0);
        }
        Self { inner }
    }

    /// `A · B`, which is Hermitian only when the factors commute.
    pub fn product(&self, other: &HermitianMatrix) -> CMatrix {
        &self.inner * &other.inner
    }

    /// `A²`.
    pub fn square(&self) -> Self {
        Self::from_computed(&self.inner * &self.inner)
    }

    /// `A^k` by binary exponentiation; `A^0 = I`.
    pub fn powi(&self, k: u32) -> Self {
        let mut result = CMatrix::identity(self.dim(), self.dim());
        let mut base = self.inner.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Self::from_computed(result)
    }

    /// Congruence `V* A V` for an `n x k` matrix `V`.
    pub fn congruence(&self, v: &CMatrix) -> Result<Self> {
        if v.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.nrows(),
            });
        }
        Ok(Self::from_computed(v.adjoint() * &self.inner * v))
    }

    /// `S A S` for Hermitian `S`.
    pub fn sandwich_by(&self, s: &HermitianMatrix) -> Result<Self> {
        self.check_same_dim(s)?;
        Ok(Self::from_computed(&s.inner * &self.inner * &s.inner))
    }

    pub fn max_abs(&self) -> f64 {
        max_abs_entry(&self.inner)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `A - B`.
    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).norm()))
    }

    pub fn check_same_dim(&self, other: &HermitianMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &HermitianMatrix) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            inner: &self.inner + &other.inner,
        })
    }

    pub fn try_sub(&self, other: &HermitianMatrix) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            inner: &self.inner - &other.inner,
        })
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_matrix(&self.inner)
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;

    /// Panics on dimension mismatch; use [`HermitianMatrix::try_add`] for
    /// checked addition.
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        self.try_add(rhs).expect("dimension mismatch in matrix addition")
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        self.try_sub(rhs)
            .expect("dimension mismatch in matrix subtraction")
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

/// Wire form of a dense complex matrix: `n` rows, entries row-major as
/// `[re, im]` pairs. Rectangular matrices (isometries) use the row length
/// as the column count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let entries = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| [m[(i, j)].re, m[(i, j)].im])
                    .collect()
            })
            .collect();
        Self {
            n: m.nrows(),
            entries,
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.n {
            return Err(Error::InvalidMatrix(format!(
                "\"n\" = {} but {} rows given",
                self.n,
                self.entries.len()
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidMatrix("dimension must be at least 1".into()));
        }
        let cols = self.entries[0].len();
        if cols == 0 || self.entries.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidMatrix("ragged or empty rows".into()));
        }
        Ok(CMatrix::from_fn(self.n, cols, |i, j| {
            let [re, im] = self.entries[i][j];
            Complex64::new(re, im)
        }))
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = MatrixJson::deserialize(d)?;
        let m = json.to_matrix().map_err(serde::de::Error::custom)?;
        HermitianMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// Gram matrix deviation `max |V*V - I|`.
pub fn isometry_defect(v: &CMatrix) -> f64 {
    let g = v.adjoint() * v;
    let k = g.nrows();
    let mut worst = 0.0_f64;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}
