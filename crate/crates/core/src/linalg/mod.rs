//! Small dense complex linear algebra.
//!
//! Everything here is sized for desk-scale problems (N up to a few dozen):
//! row-major storage, no blocking, no BLAS. The eigensolver reduces to
//! Hessenberg form, runs a single-shift QR iteration for eigenvalues and
//! recovers eigenvectors by inverse iteration.

mod eig;
mod expm;
mod lu;
mod svd;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub use eig::{eig_complex, eig_complex_with, eigenvalues, EigOptions, Spectrum};
pub use expm::expm;
pub use lu::{lu_solve, LuFactors};
pub use svd::{svd, Svd};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default relative tolerance for eigen residuals.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular to working precision (pivot {pivot:e} in column {column})")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("QR iteration did not converge within {sweeps} sweeps")]
    EigNoConvergence { sweeps: usize },
    #[error("inverse iteration for eigenvalue {index} stalled with residual {residual:e}")]
    EigenvectorNoConvergence { index: usize, residual: f64 },
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("non-finite entry in input")]
    NonFinite,
}

/// Column vector of complex entries.
#[derive(Clone, PartialEq, Default)]
pub struct ComplexVector(Vec<C64>);

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Self {
        ComplexVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexVector(vec![ZERO; dim])
    }

    /// Unit vector `e_k` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = ONE;
        v
    }

    pub fn from_real(entries: &[f64]) -> Self {
        ComplexVector(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        // scaled to avoid overflow on large entries
        let scale = self.0.iter().fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return scale;
        }
        let s: f64 = self.0.iter().map(|z| (z / scale).norm_sqr()).sum();
        scale * s.sqrt()
    }

    pub fn scale(&self, c: C64) -> Self {
        ComplexVector(self.0.iter().map(|z| z * c).collect())
    }

    pub fn scale_mut(&mut self, c: C64) {
        for z in &mut self.0 {
            *z *= c;
        }
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: C64, other: &ComplexVector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += c * b;
        }
    }

    /// Returns a unit-norm copy; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Index of the entry with the largest modulus (first one on ties).
    pub fn argmax_abs(&self) -> usize {
        let mut best = 0;
        let mut best_val = -1.0;
        for (k, z) in self.0.iter().enumerate() {
            let a = z.norm_sqr();
            if a > best_val {
                best = k;
                best_val = a;
            }
        }
        best
    }

    pub fn conj(&self) -> Self {
        ComplexVector(self.0.iter().map(|z| z.conj()).collect())
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, k: usize) -> &C64 {
        &self.0[k]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, k: usize) -> &mut C64 {
        &mut self.0[k]
    }
}

impl From<Vec<C64>> for ComplexVector {
    fn from(v: Vec<C64>) -> Self {
        ComplexVector(v)
    }
}

impl FromIterator<C64> for ComplexVector {
    fn from_iter<T: IntoIterator<Item = C64>>(iter: T) -> Self {
        ComplexVector(iter.into_iter().collect())
    }
}

impl<'a> Add<&'a ComplexVector> for &'a ComplexVector {
    type Output = ComplexVector;
    fn add(self, rhs: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect()
    }
}

impl<'a> Sub<&'a ComplexVector> for &'a ComplexVector {
    type Output = ComplexVector;
    fn sub(self, rhs: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a - b).collect()
    }
}

impl Neg for &ComplexVector {
    type Output = ComplexVector;
    fn neg(self) -> ComplexVector {
        self.0.iter().map(|a| -a).collect()
    }
}

/// `⟨a|b⟩ = Σ conj(a_k) b_k`, conjugate-linear in the first slot.
pub fn inner(a: &ComplexVector, b: &ComplexVector) -> Result<C64, LinalgError> {
    if a.dim() != b.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(inner_unchecked(a.as_slice(), b.as_slice()))
}

#[inline]
pub(crate) fn inner_unchecked(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if rows * cols != data.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(LinalgError::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(ComplexMatrix { rows: r, cols: c, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (k, &z) in entries.iter().enumerate() {
            m[(k, k)] = z;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[ComplexVector]) -> Result<Self, LinalgError> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.dim());
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            if c.dim() != rows {
                return Err(LinalgError::DimensionMismatch {
                    expected: rows,
                    found: c.dim(),
                });
            }
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        Ok(m)
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &ComplexVector, b: &ComplexVector) -> Self {
        Self::from_fn(a.dim(), b.dim(), |i, j| a[i] * b[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &ComplexVector) {
        assert_eq!(v.dim(), self.rows, "column length mismatch");
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &ComplexVector) -> Result<ComplexVector, LinalgError> {
        if self.cols != v.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: v.dim(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.as_slice())
                    .fold(ZERO, |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    /// Frobenius norm; this is the `‖A‖` used in every relative tolerance.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn scale(&self, c: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|k| self[(k, k)]).sum()
    }

    /// `self + c * I`
    pub fn shifted(&self, c: C64) -> Self {
        let mut m = self.clone();
        for k in 0..self.rows.min(self.cols) {
            m[(k, k)] += c;
        }
        m
    }

    fn zip_with(&self, other: &ComplexMatrix, f: impl Fn(C64, C64) -> C64) -> Self {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "matrix shape mismatch: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub(crate) fn check_square(&self) -> Result<usize, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(self.rows)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl<'a> Mul<&'a ComplexVector> for &'a ComplexMatrix {
    type Output = ComplexVector;
    fn mul(self, rhs: &ComplexVector) -> ComplexVector {
        self.matvec(rhs).expect("matrix-vector shape mismatch")
    }
}
