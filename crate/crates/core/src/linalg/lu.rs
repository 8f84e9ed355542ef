use super::{ComplexMatrix, ComplexVector, LinalgError, C64, ZERO};

/// Packed LU factors with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl LuFactors {
    /// Factorizes `a`, failing with `SingularMatrix` when a pivot drops below
    /// `n · ε · max|a_ij|`.
    pub fn new(a: &ComplexMatrix) -> Result<Self, LinalgError> {
        let n = a.check_square()?;
        if n == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        if !a.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let threshold = n as f64 * f64::EPSILON * a.max_abs();
        Self::factor(a, threshold, None)
    }

    /// Factorization that never fails on small pivots: any pivot below
    /// `floor` is replaced by `floor`. Used by inverse iteration where the
    /// shifted matrix is singular on purpose.
    pub(crate) fn new_regularized(a: &ComplexMatrix, floor: f64) -> Self {
        Self::factor(a, 0.0, Some(floor)).expect("regularized LU cannot fail")
    }

    fn factor(a: &ComplexMatrix, threshold: f64, floor: Option<f64>) -> Result<Self, LinalgError> {
        let n = a.rows();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].norm();
            for i in (k + 1)..n {
                let v = lu[i * n + k].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot_abs = lu[k * n + k].norm();
            if pivot_abs <= threshold || pivot_abs == 0.0 {
                match floor {
                    Some(f) => {
                        let phase = if pivot_abs == 0.0 {
                            C64::new(1.0, 0.0)
                        } else {
                            lu[k * n + k] / pivot_abs
                        };
                        lu[k * n + k] = phase * f.max(pivot_abs);
                    }
                    None => {
                        return Err(LinalgError::SingularMatrix {
                            column: k,
                            pivot: pivot_abs,
                        })
                    }
                }
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor != ZERO {
                    for j in (k + 1)..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= factor * u;
                    }
                }
            }
        }
        Ok(LuFactors { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &ComplexVector) -> Result<ComplexVector, LinalgError> {
        if b.dim() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                found: b.dim(),
            });
        }
        let mut x: Vec<C64> = vec![ZERO; self.n];
        self.solve_into(b.as_slice(), &mut x);
        Ok(ComplexVector::new(x))
    }

    pub(crate) fn solve_into(&self, b: &[C64], x: &mut [C64]) {
        let n = self.n;
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
        if b.rows() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                found: b.rows(),
            });
        }
        let mut out = ComplexMatrix::zeros(b.rows(), b.cols());
        let mut col = vec![ZERO; self.n];
        let mut x = vec![ZERO; self.n];
        for j in 0..b.cols() {
            for i in 0..self.n {
                col[i] = b[(i, j)];
            }
            self.solve_into(&col, &mut x);
            for i in 0..self.n {
                out[(i, j)] = x[i];
            }
        }
        Ok(out)
    }
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn lu_solve(a: &ComplexMatrix, b: &ComplexVector) -> Result<ComplexVector, LinalgError> {
    let n = a.check_square()?;
    if b.dim() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: b.dim(),
        });
    }
    LuFactors::new(a)?.solve(b)
}
