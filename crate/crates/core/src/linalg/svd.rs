use super::{ComplexMatrix, ComplexVector, LinalgError, C64, ZERO};

/// Thin singular value decomposition `A = U Σ V†`, singular values descending.
///
/// Columns of `u` belonging to zero singular values are left as zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn min_singular_value(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `cutoff`.
    pub fn rank(&self, cutoff: f64) -> usize {
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }

    /// Minimum-norm least-squares solution, discarding singular values at or
    /// below `cutoff`.
    pub fn pinv_solve(&self, b: &ComplexVector, cutoff: f64) -> Result<ComplexVector, LinalgError> {
        if b.dim() != self.u.rows() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.u.rows(),
                found: b.dim(),
            });
        }
        let mut x = ComplexVector::zeros(self.v.rows());
        for (k, &s) in self.singular_values.iter().enumerate() {
            if s <= cutoff {
                continue;
            }
            let mut coef = ZERO;
            for i in 0..self.u.rows() {
                coef += self.u[(i, k)].conj() * b[i];
            }
            coef /= s;
            for i in 0..self.v.rows() {
                x[i] += self.v[(i, k)] * coef;
            }
        }
        Ok(x)
    }
}

/// One-sided Jacobi SVD.
pub fn svd(a: &ComplexMatrix) -> Result<Svd, LinalgError> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(LinalgError::EmptyMatrix);
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint())?;
        return Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        });
    }
    let m = a.rows();
    let n = a.cols();
    // work column-major
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j).into_vec()).collect();
    let mut v: Vec<Vec<C64>> = (0..n).map(|j| ComplexVector::basis(n, j).into_vec()).collect();
    let eps = f64::EPSILON;

    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let e = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s, e);
                rotate(&mut v, p, q, c, s, e);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(f64, usize)> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(), j))
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut u = ComplexMatrix::zeros(m, n);
    let mut vm = ComplexMatrix::zeros(n, n);
    let mut sv = Vec::with_capacity(n);
    for (k, &(s, j)) in order.iter().enumerate() {
        sv.push(s);
        if s > 0.0 {
            for i in 0..m {
                u[(i, k)] = cols[j][i] / s;
            }
        }
        for i in 0..n {
            vm[(i, k)] = v[j][i];
        }
    }
    Ok(Svd {
        u,
        singular_values: sv,
        v: vm,
    })
}

fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, e: C64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * e;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}
