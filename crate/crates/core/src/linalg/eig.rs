use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lu::LuFactors;
use super::{ComplexMatrix, ComplexVector, LinalgError, C64, ONE, ZERO};

/// Controls for [`eig_complex_with`].
#[derive(Debug, Clone, Copy)]
pub struct EigOptions {
    /// Relative residual tolerance: `‖A v − λ v‖ ≤ tol · ‖A‖`.
    pub tol: f64,
    /// Seed for the randomized restart of inverse iteration.
    pub seed: u64,
    /// QR sweep budget per matrix dimension.
    pub sweeps_per_dim: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            tol: super::DEFAULT_TOL,
            seed: 0x6e68_7068_6173_6500,
            sweeps_per_dim: 100,
        }
    }
}

/// Eigenvalues with unit-norm right eigenvectors, sorted by `(re, im)`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
    pub right_vectors: Vec<ComplexVector>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest `‖A v_k − λ_k v_k‖` over all pairs.
    pub fn max_residual(&self, a: &ComplexMatrix) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.right_vectors)
            .map(|(&l, v)| residual(a, l, v.as_slice()))
            .fold(0.0, f64::max)
    }
}

pub fn eig_complex(a: &ComplexMatrix, tol: f64) -> Result<Spectrum, LinalgError> {
    eig_complex_with(
        a,
        &EigOptions {
            tol,
            ..EigOptions::default()
        },
    )
}

pub fn eig_complex_with(a: &ComplexMatrix, opts: &EigOptions) -> Result<Spectrum, LinalgError> {
    let values = eigenvalues_with(a, opts.sweeps_per_dim)?;
    let n = a.rows();
    let eps = f64::EPSILON;
    let norm_a = a.norm();
    let floor = eps * norm_a;
    let cluster_tol = 1e3 * eps * norm_a;
    let target = opts.tol * norm_a;

    if norm_a == 0.0 {
        return Ok(Spectrum {
            eigenvalues: values,
            right_vectors: (0..n).map(|k| ComplexVector::basis(n, k)).collect(),
        });
    }
    let mut vectors: Vec<ComplexVector> = Vec::with_capacity(n);
    for (k, &lambda) in values.iter().enumerate() {
        let cluster: Vec<usize> = (0..k)
            .filter(|&j| (values[j] - lambda).norm() <= cluster_tol)
            .collect();
        let lu = LuFactors::new_regularized(&a.shifted(-lambda), floor);

        let mut x = vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        let mut y = vec![ZERO; n];
        let mut best_residual = f64::INFINITY;
        let mut found = None;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (k as u64).wrapping_mul(0x9e37_79b9));
        'attempts: for attempt in 0..2 {
            if attempt > 0 {
                for z in x.iter_mut() {
                    *z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            for _ in 0..8 {
                lu.solve_into(&x, &mut y);
                let before = l2(&y);
                for _ in 0..2 {
                    for &j in &cluster {
                        let v = vectors[j].as_slice();
                        let proj = super::inner_unchecked(v, &y);
                        for (yi, vi) in y.iter_mut().zip(v) {
                            *yi -= proj * vi;
                        }
                    }
                }
                let norm = l2(&y);
                // collapsed onto an earlier vector of the cluster
                if norm <= 1e-8 * before || !norm.is_finite() {
                    continue 'attempts;
                }
                for (xi, yi) in x.iter_mut().zip(&y) {
                    *xi = yi / norm;
                }
                let r = residual(a, lambda, &x);
                best_residual = best_residual.min(r);
                if r <= target {
                    found = Some(x.clone());
                    break 'attempts;
                }
            }
        }
        let mut v = found.ok_or(LinalgError::EigenvectorNoConvergence {
            index: k,
            residual: best_residual,
        })?;
        fix_phase(&mut v);
        vectors.push(ComplexVector::new(v));
    }

    Ok(Spectrum {
        eigenvalues: values,
        right_vectors: vectors,
    })
}

/// Eigenvalues only, sorted by `(re, im)`.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>, LinalgError> {
    eigenvalues_with(a, EigOptions::default().sweeps_per_dim)
}

fn eigenvalues_with(a: &ComplexMatrix, sweeps_per_dim: usize) -> Result<Vec<C64>, LinalgError> {
    let n = a.check_square()?;
    if n == 0 {
        return Err(LinalgError::EmptyMatrix);
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let mut h = a.as_slice().to_vec();
    hessenberg(&mut h, n);
    let mut values = hessenberg_qr(&mut h, n, sweeps_per_dim * n, a.norm())?;
    values.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(values)
}

/// Householder reduction to upper Hessenberg form, in place.
fn hessenberg(h: &mut [C64], n: usize) {
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let m = n - k - 1;
        for i in 0..m {
            v[i] = h[(k + 1 + i) * n + k];
        }
        let xnorm = l2(&v[..m]);
        if xnorm == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm2: f64 = v[..m].iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // left: rows k+1.., columns k..
        for j in k..n {
            let mut s = ZERO;
            for i in 0..m {
                s += v[i].conj() * h[(k + 1 + i) * n + j];
            }
            s *= beta;
            for i in 0..m {
                h[(k + 1 + i) * n + j] -= v[i] * s;
            }
        }
        // right: all rows, columns k+1..
        for i in 0..n {
            let mut s = ZERO;
            for j in 0..m {
                s += h[i * n + k + 1 + j] * v[j];
            }
            s *= beta;
            for j in 0..m {
                h[i * n + k + 1 + j] -= s * v[j].conj();
            }
        }
        h[(k + 1) * n + k] = alpha;
        for i in 1..m {
            h[(k + 1 + i) * n + k] = ZERO;
        }
    }
}

/// Complex rotation `G = [[c, s], [-conj(s), c]]` with `G [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, ONE);
    }
    let r = an.hypot(bn);
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

/// Single-shift QR on an upper Hessenberg matrix; eigenvalues only.
fn hessenberg_qr(h: &mut [C64], n: usize, max_sweeps: usize, norm: f64) -> Result<Vec<C64>, LinalgError> {
    let eps = f64::EPSILON;
    let at = |i: usize, j: usize| i * n + j;
    let mut values = vec![ZERO; n];
    let mut rot: Vec<(f64, C64)> = vec![(1.0, ZERO); n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut sweeps = 0usize;
    loop {
        if hi == 0 {
            values[0] = h[at(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let mut s = h[at(l - 1, l - 1)].norm() + h[at(l, l)].norm();
            if s == 0.0 {
                s = norm;
            }
            if h[at(l, l - 1)].norm() <= eps * s {
                h[at(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            values[hi] = h[at(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }

        sweeps += 1;
        iter += 1;
        if sweeps > max_sweeps {
            return Err(LinalgError::EigNoConvergence { sweeps: max_sweeps });
        }

        let a = h[at(hi - 1, hi - 1)];
        let b = h[at(hi - 1, hi)];
        let c = h[at(hi, hi - 1)];
        let d = h[at(hi, hi)];
        let mu = if iter % 10 == 0 {
            // exceptional shift to break cycles
            d + C64::new(0.75 * c.norm(), 0.0)
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m = (a + d) * 0.5;
            let (r1, r2) = (m + disc, m - disc);
            if (r1 - d).norm() <= (r2 - d).norm() {
                r1
            } else {
                r2
            }
        };

        for k in l..=hi {
            h[at(k, k)] -= mu;
        }
        for k in l..hi {
            let (cs, sn) = givens(h[at(k, k)], h[at(k + 1, k)]);
            rot[k] = (cs, sn);
            for j in k..=hi {
                let x = h[at(k, j)];
                let y = h[at(k + 1, j)];
                h[at(k, j)] = x * cs + sn * y;
                h[at(k + 1, j)] = -sn.conj() * x + y * cs;
            }
            h[at(k + 1, k)] = ZERO;
        }
        for k in l..hi {
            let (cs, sn) = rot[k];
            for i in l..=(k + 1) {
                let x = h[at(i, k)];
                let y = h[at(i, k + 1)];
                h[at(i, k)] = x * cs + y * sn.conj();
                h[at(i, k + 1)] = -x * sn + y * cs;
            }
        }
        for k in l..=hi {
            h[at(k, k)] += mu;
        }
    }
    Ok(values)
}

fn l2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn residual(a: &ComplexMatrix, lambda: C64, v: &[C64]) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        let mut acc = -lambda * v[i];
        for (aij, vj) in a.row(i).iter().zip(v) {
            acc += aij * vj;
        }
        s += acc.norm_sqr();
    }
    s.sqrt()
}

/// Makes the largest-modulus component real and positive.
fn fix_phase(v: &mut [C64]) {
    let k = ComplexVector::new(v.to_vec()).argmax_abs();
    let z = v[k];
    if z.norm() > 0.0 {
        let p = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= p;
        }
    }
}
