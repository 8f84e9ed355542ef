//! Biorthonormal eigensystems of non-Hermitian matrices and their continuation
//! along closed paths.

use crate::assign::{hungarian, min_swap_gap};
use crate::error::{Error, Result};
use crate::linalg::{
    eig_complex_with, inner, ComplexMatrix, ComplexVector, EigOptions, C64, DEFAULT_TOL,
};
use crate::path::{HamiltonianPath, MIN_PATH_SAMPLES};

/// Relative spectral gap below which a matrix counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// `H ψ_n = E_n ψ_n`, `H† φ_n = E_n* φ_n`, `⟨φ_m|ψ_n⟩ = δ_mn`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiorthonormalSystem {
    pub eigenvalues: Vec<C64>,
    pub right_vectors: Vec<ComplexVector>,
    pub left_vectors: Vec<ComplexVector>,
}

impl BiorthonormalSystem {
    /// Assembles a system from given parts, checking only shapes.
    pub fn from_parts(
        eigenvalues: Vec<C64>,
        right_vectors: Vec<ComplexVector>,
        left_vectors: Vec<ComplexVector>,
    ) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 {
            return Err(Error::invalid("eigenvalues", "empty system"));
        }
        if right_vectors.len() != n || left_vectors.len() != n {
            return Err(Error::invalid("vectors", "one right and one left vector per eigenvalue"));
        }
        if right_vectors.iter().chain(&left_vectors).any(|v| v.dim() != n) {
            return Err(Error::invalid("vectors", format!("all vectors must have dimension {n}")));
        }
        Ok(BiorthonormalSystem {
            eigenvalues,
            right_vectors,
            left_vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max_{m,n} |⟨φ_m|ψ_n⟩ − δ_mn|`.
    pub fn biorthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for m in 0..n {
            for k in 0..n {
                let ov = crate::linalg::inner_unchecked(
                    self.left_vectors[m].as_slice(),
                    self.right_vectors[k].as_slice(),
                );
                let target = if m == k { 1.0 } else { 0.0 };
                worst = worst.max((ov - target).norm());
            }
        }
        worst
    }

    /// `max_n ‖H ψ_n − E_n ψ_n‖`.
    pub fn right_residual(&self, h: &ComplexMatrix) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (e, v) in self.eigenvalues.iter().zip(&self.right_vectors) {
            let hv = h.matvec(v)?;
            worst = worst.max((&hv - &v.scale(*e)).norm());
        }
        Ok(worst)
    }

    /// `max_n ‖H† φ_n − E_n* φ_n‖`.
    pub fn left_residual(&self, h: &ComplexMatrix) -> Result<f64> {
        let ha = h.adjoint();
        let mut worst: f64 = 0.0;
        for (e, v) in self.eigenvalues.iter().zip(&self.left_vectors) {
            let hv = ha.matvec(v)?;
            worst = worst.max((&hv - &v.scale(e.conj())).norm());
        }
        Ok(worst)
    }

    /// Gauge change `ψ_n → c ψ_n`, `φ_n → φ_n / c*`.
    pub fn rescale(&mut self, n: usize, c: C64) -> Result<()> {
        if n >= self.dim() {
            return Err(Error::InvalidMode { mode: n, dim: self.dim() });
        }
        if c.norm() == 0.0 || !c.is_finite() {
            return Err(Error::invalid("scale", "gauge factor must be finite and nonzero"));
        }
        self.right_vectors[n].scale_mut(c);
        self.left_vectors[n].scale_mut(C64::new(1.0, 0.0) / c.conj());
        Ok(())
    }

    /// `|ψ_n⟩⟨φ_n|`
    pub fn projector(&self, n: usize) -> ComplexMatrix {
        ComplexMatrix::outer(&self.right_vectors[n], &self.left_vectors[n])
    }

    pub fn min_gap(&self) -> f64 {
        min_gap(&self.eigenvalues)
    }
}

fn min_gap(values: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    gap
}

pub fn build_system(h: &ComplexMatrix, tol: f64) -> Result<BiorthonormalSystem> {
    build_system_with(
        h,
        &EigOptions {
            tol,
            ..EigOptions::default()
        },
    )
}

/// Right vectors from `eig(H)`, left vectors from `eig(H†)` paired by nearest
/// conjugate eigenvalue, then scaled so that `⟨φ_n|ψ_n⟩ = 1`.
pub fn build_system_with(h: &ComplexMatrix, opts: &EigOptions) -> Result<BiorthonormalSystem> {
    let scale = h.norm().max(1.0);
    let right = eig_complex_with(h, opts)?;
    let n = right.len();
    let gap = min_gap(&right.eigenvalues);
    let threshold = DEGENERACY_TOL * scale;
    if n > 1 && gap <= threshold {
        return Err(Error::DegenerateSpectrum { gap, threshold });
    }
    let left = eig_complex_with(&h.adjoint(), opts)?;
    let targets: Vec<C64> = left.eigenvalues.iter().map(|z| z.conj()).collect();

    let mut used = vec![false; n];
    let mut left_vectors = Vec::with_capacity(n);
    for (i, &e) in right.eigenvalues.iter().enumerate() {
        let mut order: Vec<(f64, usize)> = targets.iter().map(|t| (t - e).norm()).zip(0..).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let k = order[0].1;
        if (n > 1 && order[1].0 - order[0].0 <= opts.tol * scale) || used[k] {
            return Err(Error::PairingAmbiguous { index: i });
        }
        used[k] = true;
        let phi = &left.right_vectors[k];
        let ov = inner(phi, &right.right_vectors[i])?;
        if ov.norm() <= 1e3 * f64::EPSILON {
            return Err(Error::SelfOrthogonal { index: i });
        }
        left_vectors.push(phi.scale(C64::new(1.0, 0.0) / ov.conj()));
    }

    Ok(BiorthonormalSystem {
        eigenvalues: right.eigenvalues,
        right_vectors: right.right_vectors,
        left_vectors,
    })
}

/// `‖Σ_n |ψ_n⟩⟨φ_n| − I‖` in the Frobenius norm.
pub fn completeness_defect(sys: &BiorthonormalSystem) -> f64 {
    let n = sys.dim();
    let mut acc = ComplexMatrix::identity(n).scale(C64::new(-1.0, 0.0));
    for k in 0..n {
        acc = &acc + &sys.projector(k);
    }
    acc.norm()
}

/// Label-tracked, gauge-smoothed biorthonormal frames over one period.
#[derive(Debug, Clone)]
pub struct SystemPath {
    pub period: f64,
    pub hamiltonians: Vec<ComplexMatrix>,
    pub systems: Vec<BiorthonormalSystem>,
    /// Per-mode phase `β_n = arg⟨ψ_n(t_{N−1})|ψ_n(t_0)⟩` of the transported
    /// frame, removed by spreading `e^{iβ_n k/N}` over the samples.
    pub holonomy: Vec<f64>,
}

impl SystemPath {
    /// Wraps frames that are already single-valued and continuous, such as
    /// closed-form ones. Holonomy is zero.
    pub fn from_frames(
        period: f64,
        hamiltonians: Vec<ComplexMatrix>,
        systems: Vec<BiorthonormalSystem>,
    ) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::invalid("period", format!("must be positive and finite, got {period}")));
        }
        if systems.len() < MIN_PATH_SAMPLES || systems.len() != hamiltonians.len() {
            return Err(Error::invalid(
                "systems",
                format!(
                    "need at least {MIN_PATH_SAMPLES} systems, one per Hamiltonian sample (got {} and {})",
                    systems.len(),
                    hamiltonians.len()
                ),
            ));
        }
        let dim = systems[0].dim();
        if systems.iter().any(|s| s.dim() != dim) || hamiltonians.iter().any(|h| h.rows() != dim || h.cols() != dim) {
            return Err(Error::invalid("systems", "inconsistent dimensions"));
        }
        Ok(SystemPath {
            period,
            hamiltonians,
            systems,
            holonomy: vec![0.0; dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.systems[0].dim()
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.period / self.len() as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| k as f64 * self.dt()).collect()
    }

    pub fn check_mode(&self, m: usize) -> Result<()> {
        if m >= self.dim() {
            Err(Error::InvalidMode { mode: m, dim: self.dim() })
        } else {
            Ok(())
        }
    }

    pub fn eigenvalue_series(&self, m: usize) -> Vec<C64> {
        self.systems.iter().map(|s| s.eigenvalues[m]).collect()
    }

    pub fn right_series(&self, m: usize) -> Vec<ComplexVector> {
        self.systems.iter().map(|s| s.right_vectors[m].clone()).collect()
    }

    pub fn left_series(&self, m: usize) -> Vec<ComplexVector> {
        self.systems.iter().map(|s| s.left_vectors[m].clone()).collect()
    }

    /// Smallest instantaneous gap over all samples.
    pub fn min_gap(&self) -> f64 {
        self.systems.iter().map(|s| s.min_gap()).fold(f64::INFINITY, f64::min)
    }

    /// Applies the gauge change `ψ_n(t_k) → g(k, n) ψ_n(t_k)` with the
    /// matching change of the left vectors.
    pub fn with_gauge(&self, g: impl Fn(usize, usize) -> C64) -> Result<SystemPath> {
        let mut out = self.clone();
        for (k, sys) in out.systems.iter_mut().enumerate() {
            for n in 0..sys.dim() {
                sys.rescale(n, g(k, n))?;
            }
        }
        Ok(out)
    }
}

pub fn build_system_path(path: &HamiltonianPath, tol: f64) -> Result<SystemPath> {
    build_system_path_with(
        path,
        &EigOptions {
            tol,
            ..EigOptions::default()
        },
    )
}

pub fn build_system_path_with(path: &HamiltonianPath, opts: &EigOptions) -> Result<SystemPath> {
    let hs = path.samples();
    let count = hs.len();
    let mut systems = Vec::with_capacity(count);
    for (k, h) in hs.iter().enumerate() {
        systems.push(build_system_with(h, opts).map_err(Error::at_sample(k))?);
    }
    let dim = systems[0].dim();
    let scale = hs.iter().map(|h| h.norm()).fold(1.0, f64::max);
    let tie = opts.tol.max(DEFAULT_TOL) * scale;

    // labels
    for k in 1..count {
        let cost = label_cost(&systems[k - 1], &systems[k]);
        let a = hungarian(&cost);
        if dim > 1 && min_swap_gap(&cost, &a) <= tie {
            return Err(Error::TrackingAmbiguous { from: k - 1, to: k });
        }
        let s = &systems[k];
        systems[k] = BiorthonormalSystem {
            eigenvalues: a.iter().map(|&j| s.eigenvalues[j]).collect(),
            right_vectors: a.iter().map(|&j| s.right_vectors[j].clone()).collect(),
            left_vectors: a.iter().map(|&j| s.left_vectors[j].clone()).collect(),
        };
    }
    let cost = label_cost(&systems[count - 1], &systems[0]);
    let a = hungarian(&cost);
    if dim > 1 && min_swap_gap(&cost, &a) <= tie {
        return Err(Error::TrackingAmbiguous { from: count - 1, to: 0 });
    }
    if a.iter().enumerate().any(|(i, &j)| i != j) {
        return Err(Error::NonCyclicLabels);
    }

    // discrete parallel transport of the phase
    for k in 1..count {
        let (prev, cur) = systems.split_at_mut(k);
        let (prev, cur) = (&prev[k - 1], &mut cur[0]);
        for n in 0..dim {
            let ov = crate::linalg::inner_unchecked(prev.right_vectors[n].as_slice(), cur.right_vectors[n].as_slice());
            if ov.norm() > 0.0 {
                let p = ov.conj() / ov.norm();
                cur.right_vectors[n].scale_mut(p);
                cur.left_vectors[n].scale_mut(p);
            }
        }
    }

    // make the frame single-valued
    let mut holonomy = vec![0.0; dim];
    for (n, beta) in holonomy.iter_mut().enumerate() {
        let ov = crate::linalg::inner_unchecked(
            systems[count - 1].right_vectors[n].as_slice(),
            systems[0].right_vectors[n].as_slice(),
        );
        *beta = ov.arg();
        for (k, sys) in systems.iter_mut().enumerate().skip(1) {
            let f = C64::from_polar(1.0, *beta * k as f64 / count as f64);
            sys.right_vectors[n].scale_mut(f);
            sys.left_vectors[n].scale_mut(f);
        }
    }

    Ok(SystemPath {
        period: path.dt() * count as f64,
        hamiltonians: hs.to_vec(),
        systems,
        holonomy,
    })
}

fn label_cost(a: &BiorthonormalSystem, b: &BiorthonormalSystem) -> Vec<Vec<f64>> {
    a.eigenvalues
        .iter()
        .map(|ea| b.eigenvalues.iter().map(|eb| (ea - eb).norm()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{I, ONE, ZERO};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn normal_matrix_is_orthonormal() {
        let h = ComplexMatrix::diag(&[ONE, c(0.0, 2.0)]);
        let s = build_system(&h, 1e-10).unwrap();
        assert!(s.biorthonormality_defect() < 1e-14);
        for k in 0..2 {
            assert!((&s.right_vectors[k] - &s.left_vectors[k]).norm() < 1e-14);
        }
        assert!(completeness_defect(&s) < 1e-12);
    }

    #[test]
    fn identity_is_degenerate() {
        assert!(matches!(
            build_system(&ComplexMatrix::identity(2), 1e-10),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn zeroed_left_vector_breaks_completeness() {
        let h = ComplexMatrix::diag(&[ONE, c(0.0, 2.0)]);
        let mut s = build_system(&h, 1e-10).unwrap();
        s.left_vectors[1] = ComplexVector::zeros(2);
        assert!((completeness_defect(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_pair() {
        let h = ComplexMatrix::from_rows(&[vec![ONE, c(2.0, 1.0)], vec![c(0.0, 0.3), -I]]).unwrap();
        let s = build_system(&h, 1e-10).unwrap();
        assert!(s.biorthonormality_defect() < 1e-12);
        assert!(s.right_residual(&h).unwrap() < 1e-10 * h.norm());
        assert!(s.left_residual(&h).unwrap() < 1e-10 * h.norm());
        assert!(completeness_defect(&s) < 1e-12);
    }

    #[test]
    fn rescale_keeps_biorthonormality() {
        let h = ComplexMatrix::from_rows(&[vec![ZERO, c(2.0, 0.0)], vec![c(0.5, 0.0), c(0.1, 0.1)]]).unwrap();
        let mut s = build_system(&h, 1e-10).unwrap();
        s.rescale(0, c(3.0, -4.0)).unwrap();
        assert!(s.biorthonormality_defect() < 1e-12);
        assert!(s.rescale(0, ZERO).is_err());
        assert!(s.rescale(5, ONE).is_err());
    }

    #[test]
    fn constant_path_is_stationary() {
        let h = ComplexMatrix::from_rows(&[vec![ONE, c(0.2, 0.0)], vec![c(0.0, 0.7), -ONE]]).unwrap();
        let p = HamiltonianPath::constant(3.0, 12, h).unwrap();
        let sp = build_system_path(&p, 1e-10).unwrap();
        assert_eq!(sp.holonomy, vec![0.0, 0.0]);
        for s in &sp.systems {
            assert_eq!(s, &sp.systems[0]);
        }
    }
}
