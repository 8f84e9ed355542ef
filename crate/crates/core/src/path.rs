//! Time-periodic Hamiltonians.

use crate::error::{Error, Result};
use crate::interp::PeriodicSpline;
use crate::linalg::{ComplexMatrix, C64, ZERO};

/// A `T`-periodic Hamiltonian that can be evaluated at any time.
pub trait Hamiltonian: Sync {
    fn dim(&self) -> usize;

    fn period(&self) -> f64;

    /// Writes `H(t)` row-major into `out` (length `dim²`).
    fn eval_into(&self, t: f64, out: &mut [C64]);

    fn at(&self, t: f64) -> ComplexMatrix {
        let n = self.dim();
        let mut data = vec![ZERO; n * n];
        self.eval_into(t, &mut data);
        ComplexMatrix::from_row_major(n, n, data).expect("dim² entries")
    }

    /// Smallest integrator step count accepted for one period.
    fn min_steps(&self) -> usize {
        1
    }
}

/// Closed curve `t ↦ H(t)` sampled at `t_k = k·T/N`, `k = 0..N`.
///
/// Between samples the entries are interpolated by periodic cubic splines.
#[derive(Debug, Clone)]
pub struct HamiltonianPath {
    period: f64,
    samples: Vec<ComplexMatrix>,
    spline: PeriodicSpline,
}

pub const MIN_PATH_SAMPLES: usize = 8;

impl HamiltonianPath {
    pub fn new(period: f64, samples: Vec<ComplexMatrix>) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::invalid("period", format!("must be positive and finite, got {period}")));
        }
        if samples.len() < MIN_PATH_SAMPLES {
            return Err(Error::invalid(
                "samples",
                format!("need at least {MIN_PATH_SAMPLES}, got {}", samples.len()),
            ));
        }
        let dim = samples[0].rows();
        if dim == 0 {
            return Err(Error::invalid("samples", "empty matrices"));
        }
        for (k, s) in samples.iter().enumerate() {
            if s.rows() != dim || s.cols() != dim {
                return Err(Error::invalid(
                    "samples",
                    format!("sample {k} is {}x{}, expected {dim}x{dim}", s.rows(), s.cols()),
                ));
            }
            if !s.is_finite() {
                return Err(Error::invalid("samples", format!("sample {k} has non-finite entries")));
            }
        }
        let values: Vec<C64> = samples.iter().flat_map(|s| s.as_slice().iter().copied()).collect();
        let spline = PeriodicSpline::new(period, dim * dim, values);
        Ok(HamiltonianPath {
            period,
            samples,
            spline,
        })
    }

    /// Samples `f` at `t_k = k·T/n`.
    pub fn from_fn(period: f64, n: usize, f: impl Fn(f64) -> ComplexMatrix) -> Result<Self> {
        let samples = (0..n).map(|k| f(period * k as f64 / n as f64)).collect();
        Self::new(period, samples)
    }

    /// The same matrix at every sample.
    pub fn constant(period: f64, n: usize, h: ComplexMatrix) -> Result<Self> {
        Self::new(period, vec![h; n])
    }

    pub fn samples(&self) -> &[ComplexMatrix] {
        &self.samples
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn dt(&self) -> f64 {
        self.period / self.samples.len() as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples.len()).map(|k| k as f64 * self.dt()).collect()
    }
}

impl Hamiltonian for HamiltonianPath {
    fn dim(&self) -> usize {
        self.samples[0].rows()
    }

    fn period(&self) -> f64 {
        self.period
    }

    fn eval_into(&self, t: f64, out: &mut [C64]) {
        self.spline.eval_into(t, out);
    }

    fn min_steps(&self) -> usize {
        4 * self.samples.len()
    }
}

/// Hamiltonian given by a closure, evaluated exactly.
pub struct FnHamiltonian<F> {
    dim: usize,
    period: f64,
    f: F,
}

impl<F: Fn(f64) -> ComplexMatrix + Sync> FnHamiltonian<F> {
    pub fn new(dim: usize, period: f64, f: F) -> Self {
        FnHamiltonian { dim, period, f }
    }
}

impl<F: Fn(f64) -> ComplexMatrix + Sync> Hamiltonian for FnHamiltonian<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn period(&self) -> f64 {
        self.period
    }

    fn eval_into(&self, t: f64, out: &mut [C64]) {
        out.copy_from_slice((self.f)(t).as_slice());
    }
}
