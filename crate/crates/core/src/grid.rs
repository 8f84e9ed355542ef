//! Finite differences and quadrature on a uniform periodic grid.

use crate::linalg::{ComplexVector, C64, ZERO};

/// Central difference stencil used for time derivatives of sampled frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeScheme {
    /// `(f(t+h) − f(t−h)) / 2h`
    Central2,
    /// `(f(t−2h) − 8f(t−h) + 8f(t+h) − f(t+2h)) / 12h`
    #[default]
    Central4,
}

impl DerivativeScheme {
    fn weights(self) -> &'static [(isize, f64)] {
        match self {
            DerivativeScheme::Central2 => &[(-1, -0.5), (1, 0.5)],
            DerivativeScheme::Central4 => &[
                (-2, 1.0 / 12.0),
                (-1, -8.0 / 12.0),
                (1, 8.0 / 12.0),
                (2, -1.0 / 12.0),
            ],
        }
    }
}

/// Derivative of a periodic vector series at every sample (wrap-around).
pub fn periodic_derivative(samples: &[ComplexVector], h: f64, scheme: DerivativeScheme) -> Vec<ComplexVector> {
    let n = samples.len();
    let dim = samples.first().map_or(0, |v| v.dim());
    let w = scheme.weights();
    (0..n)
        .map(|k| {
            let mut d = vec![ZERO; dim];
            for &(off, c) in w {
                let j = (k as isize + off).rem_euclid(n as isize) as usize;
                for (di, s) in d.iter_mut().zip(samples[j].iter()) {
                    *di += s * (c / h);
                }
            }
            ComplexVector::new(d)
        })
        .collect()
}

/// Same as [`periodic_derivative`] for a scalar series.
pub fn periodic_derivative_scalar(values: &[C64], h: f64, scheme: DerivativeScheme) -> Vec<C64> {
    let n = values.len();
    let w = scheme.weights();
    (0..n)
        .map(|k| {
            w.iter()
                .map(|&(off, c)| values[(k as isize + off).rem_euclid(n as isize) as usize] * (c / h))
                .sum()
        })
        .collect()
}

/// Closed-loop trapezoid rule: `h · Σ f_k` over one period.
pub fn trapezoid(values: &[C64], h: f64) -> C64 {
    values.iter().sum::<C64>() * h
}

/// Running trapezoid integral `∫_0^{t_k}` for `k = 0..=n`, using `f_n = f_0`.
pub fn cumulative_trapezoid(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = ZERO;
    out.push(acc);
    for k in 0..n {
        acc += (values[k] + values[(k + 1) % n]) * (0.5 * h);
        out.push(acc);
    }
    out
}
