//! Benchmark fixtures.

use std::f64::consts::PI;

use nhphase_core::{ComplexMatrix, TwoLevelParams, C64};

/// Dense non-Hermitian matrix with deterministic, well-spread entries.
pub fn dense_matrix(n: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let k = (i * n + j) as f64;
            a[(i, j)] = C64::new((1.3 * k + 0.7).sin(), (0.9 * k + 0.2).cos() * 0.5);
        }
        a[(i, i)] += C64::new(i as f64, 0.0);
    }
    a
}

pub fn precessing(omega: f64) -> TwoLevelParams {
    TwoLevelParams::new(C64::new(1.0, 0.0), PI / 2.0, 0.2, omega).expect("valid parameters")
}
