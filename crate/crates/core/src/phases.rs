//! Adiabaticity parameter, dynamical phase, complex and real geometric phases,
//! connection coefficients and the relation between the two geometric phases.

use std::f64::consts::PI;

use crate::biorthonormal::{SystemPath, DEGENERACY_TOL};
use crate::error::{Error, Result};
use crate::grid::{periodic_derivative, trapezoid, DerivativeScheme};
use crate::linalg::{inner_unchecked, ComplexMatrix, ComplexVector, C64, I, ZERO};

/// How off-diagonal connection elements are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConnectionEstimator {
    /// Finite differences of the sampled frame.
    #[default]
    Direct,
    /// `⟨φ_m|ψ̇_n⟩ = ⟨φ_m|Ḣ|ψ_n⟩ / (E_n − E_m)` for `m ≠ n`, with `Ḣ` by
    /// finite differences. Diagonal entries stay direct.
    HamiltonianDerivative,
}

/// `A_mn(t_k) = i⟨φ_m|ψ̇_n⟩` and `Ã_mn(t_k) = i⟨φ_m|φ̇_n⟩ / ⟨φ_n|φ_n⟩`.
#[derive(Debug, Clone)]
pub struct ConnectionSamples {
    pub times: Vec<f64>,
    pub a: Vec<ComplexMatrix>,
    pub a_tilde: Vec<ComplexMatrix>,
}

impl ConnectionSamples {
    pub fn series(&self, m: usize, n: usize) -> Vec<C64> {
        self.a.iter().map(|x| x[(m, n)]).collect()
    }

    pub fn tilde_series(&self, m: usize, n: usize) -> Vec<C64> {
        self.a_tilde.iter().map(|x| x[(m, n)]).collect()
    }
}

pub fn connection_samples(sp: &SystemPath) -> ConnectionSamples {
    connection_samples_with(sp, ConnectionEstimator::Direct, DerivativeScheme::default())
}

pub fn connection_samples_with(
    sp: &SystemPath,
    estimator: ConnectionEstimator,
    scheme: DerivativeScheme,
) -> ConnectionSamples {
    let dim = sp.dim();
    let count = sp.len();
    let h = sp.dt();
    let psi_dot: Vec<Vec<ComplexVector>> =
        (0..dim).map(|n| periodic_derivative(&sp.right_series(n), h, scheme)).collect();
    let phi_dot: Vec<Vec<ComplexVector>> =
        (0..dim).map(|n| periodic_derivative(&sp.left_series(n), h, scheme)).collect();
    let h_dot = match estimator {
        ConnectionEstimator::Direct => None,
        ConnectionEstimator::HamiltonianDerivative => Some(hamiltonian_derivative(sp, scheme)),
    };

    let mut a = Vec::with_capacity(count);
    let mut a_tilde = Vec::with_capacity(count);
    for k in 0..count {
        let sys = &sp.systems[k];
        let mut ak = ComplexMatrix::zeros(dim, dim);
        let mut tk = ComplexMatrix::zeros(dim, dim);
        for m in 0..dim {
            let phi_m = sys.left_vectors[m].as_slice();
            for n in 0..dim {
                ak[(m, n)] = match (&h_dot, m == n) {
                    (Some(hd), false) => {
                        let hv = hd[k].matvec(&sys.right_vectors[n]).expect("square");
                        I * inner_unchecked(phi_m, hv.as_slice()) / (sys.eigenvalues[n] - sys.eigenvalues[m])
                    }
                    _ => I * inner_unchecked(phi_m, psi_dot[n][k].as_slice()),
                };
                let norm_n = sys.left_vectors[n].norm_sqr();
                tk[(m, n)] = I * inner_unchecked(phi_m, phi_dot[n][k].as_slice()) / norm_n;
            }
        }
        a.push(ak);
        a_tilde.push(tk);
    }
    ConnectionSamples {
        times: sp.times(),
        a,
        a_tilde,
    }
}

fn hamiltonian_derivative(sp: &SystemPath, scheme: DerivativeScheme) -> Vec<ComplexMatrix> {
    let dim = sp.dim();
    let flat: Vec<ComplexVector> = sp
        .hamiltonians
        .iter()
        .map(|h| ComplexVector::new(h.as_slice().to_vec()))
        .collect();
    periodic_derivative(&flat, sp.dt(), scheme)
        .into_iter()
        .map(|v| ComplexMatrix::from_row_major(dim, dim, v.into_vec()).expect("dim² entries"))
        .collect()
}

/// `η = max_{t, m≠n} |⟨φ_m|ψ̇_n⟩| / ω₀` in the unit-norm right-vector gauge,
/// with `ω₀` the smallest instantaneous gap on the loop.
pub fn adiabaticity_eta(sp: &SystemPath) -> Result<f64> {
    adiabaticity_eta_with(sp, DerivativeScheme::default())
}

pub fn adiabaticity_eta_with(sp: &SystemPath, scheme: DerivativeScheme) -> Result<f64> {
    let dim = sp.dim();
    if dim < 2 {
        return Ok(0.0);
    }
    let omega0 = sp.min_gap();
    let scale = sp.hamiltonians.iter().map(|h| h.norm()).fold(1.0, f64::max);
    let threshold = DEGENERACY_TOL * scale;
    if !(omega0 > threshold) {
        return Err(Error::DegenerateSpectrum {
            gap: omega0,
            threshold,
        });
    }
    // a stationary loop is exactly adiabatic; skip the roundoff of the transported frame
    if sp.hamiltonians.windows(2).all(|w| w[0] == w[1]) {
        return Ok(0.0);
    }
    let h = sp.dt();
    let mut worst: f64 = 0.0;
    for n in 0..dim {
        let psi_dot = periodic_derivative(&sp.right_series(n), h, scheme);
        for (k, sys) in sp.systems.iter().enumerate() {
            let norm_n = sys.right_vectors[n].norm();
            for m in (0..dim).filter(|&m| m != n) {
                // ‖ψ_m‖/‖ψ_n‖ converts to unit-norm right vectors
                let v = inner_unchecked(sys.left_vectors[m].as_slice(), psi_dot[k].as_slice()).norm()
                    * sys.right_vectors[m].norm()
                    / norm_n;
                worst = worst.max(v);
            }
        }
    }
    Ok(worst / omega0)
}

/// `δ_m(T) = −∮ E_m dt`.
pub fn dynamical_phase(sp: &SystemPath, m: usize) -> Result<C64> {
    sp.check_mode(m)?;
    Ok(-trapezoid(&sp.eigenvalue_series(m), sp.dt()))
}

/// `γ_m(T) = ∮ i⟨φ_m|ψ̇_m⟩ dt`.
pub fn geometric_phase_complex(sp: &SystemPath, m: usize) -> Result<C64> {
    sp.check_mode(m)?;
    let psi_dot = periodic_derivative(&sp.right_series(m), sp.dt(), DerivativeScheme::default());
    let a: Vec<C64> = sp
        .systems
        .iter()
        .zip(&psi_dot)
        .map(|(s, d)| I * inner_unchecked(s.left_vectors[m].as_slice(), d.as_slice()))
        .collect();
    Ok(trapezoid(&a, sp.dt()))
}

/// `∮ i⟨φ_m|φ̇_m⟩/⟨φ_m|φ_m⟩ dt` before the imaginary part is discarded.
pub fn geometric_phase_real_raw(sp: &SystemPath, m: usize) -> Result<C64> {
    sp.check_mode(m)?;
    let phi = sp.left_series(m);
    let phi_dot = periodic_derivative(&phi, sp.dt(), DerivativeScheme::default());
    let a: Vec<C64> = phi
        .iter()
        .zip(&phi_dot)
        .map(|(p, d)| I * inner_unchecked(p.as_slice(), d.as_slice()) / p.norm_sqr())
        .collect();
    Ok(trapezoid(&a, sp.dt()))
}

pub fn realness_tol(gamma_tilde: f64) -> f64 {
    1e-7 * gamma_tilde.abs().max(1.0)
}

/// `γ̃_m(T) = ∮ i⟨φ_m|φ̇_m⟩/⟨φ_m|φ_m⟩ dt`, checked to be real.
pub fn geometric_phase_real(sp: &SystemPath, m: usize) -> Result<f64> {
    let z = geometric_phase_real_raw(sp, m)?;
    let tol = realness_tol(z.re);
    if !(z.im.abs() < tol) {
        return Err(Error::RealnessViolation { mode: m, imag: z.im, tol });
    }
    Ok(z.re)
}

/// Components of the relation `γ̃_m = γ_m + Σ_{n≠m} ∮ ⟨φ_n|φ_m⟩ A_mn / ⟨φ_m|φ_m⟩`.
#[derive(Debug, Clone, Copy)]
pub struct PhaseRelation {
    pub gamma: C64,
    pub gamma_tilde: C64,
    pub correction: C64,
    pub residual: f64,
}

pub fn phase_relation(sp: &SystemPath, m: usize) -> Result<PhaseRelation> {
    sp.check_mode(m)?;
    let dim = sp.dim();
    let h = sp.dt();
    let scheme = DerivativeScheme::default();
    let psi_dot: Vec<Vec<ComplexVector>> =
        (0..dim).map(|n| periodic_derivative(&sp.right_series(n), h, scheme)).collect();
    let mut corr = Vec::with_capacity(sp.len());
    let mut diag = Vec::with_capacity(sp.len());
    for (k, sys) in sp.systems.iter().enumerate() {
        let phi_m = sys.left_vectors[m].as_slice();
        let norm_m = sys.left_vectors[m].norm_sqr();
        let mut s = ZERO;
        for n in (0..dim).filter(|&n| n != m) {
            let a_mn = I * inner_unchecked(phi_m, psi_dot[n][k].as_slice());
            s += inner_unchecked(sys.left_vectors[n].as_slice(), phi_m) * a_mn / norm_m;
        }
        corr.push(s);
        diag.push(I * inner_unchecked(phi_m, psi_dot[m][k].as_slice()));
    }
    let gamma = trapezoid(&diag, h);
    let correction = trapezoid(&corr, h);
    let gamma_tilde = geometric_phase_real_raw(sp, m)?;
    Ok(PhaseRelation {
        gamma,
        gamma_tilde,
        correction,
        residual: (gamma_tilde - gamma - correction).norm(),
    })
}

pub fn phase_relation_residual(sp: &SystemPath, m: usize) -> Result<f64> {
    Ok(phase_relation(sp, m)?.residual)
}

/// All phase quantities of one mode.
#[derive(Debug, Clone, Copy)]
pub struct PhaseReport {
    pub mode: usize,
    pub delta: C64,
    pub gamma: C64,
    pub gamma_tilde: f64,
    pub gamma_tilde_imag: f64,
    pub eta: f64,
    pub relation_residual: f64,
    /// Closure phase spread over the numeric frame; zero for closed-form frames.
    pub holonomy_compensation: C64,
}

pub fn phase_report(sp: &SystemPath, m: usize) -> Result<PhaseReport> {
    let rel = phase_relation(sp, m)?;
    let gamma_tilde = geometric_phase_real(sp, m)?;
    Ok(PhaseReport {
        mode: m,
        delta: dynamical_phase(sp, m)?,
        gamma: rel.gamma,
        gamma_tilde,
        gamma_tilde_imag: rel.gamma_tilde.im,
        eta: adiabaticity_eta(sp)?,
        relation_residual: rel.residual,
        holonomy_compensation: C64::new(-sp.holonomy[m], 0.0),
    })
}

/// Maps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Maps an angle into `[0, 2π)`.
pub fn mod_two_pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y >= 2.0 * PI {
        0.0
    } else {
        y
    }
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}
