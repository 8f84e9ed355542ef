//! Time-ordered evolution, monodromy, exact cyclic states and the reduced
//! coefficient system of the alternative adiabatic expansion.

mod reduced;

pub use reduced::{
    assess_cyclicity, cyclic_state, periodic_initial_condition, reduced_ode_solve,
    reexpress_initial_condition, CyclicityAssessment, PeriodicInitialCondition, Periodicity,
    ReducedCoefficients, RESONANCE_TOL,
};

use crate::error::{Error, Result};
use crate::linalg::{eig_complex, ComplexMatrix, ComplexVector, Spectrum, C64, DEFAULT_TOL, I, ZERO};
use crate::path::Hamiltonian;

/// States with norm above this are reported as `UnstableEvolution`.
pub const NORM_LIMIT: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexVector>,
    pub initial_state: ComplexVector,
    /// `‖ψ_s(T) − ψ_{s/2}(T)‖ / 15`
    pub estimated_error: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &ComplexVector {
        self.states.last().expect("trajectory has at least one state")
    }
}

#[derive(Debug, Clone)]
pub struct Monodromy {
    pub u_t: ComplexMatrix,
    pub step_count: usize,
    pub estimated_error: f64,
}

/// Classical RK4 for `Ẏ = −i H(t) Y` on `[0, T]`, `Y` of shape `dim × cols`.
/// `observe(j, y)` is called after step `j` (and with `j = 0` before stepping).
fn integrate<Hm: Hamiltonian + ?Sized>(
    ham: &Hm,
    y0: &[C64],
    cols: usize,
    steps: usize,
    mut observe: impl FnMut(usize, &[C64]),
) -> Result<Vec<C64>> {
    let n = ham.dim();
    let len = n * cols;
    let dt = ham.period() / steps as f64;
    let mut hbuf = vec![ZERO; n * n];
    let mut y = y0.to_vec();
    let mut tmp = vec![ZERO; len];
    let mut k1 = vec![ZERO; len];
    let mut k2 = vec![ZERO; len];
    let mut k3 = vec![ZERO; len];
    let mut k4 = vec![ZERO; len];

    let rhs = |t: f64, y: &[C64], hbuf: &mut [C64], out: &mut [C64]| {
        ham.eval_into(t, hbuf);
        for i in 0..n {
            let row = &hbuf[i * n..(i + 1) * n];
            for c in 0..cols {
                let mut acc = ZERO;
                for (j, hij) in row.iter().enumerate() {
                    acc += hij * y[j * cols + c];
                }
                out[i * cols + c] = -I * acc;
            }
        }
    };

    observe(0, &y);
    for j in 0..steps {
        let t = j as f64 * dt;
        rhs(t, &y, &mut hbuf, &mut k1);
        for i in 0..len {
            tmp[i] = y[i] + k1[i] * (0.5 * dt);
        }
        rhs(t + 0.5 * dt, &tmp, &mut hbuf, &mut k2);
        for i in 0..len {
            tmp[i] = y[i] + k2[i] * (0.5 * dt);
        }
        rhs(t + 0.5 * dt, &tmp, &mut hbuf, &mut k3);
        for i in 0..len {
            tmp[i] = y[i] + k3[i] * dt;
        }
        rhs(t + dt, &tmp, &mut hbuf, &mut k4);
        let mut norm_sqr = 0.0;
        for i in 0..len {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
            norm_sqr += y[i].norm_sqr();
        }
        let norm = norm_sqr.sqrt();
        if !(norm <= NORM_LIMIT) {
            return Err(Error::UnstableEvolution {
                time: t + dt,
                norm,
            });
        }
        observe(j + 1, &y);
    }
    Ok(y)
}

fn check_steps<Hm: Hamiltonian + ?Sized>(ham: &Hm, steps: usize) -> Result<()> {
    let min = ham.min_steps().max(1);
    if steps < min {
        return Err(Error::StepCountTooSmall { steps, min });
    }
    Ok(())
}

fn check_state<Hm: Hamiltonian + ?Sized>(ham: &Hm, psi0: &ComplexVector) -> Result<()> {
    if psi0.dim() != ham.dim() {
        return Err(crate::linalg::LinalgError::DimensionMismatch {
            expected: ham.dim(),
            found: psi0.dim(),
        }
        .into());
    }
    if !psi0.is_finite() {
        return Err(Error::invalid("psi0", "non-finite entries"));
    }
    if psi0.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

/// Integrates `i ψ̇ = H(t) ψ` over one period, recording every step.
pub fn propagate<Hm: Hamiltonian + ?Sized>(ham: &Hm, psi0: &ComplexVector, steps: usize) -> Result<Trajectory> {
    propagate_recorded(ham, psi0, steps, 1)
}

/// As [`propagate`], recording every `stride`-th step and the final state.
pub fn propagate_recorded<Hm: Hamiltonian + ?Sized>(
    ham: &Hm,
    psi0: &ComplexVector,
    steps: usize,
    stride: usize,
) -> Result<Trajectory> {
    check_steps(ham, steps)?;
    check_state(ham, psi0)?;
    let stride = stride.max(1);
    let dt = ham.period() / steps as f64;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let fin = integrate(ham, psi0.as_slice(), 1, steps, |j, y| {
        if j % stride == 0 || j == steps {
            times.push(j as f64 * dt);
            states.push(ComplexVector::new(y.to_vec()));
        }
    })?;
    let coarse = integrate(ham, psi0.as_slice(), 1, (steps / 2).max(1), |_, _| {})?;
    let estimated_error = diff_norm(&fin, &coarse) / 15.0;
    Ok(Trajectory {
        times,
        states,
        initial_state: psi0.clone(),
        estimated_error,
    })
}

/// `ψ(T)` only, without the step-halving estimate.
pub fn propagate_final<Hm: Hamiltonian + ?Sized>(ham: &Hm, psi0: &ComplexVector, steps: usize) -> Result<ComplexVector> {
    check_steps(ham, steps)?;
    check_state(ham, psi0)?;
    Ok(ComplexVector::new(integrate(ham, psi0.as_slice(), 1, steps, |_, _| {})?))
}

fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `U(T)` by propagating the identity.
pub fn monodromy<Hm: Hamiltonian + ?Sized>(ham: &Hm, steps: usize) -> Result<Monodromy> {
    check_steps(ham, steps)?;
    let n = ham.dim();
    let id = ComplexMatrix::identity(n);
    let fin = integrate(ham, id.as_slice(), n, steps, |_, _| {})?;
    let coarse = integrate(ham, id.as_slice(), n, (steps / 2).max(1), |_, _| {})?;
    Ok(Monodromy {
        u_t: ComplexMatrix::from_row_major(n, n, fin.clone())?,
        step_count: steps,
        estimated_error: diff_norm(&fin, &coarse) / 15.0,
    })
}

/// Eigenvectors of `U(T)` are exactly cyclic; eigenvalues are the total phase factors.
pub fn exact_cyclic_states(mono: &Monodromy) -> Result<Spectrum> {
    Ok(eig_complex(&mono.u_t, DEFAULT_TOL)?)
}

/// Fubini–Study angle between the rays of `a` and `b`, in `[0, π/2]`.
pub fn projective_distance(a: &ComplexVector, b: &ComplexVector) -> Result<f64> {
    let a = a.normalized().ok_or(Error::ZeroVector)?;
    let b = b.normalized().ok_or(Error::ZeroVector)?;
    let ov = crate::linalg::inner(&a, &b)?;
    let mut perp = b.clone();
    perp.axpy(-ov, &a);
    // atan2 keeps precision for nearly parallel rays where acos does not
    Ok(perp.norm().atan2(ov.norm()))
}
