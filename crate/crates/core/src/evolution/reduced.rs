//! The reduced linear system for the off-mode coefficients `C̃_n`,
//!
//! `Σ_n G_kn (Ċ_n + i(E_n − E_m + Ã_m) C_n) + ⟨ψ_k|ψ̇_n⟩ C_n = −i⟨ψ_k|H|φ_m⟩`,
//!
//! with `G_kn = ⟨ψ_k|ψ_n⟩` and `k, n ≠ m`, and the periodic orbit of it.

use crate::biorthonormal::{BiorthonormalSystem, SystemPath};
use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid, periodic_derivative, trapezoid, DerivativeScheme};
use crate::interp::PeriodicSpline;
use crate::linalg::{
    inner_unchecked, lu_solve, svd, ComplexMatrix, ComplexVector, LinalgError, LuFactors, C64, I, ZERO,
};
use crate::path::Hamiltonian;
use crate::phases::{adiabaticity_eta, connection_samples, dynamical_phase, geometric_phase_real};

use super::{projective_distance, NORM_LIMIT};

/// `σ_min(I − M) < RESONANCE_TOL · (1 + ‖M‖)` selects the singular branch.
pub const RESONANCE_TOL: f64 = 1e-8;

/// Coefficients of `Ċ = −D∘C − G⁻¹K C + w·G⁻¹f` splined over the loop.
struct ReducedSystem {
    others: Vec<usize>,
    period: f64,
    samples: usize,
    spline: Option<PeriodicSpline>,
    /// `−E_m + Ã_m` at the samples, for the overall factor `C̃(t)`.
    overall_rate: Vec<C64>,
    drive_scale: f64,
}

impl ReducedSystem {
    fn new(sp: &SystemPath, m: usize) -> Result<Self> {
        sp.check_mode(m)?;
        let dim = sp.dim();
        let others: Vec<usize> = (0..dim).filter(|&n| n != m).collect();
        let r = others.len();
        let h = sp.dt();
        let scheme = DerivativeScheme::default();
        let phi_m = sp.left_series(m);
        let phi_m_dot = periodic_derivative(&phi_m, h, scheme);
        let tilde_a: Vec<C64> = phi_m
            .iter()
            .zip(&phi_m_dot)
            .map(|(p, d)| I * inner_unchecked(p.as_slice(), d.as_slice()) / p.norm_sqr())
            .collect();
        let overall_rate: Vec<C64> = sp
            .systems
            .iter()
            .zip(&tilde_a)
            .map(|(s, a)| -s.eigenvalues[m] + a)
            .collect();
        if r == 0 {
            return Ok(ReducedSystem {
                others,
                period: sp.period,
                samples: sp.len(),
                spline: None,
                overall_rate,
                drive_scale: 0.0,
            });
        }

        let psi_dot: Vec<Vec<ComplexVector>> =
            others.iter().map(|&n| periodic_derivative(&sp.right_series(n), h, scheme)).collect();
        let channels = 2 * r + r * r;
        let mut values = Vec::with_capacity(sp.len() * channels);
        let mut drive_scale: f64 = 0.0;
        for (k, sys) in sp.systems.iter().enumerate() {
            let t = k as f64 * h;
            let g = ComplexMatrix::from_fn(r, r, |a, b| {
                inner_unchecked(sys.right_vectors[others[a]].as_slice(), sys.right_vectors[others[b]].as_slice())
            });
            let kmat = ComplexMatrix::from_fn(r, r, |a, b| {
                inner_unchecked(sys.right_vectors[others[a]].as_slice(), psi_dot[b][k].as_slice())
            });
            let h_phi = sp.hamiltonians[k].matvec(&sys.left_vectors[m])?;
            let f: ComplexVector = others
                .iter()
                .map(|&n| -I * inner_unchecked(sys.right_vectors[n].as_slice(), h_phi.as_slice()))
                .collect();
            let lu = LuFactors::new(&g).map_err(|e| match e {
                LinalgError::SingularMatrix { .. } => Error::OverlapSingular { time: t },
                e => e.into(),
            })?;
            let gf = lu.solve(&f)?;
            let gk = lu.solve_matrix(&kmat)?;
            drive_scale = drive_scale.max(gf.norm());
            for &n in &others {
                values.push(I * (sys.eigenvalues[n] - sys.eigenvalues[m] + tilde_a[k]));
            }
            values.extend_from_slice(gf.as_slice());
            values.extend_from_slice(gk.as_slice());
        }
        Ok(ReducedSystem {
            others,
            period: sp.period,
            samples: sp.len(),
            spline: Some(PeriodicSpline::new(sp.period, channels, values)),
            overall_rate,
            drive_scale,
        })
    }

    fn dim(&self) -> usize {
        self.others.len()
    }

    /// Rounds up to a whole number of steps per sample interval.
    fn effective_steps(&self, steps: usize) -> usize {
        let per = steps.div_ceil(self.samples).max(1);
        per * self.samples
    }

    /// ETDRK4 (Cox–Matthews) on an `r × cols` state; column `c` is driven
    /// with weight `weights[c]`. The step-mean of the diagonal rate
    /// `D_a + (G⁻¹K)_aa` is propagated exactly. Steps never straddle a spline
    /// knot, so Simpson's rule gives that mean exactly.
    fn integrate(
        &self,
        y0: &[C64],
        weights: &[f64],
        steps: usize,
        mut observe: impl FnMut(usize, &[C64]),
    ) -> Result<Vec<C64>> {
        let r = self.dim();
        let cols = weights.len();
        let len = r * cols;
        let spline = match &self.spline {
            Some(s) => s,
            None => return Ok(vec![]),
        };
        let h = self.period / steps as f64;
        let nch = spline.channels();
        // coefficients at t, t + h/2, t + h
        let mut coef = vec![vec![ZERO; nch]; 3];
        let rate = |c: &[C64], a: usize| c[a] + c[2 * r + a * r + a];
        // everything except the exactly propagated −λ_a y_a
        let nonlinear = |c: &[C64], lambda: &[C64], y: &[C64], out: &mut [C64]| {
            let (_, rest) = c.split_at(r);
            let (g, kp) = rest.split_at(r);
            for a in 0..r {
                let dev = rate(c, a) - lambda[a];
                for col in 0..cols {
                    let mut acc = g[a] * weights[col] - dev * y[a * cols + col];
                    for b in 0..r {
                        if b != a {
                            acc -= kp[a * r + b] * y[b * cols + col];
                        }
                    }
                    out[a * cols + col] = acc;
                }
            }
        };
        let mut y = y0.to_vec();
        let mut st = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
        let mut f = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
        let mut lambda = vec![ZERO; r];
        let mut w = vec![[ZERO; 6]; r];
        spline.eval_into(0.0, &mut coef[0]);
        observe(0, &y);
        for j in 0..steps {
            let t = j as f64 * h;
            spline.eval_into(t + 0.5 * h, &mut coef[1]);
            spline.eval_into(t + h, &mut coef[2]);
            for a in 0..r {
                lambda[a] = (rate(&coef[0], a) + rate(&coef[1], a) * 4.0 + rate(&coef[2], a)) / 6.0;
                let z = -lambda[a] * h;
                let (p1, p2, p3) = phi123(z);
                let half = 0.5 * h * phi123(0.5 * z).0;
                // e^{z}, e^{z/2}, h/2·φ1(z/2), then the three final weights
                w[a] = [
                    z.exp(),
                    (0.5 * z).exp(),
                    half,
                    h * (p1 - p2 * 3.0 + p3 * 4.0),
                    h * (p2 * 2.0 - p3 * 4.0),
                    h * (p3 * 4.0 - p2),
                ];
            }
            nonlinear(&coef[0], &lambda, &y, &mut f[0]);
            for a in 0..r {
                for col in 0..cols {
                    let i = a * cols + col;
                    st[0][i] = w[a][1] * y[i] + w[a][2] * f[0][i];
                }
            }
            nonlinear(&coef[1], &lambda, &st[0], &mut f[1]);
            for a in 0..r {
                for col in 0..cols {
                    let i = a * cols + col;
                    st[1][i] = w[a][1] * y[i] + w[a][2] * f[1][i];
                }
            }
            nonlinear(&coef[1], &lambda, &st[1], &mut f[2]);
            for a in 0..r {
                for col in 0..cols {
                    let i = a * cols + col;
                    st[2][i] = w[a][1] * st[0][i] + w[a][2] * (f[2][i] * 2.0 - f[0][i]);
                }
            }
            nonlinear(&coef[2], &lambda, &st[2], &mut f[3]);
            let mut norm_sqr = 0.0;
            for a in 0..r {
                for col in 0..cols {
                    let i = a * cols + col;
                    y[i] = w[a][0] * y[i] + w[a][3] * f[0][i] + w[a][4] * (f[1][i] + f[2][i]) + w[a][5] * f[3][i];
                    norm_sqr += y[i].norm_sqr();
                }
            }
            if !(norm_sqr.sqrt() <= NORM_LIMIT) {
                return Err(Error::UnstableEvolution {
                    time: t + h,
                    norm: norm_sqr.sqrt(),
                });
            }
            coef.swap(0, 2);
            observe(j + 1, &y);
        }
        Ok(y)
    }
}

/// `φ_k(z) = Σ_j z^j / (j + k)!` for `k = 1, 2, 3`.
fn phi123(z: C64) -> (C64, C64, C64) {
    if z.norm() < 0.5 {
        let (mut p1, mut p2, mut p3) = (ZERO, ZERO, ZERO);
        // z^j / (j+1)!, z^j / (j+2)!, z^j / (j+3)!
        let mut t1 = C64::new(1.0, 0.0);
        let mut t2 = C64::new(0.5, 0.0);
        let mut t3 = C64::new(1.0 / 6.0, 0.0);
        for j in 0..20 {
            p1 += t1;
            p2 += t2;
            p3 += t3;
            let j = j as f64;
            t1 *= z / (j + 2.0);
            t2 *= z / (j + 3.0);
            t3 *= z / (j + 4.0);
        }
        (p1, p2, p3)
    } else {
        let e = z.exp();
        let one = C64::new(1.0, 0.0);
        let p1 = (e - one) / z;
        let p2 = (p1 - one) / z;
        let p3 = (p2 - 0.5) / z;
        (p1, p2, p3)
    }
}

/// Solution of the reduced system at the frame sample times `t_0..=t_N`.
#[derive(Debug, Clone)]
pub struct ReducedCoefficients {
    pub mode: usize,
    /// Labels `n ≠ m`, in the order of the entries of `c_tilde_n`.
    pub others: Vec<usize>,
    pub times: Vec<f64>,
    pub c_tilde_n: Vec<ComplexVector>,
    /// `C̃(t) = exp(i(δ̃_m(t) + γ̃_m(t)))` with `C̃(0) = 1`.
    pub c_tilde: Vec<C64>,
}

pub fn reduced_ode_solve(sp: &SystemPath, m: usize, c0: &ComplexVector, steps: usize) -> Result<ReducedCoefficients> {
    let sys = ReducedSystem::new(sp, m)?;
    let r = sys.dim();
    if c0.dim() != r {
        return Err(LinalgError::DimensionMismatch {
            expected: r,
            found: c0.dim(),
        }
        .into());
    }
    let steps = sys.effective_steps(steps);
    let per = steps / sys.samples;
    let mut c_tilde_n = Vec::with_capacity(sys.samples + 1);
    if r == 0 {
        c_tilde_n = vec![ComplexVector::zeros(0); sys.samples + 1];
    } else {
        sys.integrate(c0.as_slice(), &[1.0], steps, |j, y| {
            if j % per == 0 {
                c_tilde_n.push(ComplexVector::new(y.to_vec()));
            }
        })?;
    }
    let exponent = cumulative_trapezoid(&sys.overall_rate, sp.dt());
    Ok(ReducedCoefficients {
        mode: m,
        others: sys.others,
        times: (0..=sys.samples).map(|k| k as f64 * sp.dt()).collect(),
        c_tilde_n,
        c_tilde: exponent.iter().map(|z| (I * z).exp()).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Periodicity {
    /// `I − M` regular: exactly one periodic solution.
    Unique,
    /// `I − M` singular and the drive compatible: a family of periodic
    /// solutions; the minimum-norm member is returned.
    AllPeriodic,
}

#[derive(Debug, Clone)]
pub struct PeriodicInitialCondition {
    pub c0: ComplexVector,
    pub kind: Periodicity,
    /// Homogeneous monodromy `M` of the reduced system.
    pub monodromy: ComplexMatrix,
    /// `C(T)` from `C(0) = 0` with the drive on.
    pub drive_endpoint: ComplexVector,
    pub sigma_min: f64,
}

/// Solves `(I − M) C_0 = b` for the periodic orbit of the reduced system.
pub fn periodic_initial_condition(sp: &SystemPath, m: usize, steps: usize) -> Result<PeriodicInitialCondition> {
    let sys = ReducedSystem::new(sp, m)?;
    let r = sys.dim();
    if r == 0 {
        return Ok(PeriodicInitialCondition {
            c0: ComplexVector::zeros(0),
            kind: Periodicity::Unique,
            monodromy: ComplexMatrix::zeros(0, 0),
            drive_endpoint: ComplexVector::zeros(0),
            sigma_min: 1.0,
        });
    }
    let cols = r + 1;
    let mut y0 = vec![ZERO; r * cols];
    let mut weights = vec![0.0; cols];
    weights[r] = 1.0;
    for a in 0..r {
        y0[a * cols + a] = C64::new(1.0, 0.0);
    }
    let y = sys.integrate(&y0, &weights, sys.effective_steps(steps), |_, _| {})?;
    let mono = ComplexMatrix::from_fn(r, r, |a, b| y[a * cols + b]);
    let b: ComplexVector = (0..r).map(|a| y[a * cols + r]).collect();
    let a = &ComplexMatrix::identity(r) - &mono;
    let dec = svd(&a)?;
    let sigma_min = dec.min_singular_value();
    let threshold = RESONANCE_TOL * (1.0 + mono.norm());
    if sigma_min >= threshold {
        let c0 = lu_solve(&a, &b)?;
        return Ok(PeriodicInitialCondition {
            c0,
            kind: Periodicity::Unique,
            monodromy: mono,
            drive_endpoint: b,
            sigma_min,
        });
    }
    let c0 = dec.pinv_solve(&b, threshold)?;
    let residual = (&a.matvec(&c0)? - &b).norm();
    if residual <= RESONANCE_TOL * (1.0 + sys.drive_scale * sys.period) {
        Ok(PeriodicInitialCondition {
            c0,
            kind: Periodicity::AllPeriodic,
            monodromy: mono,
            drive_endpoint: b,
            sigma_min,
        })
    } else {
        Err(Error::Resonance { sigma_min, residual })
    }
}

/// `|ψ(0)⟩ = |φ_m⟩ + Σ_{n≠m} C̃_n(0) |ψ_n⟩` at the first sample.
pub fn cyclic_state(sp: &SystemPath, m: usize, c0: &ComplexVector) -> Result<ComplexVector> {
    sp.check_mode(m)?;
    let sys = &sp.systems[0];
    let others: Vec<usize> = (0..sp.dim()).filter(|&n| n != m).collect();
    if c0.dim() != others.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: others.len(),
            found: c0.dim(),
        }
        .into());
    }
    let mut psi = sys.left_vectors[m].clone();
    for (a, &n) in others.iter().enumerate() {
        psi.axpy(c0[a], &sys.right_vectors[n]);
    }
    Ok(psi)
}

/// Rewrites off-mode coefficients given in frame `from` for frame `to`, where
/// both frames hold the same eigenvectors up to per-vector scale.
pub fn reexpress_initial_condition(
    from: &BiorthonormalSystem,
    to: &BiorthonormalSystem,
    m: usize,
    c0: &ComplexVector,
) -> Result<ComplexVector> {
    let dim = from.dim();
    if to.dim() != dim {
        return Err(LinalgError::DimensionMismatch {
            expected: dim,
            found: to.dim(),
        }
        .into());
    }
    if m >= dim {
        return Err(Error::InvalidMode { mode: m, dim });
    }
    // ψ_n^from = a_n ψ_n^to
    let a: Vec<C64> = (0..dim)
        .map(|n| inner_unchecked(to.left_vectors[n].as_slice(), from.right_vectors[n].as_slice()))
        .collect();
    let others: Vec<usize> = (0..dim).filter(|&n| n != m).collect();
    if c0.dim() != others.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: others.len(),
            found: c0.dim(),
        }
        .into());
    }
    Ok(others
        .iter()
        .enumerate()
        .map(|(i, &n)| c0[i] * a[n] * a[m].conj())
        .collect())
}

#[derive(Debug, Clone)]
pub struct CyclicityAssessment {
    pub mode: usize,
    /// Projective distance between `ψ(T)` and `ψ(0)`.
    pub defect: f64,
    pub eta: f64,
    /// Unwrapped `−i log(C̃(T)/C̃(0))`, with `C̃(t) = ⟨φ_m|ψ(t)⟩/⟨φ_m|φ_m⟩`.
    pub total_phase: C64,
    /// `δ̃_m(T) + γ̃_m(T)` from the frame quadrature.
    pub predicted_phase: C64,
    /// `total_phase − δ̃_m(T)`.
    pub measured_geometric: C64,
    pub gamma_tilde: f64,
    /// `∮ Σ_{n≠m} C̃_n A_mn / ⟨φ_m|φ_m⟩ dt` along the periodic orbit. The exact
    /// total phase is `δ_m + γ̃_m` plus this term; the adiabatic prediction
    /// drops it, yet it is O(1) whenever the `C̃_n` are.
    pub coefficient_phase: C64,
    pub initial_condition: PeriodicInitialCondition,
    pub initial_state: ComplexVector,
    pub final_state: ComplexVector,
    pub estimated_error: f64,
}

/// Builds the cyclic state of mode `m`, propagates it with `ham` over one
/// period and compares it with the adiabatic prediction.
pub fn assess_cyclicity<Hm: Hamiltonian + ?Sized>(
    ham: &Hm,
    sp: &SystemPath,
    m: usize,
    steps: usize,
) -> Result<CyclicityAssessment> {
    let pic = periodic_initial_condition(sp, m, steps)?;
    let psi0 = cyclic_state(sp, m, &pic.c0)?;
    let count = sp.len();
    let steps = steps.div_ceil(count).max(1) * count;
    let per = steps / count;
    let traj = super::propagate_recorded(ham, &psi0, steps, per)?;
    let final_state = traj.final_state().clone();
    let defect = projective_distance(&final_state, &psi0)?;

    let z: Vec<C64> = (0..=count)
        .map(|k| {
            let phi = &sp.systems[k % count].left_vectors[m];
            inner_unchecked(phi.as_slice(), traj.states[k].as_slice()) / phi.norm_sqr()
        })
        .collect();
    let minus_e: Vec<C64> = sp.eigenvalue_series(m).iter().map(|e| -e).collect();
    let dyn_cum = cumulative_trapezoid(&minus_e, sp.dt());
    let w: Vec<C64> = z.iter().zip(&dyn_cum).map(|(zk, d)| zk * (-I * d).exp()).collect();
    if w.iter().any(|x| x.norm() == 0.0) {
        return Err(Error::ZeroVector);
    }
    let mut log_sum = ZERO;
    for k in 0..count {
        log_sum += (w[k + 1] / w[k]).ln();
    }
    let total_phase = dyn_cum[count] - I * log_sum;

    let delta = dynamical_phase(sp, m)?;
    let gamma_tilde = geometric_phase_real(sp, m)?;
    let orbit = reduced_ode_solve(sp, m, &pic.c0, steps)?;
    let conn = connection_samples(sp);
    let integrand: Vec<C64> = (0..count)
        .map(|k| {
            let g = sp.systems[k].left_vectors[m].norm_sqr();
            orbit
                .others
                .iter()
                .zip(orbit.c_tilde_n[k].iter())
                .map(|(&n, c)| c * conn.a[k][(m, n)])
                .sum::<C64>()
                / g
        })
        .collect();
    Ok(CyclicityAssessment {
        mode: m,
        defect,
        eta: adiabaticity_eta(sp)?,
        total_phase,
        predicted_phase: delta + gamma_tilde,
        measured_geometric: total_phase - delta,
        gamma_tilde,
        coefficient_phase: trapezoid(&integrand, sp.dt()),
        initial_condition: pic,
        initial_state: psi0,
        final_state,
        estimated_error: traj.estimated_error,
    })
}
