//! The two-level model `H = E [[cos θ, e^{−iφ} sin θ], [e^{iφ} sin θ, −cos θ]]`
//! with `φ = ωt + iφ_i` (a non-Hermitian precessing field), in closed form.
//!
//! Labels follow the usual convention: mode 1 has `E_1 = −E`, mode 2 has
//! `E_2 = +E`. Closed forms below use the frame
//! `ψ_1 = (−e^{−iφ} s, c)`, `ψ_2 = (c, e^{iφ} s)`,
//! `φ_1 = (−e^{−iφ*} s, c)`, `φ_2 = (c, e^{iφ*} s)` with `s = sin(θ/2)`,
//! `c = cos(θ/2)`.

use std::f64::consts::PI;

use crate::biorthonormal::{BiorthonormalSystem, SystemPath};
use crate::error::{Error, Result};
use crate::evolution::RESONANCE_TOL;
use crate::linalg::{ComplexMatrix, ComplexVector, C64, I, ONE, ZERO};
use crate::path::{Hamiltonian, HamiltonianPath};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParams {
    pub energy: C64,
    pub theta: f64,
    pub phi_i: f64,
    pub omega: f64,
}

impl TwoLevelParams {
    pub fn new(energy: C64, theta: f64, phi_i: f64, omega: f64) -> Result<Self> {
        let p = TwoLevelParams {
            energy,
            theta,
            phi_i,
            omega,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.energy.is_finite() || self.energy.norm() == 0.0 {
            return Err(Error::invalid("E", "must be finite and nonzero"));
        }
        if !(self.theta.is_finite() && (0.0..=PI).contains(&self.theta)) {
            return Err(Error::invalid("theta", format!("must lie in [0, pi], got {}", self.theta)));
        }
        if !self.phi_i.is_finite() {
            return Err(Error::invalid("phi_i", "must be finite"));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::invalid("omega", format!("must be positive, got {}", self.omega)));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// `φ(t) = ωt + iφ_i`
    pub fn phi(&self, t: f64) -> C64 {
        C64::new(self.omega * t, self.phi_i)
    }

    fn half_angles(&self) -> (f64, f64) {
        ((0.5 * self.theta).sin(), (0.5 * self.theta).cos())
    }

    /// `x = e^{2φ_i} s² / (e^{2φ_i} s² + c²)`
    fn x(&self) -> f64 {
        let (s, c) = self.half_angles();
        let e = (2.0 * self.phi_i).exp();
        e * s * s / (e * s * s + c * c)
    }

    /// `y = s² / (s² + e^{2φ_i} c²)`
    fn y(&self) -> f64 {
        let (s, c) = self.half_angles();
        let e = (2.0 * self.phi_i).exp();
        s * s / (s * s + e * c * c)
    }
}

pub fn hamiltonian(p: &TwoLevelParams, t: f64) -> ComplexMatrix {
    let phi = p.phi(t);
    let (st, ct) = (p.theta.sin(), p.theta.cos());
    let e = p.energy;
    let mut h = ComplexMatrix::zeros(2, 2);
    h[(0, 0)] = e * ct;
    h[(0, 1)] = e * (-I * phi).exp() * st;
    h[(1, 0)] = e * (I * phi).exp() * st;
    h[(1, 1)] = -e * ct;
    h
}

impl Hamiltonian for TwoLevelParams {
    fn dim(&self) -> usize {
        2
    }

    fn period(&self) -> f64 {
        TwoLevelParams::period(self)
    }

    fn eval_into(&self, t: f64, out: &mut [C64]) {
        out.copy_from_slice(hamiltonian(self, t).as_slice());
    }
}

/// The closed-form frame; index 0 is mode 1 (`−E`), index 1 is mode 2 (`+E`).
pub fn analytic_frame(p: &TwoLevelParams, t: f64) -> BiorthonormalSystem {
    let phi = p.phi(t);
    let (s, c) = p.half_angles();
    let em = (-I * phi).exp();
    let ep = (I * phi).exp();
    let em_star = (-I * phi.conj()).exp();
    let ep_star = (I * phi.conj()).exp();
    let cc = C64::new(c, 0.0);
    BiorthonormalSystem {
        eigenvalues: vec![-p.energy, p.energy],
        right_vectors: vec![
            ComplexVector::new(vec![-em * s, cc]),
            ComplexVector::new(vec![cc, ep * s]),
        ],
        left_vectors: vec![
            ComplexVector::new(vec![-em_star * s, cc]),
            ComplexVector::new(vec![cc, ep_star * s]),
        ],
    }
}

pub fn sampled_path(p: &TwoLevelParams, samples: usize) -> Result<HamiltonianPath> {
    p.validate()?;
    HamiltonianPath::from_fn(p.period(), samples, |t| hamiltonian(p, t))
}

/// System path built from the closed-form frame (single-valued, zero holonomy).
pub fn analytic_system_path(p: &TwoLevelParams, samples: usize) -> Result<SystemPath> {
    p.validate()?;
    let period = p.period();
    let times: Vec<f64> = (0..samples).map(|k| period * k as f64 / samples as f64).collect();
    SystemPath::from_frames(
        period,
        times.iter().map(|&t| hamiltonian(p, t)).collect(),
        times.iter().map(|&t| analytic_frame(p, t)).collect(),
    )
}

/// Index in `sp` of the mode with the given label (1 for `−E`, 2 for `+E`),
/// matched on the eigenvalue at the first sample.
pub fn mode_index(sp: &SystemPath, p: &TwoLevelParams, label: usize) -> Result<usize> {
    let target = match label {
        1 => -p.energy,
        2 => p.energy,
        _ => return Err(Error::invalid("mode", format!("must be 1 or 2, got {label}"))),
    };
    if sp.dim() != 2 {
        return Err(Error::InvalidMode { mode: label, dim: sp.dim() });
    }
    let e = &sp.systems[0].eigenvalues;
    Ok(if (e[0] - target).norm() <= (e[1] - target).norm() { 0 } else { 1 })
}

/// Scalar equation `Ċ + Q C = 𝓡(t)` with `𝓡(t) = drive_amplitude · e^{i ν t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarCoefficients {
    pub q: C64,
    pub drive_amplitude: C64,
    /// `ν`: `+ω` for the `C̃_1` equation, `−ω` for the `C̃_2` equation.
    pub drive_frequency: f64,
}

impl ScalarCoefficients {
    pub fn drive(&self, t: f64) -> C64 {
        self.drive_amplitude * C64::from_polar(1.0, self.drive_frequency * t)
    }

    /// `W(t) = e^{−Qt}`
    pub fn w(&self, t: f64) -> C64 {
        (-self.q * t).exp()
    }
}

/// Coefficients of the `C̃_1` equation (expansion around `φ_2`):
/// `Q = −2i(E + ωx)`, `𝓡 = 2iE sin θ sinh φ_i e^{iωt}`.
pub fn scalar_coefficients(p: &TwoLevelParams) -> ScalarCoefficients {
    let e = p.energy;
    ScalarCoefficients {
        q: -2.0 * I * (e + p.omega * p.x()),
        drive_amplitude: 2.0 * I * e * p.theta.sin() * p.phi_i.sinh(),
        drive_frequency: p.omega,
    }
}

/// Coefficients of the `C̃_2` equation (expansion around `φ_1`):
/// `Q = 2i(E + ωy)`, `𝓡 = −2iE sin θ sinh φ_i e^{−iωt}`.
pub fn scalar_coefficients_swapped(p: &TwoLevelParams) -> ScalarCoefficients {
    let e = p.energy;
    ScalarCoefficients {
        q: 2.0 * I * (e + p.omega * p.y()),
        drive_amplitude: -2.0 * I * e * p.theta.sin() * p.phi_i.sinh(),
        drive_frequency: -p.omega,
    }
}

/// `W(T)` as the product of the dynamical factor and the two loop integrals.
pub fn w_period_product(p: &TwoLevelParams) -> C64 {
    let t = p.period();
    let (e1, e2) = (-p.energy, p.energy);
    // ∮ i⟨φ_2|dφ_2⟩/⟨φ_2|φ_2⟩ = −2πx,  ∮ i⟨ψ_1|dψ_1⟩/⟨ψ_1|ψ_1⟩ = 2πx
    let loop_phi2 = -2.0 * PI * p.x();
    let loop_psi1 = 2.0 * PI * p.x();
    (I * (e2 - e1) * t).exp() * (-I * (loop_phi2 - loop_psi1)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PeriodicCoefficient {
    /// The unique initial value leading to a periodic solution.
    Periodic(C64),
    /// `W(T) = 1` and the drive integral vanishes: every solution is
    /// periodic. Carries the particular solution `𝓡(0)/(Q + iν)`, or zero
    /// when that is singular.
    AllPeriodic(C64),
    /// `W(T) = 1` with a non-vanishing drive integral: no periodic solution.
    Resonance,
}

impl PeriodicCoefficient {
    pub fn value(&self) -> Option<C64> {
        match *self {
            PeriodicCoefficient::Periodic(z) | PeriodicCoefficient::AllPeriodic(z) => Some(z),
            PeriodicCoefficient::Resonance => None,
        }
    }

    pub fn is_resonance(&self) -> bool {
        matches!(self, PeriodicCoefficient::Resonance)
    }
}

/// `(e^z − 1)/z`
fn phi1(z: C64) -> C64 {
    if z.norm() < 1e-6 {
        ONE + z * 0.5 + z * z / 6.0
    } else {
        (z.exp() - ONE) / z
    }
}

fn classify(sc: &ScalarCoefficients, period: f64, closed_form: C64) -> PeriodicCoefficient {
    let w = sc.w(period);
    if (ONE - w).norm() >= RESONANCE_TOL * (1.0 + w.norm()) {
        return PeriodicCoefficient::Periodic(closed_form);
    }
    // numerator W(T) ∫ 𝓡/W = 𝓡_0 W(T) T φ1((Q + iν)T)
    let z = (sc.q + I * sc.drive_frequency) * period;
    let numerator = sc.drive_amplitude * w * period * phi1(z);
    if numerator.norm() <= RESONANCE_TOL * (1.0 + sc.drive_amplitude.norm() * period) {
        let denom = sc.q + I * sc.drive_frequency;
        let particular = if sc.drive_amplitude == ZERO || denom.norm() == 0.0 {
            ZERO
        } else {
            sc.drive_amplitude / denom
        };
        PeriodicCoefficient::AllPeriodic(particular)
    } else {
        PeriodicCoefficient::Resonance
    }
}

/// `−sinh φ_i sin θ / (1 + (π/(ET)) r)` with
/// `r = (e^{±2φ_i} − cot²(θ/2)) / (e^{±2φ_i} + cot²(θ/2))`, written in terms
/// of `s` and `c` so the endpoints need no special casing.
fn closed_form_c(p: &TwoLevelParams, sign: f64) -> C64 {
    let (s, c) = p.half_angles();
    let e = (sign * 2.0 * p.phi_i).exp();
    let r = (e * s * s - c * c) / (e * s * s + c * c);
    let num = -p.phi_i.sinh() * p.theta.sin();
    let denom = ONE + C64::new(PI, 0.0) / (p.energy * p.period()) * r;
    num / denom
}

/// Closed-form periodic `C̃_1(0)`.
pub fn c1_closed_form(p: &TwoLevelParams) -> C64 {
    closed_form_c(p, 1.0)
}

/// Closed-form periodic `C̃_2(0)`.
pub fn c2_closed_form(p: &TwoLevelParams) -> C64 {
    closed_form_c(p, -1.0)
}

pub fn periodic_c1(p: &TwoLevelParams) -> PeriodicCoefficient {
    classify(&scalar_coefficients(p), p.period(), c1_closed_form(p))
}

pub fn periodic_c2(p: &TwoLevelParams) -> PeriodicCoefficient {
    classify(&scalar_coefficients_swapped(p), p.period(), c2_closed_form(p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormPhases {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma_tilde1: f64,
    pub gamma_tilde2: f64,
}

/// `γ_1 = −γ_2 = π(1 − cos θ)`, `γ̃_1 = 2π/(1 + e^{2φ_i} cot²(θ/2))`,
/// `γ̃_2 = −2π/(1 + e^{−2φ_i} cot²(θ/2))`.
pub fn closed_form_phases(p: &TwoLevelParams) -> ClosedFormPhases {
    let (s, _) = p.half_angles();
    // 1 − cos θ = 2 s² avoids cancellation near θ = 0
    let gamma1 = 2.0 * PI * s * s;
    ClosedFormPhases {
        gamma1,
        gamma2: -gamma1,
        gamma_tilde1: 2.0 * PI * p.y(),
        gamma_tilde2: -2.0 * PI * p.x(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelSolution {
    pub q: C64,
    pub drive: C64,
    pub w_t: C64,
    pub c1_0: PeriodicCoefficient,
    pub c2_0: PeriodicCoefficient,
    pub phases: ClosedFormPhases,
}

pub fn solve(p: &TwoLevelParams) -> Result<TwoLevelSolution> {
    p.validate()?;
    let sc = scalar_coefficients(p);
    Ok(TwoLevelSolution {
        q: sc.q,
        drive: sc.drive_amplitude,
        w_t: sc.w(p.period()),
        c1_0: periodic_c1(p),
        c2_0: periodic_c2(p),
        phases: closed_form_phases(p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(theta: f64, phi_i: f64) -> TwoLevelParams {
        TwoLevelParams::new(ONE, theta, phi_i, 0.01).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let p = params(PI / 2.0, 0.0);
        let h = hamiltonian(&p, 0.0);
        let expect = ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap();
        assert!((&h - &expect).norm() < 1e-15);
        let p = TwoLevelParams::new(C64::new(0.7, 0.2), 1.1, 0.4, 0.3).unwrap();
        for t in [0.0, 1.3, 7.9] {
            let h = hamiltonian(&p, t);
            assert!(h.trace().norm() < 1e-15);
            let det = h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)];
            assert!((det + p.energy * p.energy).norm() < 1e-14);
        }
        let herm = hamiltonian(&params(1.0, 0.0), 3.0);
        assert!((&herm - &herm.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn validation_names_field() {
        let e = TwoLevelParams::new(ONE, 1.0, 0.0, 0.0).unwrap_err();
        assert!(matches!(e, Error::InvalidParameter { name: "omega", .. }));
        let e = TwoLevelParams::new(ZERO, 1.0, 0.0, 1.0).unwrap_err();
        assert!(matches!(e, Error::InvalidParameter { name: "E", .. }));
        let e = TwoLevelParams::new(ONE, 4.0, 0.0, 1.0).unwrap_err();
        assert!(matches!(e, Error::InvalidParameter { name: "theta", .. }));
    }

    #[test]
    fn analytic_frame_is_biorthonormal_eigenframe() {
        let p = TwoLevelParams::new(ONE, PI / 2.0, 0.3, 1.0).unwrap();
        // φ = π/4 + 0.3i at t = π/4
        let t = PI / 4.0;
        let f = analytic_frame(&p, t);
        let h = hamiltonian(&p, t);
        assert!(f.biorthonormality_defect() < 1e-15);
        assert!(f.right_residual(&h).unwrap() < 1e-14);
        assert!(f.left_residual(&h).unwrap() < 1e-14);
    }

    #[test]
    fn endpoint_frame() {
        let f = analytic_frame(&params(0.0, 0.3), 2.0);
        assert_eq!(f.right_vectors[0], ComplexVector::basis(2, 1));
        assert_eq!(f.left_vectors[0], ComplexVector::basis(2, 1));
        assert_eq!(f.right_vectors[1], ComplexVector::basis(2, 0));
        assert_eq!(f.left_vectors[1], ComplexVector::basis(2, 0));
    }

    #[test]
    fn closed_form_phase_examples() {
        let b = closed_form_phases(&params(PI / 2.0, 0.0));
        assert!((b.gamma1 - PI).abs() < 1e-14 && (b.gamma2 + PI).abs() < 1e-14);
        assert!((b.gamma_tilde1 - PI).abs() < 1e-14 && (b.gamma_tilde2 + PI).abs() < 1e-14);
        let p = params(PI / 2.0, 0.5 * 3f64.ln());
        let g = closed_form_phases(&p);
        assert!((g.gamma_tilde1 - PI / 2.0).abs() < 1e-14);
        assert!((g.gamma_tilde2 + 1.5 * PI).abs() < 1e-14);
        let g = closed_form_phases(&params(2.0 * PI / 3.0, 0.37));
        assert!((g.gamma1 - 1.5 * PI).abs() < 1e-14);
        // endpoint limits
        assert_eq!(closed_form_phases(&params(0.0, 0.2)).gamma_tilde1, 0.0);
        assert!((closed_form_phases(&params(PI, 0.2)).gamma_tilde2 + 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn periodic_coefficients_vanish_without_drive() {
        for theta in [0.3, 1.0, 2.5] {
            assert_eq!(periodic_c1(&params(theta, 0.0)).value(), Some(ZERO));
            assert_eq!(periodic_c2(&params(theta, 0.0)).value(), Some(ZERO));
        }
        assert_eq!(periodic_c1(&params(0.0, 0.3)).value().unwrap().norm(), 0.0);
    }

    #[test]
    fn c2_is_c1_with_negated_phi_i() {
        for (theta, phi_i) in [(0.4, 0.3), (1.7, -0.2), (2.9, 0.05)] {
            let a = c2_closed_form(&params(theta, phi_i));
            let b = c1_closed_form(&params(theta, -phi_i));
            // sinh is odd, the e^{±2φ_i} factor swaps
            assert!((a + b).norm() < 1e-14);
        }
    }

    #[test]
    fn periodic_solution_of_scalar_equation() {
        // K e^{iνt} solves Ċ + QC = 𝓡 exactly
        let p = params(PI / 3.0, 0.15);
        for (sc, c0) in [
            (scalar_coefficients(&p), c1_closed_form(&p)),
            (scalar_coefficients_swapped(&p), c2_closed_form(&p)),
        ] {
            let k = sc.drive_amplitude / (sc.q + I * sc.drive_frequency);
            assert!((k - c0).norm() < 1e-12 * (1.0 + k.norm()));
        }
    }

    #[test]
    fn w_matches_product_form() {
        for (theta, phi_i) in [(0.5, 0.2), (PI / 2.0, -0.4), (2.0, 0.0)] {
            let p = params(theta, phi_i);
            let w = scalar_coefficients(&p).w(p.period());
            assert!((w - w_period_product(&p)).norm() < 1e-10);
        }
    }

    #[test]
    fn trichotomy() {
        // W(T) = 1 with zero drive
        let p = params(PI / 2.0, 0.0);
        assert!(matches!(periodic_c1(&p), PeriodicCoefficient::AllPeriodic(z) if z == ZERO));
        // Q + iω = 0 makes the drive resonant
        let phi_i: f64 = -0.2;
        let omega = 0.01;
        let x = 1.0 / (1.0 + (-2.0 * phi_i).exp());
        let e = omega * (1.0 - 2.0 * x) / 2.0;
        let p = TwoLevelParams::new(C64::new(e, 0.0), PI / 2.0, phi_i, omega).unwrap();
        assert!(periodic_c1(&p).is_resonance());
        assert!(matches!(periodic_c1(&params(1.0, 0.2)), PeriodicCoefficient::Periodic(_)));
    }
}
