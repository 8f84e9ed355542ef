use std::f64::consts::PI;

use nhphase_core::biorthonormal::{build_system_path, SystemPath};
use nhphase_core::evolution::{
    assess_cyclicity, exact_cyclic_states, monodromy, periodic_initial_condition, projective_distance,
    reduced_ode_solve,
};
use nhphase_core::grid::{periodic_derivative, DerivativeScheme};
use nhphase_core::linalg::{inner, ComplexVector, C64, I, ONE};
use nhphase_core::HamiltonianPath;
use nhphase_core::phases::{
    adiabaticity_eta, circular_distance, connection_samples, connection_samples_with, dynamical_phase,
    geometric_phase_complex, geometric_phase_real, phase_relation_residual, ConnectionEstimator,
};
use nhphase_core::two_level::{
    analytic_frame, analytic_system_path, c1_closed_form, c2_closed_form, closed_form_phases, hamiltonian,
    mode_index, periodic_c1, periodic_c2, sampled_path, scalar_coefficients, scalar_coefficients_swapped,
    TwoLevelParams,
};

fn params(theta: f64, phi_i: f64, omega: f64) -> TwoLevelParams {
    TwoLevelParams::new(ONE, theta, phi_i, omega).unwrap()
}

fn numeric(p: &TwoLevelParams, n: usize) -> SystemPath {
    build_system_path(&sampled_path(p, n).unwrap(), 1e-10).unwrap()
}

#[test]
fn berry_connection_in_closed_form_gauge() {
    let theta = PI / 3.0;
    let p = params(theta, 0.0, 0.01);
    let conn = connection_samples(&analytic_system_path(&p, 1024).unwrap());
    let expect = 0.01 * (theta / 2.0).sin().powi(2);
    for a in conn.series(0, 0) {
        assert!((a - C64::new(expect, 0.0)).norm() < 1e-12);
    }
}

fn estimator_gap(sp: &SystemPath) -> f64 {
    let d = connection_samples(sp);
    let h = connection_samples_with(sp, ConnectionEstimator::HamiltonianDerivative, DerivativeScheme::default());
    d.series(0, 1)
        .iter()
        .zip(h.series(0, 1))
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[test]
fn hamiltonian_derivative_estimator_converges_to_direct() {
    // uniform precession: both difference quotients pick up the same factor
    let p = params(PI / 3.0, 0.3, 0.01);
    assert!(estimator_gap(&numeric(&p, 32)) < 1e-12);

    // a loop traversed at a non-uniform rate
    let warp = move |t: f64| t + 0.6 * (0.01 * t).sin() / 0.01;
    let gap: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| {
            let path = HamiltonianPath::from_fn(p.period(), n, |t| hamiltonian(&p, warp(t))).unwrap();
            estimator_gap(&build_system_path(&path, 1e-10).unwrap())
        })
        .collect();
    assert!(gap[0] > 1e-9);
    assert!(gap[0] / gap[1] > 3.5 && gap[1] / gap[2] > 3.5, "{gap:?}");
}

/// Dense central differences of the closed-form frame.
fn eta_oracle(p: &TwoLevelParams) -> f64 {
    let count = 100_000;
    let dt = p.period() / count as f64;
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let t = k as f64 * dt;
        let s = analytic_frame(p, t);
        let (ahead, behind) = (analytic_frame(p, t + dt), analytic_frame(p, t - dt));
        for n in 0..2 {
            let d = (&ahead.right_vectors[n] - &behind.right_vectors[n]).scale(C64::new(0.5 / dt, 0.0));
            let m = 1 - n;
            let v = inner(&s.left_vectors[m], &d).unwrap().norm() * s.right_vectors[m].norm() / s.right_vectors[n].norm();
            worst = worst.max(v);
        }
    }
    worst / (2.0 * p.energy.norm())
}

#[test]
fn eta_matches_finite_difference_oracle_and_scales_with_omega() {
    for phi_i in [0.0, 0.2] {
        let p = params(PI / 2.0, phi_i, 0.01);
        let oracle = eta_oracle(&p);
        let eta = adiabaticity_eta(&numeric(&p, 2048)).unwrap();
        assert!((eta - oracle).abs() < 1e-6 * oracle, "phi_i={phi_i}: {eta} vs {oracle}");
        let half = adiabaticity_eta(&numeric(&params(PI / 2.0, phi_i, 0.005), 2048)).unwrap();
        assert!((half / eta - 0.5).abs() < 0.005);
    }
    let p = params(PI / 2.0, 0.0, 0.01);
    assert!((adiabaticity_eta(&numeric(&p, 2048)).unwrap() - 0.0025).abs() < 1e-9);
}

#[test]
fn frames_agree_under_refinement() {
    let p = params(PI / 3.0, 0.4, 0.01);
    let (coarse, fine) = (numeric(&p, 64), numeric(&p, 128));
    for k in 0..64 {
        let (a, b) = (&coarse.systems[k], &fine.systems[2 * k]);
        for n in 0..2 {
            assert!((a.eigenvalues[n] - b.eigenvalues[n]).norm() < 1e-9);
            assert!((&a.projector(n) - &b.projector(n)).norm() < 1e-9);
        }
    }
}

#[test]
fn labels_stay_on_their_branch() {
    let p = params(PI / 4.0, -0.3, 0.01);
    let sp = numeric(&p, 512);
    for (label, e) in [(1, -ONE), (2, ONE)] {
        let m = mode_index(&sp, &p, label).unwrap();
        assert!(sp.eigenvalue_series(m).iter().all(|x| (x - e).norm() < 1e-10));
    }
}

#[test]
fn closed_form_frame_matches_eigensolver() {
    let p = params(1.1, 0.35, 0.2);
    for k in 0..20 {
        let t = k as f64 * 1.3;
        let h = hamiltonian(&p, t);
        assert!(h.trace().norm() < 1e-14);
        let s = analytic_frame(&p, t);
        assert!(s.biorthonormality_defect() < 1e-14);
        assert!(s.right_residual(&h).unwrap() < 1e-12 && s.left_residual(&h).unwrap() < 1e-12);
    }
}

/// `Q(t) = i(E_n − E_m + Ã_m) + ⟨ψ_n|ψ̇_n⟩/⟨ψ_n|ψ_n⟩` and `𝓡(t) = −i⟨ψ_n|H|φ_m⟩/⟨ψ_n|ψ_n⟩`.
fn scalar_from_frame(sp: &SystemPath, m: usize) -> (Vec<C64>, Vec<C64>) {
    let n = 1 - m;
    let conn = connection_samples(sp);
    let psi = sp.right_series(n);
    let psi_dot = periodic_derivative(&psi, sp.dt(), DerivativeScheme::default());
    let mut q = vec![];
    let mut r = vec![];
    for (k, s) in sp.systems.iter().enumerate() {
        let g = psi[k].norm_sqr();
        let a_tilde = conn.a_tilde[k][(m, m)];
        q.push(I * (s.eigenvalues[n] - s.eigenvalues[m] + a_tilde) + inner(&psi[k], &psi_dot[k]).unwrap() / g);
        let h_phi = sp.hamiltonians[k].matvec(&s.left_vectors[m]).unwrap();
        r.push(-I * inner(&psi[k], &h_phi).unwrap() / g);
    }
    (q, r)
}

#[test]
fn scalar_coefficients_match_frame_quadrature() {
    for (theta, phi_i) in [(PI / 3.0, 0.3), (2.0, -0.45)] {
        let p = params(theta, phi_i, 0.01);
        let sp = analytic_system_path(&p, 1024).unwrap();
        let times = sp.times();
        for (m, sc) in [(1, scalar_coefficients(&p)), (0, scalar_coefficients_swapped(&p))] {
            let (q, r) = scalar_from_frame(&sp, m);
            for k in 0..sp.len() {
                assert!((q[k] - sc.q).norm() < 1e-8, "m={m}, k={k}: {} vs {}", q[k], sc.q);
                assert!((r[k] - sc.drive(times[k])).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn reduced_solution_follows_scalar_closed_form() {
    let p = params(PI / 2.0, 0.2, 0.01);
    let sp = analytic_system_path(&p, 2048).unwrap();
    let k1 = c1_closed_form(&p);
    let sol = reduced_ode_solve(&sp, 1, &ComplexVector::new(vec![k1]), 16384).unwrap();
    for (t, c) in sol.times.iter().zip(&sol.c_tilde_n) {
        assert!((c[0] - k1 * (I * 0.01 * t).exp()).norm() < 1e-8);
    }
}

#[test]
fn reduced_solver_refines_at_fourth_order() {
    let p = params(PI / 3.0, 0.3, 0.05);
    let sp = numeric(&p, 64);
    let c0 = ComplexVector::new(vec![C64::new(0.3, -0.1)]);
    let fin: Vec<ComplexVector> = [64, 128, 256, 512]
        .iter()
        .map(|&s| reduced_ode_solve(&sp, 0, &c0, s).unwrap().c_tilde_n.last().unwrap().clone())
        .collect();
    let d: Vec<f64> = fin.windows(2).map(|w| (&w[0] - &w[1]).norm()).collect();
    assert!(d[1] > 1e-13, "{d:?}");
    assert!(d[1] / d[2] > 12.0 && d[1] / d[2] < 20.0, "{d:?}");
}

#[test]
fn generic_solver_matches_closed_form_initial_conditions() {
    let p = params(PI / 2.0, 0.2, 0.01);
    let sp = numeric(&p, 2048);
    let frame = analytic_frame(&p, 0.0);
    let m2 = mode_index(&sp, &p, 2).unwrap();
    let pic = periodic_initial_condition(&sp, m2, 16384).unwrap();
    let c = nhphase_core::evolution::reexpress_initial_condition(&sp.systems[0], &frame, m2, &pic.c0).unwrap();
    assert!((c[0] - periodic_c1(&p).value().unwrap()).norm() < 1e-8);

    let p = params(PI / 3.0, 0.15, 0.01);
    let sp = numeric(&p, 2048);
    let frame = analytic_frame(&p, 0.0);
    let m1 = mode_index(&sp, &p, 1).unwrap();
    let pic = periodic_initial_condition(&sp, m1, 16384).unwrap();
    let c = nhphase_core::evolution::reexpress_initial_condition(&sp.systems[0], &frame, m1, &pic.c0).unwrap();
    assert!((c[0] - periodic_c2(&p).value().unwrap()).norm() < 1e-8);
    assert!((c[0] - c2_closed_form(&p)).norm() < 1e-8);
}

#[test]
fn loop_phases_of_the_precessing_model() {
    let ln3 = 3f64.ln();
    let cases = [
        (PI / 2.0, 0.0, PI, -PI),
        (PI / 2.0, ln3 / 2.0, PI / 2.0, -1.5 * PI),
        (PI / 2.0, -ln3 / 2.0, 1.5 * PI, -PI / 2.0),
    ];
    for (theta, phi_i, gt1, gt2) in cases {
        let p = params(theta, phi_i, 0.01);
        let ap = analytic_system_path(&p, 2048).unwrap();
        assert!((geometric_phase_real(&ap, 0).unwrap() - gt1).abs() < 1e-9);
        assert!((geometric_phase_real(&ap, 1).unwrap() - gt2).abs() < 1e-9);
    }
    for phi_i in [-0.4, 0.0, 0.25] {
        let p = params(2.0 * PI / 3.0, phi_i, 0.01);
        let ap = analytic_system_path(&p, 2048).unwrap();
        let g1 = geometric_phase_complex(&ap, 0).unwrap();
        let g2 = geometric_phase_complex(&ap, 1).unwrap();
        assert!((g1 - C64::new(1.5 * PI, 0.0)).norm() < 1e-9);
        assert!((g1 + g2).norm() < 1e-9);
        assert!((dynamical_phase(&ap, 1).unwrap() + ONE * p.period()).norm() < 1e-9);
        let cf = closed_form_phases(&p);
        assert!((cf.gamma1 - 1.5 * PI).abs() < 1e-12 && (cf.gamma2 + 1.5 * PI).abs() < 1e-12);
    }
}

#[test]
fn phase_relation_example() {
    let p = params(PI / 3.0, 0.3, 0.01);
    let sp = numeric(&p, 4096);
    for m in 0..2 {
        assert!(phase_relation_residual(&sp, m).unwrap() < 1e-6);
    }
}

#[test]
fn loop_quadrature_converges() {
    let p = params(PI / 3.0, 0.3, 0.01);
    let exact = closed_form_phases(&p).gamma1;
    let err: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            let sp = numeric(&p, n);
            circular_distance(geometric_phase_complex(&sp, mode_index(&sp, &p, 1).unwrap()).unwrap().re, exact)
        })
        .collect();
    assert!(err[0] / err[1] > 3.5 && err[1] / err[2] > 3.5, "{err:?}");
}

fn moderate_omega_assessment() -> (TwoLevelParams, nhphase_core::CyclicityAssessment) {
    let p = params(PI / 2.0, 0.2, 0.005);
    let path = sampled_path(&p, 2048).unwrap();
    let sp = build_system_path(&path, 1e-10).unwrap();
    let m = mode_index(&sp, &p, 2).unwrap();
    (p, assess_cyclicity(&path, &sp, m, 1 << 17).unwrap())
}

fn phase_gap(measured: C64, expected: f64) -> f64 {
    circular_distance(measured.re, expected).hypot(measured.im)
}

#[test]
fn cyclic_state_at_moderate_omega() {
    let (p, a) = moderate_omega_assessment();
    assert!(a.defect <= 10.0 * a.eta);
    assert!(a.estimated_error < 0.05 * a.defect);
    assert!(circular_distance(a.gamma_tilde, closed_form_phases(&p).gamma_tilde2) < 1e-9);
    // exact phase bookkeeping along the orbit
    let g = a.measured_geometric - a.coefficient_phase;
    assert!(phase_gap(g, a.gamma_tilde) <= 10.0 * a.eta);
    // C̃_1 A_21 is constant on the orbit, so the coefficient term has a closed form
    let (s, c) = ((PI / 4.0).sin(), (PI / 4.0).cos());
    let expect = -2.0 * PI * c1_closed_form(&p) * c * s * 0.2f64.exp() / (c * c + 0.4f64.exp() * s * s);
    assert!((a.coefficient_phase - expect).norm() < 1e-8);
    // what is observed is the conventional geometric phase
    assert!(phase_gap(a.measured_geometric, closed_form_phases(&p).gamma2) <= 10.0 * a.eta);
}

#[test]
#[ignore = "unattainable as stated: measured minus gamma_tilde2 is the O(1), omega-independent coefficient term (0.62 here)"]
fn measured_geometric_phase_equals_gamma_tilde() {
    let (_, a) = moderate_omega_assessment();
    assert!(phase_gap(a.measured_geometric, a.gamma_tilde) <= 10.0 * a.eta);
}

#[test]
fn cyclicity_ratio_shrinks_with_omega() {
    let ratio = |omega: f64, steps: usize| {
        let p = params(PI / 2.0, 0.2, omega);
        let path = sampled_path(&p, 2048).unwrap();
        let sp = build_system_path(&path, 1e-10).unwrap();
        let a = assess_cyclicity(&path, &sp, mode_index(&sp, &p, 2).unwrap(), steps).unwrap();
        a.defect / a.eta
    };
    let fast = ratio(0.02, 1 << 15);
    let slow = ratio(0.002, 1 << 19);
    assert!(slow <= 3.0 * fast, "{slow} vs {fast}");
}

#[test]
fn closed_form_cyclic_state_is_near_a_floquet_vector() {
    let p = params(PI / 2.0, 0.2, 0.005);
    let frame = analytic_frame(&p, 0.0);
    let mut psi = frame.left_vectors[1].clone();
    psi.axpy(c1_closed_form(&p), &frame.right_vectors[0]);
    let spec = exact_cyclic_states(&monodromy(&p, 1 << 17).unwrap()).unwrap();
    let d = spec
        .right_vectors
        .iter()
        .map(|v| projective_distance(v, &psi).unwrap())
        .fold(f64::INFINITY, f64::min);
    let eta = adiabaticity_eta(&numeric(&p, 2048)).unwrap();
    assert!(d <= 10.0 * eta, "{d} vs eta {eta}");
}

#[test]
fn monodromy_refines_at_fourth_order() {
    let p = params(PI / 3.0, 0.2, 0.5);
    let u: Vec<_> = [100, 200, 400].iter().map(|&s| monodromy(&p, s).unwrap().u_t).collect();
    let r = (&u[0] - &u[1]).norm() / (&u[1] - &u[2]).norm();
    assert!((12.0..=20.0).contains(&r), "{r}");
}
