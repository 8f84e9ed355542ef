use std::f64::consts::PI;

use nhphase_core::biorthonormal::{build_system, build_system_path, completeness_defect};
use nhphase_core::evolution::{assess_cyclicity, periodic_initial_condition, projective_distance};
use nhphase_core::linalg::{lu_solve, ComplexMatrix, ComplexVector, EigOptions, C64};
use nhphase_core::phases::{
    adiabaticity_eta, circular_distance, connection_samples, dynamical_phase, geometric_phase_complex,
    geometric_phase_real, geometric_phase_real_raw, phase_relation, phase_relation_residual,
};
use nhphase_core::{biorthonormal::build_system_path_with, Error, HamiltonianPath};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let a = random_matrix(n, rng);
    (&a + &a.adjoint()).scale(C64::new(0.5, 0.0))
}

/// `V(t) diag(−1.5, 0.1, 1.4) V(t)⁻¹` with a non-unitary `V(t)`: non-Hermitian,
/// real and constant spectrum, so no mode outgrows the others.
fn similarity_path(omega: f64, samples: usize) -> HamiltonianPath {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (a, b) = (random_matrix(3, &mut rng), random_matrix(3, &mut rng));
    let d = ComplexMatrix::diag(&[C64::new(-1.5, 0.0), C64::new(0.1, 0.0), C64::new(1.4, 0.0)]);
    HamiltonianPath::from_fn(2.0 * PI / omega, samples, move |t| {
        let (s, c) = (omega * t).sin_cos();
        let v = &(&ComplexMatrix::identity(3) + &a.scale(C64::new(0.3 * c, 0.0))) + &b.scale(C64::new(0.3 * s, 0.0));
        let cols: Vec<ComplexVector> = (0..3)
            .map(|j| lu_solve(&v, &ComplexVector::basis(3, j)).unwrap())
            .collect();
        let v_inv = ComplexMatrix::from_columns(&cols).unwrap();
        v.matmul(&d).unwrap().matmul(&v_inv).unwrap()
    })
    .unwrap()
}

/// Three well separated levels, non-Hermitian, moving around a loop of period `2π/ω`.
fn three_level_path(omega: f64, samples: usize, hermitian: bool) -> HamiltonianPath {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (a, b) = if hermitian {
        (random_hermitian(3, &mut rng), random_hermitian(3, &mut rng))
    } else {
        (random_matrix(3, &mut rng), random_matrix(3, &mut rng))
    };
    let base = ComplexMatrix::diag(&[C64::new(-1.5, 0.0), C64::new(0.1, 0.0), C64::new(1.4, 0.0)]);
    HamiltonianPath::from_fn(2.0 * PI / omega, samples, move |t| {
        let (s, c) = (omega * t).sin_cos();
        &(&base + &a.scale(C64::new(0.25 * c, 0.0))) + &b.scale(C64::new(0.25 * s, 0.0))
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_systems_are_biorthonormal_and_complete(n in 1usize..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(n, &mut rng);
        match build_system(&a, 1e-10) {
            Ok(s) => {
                prop_assert!(s.biorthonormality_defect() < 1e-9);
                prop_assert!(completeness_defect(&s) < 1e-9);
                prop_assert!(s.right_residual(&a).unwrap() < 1e-9);
                prop_assert!(s.left_residual(&a).unwrap() < 1e-9);
            }
            Err(Error::DegenerateSpectrum { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn rescaling_preserves_invariants(seed in any::<u64>(), re in 0.1f64..5.0, arg in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(4, &mut rng);
        let mut s = build_system(&a, 1e-10).unwrap();
        let p_before = s.projector(1);
        s.rescale(1, C64::from_polar(re, arg)).unwrap();
        prop_assert!(s.biorthonormality_defect() < 1e-9);
        prop_assert!(completeness_defect(&s) < 1e-9);
        prop_assert!(s.right_residual(&a).unwrap() < 1e-9 * re.max(1.0));
        prop_assert!((&s.projector(1) - &p_before).norm() < 1e-12);
    }

    #[test]
    fn hermitian_systems_reduce_to_orthonormal(n in 2usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(n, &mut rng);
        let s = build_system(&h, 1e-10).unwrap();
        for k in 0..n {
            prop_assert!(s.eigenvalues[k].im.abs() < 1e-10);
            prop_assert!((&s.left_vectors[k] - &s.right_vectors[k]).norm() < 1e-9);
        }
    }

    #[test]
    fn projective_distance_is_a_ray_metric(seed in any::<u64>(), re in 0.01f64..100.0, arg in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: ComplexVector = (0..3).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let w: ComplexVector = (0..3).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let d = projective_distance(&v, &w).unwrap();
        prop_assert!((0.0..=PI / 2.0).contains(&d));
        prop_assert!((d - projective_distance(&w, &v).unwrap()).abs() < 1e-14);
        let scaled = projective_distance(&v.scale(C64::from_polar(re, arg)), &w).unwrap();
        prop_assert!((d - scaled).abs() < 1e-12);
    }
}

#[test]
fn system_path_is_deterministic() {
    let path = three_level_path(0.1, 64, false);
    let opts = EigOptions {
        seed: 11,
        ..EigOptions::default()
    };
    let a = build_system_path_with(&path, &opts).unwrap();
    let b = build_system_path_with(&path, &opts).unwrap();
    for (x, y) in a.systems.iter().zip(&b.systems) {
        assert_eq!(x.eigenvalues, y.eigenvalues);
        assert_eq!(x.right_vectors, y.right_vectors);
        assert_eq!(x.left_vectors, y.left_vectors);
    }
    assert_eq!(a.holonomy, b.holonomy);
}

#[test]
fn frame_is_continuous_and_closes() {
    let sp = build_system_path(&three_level_path(0.1, 128, false), 1e-10).unwrap();
    for n in 0..3 {
        let psi = sp.right_series(n);
        for k in 0..psi.len() {
            let next = &psi[(k + 1) % psi.len()];
            let ov = nhphase_core::linalg::inner(&psi[k], next).unwrap();
            assert!(ov.re > 0.0 && ov.im.abs() < 0.1 * ov.norm(), "n={n}, k={k}, overlap {ov}");
        }
    }
}

#[test]
fn generic_path_realness_and_relation() {
    for samples in [1024, 4096] {
        let sp = build_system_path(&three_level_path(0.01, samples, false), 1e-10).unwrap();
        for m in 0..3 {
            let raw = geometric_phase_real_raw(&sp, m).unwrap();
            assert!(raw.im.abs() < 1e-9, "m={m}: Im = {}", raw.im);
            assert!(phase_relation_residual(&sp, m).unwrap() < 1e-6);
        }
    }
}

#[test]
fn hermitian_path_has_no_correction() {
    let sp = build_system_path(&three_level_path(0.01, 1024, true), 1e-10).unwrap();
    for m in 0..3 {
        let rel = phase_relation(&sp, m).unwrap();
        assert!(rel.correction.norm() < 1e-9);
        assert!(rel.residual < 1e-9);
        assert!(rel.gamma.im.abs() < 1e-9);
        assert!(circular_distance(rel.gamma.re, rel.gamma_tilde.re) < 1e-9);
    }
}

#[test]
fn loop_phases_are_gauge_invariant() {
    let sp = build_system_path(&three_level_path(0.01, 2048, false), 1e-10).unwrap();
    let n = sp.len() as f64;
    // smooth, single valued, one unit of winding in mode 0 and a non-unit modulus
    let gauged = sp
        .with_gauge(|k, m| {
            let x = 2.0 * PI * k as f64 / n;
            let winding = if m == 0 { x } else { 0.0 };
            C64::from_polar(1.0 + 0.3 * (x + m as f64).sin(), winding + 0.7 * (2.0 * x).cos() + 0.2 * m as f64)
        })
        .unwrap();
    for m in 0..3 {
        let a = geometric_phase_real(&sp, m).unwrap();
        let b = geometric_phase_real(&gauged, m).unwrap();
        assert!(circular_distance(a, b) < 1e-8, "gamma_tilde mode {m}: {a} vs {b}");
        let ga = geometric_phase_complex(&sp, m).unwrap();
        let gb = geometric_phase_complex(&gauged, m).unwrap();
        assert!(circular_distance(ga.re, gb.re) < 1e-8 && (ga.im - gb.im).abs() < 1e-8);
        assert!((adiabaticity_eta(&sp).unwrap() - adiabaticity_eta(&gauged).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn constant_path_has_zero_connection() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let path = HamiltonianPath::constant(3.0, 16, random_matrix(3, &mut rng)).unwrap();
    let sp = build_system_path(&path, 1e-10).unwrap();
    let conn = connection_samples(&sp);
    assert!(conn.a.iter().chain(&conn.a_tilde).all(|x| x.max_abs() < 1e-13));
    assert_eq!(adiabaticity_eta(&sp).unwrap(), 0.0);
    for m in 0..3 {
        assert!(geometric_phase_complex(&sp, m).unwrap().norm() < 1e-13);
        let e = sp.systems[0].eigenvalues[m];
        assert!((dynamical_phase(&sp, m).unwrap() + e * 3.0).norm() < 1e-12);
    }
}

#[test]
fn dynamical_phase_of_decaying_level() {
    let h = ComplexMatrix::diag(&[C64::new(1.0, -0.1), C64::new(-1.0, 0.0)]);
    let sp = build_system_path(&HamiltonianPath::constant(2.0 * PI, 8, h).unwrap(), 1e-10).unwrap();
    let m = if sp.systems[0].eigenvalues[0].re > 0.0 { 0 } else { 1 };
    let d = dynamical_phase(&sp, m).unwrap();
    assert!((d - C64::new(-2.0 * PI, 0.2 * PI)).norm() < 1e-12);
}

#[test]
fn generic_reduced_system_gives_approximately_cyclic_states() {
    let mut defects = vec![];
    for omega in [0.01, 0.001] {
        let path = similarity_path(omega, 2048);
        let sp = build_system_path(&path, 1e-10).unwrap();
        let steps = if omega > 0.005 { 1 << 16 } else { 1 << 20 };
        let mut row = vec![];
        for m in 0..3 {
            let pic = periodic_initial_condition(&sp, m, 16384).unwrap();
            assert_eq!(pic.c0.dim(), 2);
            let a = assess_cyclicity(&path, &sp, m, steps).unwrap();
            assert!(a.defect <= 10.0 * a.eta, "omega={omega}, m={m}: defect {} eta {}", a.defect, a.eta);
            row.push(a.defect);
        }
        defects.push(row);
    }
    for m in 0..3 {
        assert!(defects[1][m] * 5.0 < defects[0][m], "mode {m}: {:?}", defects);
    }
}
