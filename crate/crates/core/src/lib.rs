//! Adiabatic cyclic states and geometric phases of time-periodic
//! non-Hermitian Hamiltonians.
//!
//! The building blocks are a small dense complex linear algebra layer
//! ([`linalg`]), biorthonormal eigenframes continued along a closed path
//! ([`biorthonormal`]), loop quadratures of the complex and real geometric
//! phases ([`phases`]), direct time evolution and the reduced coefficient
//! system whose periodic orbit defines the cyclic states ([`evolution`]), and
//! the closed-form two-level model ([`two_level`]).

mod assign;
pub mod biorthonormal;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod interp;
pub mod linalg;
pub mod path;
pub mod phases;
pub mod two_level;

pub use biorthonormal::{
    build_system, build_system_path, completeness_defect, BiorthonormalSystem, SystemPath,
};
pub use error::{Error, Result};
pub use evolution::{
    assess_cyclicity, exact_cyclic_states, monodromy, periodic_initial_condition, projective_distance,
    propagate, reduced_ode_solve, CyclicityAssessment, Monodromy, Periodicity, Trajectory,
};
pub use grid::DerivativeScheme;
pub use linalg::{ComplexMatrix, ComplexVector, EigOptions, Spectrum, C64};
pub use path::{FnHamiltonian, Hamiltonian, HamiltonianPath};
pub use phases::{
    adiabaticity_eta, connection_samples, dynamical_phase, geometric_phase_complex, geometric_phase_real,
    phase_relation_residual, phase_report, ConnectionSamples, PhaseReport,
};
pub use two_level::TwoLevelParams;
