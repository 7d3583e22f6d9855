//! Exact-diagonalization kernels for the supersymmetric M1 chain and its
//! PXP-like fermionic deformation `H = Q + Q† + μF`.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! command-line front end and threading live in the `m1chain` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bessel;
pub mod bethe;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod mps;
pub mod operators;
pub mod sparse;
pub mod spectra;

pub use num_complex::Complex64 as C64;

pub use bessel::bessel_j0;
pub use bethe::{
    append_unit_root, bethe_energy, bethe_residuals, build_bethe_state, dress_solution, inversion_partner,
    scattering_g, single_fermion_solutions, special_solution, Admissibility, BetheSolution, Branch, Inadmissible,
};
pub use dynamics::{
    doublet_fidelity, evolve, fermion_number_trace, fidelity_series, single_fermion_fidelity_bessel,
    single_fermion_fidelity_exact, uniform_times, z2_fidelity_analytic, EvolveOptions, KrylovOptions, KrylovPropagator,
    Method, Observable, Propagator, QuenchResult, SpectralPropagator,
};
pub use error::{Error, Result};
pub use hilbert::{enumerate_basis, BasisState, ConstrainedBasis};
pub use mps::{build_special_mps, mps_amplitude, mps_to_statevector, schmidt_rank, schmidt_spectrum, MpsState};
pub use operators::{build_fermion_number, build_m1, build_m1_literal, build_pxp, build_supercharge, ModelParams};
pub use sparse::SparseOperator;
pub use spectra::{
    classify_susy, diagonalize, diagonalize_by_sector, doublet_hamiltonian, entanglement_entropy,
    integer_eigenvalue_table, max_entropy_over_cuts, schmidt_values, Cut, Doublet, DoubletBlock, DoubletHamiltonian,
    EigenOptions, IntegerLevel, IntegerTable, Spectrum, SusyClassification,
};
