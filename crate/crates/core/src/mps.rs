//! Matrix-product form of the special `e^{±iπ/3}` eigenstates.
//!
//! `φ(i₁..i_f) = Tr(A₁^{n₁} ⋯ A_N^{n_N} B)` with
//! `A_j¹ = e^{±iπj/3} [[0,1],[0,0]] ⊗ X`, `A_j⁰ = [[0,0],[1,1]] ⊗ 1` and
//! `B = 1₂ ⊗ B̃`, where `X_{a,b} = δ_{b,a+1}` and `B̃_{a,b} = δ_{a,f} δ_{b,0}`
//! on a particle-count index `0..=f`. The 2×2 factor enforces the blockade
//! around the ring; the count factor selects exactly `f` particles.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use crate::bethe::{special_solution, Admissibility, Branch};
use crate::error::{consistency, domain, Error, Result};
use crate::hilbert::{BasisState, ConstrainedBasis};
use crate::linalg;
use crate::spectra::{schmidt_values, Cut};
use crate::C64;

/// Site tensors and boundary matrix of a special state.
#[derive(Clone, Debug, PartialEq)]
pub struct MpsState {
    pub n_sites: usize,
    pub fermion_number: usize,
    pub branch: Branch,
    /// `(A_j⁰, A_j¹)` for sites `j = 1..=N`.
    pub site_tensors: Vec<[DMatrix<C64>; 2]>,
    pub boundary: DMatrix<C64>,
}

impl MpsState {
    /// `2(f + 1)`.
    pub fn bond_dim(&self) -> usize {
        2 * (self.fermion_number + 1)
    }
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Tensors of the all-`e^{±iπ/3}` state with `f` fermions on `N` sites.
pub fn build_special_mps(n_sites: usize, f: usize, branch: Branch) -> Result<MpsState> {
    match special_solution(n_sites, f, branch)? {
        Admissibility::Admissible(_) => {}
        Admissibility::Inadmissible(why) => {
            return Err(domain!("no special state for N = {n_sites}, f = {f}: {}", why.reason))
        }
    }
    let d = f + 1;
    let one = C64::one();
    let zero = C64::zero();
    let x = DMatrix::from_fn(d, d, |a, b| if b == a + 1 { one } else { zero });
    let id = DMatrix::<C64>::identity(d, d);
    let b_tilde = DMatrix::from_fn(d, d, |a, b| if a == f && b == 0 { one } else { zero });
    let occupied = DMatrix::from_row_slice(2, 2, &[zero, one, zero, zero]);
    let empty = DMatrix::from_row_slice(2, 2, &[zero, zero, one, one]);

    let a0 = kron(&empty, &id);
    let a1 = kron(&occupied, &x);
    let site_tensors = (1..=n_sites)
        .map(|j| {
            let phase = C64::from_polar(1.0, branch.sign() * core::f64::consts::FRAC_PI_3 * (j % 6) as f64);
            [a0.clone(), &a1 * phase]
        })
        .collect();
    Ok(MpsState {
        n_sites,
        fermion_number: f,
        branch,
        site_tensors,
        boundary: kron(&DMatrix::identity(2, 2), &b_tilde),
    })
}

/// `Tr(A₁^{n₁} ⋯ A_N^{n_N} B)`, the coefficient of the ordered creation
/// string of `config`.
pub fn mps_amplitude(mps: &MpsState, config: &BasisState) -> Result<C64> {
    if config.n_sites() != mps.n_sites {
        return Err(domain!(
            "configuration has {} sites, MPS has {}",
            config.n_sites(),
            mps.n_sites
        ));
    }
    Ok(amplitude_bits(mps, config.bits()))
}

// also used for bit patterns that violate the blockade
fn amplitude_bits(mps: &MpsState, bits: u32) -> C64 {
    let mut m = mps.boundary.clone();
    // multiply from the right end so each step is matrix × matrix of size D
    for j in (0..mps.n_sites).rev() {
        let n = ((bits >> j) & 1) as usize;
        m = &mps.site_tensors[j][n] * m;
    }
    m.trace()
}

/// Amplitude of an arbitrary occupation pattern, including ones that
/// break the blockade or carry the wrong particle number.
pub fn mps_amplitude_unchecked(mps: &MpsState, bits: u32) -> Result<C64> {
    if mps.n_sites < 32 && bits >> mps.n_sites != 0 {
        return Err(domain!("bit pattern {bits:#b} exceeds {} sites", mps.n_sites));
    }
    Ok(amplitude_bits(mps, bits))
}

/// Normalized state vector over `basis`.
///
/// The basis states are the ordered creation strings that the trace formula
/// refers to, so the amplitudes are used without further signs.
pub fn mps_to_statevector(mps: &MpsState, basis: &ConstrainedBasis) -> Result<Vec<C64>> {
    if basis.n_sites() != mps.n_sites {
        return Err(Error::DimensionMismatch {
            expected: mps.n_sites,
            found: basis.n_sites(),
        });
    }
    let mut v: Vec<C64> = basis.states().map(|s| amplitude_bits(mps, s.bits())).collect();
    let n = linalg::normalize(&mut v);
    if n == 0.0 {
        return Err(consistency!("MPS contracts to the zero vector"));
    }
    Ok(v)
}

/// Schmidt coefficients of the MPS state across `cut`.
pub fn schmidt_spectrum(mps: &MpsState, basis: &ConstrainedBasis, cut: Cut) -> Result<Vec<f64>> {
    schmidt_values(&mps_to_statevector(mps, basis)?, basis, cut)
}

/// Number of Schmidt values above `tol` times the largest.
pub fn schmidt_rank(values: &[f64], tol: f64) -> usize {
    let top = values.iter().copied().fold(0.0, f64::max);
    values.iter().filter(|&&s| s > tol * top).count()
}
