//! Supercharge, M1 Hamiltonian, PXP-like Hamiltonian and fermion number.
//!
//! `H_M1` is defined as the anticommutator `{Q, Q†}` computed by sparse
//! products. The hopping-plus-potential form is built independently by
//! [`build_m1_literal`] and only serves as a cross-check.

use alloc::vec::Vec;

use crate::error::{consistency, domain, Result};
use crate::hilbert::{jw_sign, ConstrainedBasis, MAX_SITES, MIN_SITES};
use crate::sparse::{anticommutator, SparseOperator};
use crate::C64;

const REALNESS_TOL: f64 = 1e-14;

/// Ring size and chemical potential of the PXP-like model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub n_sites: usize,
    pub mu: f64,
}

impl ModelParams {
    pub fn new(n_sites: usize, mu: f64) -> Result<Self> {
        if !(MIN_SITES..=MAX_SITES).contains(&n_sites) {
            return Err(domain!("ring size {n_sites} outside {MIN_SITES}..={MAX_SITES}"));
        }
        if !mu.is_finite() {
            return Err(domain!("chemical potential must be finite, got {mu}"));
        }
        Ok(Self { n_sites, mu })
    }
}

#[inline]
fn occupied(bits: u32, site: usize) -> bool {
    bits >> (site - 1) & 1 == 1
}

/// Periodic 1-based site arithmetic.
#[inline]
fn wrap(site: isize, n: usize) -> usize {
    (site - 1).rem_euclid(n as isize) as usize + 1
}

/// `Q = Σ_i P_{i-1} c_i P_{i+1}`; maps sector `f` to `f - 1`.
pub fn build_supercharge(basis: &ConstrainedBasis) -> Result<SparseOperator> {
    let n = basis.n_sites();
    let mut triplets = Vec::new();
    for col in 0..basis.dim() {
        let bits = basis.bits(col);
        for site in 1..=n {
            if !occupied(bits, site) {
                continue;
            }
            let target = bits ^ (1 << (site - 1));
            let left = wrap(site as isize - 1, n);
            let right = wrap(site as isize + 1, n);
            if occupied(target, left) || occupied(target, right) {
                continue;
            }
            let row = basis
                .index_of_bits(target)
                .ok_or_else(|| consistency!("annihilation left the constrained space"))?;
            triplets.push((row, col, C64::new(jw_sign(bits, site), 0.0)));
        }
    }
    SparseOperator::from_triplets(n, basis.dim(), triplets, false)
}

fn assert_real(op: &SparseOperator, what: &str) -> Result<()> {
    let im = op.max_imag();
    if im > REALNESS_TOL {
        return Err(consistency!("{what} has imaginary entries up to {im:e}"));
    }
    Ok(())
}

/// `H_M1 = Q Q† + Q† Q`.
pub fn build_m1(basis: &ConstrainedBasis) -> Result<SparseOperator> {
    let q = build_supercharge(basis)?;
    let h = anticommutator(&q, &q.adjoint())?.with_hermitian_flag(true);
    assert_real(&h, "H_M1")?;
    Ok(h)
}

/// Sign rule applied to the hopping bond that closes the ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WrapConvention {
    /// Genuine fermion operators: the `N -> 1` hop carries its Jordan–Wigner
    /// string `(-1)^(f-1)`.
    Fermionic,
    /// Hard-core bosonic sign (+1) on the closing bond; bulk bonds unchanged.
    Naive,
}

/// Literal hopping-plus-potential form
/// `Σ P_{i-1}(c†_i c_{i+1} + c†_{i+1} c_i)P_{i+2} + Σ P_{i-1} P_{i+1}`.
pub fn build_m1_literal(basis: &ConstrainedBasis) -> Result<SparseOperator> {
    build_m1_literal_with(basis, WrapConvention::Fermionic)
}

pub fn build_m1_literal_with(basis: &ConstrainedBasis, wrap_rule: WrapConvention) -> Result<SparseOperator> {
    let n = basis.n_sites();
    let mut triplets = Vec::new();
    for col in 0..basis.dim() {
        let bits = basis.bits(col);

        let potential = (1..=n)
            .filter(|&i| !occupied(bits, wrap(i as isize - 1, n)) && !occupied(bits, wrap(i as isize + 1, n)))
            .count();
        if potential > 0 {
            triplets.push((col, col, C64::new(potential as f64, 0.0)));
        }

        for i in 1..=n {
            let j = wrap(i as isize + 1, n);
            let outer_left = wrap(i as isize - 1, n);
            let outer_right = wrap(i as isize + 2, n);
            if occupied(bits, outer_left) || occupied(bits, outer_right) {
                continue;
            }
            // c†_to c_from for both hopping directions on the bond (i, j)
            for (from, to) in [(j, i), (i, j)] {
                if !occupied(bits, from) || occupied(bits, to) {
                    continue;
                }
                let removed = bits ^ (1 << (from - 1));
                let target = removed | (1 << (to - 1));
                let sign = match wrap_rule {
                    WrapConvention::Naive if i == n => 1.0,
                    _ => jw_sign(bits, from) * jw_sign(removed, to),
                };
                let row = basis
                    .index_of_bits(target)
                    .ok_or_else(|| consistency!("hopping left the constrained space"))?;
                triplets.push((row, col, C64::new(sign, 0.0)));
            }
        }
    }
    let h = SparseOperator::from_triplets(n, basis.dim(), triplets, true)?;
    assert_real(&h, "literal H_M1")?;
    Ok(h)
}

/// Outcome of comparing `{Q, Q†}` with the literal form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiteralComparison {
    /// Max elementwise difference with genuine fermionic signs on every bond.
    pub fermionic_max_diff: f64,
    /// Max elementwise difference when the closing bond uses a bosonic sign.
    pub naive_wrap_max_diff: f64,
}

pub fn compare_m1_forms(basis: &ConstrainedBasis) -> Result<LiteralComparison> {
    let h = build_m1(basis)?;
    Ok(LiteralComparison {
        fermionic_max_diff: h.max_abs_diff(&build_m1_literal_with(basis, WrapConvention::Fermionic)?)?,
        naive_wrap_max_diff: h.max_abs_diff(&build_m1_literal_with(basis, WrapConvention::Naive)?)?,
    })
}

/// Diagonal operator with entry `f` on each sector-`f` state.
pub fn build_fermion_number(basis: &ConstrainedBasis) -> Result<SparseOperator> {
    let triplets = (0..basis.dim()).map(|k| (k, k, C64::new(basis.fermion_number(k) as f64, 0.0)));
    SparseOperator::from_triplets(basis.n_sites(), basis.dim(), triplets, true)
}

/// `H_PXP = Q + Q† + μF`.
pub fn build_pxp(basis: &ConstrainedBasis, params: &ModelParams) -> Result<SparseOperator> {
    if params.n_sites != basis.n_sites() {
        return Err(domain!(
            "model has N = {} but the basis has N = {}",
            params.n_sites,
            basis.n_sites()
        ));
    }
    let q = build_supercharge(basis)?;
    let f = build_fermion_number(basis)?;
    let h = q
        .add(&q.adjoint())?
        .add_scaled(&f, C64::new(params.mu, 0.0))?
        .with_hermitian_flag(true);
    assert_real(&h, "H_PXP")?;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::BasisState;
    use crate::linalg::{dense_eigh, dot, norm};
    use crate::sparse::commutator;
    use alloc::vec;

    fn basis_vector(basis: &ConstrainedBasis, state: &BasisState) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); basis.dim()];
        v[basis.index_of(state).unwrap()] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn supercharge_kills_vacuum() {
        let basis = ConstrainedBasis::new(8).unwrap();
        let q = build_supercharge(&basis).unwrap();
        let out = q.apply(&basis_vector(&basis, &BasisState::vacuum(8).unwrap())).unwrap();
        assert_eq!(norm(&out), 0.0);
    }

    #[test]
    fn supercharge_on_single_fermion() {
        let basis = ConstrainedBasis::new(4).unwrap();
        let q = build_supercharge(&basis).unwrap();
        let s: BasisState = "0100".parse().unwrap();
        let out = q.apply(&basis_vector(&basis, &s)).unwrap();
        let vac = basis.index_of(&BasisState::vacuum(4).unwrap()).unwrap();
        assert_eq!(out[vac].norm(), 1.0);
        assert_eq!(norm(&out), 1.0);
    }

    #[test]
    fn z2_is_a_q_dagger_q_eigenstate() {
        let basis = ConstrainedBasis::new(12).unwrap();
        let q = build_supercharge(&basis).unwrap();
        let z2 = basis_vector(&basis, &BasisState::z2(12).unwrap());
        let qz = q.apply(&z2).unwrap();
        assert!((dot(&qz, &qz).re - 6.0).abs() < 1e-14);
        let h = build_m1(&basis).unwrap();
        let hz = h.apply(&z2).unwrap();
        for (a, b) in hz.iter().zip(&z2) {
            assert!((a - b * 6.0).norm() < 1e-14);
        }
        let lit = build_m1_literal(&basis).unwrap();
        let k = basis.index_of(&BasisState::z2(12).unwrap()).unwrap();
        assert_eq!(lit.get(k, k).re, 6.0);
    }

    #[test]
    fn vacuum_potential_is_n() {
        for n in [3, 7, 12] {
            let basis = ConstrainedBasis::new(n).unwrap();
            let lit = build_m1_literal(&basis).unwrap();
            assert_eq!(lit.get(0, 0).re, n as f64);
        }
    }

    #[test]
    fn single_fermion_block_is_tight_binding() {
        let n = 9;
        let basis = ConstrainedBasis::new(n).unwrap();
        let h = build_m1_literal(&basis).unwrap();
        let r = basis.sector_range(1);
        let block = h.dense_block(r.clone());
        for a in 0..n {
            for b in 0..n {
                let sa = basis.state(r.start + a).occupied_sites().next().unwrap();
                let sb = basis.state(r.start + b).occupied_sites().next().unwrap();
                let d = (sa as isize - sb as isize).rem_euclid(n as isize);
                let expected = if a == b {
                    (n - 2) as f64
                } else if d == 1 || d == n as isize - 1 {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(block[(a, b)].re, expected, "({sa},{sb})");
            }
        }
    }

    #[test]
    fn plane_wave_k0_has_energy_n() {
        let basis = ConstrainedBasis::new(12).unwrap();
        let h = build_m1(&basis).unwrap();
        let r = basis.sector_range(1);
        let mut v = vec![C64::new(0.0, 0.0); basis.dim()];
        for k in r {
            v[k] = C64::new(1.0 / 12f64.sqrt(), 0.0);
        }
        let hv = h.apply(&v).unwrap();
        assert!((dot(&v, &hv).re - 12.0).abs() < 1e-12);
    }

    #[test]
    fn fermion_number_trace_n4() {
        let basis = ConstrainedBasis::new(4).unwrap();
        let f = build_fermion_number(&basis).unwrap();
        // oracle: sum of popcounts over the brute-force enumeration
        let oracle: u32 = (0u32..16)
            .filter(|&b| (0..4).all(|i| !(b >> i & 1 == 1 && b >> ((i + 1) % 4) & 1 == 1)))
            .map(|b| b.count_ones())
            .sum();
        assert_eq!(oracle, 8);
        let trace: f64 = (0..basis.dim()).map(|k| f.get(k, k).re).sum();
        assert_eq!(trace, oracle as f64);
    }

    #[test]
    fn pxp_entries() {
        let basis = ConstrainedBasis::new(4).unwrap();
        let h0 = build_pxp(&basis, &ModelParams::new(4, 0.0).unwrap()).unwrap();
        assert_eq!(h0.get(0, 0).norm(), 0.0);
        let basis = ConstrainedBasis::new(12).unwrap();
        let h1 = build_pxp(&basis, &ModelParams::new(12, 1.0).unwrap()).unwrap();
        let k = basis.index_of(&BasisState::z2(12).unwrap()).unwrap();
        assert_eq!(h1.get(k, k).re, 6.0);
        for (r, c, _) in h1.triplets() {
            assert!(basis.fermion_number(r).abs_diff(basis.fermion_number(c)) <= 1);
        }
        assert!(build_pxp(&basis, &ModelParams::new(10, 1.0).unwrap()).is_err());
    }

    #[test]
    fn model_params_validation() {
        assert!(ModelParams::new(2, 0.0).is_err());
        assert!(ModelParams::new(12, f64::NAN).is_err());
        assert!(ModelParams::new(12, f64::INFINITY).is_err());
    }

    #[test]
    fn q_twice_on_basis_vectors_vanishes() {
        let basis = ConstrainedBasis::new(10).unwrap();
        let q = build_supercharge(&basis).unwrap();
        for k in 0..basis.dim() {
            let mut e = vec![C64::new(0.0, 0.0); basis.dim()];
            e[k] = C64::new(1.0, 0.0);
            let qq = q.apply(&q.apply(&e).unwrap()).unwrap();
            assert_eq!(norm(&qq), 0.0);
        }
    }

    #[test]
    fn algebra_for_small_rings() {
        for n in 3..=12 {
            let basis = ConstrainedBasis::new(n).unwrap();
            let q = build_supercharge(&basis).unwrap();
            let qd = q.adjoint();
            let f = build_fermion_number(&basis).unwrap();
            let h = build_m1(&basis).unwrap();
            assert!(q.matmul(&q).unwrap().max_abs() <= 1e-14);
            assert!(qd.matmul(&qd).unwrap().max_abs() <= 1e-14);
            assert!(commutator(&f, &q).unwrap().add(&q).unwrap().max_abs() <= 1e-13);
            assert!(commutator(&f, &qd).unwrap().sub(&qd).unwrap().max_abs() <= 1e-13);
            assert!(commutator(&f, &h).unwrap().max_abs() <= 1e-13);
            assert!(h.is_hermitian(1e-12));
            let cmp = compare_m1_forms(&basis).unwrap();
            assert_eq!(cmp.fermionic_max_diff, 0.0, "N = {n}");
            let (vals, _) = dense_eigh(h.to_dense());
            assert!(vals[0] >= -1e-12);
            for mu in [0.0, 0.7, -2.5] {
                let p = build_pxp(&basis, &ModelParams::new(n, mu).unwrap()).unwrap();
                let rest = p.add_scaled(&f, C64::new(-mu, 0.0)).unwrap();
                assert!(rest.max_abs_diff(&q.add(&qd).unwrap()).unwrap() <= 1e-15);
            }
        }
    }

    #[test]
    fn naive_wrap_sign_breaks_agreement_only_for_even_fermion_number() {
        // the closing hop moves a fermion past the other f - 1 fermions
        let basis = ConstrainedBasis::new(8).unwrap();
        let h = build_m1(&basis).unwrap();
        let naive = build_m1_literal_with(&basis, WrapConvention::Naive).unwrap();
        let diff = h.sub(&naive).unwrap();
        assert!(diff.max_abs() == 2.0);
        for (r, c, _) in diff.triplets() {
            assert_eq!(basis.fermion_number(r) % 2, 0);
            assert_eq!(basis.fermion_number(c), basis.fermion_number(r));
        }
    }
}
