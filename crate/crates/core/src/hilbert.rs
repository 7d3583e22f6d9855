//! Blockade-constrained fermionic Fock space on a ring.
//!
//! Sites are numbered `1..=N`. Site `i` is stored in bit `i - 1`, and a Fock
//! state is the ordered string `c†_{i1} c†_{i2} ... c†_{if} |0>` with
//! `i1 < i2 < ... < if`. All fermionic signs in the crate follow from this
//! single ordering.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use crate::error::{domain, Error, Result};

/// Largest ring that fits one machine word of occupation bits.
pub const MAX_SITES: usize = 32;

/// Smallest ring on which the neighbour set of a site is well defined.
pub const MIN_SITES: usize = 3;

#[inline]
fn site_mask(n_sites: usize) -> u32 {
    if n_sites == 32 {
        u32::MAX
    } else {
        (1u32 << n_sites) - 1
    }
}

/// Rotate the lowest `n` bits of `bits` left by `shift` positions.
#[inline]
fn rotate(bits: u32, shift: usize, n: usize) -> u32 {
    let shift = shift % n;
    if shift == 0 {
        return bits;
    }
    ((bits << shift) | (bits >> (n - shift))) & site_mask(n)
}

/// True when no two cyclically adjacent sites are both occupied.
#[inline]
pub fn satisfies_blockade(bits: u32, n_sites: usize) -> bool {
    bits & rotate(bits, 1, n_sites) == 0
}

fn check_ring(n_sites: usize) -> Result<()> {
    if !(MIN_SITES..=MAX_SITES).contains(&n_sites) {
        return Err(domain!(
            "ring size {n_sites} outside supported range {MIN_SITES}..={MAX_SITES}"
        ));
    }
    Ok(())
}

/// An occupation pattern of a ring of `n_sites` sites respecting the blockade.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    bits: u32,
    n_sites: u8,
}

impl BasisState {
    pub fn new(bits: u32, n_sites: usize) -> Result<Self> {
        check_ring(n_sites)?;
        if bits & !site_mask(n_sites) != 0 {
            return Err(domain!("bits {bits:#b} exceed {n_sites} sites"));
        }
        if !satisfies_blockade(bits, n_sites) {
            return Err(domain!("occupation {bits:#b} violates the nearest-neighbour blockade"));
        }
        Ok(Self {
            bits,
            n_sites: n_sites as u8,
        })
    }

    /// Build a state from 1-based occupied sites.
    pub fn from_sites(n_sites: usize, sites: &[usize]) -> Result<Self> {
        check_ring(n_sites)?;
        let mut bits = 0u32;
        for &site in sites {
            if !(1..=n_sites).contains(&site) {
                return Err(domain!("site {site} outside 1..={n_sites}"));
            }
            bits |= 1 << (site - 1);
        }
        Self::new(bits, n_sites)
    }

    pub fn vacuum(n_sites: usize) -> Result<Self> {
        Self::new(0, n_sites)
    }

    /// `c†_2 c†_4 ... c†_N |0>`; defined for even rings only.
    pub fn z2(n_sites: usize) -> Result<Self> {
        if !n_sites.is_multiple_of(2) {
            return Err(domain!("the Z2 state needs an even ring, got N = {n_sites}"));
        }
        let sites: Vec<usize> = (2..=n_sites).step_by(2).collect();
        Self::from_sites(n_sites, &sites)
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites as usize
    }

    #[inline]
    pub fn fermion_number(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Occupation of a 1-based site. Out-of-range sites read as empty.
    #[inline]
    pub fn is_occupied(&self, site: usize) -> bool {
        site >= 1 && site <= self.n_sites() && self.bits >> (site - 1) & 1 == 1
    }

    /// Occupied sites in increasing order.
    pub fn occupied_sites(&self) -> impl Iterator<Item = usize> + '_ {
        let mut rest = self.bits;
        core::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(b + 1)
            }
        })
    }

    /// Jordan–Wigner sign picked up by `c_site` or `c†_site`: `(-1)` to the
    /// number of occupied sites strictly left of `site`.
    pub fn fermion_sign(&self, site: usize) -> Result<f64> {
        if !(1..=self.n_sites()).contains(&site) {
            return Err(domain!("site {site} outside 1..={}", self.n_sites()));
        }
        Ok(jw_sign(self.bits, site))
    }

    /// Cyclic shift: the occupation of site `i` moves to site `i + shift`.
    pub fn translate(&self, shift: isize) -> Self {
        let n = self.n_sites() as isize;
        let s = shift.rem_euclid(n) as usize;
        Self {
            bits: rotate(self.bits, s, self.n_sites()),
            n_sites: self.n_sites,
        }
    }

    /// Reflection `i -> N + 1 - i`.
    pub fn spatial_invert(&self) -> Self {
        let n = self.n_sites();
        Self {
            bits: self.bits.reverse_bits() >> (32 - n),
            n_sites: self.n_sites,
        }
    }
}

/// Sign for the raw bit pattern; `site` is 1-based and assumed in range.
#[inline]
pub(crate) fn jw_sign(bits: u32, site: usize) -> f64 {
    let below = bits & ((1u32 << (site - 1)) - 1);
    if below.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Free-function form of [`BasisState::fermion_sign`].
pub fn fermion_sign(state: &BasisState, site: usize) -> Result<f64> {
    state.fermion_sign(site)
}

/// Free-function form of [`BasisState::translate`].
pub fn translate(state: &BasisState, shift: isize) -> BasisState {
    state.translate(shift)
}

/// Free-function form of [`BasisState::spatial_invert`].
pub fn spatial_invert(state: &BasisState) -> BasisState {
    state.spatial_invert()
}

impl fmt::Display for BasisState {
    /// Site 1 is printed first: `1010` has sites 1 and 3 occupied.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for site in 1..=self.n_sites() {
            f.write_str(if self.is_occupied(site) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BasisState({self})")
    }
}

impl FromStr for BasisState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u32;
        let mut n = 0usize;
        for (k, ch) in s.trim().chars().enumerate() {
            match ch {
                '0' => {}
                '1' if k < MAX_SITES => bits |= 1 << k,
                '1' => return Err(domain!("more than {MAX_SITES} sites")),
                other => return Err(domain!("unexpected character {other:?} in occupation string")),
            }
            n = k + 1;
        }
        Self::new(bits, n)
    }
}

/// Ordered enumeration of all blockade-respecting states of a ring.
///
/// States are sorted by fermion number, then by their numeric bit value, so
/// each fixed-`f` sector is a contiguous index range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstrainedBasis {
    n_sites: usize,
    states: Vec<u32>,
    sector_offsets: Vec<usize>,
}

impl ConstrainedBasis {
    pub fn new(n_sites: usize) -> Result<Self> {
        check_ring(n_sites)?;
        let mut states = Vec::new();
        collect_open_chain(n_sites, 0, 0, &mut states);
        // the open-chain walk allows sites 1 and N together; the ring does not
        let ring_edge = 1u32 | (1u32 << (n_sites - 1));
        states.retain(|&b| b & ring_edge != ring_edge);
        states.sort_unstable_by_key(|&b| (b.count_ones(), b));

        let max_f = n_sites / 2;
        let mut sector_offsets = Vec::with_capacity(max_f + 2);
        let mut k = 0;
        for f in 0..=max_f {
            sector_offsets.push(k);
            while k < states.len() && states[k].count_ones() as usize == f {
                k += 1;
            }
        }
        sector_offsets.push(states.len());
        Ok(Self {
            n_sites,
            states,
            sector_offsets,
        })
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Largest fermion number any state can carry, `floor(N / 2)`.
    #[inline]
    pub fn max_fermions(&self) -> usize {
        self.sector_offsets.len() - 2
    }

    #[inline]
    pub fn state(&self, index: usize) -> BasisState {
        BasisState {
            bits: self.states[index],
            n_sites: self.n_sites as u8,
        }
    }

    #[inline]
    pub(crate) fn bits(&self, index: usize) -> u32 {
        self.states[index]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = BasisState> + '_ {
        let n = self.n_sites as u8;
        self.states.iter().map(move |&bits| BasisState { bits, n_sites: n })
    }

    /// Index of a state, or `None` for foreign or invalid states.
    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        if state.n_sites() != self.n_sites {
            return None;
        }
        self.index_of_bits(state.bits)
    }

    #[inline]
    pub(crate) fn index_of_bits(&self, bits: u32) -> Option<usize> {
        let f = bits.count_ones() as usize;
        if f > self.max_fermions() {
            return None;
        }
        let range = self.sector_range(f);
        self.states[range.clone()]
            .binary_search(&bits)
            .ok()
            .map(|k| range.start + k)
    }

    /// Index range of the fixed-`f` sector; empty when `f > floor(N/2)`.
    pub fn sector_range(&self, f: usize) -> Range<usize> {
        if f > self.max_fermions() {
            return self.dim()..self.dim();
        }
        self.sector_offsets[f]..self.sector_offsets[f + 1]
    }

    #[inline]
    pub fn fermion_number(&self, index: usize) -> usize {
        self.states[index].count_ones() as usize
    }

    /// Apply the lattice translation `c†_i -> c†_{i+shift}` to a state vector.
    ///
    /// Fermions carried across the ring edge are reordered to the front of
    /// the creation string, which costs `(-1)^(w (f - w))` for `w` wrapped
    /// fermions out of `f`.
    pub fn translate_vector(&self, vec: &[crate::C64], shift: isize) -> Result<Vec<crate::C64>> {
        self.check_len(vec)?;
        let n = self.n_sites;
        let s = shift.rem_euclid(n as isize) as usize;
        let mut out = alloc::vec![crate::C64::new(0.0, 0.0); vec.len()];
        for (k, a) in vec.iter().enumerate() {
            let bits = self.states[k];
            let f = bits.count_ones();
            let wrapped = if s == 0 { 0 } else { (bits >> (n - s)).count_ones() };
            let sign = if (wrapped * (f - wrapped)).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            let target = self
                .index_of_bits(rotate(bits, s, n))
                .expect("translation preserves the blockade");
            out[target] = a * sign;
        }
        Ok(out)
    }

    /// Apply the reflection `c†_i -> c†_{N+1-i}` to a state vector; reversing
    /// the creation string costs `(-1)^(f (f - 1) / 2)`.
    pub fn invert_vector(&self, vec: &[crate::C64]) -> Result<Vec<crate::C64>> {
        self.check_len(vec)?;
        let mut out = alloc::vec![crate::C64::new(0.0, 0.0); vec.len()];
        for (k, a) in vec.iter().enumerate() {
            let state = self.state(k);
            let f = state.fermion_number();
            let sign = if (f * f.saturating_sub(1) / 2).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            let target = self
                .index_of(&state.spatial_invert())
                .expect("reflection preserves the blockade");
            out[target] = a * sign;
        }
        Ok(out)
    }

    fn check_len(&self, vec: &[crate::C64]) -> Result<()> {
        if vec.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: vec.len(),
            });
        }
        Ok(())
    }

    /// Fermion number of a state vector if all its weight sits in one sector.
    pub fn sector_of_vector(&self, vec: &[crate::C64], tol: f64) -> Option<usize> {
        let mut weights = alloc::vec![0.0f64; self.max_fermions() + 1];
        let mut total = 0.0;
        for (k, a) in vec.iter().enumerate() {
            let w = a.norm_sqr();
            weights[self.fermion_number(k)] += w;
            total += w;
        }
        if total == 0.0 {
            return None;
        }
        weights.iter().position(|&w| w >= total * (1.0 - tol))
    }
}

fn collect_open_chain(n: usize, pos: usize, bits: u32, out: &mut Vec<u32>) {
    if pos == n {
        out.push(bits);
        return;
    }
    collect_open_chain(n, pos + 1, bits, out);
    if pos == 0 || bits >> (pos - 1) & 1 == 0 {
        collect_open_chain(n, pos + 1, bits | (1 << pos), out);
    }
}

/// Enumerate the constrained basis of an `n_sites` ring.
pub fn enumerate_basis(n_sites: usize) -> Result<ConstrainedBasis> {
    ConstrainedBasis::new(n_sites)
}
