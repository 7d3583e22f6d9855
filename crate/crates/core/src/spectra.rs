//! Diagonalization, supersymmetry classification, integer-level tables,
//! the doublet 2×2 reduction and entanglement entropy.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::DMatrix;
use num_traits::Zero;

use crate::error::{consistency, domain, Error, Result};
use crate::hilbert::ConstrainedBasis;
use crate::linalg::{self, dense_eigh, lanczos_extremal, residual_norm, Extremal, LanczosOptions};
use crate::sparse::SparseOperator;
#[allow(unused_imports)]
use num_traits::Float;

use crate::C64;

/// Eigenpairs of a Hermitian operator over a constrained basis.
///
/// Eigenvectors always live in the full space, even when only one sector
/// was diagonalized.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub n_sites: usize,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<C64>>,
    /// Fermion number of each eigenvector, `None` if it mixes sectors.
    pub sector_labels: Vec<Option<usize>>,
    pub residual_norms: Vec<f64>,
    /// True when every eigenpair of the diagonalized space is present.
    pub complete: bool,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Ids of the eigenpairs labelled with fermion number `f`.
    pub fn sector_ids(&self, f: usize) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.sector_labels[k] == Some(f)).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residual_norms.iter().copied().fold(0.0, f64::max)
    }

    /// Concatenate spectra of disjoint sectors.
    pub fn concat(parts: Vec<Spectrum>) -> Result<Spectrum> {
        let mut iter = parts.into_iter();
        let mut out = iter.next().ok_or_else(|| domain!("nothing to concatenate"))?;
        for p in iter {
            if p.n_sites != out.n_sites {
                return Err(domain!("spectra of different system sizes"));
            }
            out.eigenvalues.extend(p.eigenvalues);
            out.eigenvectors.extend(p.eigenvectors);
            out.sector_labels.extend(p.sector_labels);
            out.residual_norms.extend(p.residual_norms);
            out.complete &= p.complete;
        }
        Ok(out)
    }
}

/// Solver selection for [`diagonalize`].
#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Blocks up to this dimension use the dense solver.
    pub dense_threshold: usize,
    /// Number of eigenpairs the iterative solver returns.
    pub iterative_count: usize,
    pub which: Extremal,
    pub lanczos: LanczosOptions,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_threshold: 4096,
            iterative_count: 16,
            which: Extremal::Smallest,
            lanczos: LanczosOptions::default(),
        }
    }
}

const HERMITIAN_TOL: f64 = 1e-12;
const SECTOR_TOL: f64 = 1e-12;

fn residual_bound(e: f64) -> f64 {
    1e-10 * e.abs().max(1.0)
}

/// Diagonalize a Hermitian operator, optionally restricted to one sector.
///
/// Blocks up to `dense_threshold` are solved densely and completely. Larger
/// blocks return the `iterative_count` extremal eigenpairs from deflated
/// Lanczos and set `complete = false`.
pub fn diagonalize(
    op: &SparseOperator,
    basis: &ConstrainedBasis,
    sector: Option<usize>,
    opts: &EigenOptions,
) -> Result<Spectrum> {
    if op.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: op.dim(),
        });
    }
    if !op.is_hermitian(HERMITIAN_TOL * op.max_abs().max(1.0)) {
        return Err(domain!("operator is not hermitian"));
    }
    let range: Range<usize> = match sector {
        None => 0..basis.dim(),
        Some(f) => {
            if f > basis.max_fermions() {
                return Err(domain!("sector f = {f} is empty for N = {}", basis.n_sites()));
            }
            let r = basis.sector_range(f);
            if op.couples_outside(&r) {
                return Err(domain!("operator is not block-diagonal in the fermion number"));
            }
            r
        }
    };

    let block_dim = range.len();
    let (values, local_vectors, complete): (Vec<f64>, Vec<Vec<C64>>, bool) = if block_dim <= opts.dense_threshold {
        let (vals, vecs) = dense_eigh(op.dense_block(range.clone()));
        let cols = (0..block_dim)
            .map(|c| vecs.column(c).iter().copied().collect())
            .collect();
        (vals, cols, true)
    } else {
        let block = op.block(range.clone());
        let pairs = lanczos_extremal(&block, opts.iterative_count, opts.which, &opts.lanczos)?;
        let complete = pairs.len() == block_dim;
        let (v, x) = pairs.into_iter().unzip();
        (v, x, complete)
    };

    let mut eigenvectors = Vec::with_capacity(values.len());
    let mut sector_labels = Vec::with_capacity(values.len());
    let mut residual_norms = Vec::with_capacity(values.len());
    for (e, local) in values.iter().zip(local_vectors) {
        let mut full = vec![C64::zero(); basis.dim()];
        full[range.clone()].copy_from_slice(&local);
        let res = residual_norm(op, &full, *e)?;
        if res > residual_bound(*e) {
            return Err(Error::NonConvergence {
                method: if complete { "dense eigensolver" } else { "Lanczos" },
                achieved: res,
                requested: residual_bound(*e),
            });
        }
        residual_norms.push(res);
        sector_labels.push(match sector {
            Some(f) => Some(f),
            None => basis.sector_of_vector(&full, SECTOR_TOL),
        });
        eigenvectors.push(full);
    }

    Ok(Spectrum {
        n_sites: basis.n_sites(),
        eigenvalues: values,
        eigenvectors,
        sector_labels,
        residual_norms,
        complete,
    })
}

/// Diagonalize every fermion-number sector in turn and concatenate.
pub fn diagonalize_by_sector(op: &SparseOperator, basis: &ConstrainedBasis, opts: &EigenOptions) -> Result<Spectrum> {
    let parts = (0..=basis.max_fermions())
        .map(|f| diagonalize(op, basis, Some(f), opts))
        .collect::<Result<Vec<_>>>()?;
    Spectrum::concat(parts)
}

/// A supersymmetric doublet: `upper = Q†·lower / √E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Doublet {
    pub lower: usize,
    pub upper: usize,
    pub energy: f64,
}

/// Singlets and doublets of an M1 spectrum.
///
/// `spectrum` is the input spectrum with eigenvectors rotated inside
/// degenerate levels so that every doublet partner is exactly
/// `Q†v/√E`; the ids in `singlets` and `doublets` refer to it.
#[derive(Clone, Debug)]
pub struct SusyClassification {
    pub spectrum: Spectrum,
    pub singlets: Vec<usize>,
    pub doublets: Vec<Doublet>,
}

impl SusyClassification {
    /// Doublet containing eigenpair `id`, if any.
    pub fn doublet_of(&self, id: usize) -> Option<&Doublet> {
        self.doublets.iter().find(|d| d.lower == id || d.upper == id)
    }
}

/// Tolerances for [`classify_susy`].
const ANNIHILATION_TOL: f64 = 1e-9;
const PARTNER_ENERGY_TOL: f64 = 1e-9;
const LEVEL_GAP: f64 = 1e-8;

/// Group ids of one sector into degenerate levels.
fn levels(spectrum: &Spectrum, ids: &[usize]) -> Vec<Vec<usize>> {
    let mut sorted = ids.to_vec();
    sorted.sort_by(|&a, &b| spectrum.eigenvalues[a].total_cmp(&spectrum.eigenvalues[b]));
    let mut out: Vec<Vec<usize>> = Vec::new();
    for id in sorted {
        let e = spectrum.eigenvalues[id];
        match out.last_mut() {
            Some(level) if (e - spectrum.eigenvalues[*level.last().unwrap()]).abs() <= LEVEL_GAP * e.abs().max(1.0) => {
                level.push(id)
            }
            _ => out.push(vec![id]),
        }
    }
    out
}

type LevelSplit = (Vec<Vec<C64>>, Vec<Vec<C64>>);

/// Split a degenerate level into its `Q`-closed part (eigenvalue 0 of
/// `⟨Qv_a, Qv_b⟩/E`) and its `Q†`-closed part (eigenvalue 1).
fn split_level(vectors: &[Vec<C64>], q: &SparseOperator, energy: f64) -> Result<LevelSplit> {
    let k = vectors.len();
    let images = vectors.iter().map(|v| q.apply(v)).collect::<Result<Vec<_>>>()?;
    let m = DMatrix::from_fn(k, k, |a, b| linalg::dot(&images[a], &images[b]) / energy);
    let (vals, rot) = dense_eigh(m);
    let mut closed = Vec::new();
    let mut coclosed = Vec::new();
    for (c, &lam) in vals.iter().enumerate() {
        if lam.abs() > 1e-6 && (lam - 1.0).abs() > 1e-6 {
            return Err(consistency!(
                "degenerate level at E = {energy} is not supersymmetric (weight {lam})"
            ));
        }
        let mut x = vec![C64::zero(); vectors[0].len()];
        for (a, v) in vectors.iter().enumerate() {
            linalg::axpy(rot[(a, c)], v, &mut x);
        }
        linalg::normalize(&mut x);
        if lam < 0.5 {
            closed.push(x);
        } else {
            coclosed.push(x);
        }
    }
    Ok((closed, coclosed))
}

/// Arrange an M1 spectrum into supersymmetry singlets and doublets.
///
/// Eigenpairs with `E ≤ tol` are singlets and must be annihilated by `Q`
/// and `Q†`. Every degenerate level with `E > tol` is split into the
/// vectors annihilated by `Q` and their complement. Sector by sector, the
/// `Q`-annihilated vectors of sector `f` are paired with `Q†v/√E`, and those
/// partners replace the non-annihilated subspace of the same level in
/// sector `f + 1`. This resolves arbitrary extra degeneracy without
/// relying on overlap heuristics.
pub fn classify_susy(spectrum: &Spectrum, q: &SparseOperator, tol: f64) -> Result<SusyClassification> {
    if !(tol > 0.0) {
        return Err(domain!("tolerance must be positive, got {tol}"));
    }
    if !spectrum.complete {
        return Err(domain!("classification needs a complete spectrum"));
    }
    let max_f = spectrum
        .sector_labels
        .iter()
        .map(|l| l.ok_or_else(|| domain!("classification needs sector-resolved eigenvectors")))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let qd = q.adjoint();
    let mut out = spectrum.clone();
    let mut singlets = Vec::new();
    let mut doublets = Vec::new();
    // ids of sector f + 1 already claimed as upper partners
    let mut claimed: Vec<bool> = vec![false; spectrum.len()];

    for f in 0..=max_f {
        let ids = out.sector_ids(f);
        for level in levels(&out, &ids) {
            let energy = level.iter().map(|&i| out.eigenvalues[i]).sum::<f64>() / level.len() as f64;
            if energy <= tol {
                for &id in &level {
                    let v = &out.eigenvectors[id];
                    let a = linalg::norm(&q.apply(v)?);
                    let b = linalg::norm(&qd.apply(v)?);
                    if a > ANNIHILATION_TOL || b > ANNIHILATION_TOL {
                        return Err(consistency!(
                            "zero mode {id} is not annihilated: |Qv| = {a:e}, |Q†v| = {b:e}"
                        ));
                    }
                    singlets.push(id);
                }
                continue;
            }
            let free: Vec<usize> = level.iter().copied().filter(|&i| !claimed[i]).collect();
            if free.is_empty() {
                continue;
            }
            let vectors: Vec<Vec<C64>> = free.iter().map(|&i| out.eigenvectors[i].clone()).collect();
            let (closed, coclosed) = split_level(&vectors, q, energy)?;
            if !coclosed.is_empty() {
                return Err(consistency!(
                    "{} state(s) at f = {f}, E = {energy} have no partner in sector {}",
                    coclosed.len(),
                    f.wrapping_sub(1)
                ));
            }
            for (&id, v) in free.iter().zip(&closed) {
                out.eigenvectors[id] = v.clone();
            }

            let partners: Vec<Vec<C64>> = closed
                .iter()
                .map(|v| {
                    let mut w = qd.apply(v)?;
                    for z in w.iter_mut() {
                        *z /= energy.sqrt();
                    }
                    Ok(w)
                })
                .collect::<Result<_>>()?;

            let upper_ids: Vec<usize> = out
                .sector_ids(f + 1)
                .into_iter()
                .filter(|&i| !claimed[i] && (out.eigenvalues[i] - energy).abs() <= PARTNER_ENERGY_TOL * energy.max(1.0))
                .collect();
            if upper_ids.len() < partners.len() {
                return Err(consistency!(
                    "level f = {f}, E = {energy} needs {} partner(s) in sector {}, found {}",
                    partners.len(),
                    f + 1,
                    upper_ids.len()
                ));
            }
            let upper_vectors: Vec<Vec<C64>> = upper_ids.iter().map(|&i| out.eigenvectors[i].clone()).collect();
            let (upper_closed, upper_coclosed) = split_level(&upper_vectors, q, energy)?;
            if upper_coclosed.len() != partners.len() {
                return Err(consistency!(
                    "level f = {}, E = {energy}: {} partner(s) expected, {} present",
                    f + 1,
                    partners.len(),
                    upper_coclosed.len()
                ));
            }
            let mut slots = upper_ids.iter().copied();
            for (&lower, w) in free.iter().zip(partners) {
                let upper = slots.next().unwrap();
                out.eigenvectors[upper] = w;
                claimed[upper] = true;
                doublets.push(Doublet {
                    lower,
                    upper,
                    energy: out.eigenvalues[lower],
                });
            }
            for (slot, v) in slots.zip(upper_closed) {
                out.eigenvectors[slot] = v;
            }
        }
    }

    let h_check = |id: usize| -> Result<f64> {
        let v = &out.eigenvectors[id];
        let qv = q.apply(v)?;
        let qdv = qd.apply(v)?;
        let hv_a = qd.apply(&qv)?;
        let hv_b = q.apply(&qdv)?;
        let e = out.eigenvalues[id];
        Ok(hv_a
            .iter()
            .zip(&hv_b)
            .zip(v)
            .map(|((a, b), x)| (a + b - x * e).norm_sqr())
            .sum::<f64>()
            .sqrt())
    };
    for id in 0..out.len() {
        out.residual_norms[id] = h_check(id)?;
    }
    for d in &doublets {
        if (out.eigenvalues[d.upper] - d.energy).abs() > PARTNER_ENERGY_TOL * d.energy.max(1.0) {
            return Err(consistency!(
                "doublet ({}, {}) partners differ in energy",
                d.lower,
                d.upper
            ));
        }
    }
    Ok(SusyClassification {
        spectrum: out,
        singlets,
        doublets,
    })
}

/// One integer eigenvalue and its multiplicity within a sector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegerLevel {
    pub value: i64,
    pub multiplicity: usize,
    /// Largest distance to `value` among the grouped eigenvalues.
    pub max_distance: f64,
}

/// Integer eigenvalues per fermion-number sector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntegerTable {
    pub rows: BTreeMap<usize, Vec<IntegerLevel>>,
    /// Eigenpairs without a sector label, which the table skips.
    pub unlabeled: usize,
}

/// Collect eigenvalues within `tol` of an integer, grouped by sector.
pub fn integer_eigenvalue_table(spectrum: &Spectrum, tol: f64) -> IntegerTable {
    let mut table = IntegerTable::default();
    for (k, &e) in spectrum.eigenvalues.iter().enumerate() {
        let Some(f) = spectrum.sector_labels[k] else {
            table.unlabeled += 1;
            continue;
        };
        let nearest = e.round();
        let d = (e - nearest).abs();
        if d > tol {
            continue;
        }
        let row = table.rows.entry(f).or_default();
        let value = nearest as i64;
        match row.iter_mut().find(|l| l.value == value) {
            Some(level) => {
                level.multiplicity += 1;
                level.max_distance = level.max_distance.max(d);
            }
            None => row.push(IntegerLevel {
                value,
                multiplicity: 1,
                max_distance: d,
            }),
        }
    }
    for row in table.rows.values_mut() {
        row.sort_by_key(|l| l.value);
    }
    table
}

/// A doublet `(ψ, Qψ/√E)` under `H = Q + Q† + μF`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubletBlock {
    pub energy: f64,
    pub fermion_number: usize,
    pub mu: f64,
}

/// The 2×2 reduction of a doublet and its eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubletHamiltonian {
    /// Row-major over `(ψ_f, ψ_{f-1})`.
    pub matrix: [[f64; 2]; 2],
    /// Ascending.
    pub eigenvalues: [f64; 2],
}

impl DoubletHamiltonian {
    pub fn splitting(&self) -> f64 {
        self.eigenvalues[1] - self.eigenvalues[0]
    }
}

/// `[[μf, √E], [√E, μ(f−1)]]`, eigenvalues `μ(2f−1)/2 ± √(E + μ²/4)`.
pub fn doublet_hamiltonian(block: &DoubletBlock) -> Result<DoubletHamiltonian> {
    let DoubletBlock {
        energy,
        fermion_number,
        mu,
    } = *block;
    if !(energy >= 0.0) {
        return Err(domain!("doublet energy must be non-negative, got {energy}"));
    }
    if !mu.is_finite() {
        return Err(domain!("mu must be finite"));
    }
    let f = fermion_number as f64;
    let c = energy.sqrt();
    let centre = mu * (2.0 * f - 1.0) / 2.0;
    let half = (energy + mu * mu / 4.0).sqrt();
    Ok(DoubletHamiltonian {
        matrix: [[mu * f, c], [c, mu * (f - 1.0)]],
        eigenvalues: [centre - half, centre + half],
    })
}

/// A contiguous block of `len` ring sites starting at site `start`
/// (1-based), wrapping around the ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cut {
    pub start: usize,
    pub len: usize,
}

impl Cut {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    fn mask(&self, n_sites: usize) -> Result<u32> {
        if self.len == 0 || self.len >= n_sites {
            return Err(domain!("cut length must lie in 1..{n_sites}, got {}", self.len));
        }
        if self.start == 0 || self.start > n_sites {
            return Err(domain!("cut start must lie in 1..={n_sites}, got {}", self.start));
        }
        Ok((0..self.len).fold(0u32, |m, k| m | 1 << ((self.start - 1 + k) % n_sites)))
    }
}

/// Sign from moving the fermions of `a_mask` in front of all others.
fn reorder_sign(bits: u32, a_mask: u32) -> f64 {
    let a = bits & a_mask;
    let b = bits & !a_mask;
    let mut swaps = 0u32;
    let mut rest = a;
    while rest != 0 {
        let site = rest.trailing_zeros();
        swaps += (b & ((1u32 << site) - 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Schmidt coefficients across `cut`, descending.
///
/// Modes are reordered so that the block comes first, which makes the
/// amplitude matrix over (block, rest) configurations a proper fermionic
/// Schmidt decomposition.
pub fn schmidt_values(vec: &[C64], basis: &ConstrainedBasis, cut: Cut) -> Result<Vec<f64>> {
    if vec.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: vec.len(),
        });
    }
    let nrm = linalg::norm(vec);
    if (nrm - 1.0).abs() > 1e-8 {
        return Err(domain!("state is not normalized (norm {nrm})"));
    }
    let a_mask = cut.mask(basis.n_sites())?;
    let mut rows: BTreeMap<u32, usize> = BTreeMap::new();
    let mut cols: BTreeMap<u32, usize> = BTreeMap::new();
    for k in 0..basis.dim() {
        let bits = basis.bits(k);
        let next = rows.len();
        rows.entry(bits & a_mask).or_insert(next);
        let next = cols.len();
        cols.entry(bits & !a_mask).or_insert(next);
    }
    let mut m = DMatrix::<C64>::zeros(rows.len(), cols.len());
    for (k, amp) in vec.iter().enumerate() {
        if amp.is_zero() {
            continue;
        }
        let bits = basis.bits(k);
        m[(rows[&(bits & a_mask)], cols[&(bits & !a_mask)])] += amp * reorder_sign(bits, a_mask);
    }
    let mut s: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Von Neumann entropy of the reduced state on `cut`, natural log.
pub fn entanglement_entropy(vec: &[C64], basis: &ConstrainedBasis, cut: Cut) -> Result<f64> {
    Ok(entropy_of(&schmidt_values(vec, basis, cut)?))
}

pub(crate) fn entropy_of(schmidt: &[f64]) -> f64 {
    schmidt
        .iter()
        .map(|s| s * s)
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.ln())
        .sum()
}

/// Largest entropy over the `N` placements of a block of `len` sites,
/// with the maximizing start site.
pub fn max_entropy_over_cuts(vec: &[C64], basis: &ConstrainedBasis, len: usize) -> Result<(f64, usize)> {
    let mut best = (f64::NEG_INFINITY, 1);
    for start in 1..=basis.n_sites() {
        let s = entanglement_entropy(vec, basis, Cut::new(start, len))?;
        if s > best.0 {
            best = (s, start);
        }
    }
    Ok(best)
}
