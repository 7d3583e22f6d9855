//! Compressed-row complex sparse matrices over a constrained basis.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::DMatrix;
use num_traits::Zero;

use crate::error::{domain, Error, Result};
use crate::C64;

/// A complex sparse matrix acting on the states of one `ConstrainedBasis`.
///
/// Rows keep their column indices sorted, duplicates are coalesced on
/// construction and exact zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    n_sites: usize,
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Build from coordinate triplets. Duplicates are summed.
    pub fn from_triplets<I>(n_sites: usize, dim: usize, triplets: I, hermitian: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut coo: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = coo.iter().find(|&&(r, c, _)| r >= dim || c >= dim) {
            return Err(domain!("entry ({r}, {c}) outside a {dim}-dimensional operator"));
        }
        coo.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(coo.len());
        let mut values: Vec<C64> = Vec::with_capacity(coo.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(coo.len());
        for (r, c, v) in coo {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                col_idx.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        // drop entries that cancelled exactly
        let mut keep = 0;
        for k in 0..values.len() {
            if !values[k].is_zero() {
                rows[keep] = rows[k];
                col_idx[keep] = col_idx[k];
                values[keep] = values[k];
                keep += 1;
            }
        }
        rows.truncate(keep);
        col_idx.truncate(keep);
        values.truncate(keep);
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            n_sites,
            dim,
            row_ptr,
            col_idx,
            values,
            hermitian,
        })
    }

    pub fn identity(n_sites: usize, dim: usize) -> Self {
        Self {
            n_sites,
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: vec![C64::new(1.0, 0.0); dim],
            hermitian: true,
        }
    }

    pub fn zeros(n_sites: usize, dim: usize) -> Self {
        Self {
            n_sites,
            dim,
            row_ptr: vec![0; dim + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
            hermitian: true,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// The hermiticity hint recorded by the builder; see [`Self::is_hermitian`]
    /// for the actual check.
    #[inline]
    pub fn hermitian_flag(&self) -> bool {
        self.hermitian
    }

    pub fn with_hermitian_flag(mut self, flag: bool) -> Self {
        self.hermitian = flag;
        self
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::zero(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        let triplets = self.triplets().map(|(r, c, v)| (c, r, v.conj()));
        Self::from_triplets(self.n_sites, self.dim, triplets, self.hermitian).expect("transposed indices stay in range")
    }

    /// Sparse product `self * rhs`, accumulated row by row.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        let mut acc = vec![C64::zero(); self.dim];
        let mut touched = vec![false; self.dim];
        let mut cols: Vec<usize> = Vec::new();

        let mut row_ptr = Vec::with_capacity(self.dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                if !acc[c].is_zero() {
                    col_idx.push(c);
                    values.push(acc[c]);
                }
                acc[c] = C64::zero();
                touched[c] = false;
            }
            cols.clear();
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n_sites: self.n_sites,
            dim: self.dim,
            row_ptr,
            col_idx,
            values,
            hermitian: false,
        })
    }

    /// `self + alpha * rhs`.
    pub fn add_scaled(&self, rhs: &Self, alpha: C64) -> Result<Self> {
        self.check_same_shape(rhs)?;
        let triplets = self.triplets().chain(rhs.triplets().map(|(r, c, v)| (r, c, alpha * v)));
        Self::from_triplets(self.n_sites, self.dim, triplets, false)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.add_scaled(rhs, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add_scaled(rhs, C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, alpha: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= alpha;
        }
        if alpha.is_zero() {
            return Self::zeros(self.n_sites, self.dim);
        }
        out.hermitian = self.hermitian && alpha.im == 0.0;
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest elementwise `|self - other|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Elementwise check of `A = A†`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.triplets()
            .all(|(r, c, v)| (v - self.get(c, r).conj()).norm() <= tol)
    }

    /// Matrix–vector product into a caller-owned buffer.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: y.len(),
            });
        }
        for (r, out) in y.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            let mut s = C64::zero();
            for (c, v) in self.col_idx[span.clone()].iter().zip(&self.values[span]) {
                s += v * x[*c];
            }
            *out = s;
        }
        Ok(())
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut y = vec![C64::zero(); self.dim];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    /// `<x|A|x>`.
    pub fn expectation(&self, x: &[C64]) -> Result<C64> {
        let y = self.apply(x)?;
        Ok(crate::linalg::dot(x, &y))
    }

    /// True when some stored entry connects `range` with its complement.
    pub fn couples_outside(&self, range: &Range<usize>) -> bool {
        self.triplets()
            .any(|(r, c, _)| range.contains(&r) != range.contains(&c))
    }

    /// Dense copy of the principal block on `range`.
    pub fn dense_block(&self, range: Range<usize>) -> DMatrix<C64> {
        let n = range.len();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for r in range.clone() {
            for (c, v) in self.row(r) {
                if range.contains(&c) {
                    m[(r - range.start, c - range.start)] += v;
                }
            }
        }
        m
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.dense_block(0..self.dim)
    }

    /// Principal block on `range` as a standalone operator.
    pub fn block(&self, range: Range<usize>) -> Self {
        let start = range.start;
        let end = range.end;
        let triplets = range.clone().flat_map(|r| {
            self.row(r)
                .filter(move |(c, _)| (start..end).contains(c))
                .map(move |(c, v)| (r - start, c - start, v))
        });
        Self::from_triplets(self.n_sites, range.len(), triplets, self.hermitian).expect("block indices stay in range")
    }
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &SparseOperator, b: &SparseOperator) -> Result<SparseOperator> {
    a.matmul(b)?.sub(&b.matmul(a)?)
}

/// `{a, b} = ab + ba`.
pub fn anticommutator(a: &SparseOperator, b: &SparseOperator) -> Result<SparseOperator> {
    a.matmul(b)?.add(&b.matmul(a)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn dense_mul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
        a * b
    }

    #[test]
    fn coalesces_duplicates_and_drops_zeros() {
        let op = SparseOperator::from_triplets(
            3,
            3,
            [
                (0, 1, c(1.0, 0.0)),
                (0, 1, c(2.0, 0.0)),
                (2, 2, c(1.0, 0.0)),
                (2, 2, c(-1.0, 0.0)),
            ],
            false,
        )
        .unwrap();
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(0, 1), c(3.0, 0.0));
        assert_eq!(op.get(2, 2), c(0.0, 0.0));
    }

    #[test]
    fn rejects_out_of_range_entries() {
        let err = SparseOperator::from_triplets(3, 2, [(2, 0, c(1.0, 0.0))], false);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn identity_scaled_acts_as_scalar() {
        let id = SparseOperator::identity(3, 4).scale(c(2.5, 0.0));
        let x = [c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.0), c(-2.0, 0.5)];
        let y = id.apply(&x).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert_eq!(*a * 2.5, *b);
        }
    }

    #[test]
    fn apply_checks_dimensions() {
        let id = SparseOperator::identity(3, 4);
        assert!(matches!(
            id.apply(&[c(1.0, 0.0)]),
            Err(Error::DimensionMismatch { expected: 4, found: 1 })
        ));
    }

    fn arb_sparse(dim: usize) -> impl Strategy<Value = SparseOperator> {
        proptest::collection::vec((0..dim, 0..dim, -3i32..=3, -3i32..=3), 0..20).prop_map(move |t| {
            SparseOperator::from_triplets(
                3,
                dim,
                t.into_iter().map(|(r, c_, re, im)| (r, c_, c(re as f64, im as f64))),
                false,
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn product_matches_dense(a in arb_sparse(6), b in arb_sparse(6)) {
            let p = a.matmul(&b).unwrap().to_dense();
            let d = dense_mul(&a.to_dense(), &b.to_dense());
            prop_assert!((p - d).iter().all(|z| z.norm() < 1e-12));
        }

        #[test]
        fn adjoint_matches_dense(a in arb_sparse(5)) {
            prop_assert_eq!(a.adjoint().to_dense(), a.to_dense().adjoint());
            prop_assert_eq!(a.adjoint().adjoint(), a.clone().with_hermitian_flag(a.hermitian_flag()));
        }

        #[test]
        fn apply_matches_dense(a in arb_sparse(5), xs in proptest::collection::vec(-2.0f64..2.0, 10)) {
            let x: Vec<C64> = xs.chunks(2).map(|p| c(p[0], p[1])).collect();
            let y = a.apply(&x).unwrap();
            let yd = a.to_dense() * nalgebra::DVector::from_vec(x.clone());
            for (u, v) in y.iter().zip(yd.iter()) {
                prop_assert!((u - v).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn block_and_coupling() {
        let op = SparseOperator::from_triplets(
            3,
            4,
            [
                (0, 0, c(1.0, 0.0)),
                (1, 2, c(2.0, 0.0)),
                (2, 1, c(2.0, 0.0)),
                (3, 3, c(4.0, 0.0)),
            ],
            true,
        )
        .unwrap();
        assert!(!op.couples_outside(&(1..3)));
        assert!(op.couples_outside(&(0..2)));
        let b = op.block(1..3);
        assert_eq!(b.dim(), 2);
        assert_eq!(b.get(0, 1), c(2.0, 0.0));
        assert!(op.is_hermitian(0.0));
    }
}
