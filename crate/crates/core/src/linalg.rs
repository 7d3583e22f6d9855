//! Dense and Lanczos eigensolvers plus small vector helpers.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;
#[allow(unused_imports)]
use num_traits::Float;

use crate::C64;

/// `<x|y>`, conjugating the left argument.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Scale `x` to unit norm and return the old norm.
pub fn normalize(x: &mut [C64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        for a in x.iter_mut() {
            *a /= n;
        }
    }
    n
}

/// `y += alpha * x`.
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (b, a) in y.iter_mut().zip(x) {
        *b += alpha * a;
    }
}

/// `‖Av - λv‖`.
pub fn residual_norm(op: &SparseOperator, v: &[C64], lambda: f64) -> Result<f64> {
    let av = op.apply(v)?;
    Ok(av
        .iter()
        .zip(v)
        .map(|(a, b)| (a - b * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Full Hermitian eigendecomposition with eigenvalues ascending.
///
/// Real input takes the real symmetric path. Columns of the returned matrix
/// are unit eigenvectors.
pub fn dense_eigh(m: DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let is_real = m.iter().all(|z| z.im.abs() <= 1e-14);
    let (values, vectors): (Vec<f64>, DMatrix<C64>) = if is_real {
        let re = m.map(|z| z.re);
        let eig = SymmetricEigen::new(re);
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::new(m);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    (sorted_values, sorted_vectors)
}

/// Which end of the spectrum an iterative solve targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremal {
    Smallest,
    Largest,
}

/// Settings for [`lanczos_extremal`].
#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    /// Relative Ritz residual accepted as converged.
    pub tol: f64,
    /// Upper bound on the Krylov dimension of a single run.
    pub max_krylov: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_krylov: 600,
        }
    }
}

// deterministic, structure-free start vector
fn start_vector(dim: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|k| {
            let x = k as f64;
            C64::new(
                1.0 + 0.5 * (1.618_033_988_7 * x + 0.3).sin(),
                0.25 * (2.414_213_562 * x).cos(),
            )
        })
        .collect();
    normalize(&mut v);
    v
}

fn orthogonalize(w: &mut [C64], basis: &[Vec<C64>]) {
    // two passes of classical Gram–Schmidt
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

/// One Lanczos run in the complement of `locked`. Returns up to `want`
/// converged extremal Ritz pairs, ordered from the requested end.
fn lanczos_run(
    op: &SparseOperator,
    locked: &[Vec<C64>],
    want: usize,
    which: Extremal,
    opts: &LanczosOptions,
) -> Result<Vec<(f64, Vec<C64>)>> {
    let dim = op.dim();
    let free = dim.saturating_sub(locked.len());
    if free == 0 || want == 0 {
        return Ok(Vec::new());
    }
    let max_m = free.min(opts.max_krylov);
    let sign = match which {
        Extremal::Smallest => 1.0,
        Extremal::Largest => -1.0,
    };

    let mut v0 = start_vector(dim);
    orthogonalize(&mut v0, locked);
    if normalize(&mut v0) < 1e-12 {
        return Ok(Vec::new());
    }
    let mut basis: Vec<Vec<C64>> = vec![v0];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![C64::zero(); dim];
    let mut best_residual = f64::INFINITY;

    loop {
        let j = basis.len() - 1;
        op.apply_into(&basis[j], &mut w)?;
        let alpha = dot(&basis[j], &w).re;
        alphas.push(alpha);
        // locked last, so Gram–Schmidt on the basis cannot reintroduce
        // locked components that would then grow from step to step
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, &basis);
        orthogonalize(&mut w, locked);
        let beta = norm(&w);
        let m = alphas.len();
        let exhausted = beta <= 1e-12 || m == max_m;

        if exhausted || (m >= want && m.is_multiple_of(8)) {
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alphas[r]
                } else if r + 1 == c || c + 1 == r {
                    betas[r.min(c)]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| (sign * eig.eigenvalues[a]).total_cmp(&(sign * eig.eigenvalues[b])));
            let take = want.min(m);
            let bound = |k: usize| beta * eig.eigenvectors[(m - 1, k)].abs();
            let converged = order[..take]
                .iter()
                .all(|&k| bound(k) <= opts.tol * eig.eigenvalues[k].abs().max(1.0));
            let worst = order[..take].iter().map(|&k| bound(k)).fold(0.0, f64::max);
            best_residual = best_residual.min(worst);

            if converged || beta <= 1e-12 {
                let pairs = order[..take]
                    .iter()
                    .map(|&k| {
                        let mut x = vec![C64::zero(); dim];
                        for (i, q) in basis.iter().enumerate() {
                            axpy(C64::new(eig.eigenvectors[(i, k)], 0.0), q, &mut x);
                        }
                        normalize(&mut x);
                        (eig.eigenvalues[k], x)
                    })
                    .collect();
                return Ok(pairs);
            }
            if m == max_m {
                return Err(Error::NonConvergence {
                    method: "Lanczos",
                    achieved: best_residual,
                    requested: opts.tol,
                });
            }
        }
        betas.push(beta);
        let next: Vec<C64> = w.iter().map(|z| z / beta).collect();
        basis.push(next);
    }
}

/// The `count` extremal eigenpairs of a Hermitian operator.
///
/// A single Krylov sequence sees one copy of each degenerate level, so runs
/// are repeated in the complement of the accepted vectors until a fresh run
/// no longer finds anything beyond the current worst accepted value.
pub fn lanczos_extremal(
    op: &SparseOperator,
    count: usize,
    which: Extremal,
    opts: &LanczosOptions,
) -> Result<Vec<(f64, Vec<C64>)>> {
    let count = count.min(op.dim());
    let sign = match which {
        Extremal::Smallest => 1.0,
        Extremal::Largest => -1.0,
    };
    let key = |e: f64| sign * e;
    let mut found: Vec<(f64, Vec<C64>)> = Vec::new();
    if count == 0 {
        return Ok(found);
    }
    let mut guard = 0;
    loop {
        guard += 1;
        if guard > 4 * count + 8 {
            return Err(Error::Consistency(alloc::format!(
                "deflated Lanczos did not settle after {guard} runs"
            )));
        }
        let locked: Vec<Vec<C64>> = found.iter().map(|(_, v)| v.clone()).collect();
        let need = if found.len() < count { count - found.len() } else { 1 };
        let new = lanczos_run(op, &locked, need, which, opts)?;
        if new.is_empty() {
            break;
        }
        if found.len() == count {
            let worst = found.iter().map(|(e, _)| key(*e)).fold(f64::NEG_INFINITY, f64::max);
            let gap = opts.tol.sqrt() * worst.abs().max(1.0);
            if key(new[0].0) >= worst - gap {
                break;
            }
            found.push(new.into_iter().next().unwrap());
        } else {
            found.extend(new);
        }
        found.sort_by(|a, b| key(a.0).total_cmp(&key(b.0)));
        found.truncate(count);
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(found)
}
