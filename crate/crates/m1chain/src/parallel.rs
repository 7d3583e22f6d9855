//! Per-sector diagonalization on a rayon pool.
//!
//! Sectors are independent, so they are solved concurrently and collected
//! in increasing `f`; the result does not depend on the thread count.

use m1chain_core::{diagonalize, ConstrainedBasis, EigenOptions, SparseOperator, Spectrum};
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Thread count override; unset or `0` lets rayon decide.
pub const THREADS_ENV: &str = "M1CHAIN_THREADS";

pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|e| CliError::Config(format!("{THREADS_ENV}={s:?}: {e}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Diagonalize the listed sectors and concatenate in the given order.
pub fn diagonalize_sectors(
    op: &SparseOperator,
    basis: &ConstrainedBasis,
    sectors: &[usize],
    opts: &EigenOptions,
) -> Result<Spectrum> {
    let parts = thread_pool()?.install(|| {
        sectors
            .par_iter()
            .map(|&f| diagonalize(op, basis, Some(f), opts))
            .collect::<m1chain_core::Result<Vec<_>>>()
    })?;
    Ok(Spectrum::concat(parts)?)
}
