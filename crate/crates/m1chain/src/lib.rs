//! File formats, threading and the `m1chain` command-line tool on top of
//! [`m1chain_core`].
//!
//! Set `M1CHAIN_THREADS` to fix the number of worker threads used for
//! per-sector diagonalization.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;

pub use commands::{run, Check, Report};
pub use config::{Command, Format, InitSpec, Model, RunConfig};
pub use error::{CliError, Result};
pub use m1chain_core;
