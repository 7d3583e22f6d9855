use alloc::string::String;

/// Errors raised by the simulation kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector or operator dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A request exceeds a documented capacity limit.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// An internal cross-check failed; usually a tolerance that is too tight.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// An iterative method stopped before reaching its tolerance.
    #[error("{method} did not converge: achieved {achieved:e}, requested {requested:e}")]
    NonConvergence {
        method: &'static str,
        achieved: f64,
        requested: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(alloc::format!($($arg)*))
    };
}

macro_rules! consistency {
    ($($arg:tt)*) => {
        $crate::error::Error::Consistency(alloc::format!($($arg)*))
    };
}

pub(crate) use consistency;
pub(crate) use domain;
