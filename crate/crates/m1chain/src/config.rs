use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use m1chain_core::{Branch, Method};
use serde::{Serialize, Serializer};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Per-sector eigenvalues, residuals and supersymmetry classification.
    Spectrum,
    /// Integer eigenvalues of H_M1 per fermion-number sector.
    TableIntegers,
    /// Fidelity and fermion-number series after a quench.
    Quench,
    /// Bethe-equation residuals and eigenvector checks.
    BetheVerify,
    /// Matrix-product form of the special states.
    MpsCheck,
    /// Export an operator in sparse triplet form.
    Operator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    M1,
    Pxp,
    /// The supercharge Q (operator export only).
    Q,
    /// The fermion number F (operator export only).
    F,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Auto,
    Spectral,
    Krylov,
}

impl MethodChoice {
    pub fn method(self) -> Option<Method> {
        match self {
            MethodChoice::Auto => None,
            MethodChoice::Spectral => Some(Method::Spectral),
            MethodChoice::Krylov => Some(Method::Krylov),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Branch {
        match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Single,
    Special,
    Dressed,
}

/// Initial state of a quench.
#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    Z2,
    /// One fermion on site 1.
    Single,
    Index(usize),
    File(PathBuf),
}

impl FromStr for InitSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "z2" => Ok(InitSpec::Z2),
            "single" => Ok(InitSpec::Single),
            _ => {
                if let Some(k) = s.strip_prefix("index:") {
                    k.parse()
                        .map(InitSpec::Index)
                        .map_err(|e| format!("bad basis index {k:?}: {e}"))
                } else if let Some(p) = s.strip_prefix("file:") {
                    Ok(InitSpec::File(PathBuf::from(p)))
                } else {
                    Err(format!("expected z2, single, index:<k> or file:<path>, got {s:?}"))
                }
            }
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::Z2 => write!(f, "z2"),
            InitSpec::Single => write!(f, "single"),
            InitSpec::Index(k) => write!(f, "index:{k}"),
            InitSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl Serialize for InitSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Everything that determines a run. Embedded verbatim in JSON output.
#[derive(Clone, Debug, Parser, Serialize)]
#[command(
    name = "m1chain",
    version,
    about = "Supersymmetric M1 chain and PXP-like model on a ring"
)]
#[command(allow_negative_numbers = true)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,

    /// Number of ring sites.
    #[arg(long = "n")]
    #[serde(rename = "N")]
    pub n_sites: Option<usize>,

    /// Chemical potential of H_PXP = Q + Q† + μF.
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,

    /// Defaults to m1 for spectra and pxp for quenches.
    #[arg(long, value_enum)]
    pub model: Option<Model>,

    /// z2, single, index:<k> or file:<path>.
    #[arg(long, default_value = "z2")]
    pub init: InitSpec,

    #[arg(long, default_value_t = 10.0)]
    pub tmax: f64,

    #[arg(long, default_value_t = 2000)]
    pub samples: usize,

    /// Restrict to one fermion-number sector.
    #[arg(long)]
    pub sector: Option<usize>,

    /// Check tolerance; each command documents its default.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Add analytic overlay columns to a quench.
    #[arg(long)]
    pub analytic: bool,

    /// Emit only the analytic single-fermion curves (no time evolution).
    #[arg(long)]
    pub analytic_only: bool,

    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodChoice,

    /// Fermion number for Bethe and MPS checks.
    #[arg(long)]
    pub f: Option<usize>,

    #[arg(long, value_enum, default_value = "plus")]
    pub branch: BranchArg,

    #[arg(long, value_enum)]
    pub family: Option<Family>,

    #[arg(long, default_value_t = 0)]
    pub n_plus: usize,

    #[arg(long, default_value_t = 0)]
    pub n_minus: usize,

    /// Bethe solution JSON to verify.
    #[arg(long)]
    pub solution: Option<PathBuf>,
}

impl RunConfig {
    /// Parse and validate command-line style arguments.
    pub fn from_args<I, T>(args: I) -> std::result::Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        Self::try_parse_from(args)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Config(format!("tolerance must be positive, got {tol}")));
            }
        }
        if self.samples < 2 {
            return Err(CliError::Config(format!(
                "need at least 2 samples, got {}",
                self.samples
            )));
        }
        if !(self.tmax > 0.0 && self.tmax.is_finite()) {
            return Err(CliError::Config(format!("tmax must be positive, got {}", self.tmax)));
        }
        if !self.mu.is_finite() {
            return Err(CliError::Config("mu must be finite".into()));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> Result<usize> {
        self.n_sites
            .ok_or_else(|| CliError::Config("--n is required for this command".into()))
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_spec_round_trip() {
        for s in ["z2", "single", "index:17", "file:/tmp/x.json"] {
            assert_eq!(s.parse::<InitSpec>().unwrap().to_string(), s);
        }
        assert!("index:-1".parse::<InitSpec>().is_err());
        assert!("neel".parse::<InitSpec>().is_err());
    }

    #[test]
    fn parses_negative_mu_and_validates() {
        let c = RunConfig::from_args(["m1chain", "quench", "--n", "8", "--mu", "-0.5"]).unwrap();
        assert_eq!(c.mu, -0.5);
        assert!(c.validate().is_ok());
        let c = RunConfig::from_args(["m1chain", "quench", "--n", "8", "--samples", "1"]).unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::from_args(["m1chain", "spectrum", "--n", "8", "--tol", "0"]).unwrap();
        assert!(c.validate().is_err());
    }
}
