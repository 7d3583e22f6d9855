//! On-disk formats.
//!
//! * Sparse triplets (text): a header line `N dim nnz hermitian_flag`
//!   followed by one `row col re im` line per stored entry, zero-based.
//! * Spectrum, integer table, quench series and Bethe solutions as JSON.
//! * Quench series as CSV with the fixed header `t,fidelity,<observables>,<overlays>`.
//! * State files as JSON `{"N": .., "amplitudes": [[re, im], ..]}` in basis order.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write/read cycle is exact.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use m1chain_core::{BetheSolution, ConstrainedBasis, IntegerTable, QuenchResult, SparseOperator, Spectrum, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub fn write_triplets<W: Write>(op: &SparseOperator, mut w: W) -> Result<()> {
    writeln!(
        w,
        "{} {} {} {}",
        op.n_sites(),
        op.dim(),
        op.nnz(),
        u8::from(op.hermitian_flag())
    )?;
    for (r, c, v) in op.triplets() {
        writeln!(w, "{r} {c} {} {}", v.re, v.im)?;
    }
    Ok(())
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| CliError::Parse {
        line,
        message: format!("expected {what}"),
    })
}

pub fn read_triplets<R: BufRead>(r: R) -> Result<SparseOperator> {
    let mut lines = r.lines().enumerate().filter(|(_, l)| match l {
        Ok(s) => !s.trim().is_empty(),
        Err(_) => true,
    });
    let (_, header) = lines.next().ok_or_else(|| CliError::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let header = header?;
    let mut tok = header.split_whitespace();
    let n_sites: usize = field(tok.next(), 1, "N")?;
    let dim: usize = field(tok.next(), 1, "dim")?;
    let nnz: usize = field(tok.next(), 1, "nnz")?;
    let flag: u8 = field(tok.next(), 1, "hermitian flag (0 or 1)")?;
    if flag > 1 {
        return Err(CliError::Parse {
            line: 1,
            message: format!("hermitian flag must be 0 or 1, got {flag}"),
        });
    }

    let mut entries = Vec::with_capacity(nnz);
    for (k, line) in lines {
        let line = line?;
        let no = k + 1;
        let mut tok = line.split_whitespace();
        let r: usize = field(tok.next(), no, "row")?;
        let c: usize = field(tok.next(), no, "col")?;
        let re: f64 = field(tok.next(), no, "re")?;
        let im: f64 = field(tok.next(), no, "im")?;
        if tok.next().is_some() {
            return Err(CliError::Parse {
                line: no,
                message: "trailing tokens".into(),
            });
        }
        entries.push((r, c, C64::new(re, im)));
    }
    if entries.len() != nnz {
        return Err(CliError::Parse {
            line: entries.len() + 1,
            message: format!("header declares {nnz} entries, found {}", entries.len()),
        });
    }
    Ok(SparseOperator::from_triplets(n_sites, dim, entries, flag == 1)?)
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

/// Eigenvalues and residuals of one fermion-number sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorJson {
    /// `None` for eigenvectors without a definite fermion number.
    pub f: Option<usize>,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Group a spectrum by sector label, keeping eigenvalue order within each group.
pub fn spectrum_sectors(spectrum: &Spectrum) -> Vec<SectorJson> {
    let mut groups: BTreeMap<Option<usize>, SectorJson> = BTreeMap::new();
    for k in 0..spectrum.len() {
        let f = spectrum.sector_labels[k];
        let g = groups.entry(f).or_insert_with(|| SectorJson {
            f,
            eigenvalues: Vec::new(),
            residuals: Vec::new(),
        });
        g.eigenvalues.push(spectrum.eigenvalues[k]);
        g.residuals.push(spectrum.residual_norms[k]);
    }
    groups.into_values().collect()
}

/// One `(E, multiplicity)` entry of the integer table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelJson {
    pub energy: i64,
    pub multiplicity: usize,
    pub max_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRowJson {
    pub f: usize,
    pub levels: Vec<LevelJson>,
}

/// Rows of non-empty sectors in increasing `f`.
pub fn table_rows(table: &IntegerTable) -> Vec<TableRowJson> {
    table
        .rows
        .iter()
        .filter(|(_, levels)| !levels.is_empty())
        .map(|(&f, levels)| TableRowJson {
            f,
            levels: levels
                .iter()
                .map(|l| LevelJson {
                    energy: l.value,
                    multiplicity: l.multiplicity,
                    max_distance: l.max_distance,
                })
                .collect(),
        })
        .collect()
}

/// `f | 0 (×2), 4 (×3), ... | max distance`, one line per non-empty sector.
pub fn table_text(rows: &[TableRowJson]) -> String {
    let cells: Vec<(String, String, String)> = rows
        .iter()
        .map(|r| {
            let levels = r
                .levels
                .iter()
                .map(|l| {
                    if l.multiplicity == 1 {
                        l.energy.to_string()
                    } else {
                        format!("{} (×{})", l.energy, l.multiplicity)
                    }
                })
                .collect::<Vec<_>>()
                .join(", ");
            let dist = r.levels.iter().map(|l| l.max_distance).fold(0.0, f64::max);
            (r.f.to_string(), levels, format!("{dist:.1e}"))
        })
        .collect();
    let w0 = cells.iter().map(|c| c.0.len()).max().unwrap_or(0).max(1);
    let w1 = cells
        .iter()
        .map(|c| c.1.chars().count())
        .max()
        .unwrap_or(0)
        .max("integer eigenvalues".len());
    let mut out = format!(
        "{:>w0$} | {:<w1$} | max distance to integer\n",
        "f", "integer eigenvalues"
    );
    for (f, levels, dist) in cells {
        let pad = w1 - levels.chars().count();
        out.push_str(&format!("{f:>w0$} | {levels}{} | {dist}\n", " ".repeat(pad)));
    }
    out
}

/// Extra CSV column, such as an analytic overlay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// CSV with header `t,fidelity,<observables>,<extra>`.
///
/// Either the fidelity or every extra column may be absent; `None` drops it.
pub fn write_quench_csv<W: Write>(times: &[f64], fidelity: Option<&[f64]>, columns: &[Column], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    if fidelity.is_some() {
        header.push("fidelity".into());
    }
    header.extend(columns.iter().map(|c| c.name.clone()));
    wr.write_record(&header)?;
    for (k, t) in times.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        if let Some(f) = fidelity {
            rec.push(f[k].to_string());
        }
        rec.extend(columns.iter().map(|c| c.values[k].to_string()));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// Header and numeric rows of a quench CSV.
pub fn read_quench_csv<R: std::io::Read>(r: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|e| CliError::Parse {
                    line: k + 2,
                    message: format!("{s:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Quench series with the data needed to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchJson {
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub mu: f64,
    pub model: String,
    pub init: String,
    /// `spectral`, `krylov` or `analytic`.
    pub method: String,
    pub tolerances: BTreeMap<String, f64>,
    pub times: Vec<f64>,
    pub fidelity: Option<Vec<f64>>,
    pub columns: Vec<Column>,
}

impl QuenchJson {
    pub fn observable_columns(res: &QuenchResult) -> Vec<Column> {
        res.observables
            .iter()
            .map(|o| Column {
                name: o.name.clone(),
                values: o.values.clone(),
            })
            .collect()
    }
}

/// A Bethe solution as stored on disk.
///
/// `energy`, `momentum_phase` and `residual` are recomputed on import; they
/// are optional in input files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheJson {
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub f: usize,
    pub mus: Vec<[f64; 2]>,
    #[serde(default)]
    pub energy: Option<f64>,
    #[serde(default)]
    pub momentum_phase: Option<[f64; 2]>,
    #[serde(default)]
    pub residual: Option<f64>,
}

impl From<&BetheSolution> for BetheJson {
    fn from(s: &BetheSolution) -> Self {
        Self {
            n_sites: s.n_sites,
            f: s.fermion_number,
            mus: s.mus.iter().copied().map(pair).collect(),
            energy: Some(s.energy),
            momentum_phase: Some(pair(s.momentum_phase)),
            residual: Some(s.residual),
        }
    }
}

impl BetheJson {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Re-evaluate energy, momentum and residual from the parameters.
    pub fn evaluate(&self) -> Result<BetheSolution> {
        if self.mus.len() != self.f {
            return Err(CliError::Config(format!(
                "f = {} but {} parameters given",
                self.f,
                self.mus.len()
            )));
        }
        Ok(BetheSolution::evaluate(
            self.n_sites,
            self.mus.iter().copied().map(complex).collect(),
        )?)
    }
}

/// A state vector in the ordering of [`ConstrainedBasis`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateJson {
    pub fn from_vector(n_sites: usize, v: &[C64]) -> Self {
        Self {
            n_sites,
            amplitudes: v.iter().copied().map(pair).collect(),
        }
    }

    /// Normalized amplitudes, checked against `basis`.
    pub fn to_vector(&self, basis: &ConstrainedBasis) -> Result<Vec<C64>> {
        if self.n_sites != basis.n_sites() || self.amplitudes.len() != basis.dim() {
            return Err(CliError::Config(format!(
                "state file is for N = {} with {} amplitudes; expected N = {} with {}",
                self.n_sites,
                self.amplitudes.len(),
                basis.n_sites(),
                basis.dim()
            )));
        }
        let mut v: Vec<C64> = self.amplitudes.iter().copied().map(complex).collect();
        if m1chain_core::linalg::normalize(&mut v) == 0.0 {
            return Err(CliError::Config("state file holds the zero vector".into()));
        }
        Ok(v)
    }
}
