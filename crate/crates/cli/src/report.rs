use std::fs;
use std::io::Write;
use std::path::Path;

use qrc_core::hamiltonian::distinct_eigenvalue_count;
use qrc_core::krylov::{count_obs_ops, ops_ratio};
use qrc_core::quantum::{pauli_embed, Axis, HermitianOperator};
use qrc_core::reservoir::count_state_ops;
use qrc_core::spectral::{krylov_rank_oracle_operator, operator_grade, ORACLE_REL_TOL};
use serde::Serialize;

use crate::CliError;

/// `key: value` pairs written as `#` comment lines above the CSV header.
#[derive(Debug, Clone, Default)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str) -> Self {
        let mut m = Self::default();
        m.push("generator", format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")));
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string().replace('\n', " ")));
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (k, v) in &self.entries {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }
}

/// Empty for NaN so missing measurements leave blank cells.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

/// Renders a CSV table with its metadata block.
pub fn render_csv(meta: &Metadata, header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    meta.write_to(&mut buf)?;
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

pub fn write_csv(path: &Path, meta: &Metadata, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, render_csv(meta, header, rows)?)?;
    Ok(())
}

/// One row of the spectral statistics table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectralRow {
    pub hamiltonian: String,
    pub observable: String,
    pub d: usize,
    pub d2: usize,
    pub n_omega: usize,
    pub n1: usize,
    pub m: usize,
    /// Rank of the Liouvillian Krylov sequence, when requested.
    pub oracle_m: Option<usize>,
}

/// Spectral statistics for `Z_s` on each requested site.
pub fn spectral_rows(
    label: &str,
    h: &HermitianOperator,
    n_sites: usize,
    sites: &[usize],
    with_oracle: bool,
) -> Result<Vec<SpectralRow>, CliError> {
    let eig = h.eigensystem()?;
    let tol = h.degeneracy_tolerance();
    let d = distinct_eigenvalue_count(h, tol)?;
    sites
        .iter()
        .map(|&s| {
            let o = pauli_embed(s, Axis::Z, n_sites)?;
            let ts = operator_grade(eig, &o, tol)?;
            Ok(SpectralRow {
                hamiltonian: label.to_string(),
                observable: format!("Z{s}"),
                d,
                d2: d * d,
                n_omega: ts.n_omega(),
                n1: ts.n_vanishing,
                m: ts.grade,
                oracle_m: with_oracle.then(|| krylov_rank_oracle_operator(h, &o, ORACLE_REL_TOL)),
            })
        })
        .collect()
}

pub fn spectral_table(rows: &[SpectralRow]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header: Vec<String> = ["hamiltonian", "observable", "d", "d2", "n_omega", "n1", "m"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let with_oracle = rows.iter().any(|r| r.oracle_m.is_some());
    if with_oracle {
        header.push("oracle_m".into());
    }
    let body = rows
        .iter()
        .map(|r| {
            let mut v = vec![
                r.hamiltonian.clone(),
                r.observable.clone(),
                r.d.to_string(),
                r.d2.to_string(),
                r.n_omega.to_string(),
                r.n1.to_string(),
                r.m.to_string(),
            ];
            if with_oracle {
                v.push(r.oracle_m.map(|x| x.to_string()).unwrap_or_default());
            }
            v
        })
        .collect();
    (header, body)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpsReport {
    pub k: u64,
    pub n_u: u64,
    pub v: u64,
    pub n_state: u64,
    pub n_obs: u64,
    pub ratio: f64,
}

impl OpsReport {
    pub fn new(k: u64, n_u: u64, v: u64) -> Self {
        Self {
            k,
            n_u,
            v,
            n_state: count_state_ops(k, n_u, v),
            n_obs: count_obs_ops(v, k),
            ratio: ops_ratio(v, k, n_u),
        }
    }

    pub fn table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let header = ["k", "n_u", "v", "n_state", "n_obs", "ratio"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let row = vec![
            self.k.to_string(),
            self.n_u.to_string(),
            self.v.to_string(),
            self.n_state.to_string(),
            self.n_obs.to_string(),
            format!("{:.3e}", self.ratio),
        ];
        (header, vec![row])
    }
}
