//! `report.toml` and the CSV fields written next to it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::problem::{InstanceKind, ProblemKind};

pub const REPORT_FILE: &str = "report.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Infeasible,
    NotConverged,
    RegularityViolation,
    /// The solver finished but its output failed the certificate.
    Uncertified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    /// `probe` or `kkt`.
    pub method: String,
    pub feasibility_residual: f64,
    pub feasibility_tolerance: f64,
    pub optimality_residual: f64,
    pub optimality_tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub status: Status,
    pub problem: ProblemKind,
    pub instance: InstanceKind,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility_residual: Option<f64>,
    pub tol_objective: f64,
    pub tol_feasibility: f64,
    pub seed: u64,
    /// Problem-specific scalars.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    /// Field name to CSV file name, relative to the report.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fields: BTreeMap<String, String>,
}

impl Report {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("reports always serialize")
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(REPORT_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        toml::from_str(&text).map_err(|e| CliError::schema(format!("{}: {e}", path.display())))
    }
}

/// One column of values with the name of its index column.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub index: &'static str,
    pub values: Vec<f64>,
}

/// Header `index,value`, then one row per entry with 17 significant digits.
pub fn to_csv(field: &Field) -> String {
    let mut out = format!("{},value\n", field.index);
    for (i, v) in field.values.iter().enumerate() {
        writeln!(out, "{i},{v:.16e}").expect("writing to a string");
    }
    out
}

pub fn parse_csv(text: &str) -> std::result::Result<Vec<f64>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    if !header.ends_with(",value") {
        return Err(format!("unexpected header `{header}`"));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(k, line)| {
            let (idx, val) = line.split_once(',').ok_or_else(|| format!("line {}: expected two columns", k + 2))?;
            if idx.trim().parse::<usize>().ok() != Some(k) {
                return Err(format!("line {}: index {idx} out of sequence", k + 2));
            }
            val.trim().parse::<f64>().map_err(|e| format!("line {}: {e}", k + 2))
        })
        .collect()
}

/// Reads every field the report lists.
pub fn load_fields(dir: &Path, report: &Report) -> Result<BTreeMap<String, Vec<f64>>> {
    report
        .fields
        .iter()
        .map(|(name, file)| {
            let path = dir.join(file);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let values = parse_csv(&text).map_err(|e| CliError::schema(format!("{}: {e}", path.display())))?;
            Ok((name.clone(), values))
        })
        .collect()
}

/// Writes the CSV fields, then the report that names them.
pub fn write_all(dir: &Path, report: &Report, fields: &BTreeMap<String, Field>) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (name, field) in fields {
        let path = dir.join(format!("{name}.csv"));
        std::fs::write(&path, to_csv(field)).map_err(|e| CliError::io(&path, e))?;
    }
    let path = dir.join(REPORT_FILE);
    std::fs::write(&path, report.to_toml()).map_err(|e| CliError::io(&path, e))
}
