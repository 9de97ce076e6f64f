use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{EnumerationMode, IncoherenceReport};
use crate::ensembles::{self, EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::model::DesignMatrix;
use crate::rng::SimRng;

fn default_ensemble() -> EnsembleKind {
    EnsembleKind::GaussianIid
}

fn default_mode() -> EnumerationMode {
    EnumerationMode::exact()
}

/// Incoherence report on a generated design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    #[serde(default = "default_ensemble")]
    pub ensemble: EnsembleKind,
    pub n: usize,
    pub p: usize,
    pub max_size: usize,
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: EnumerationMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub report: IncoherenceReport,
    pub violations: Vec<String>,
}

impl DiagnoseConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).map_err(|e| Error::Config(e.to_string())),
            _ => serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string())),
        }
    }

    pub fn design(&self) -> Result<DesignMatrix> {
        ensembles::generate(&EnsembleSpec::new(self.ensemble, self.n, self.p), &mut SimRng::seed_from(self.seed))
    }
}

pub fn diagnose(design: &DesignMatrix, max_size: usize, mode: &EnumerationMode) -> Result<Diagnosis> {
    let report = IncoherenceReport::compute(design.matrix(), max_size, mode)?;
    let violations = if report.enumerated { report.violations() } else { Vec::new() };
    Ok(Diagnosis { report, violations })
}

/// Read a numeric design from CSV (one row per sample; a non-numeric first
/// row is treated as a header) and normalize its columns to norm `√n`.
pub fn read_design_csv(path: &Path) -> Result<DesignMatrix> {
    let bad = |msg: String| Error::Config(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(bad(format!("row {}: {e}", i + 1))),
        }
    }
    let p = rows.first().map(Vec::len).ok_or_else(|| bad("no numeric rows".into()))?;
    if rows.iter().any(|r| r.len() != p) {
        return Err(bad("rows have different lengths".into()));
    }
    let n = rows.len();
    let x = nalgebra::DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    DesignMatrix::normalized(x)
}
