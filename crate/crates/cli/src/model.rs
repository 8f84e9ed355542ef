//! Model sources: the built-in precessing two-level family or a file of
//! uniformly spaced Hamiltonian samples.

use std::path::{Path, PathBuf};

use nhphase_core::biorthonormal::build_system_path_with;
use nhphase_core::linalg::{ComplexMatrix, C64};
use nhphase_core::two_level::sampled_path;
use nhphase_core::{EigOptions, Hamiltonian, HamiltonianPath, SystemPath, TwoLevelParams};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// `{ "period": T, "samples": [ [ [[re, im], ...], ... ], ... ] }`: one
/// matrix per sample, as rows of `[re, im]` pairs.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianFile {
    pub period: f64,
    pub samples: Vec<Vec<Vec<[f64; 2]>>>,
}

impl HamiltonianFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Parse(format!(
                "{} at line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })
    }

    pub fn into_path(self) -> CliResult<HamiltonianPath> {
        let mut mats = Vec::with_capacity(self.samples.len());
        for (k, rows) in self.samples.into_iter().enumerate() {
            let rows: Vec<Vec<C64>> = rows
                .into_iter()
                .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
                .collect();
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(CliError::Validation(format!("sample {k} is not a square matrix")));
            }
            mats.push(ComplexMatrix::from_rows(&rows).map_err(|e| CliError::Validation(format!("sample {k}: {e}")))?);
        }
        Ok(HamiltonianPath::new(self.period, mats)?)
    }
}

pub enum Model {
    TwoLevel(TwoLevelParams),
    File { source: PathBuf, path: HamiltonianPath },
}

impl Model {
    /// Frame samples: the file's own grid, or `samples` points of the built-in loop.
    pub fn sampled(&self, samples: usize) -> CliResult<HamiltonianPath> {
        match self {
            Model::TwoLevel(p) => Ok(sampled_path(p, samples)?),
            Model::File { path, .. } => Ok(path.clone()),
        }
    }

    pub fn system_path(&self, samples: usize, opts: &EigOptions) -> CliResult<SystemPath> {
        Ok(build_system_path_with(&self.sampled(samples)?, opts)?)
    }

    pub fn period(&self) -> f64 {
        match self {
            Model::TwoLevel(p) => p.period(),
            Model::File { path, .. } => path.period(),
        }
    }
}
