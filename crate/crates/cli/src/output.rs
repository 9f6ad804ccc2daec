//! Output directory, file digests and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, Result};
use crate::table::Table;

/// Version of every CSV/JSON schema below. Bumped whenever a column is added,
/// removed or renamed.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "AGGMO_OUT_DIR";

pub const MANIFEST_FILE: &str = "manifest.json";

/// Schema names recorded next to each output file.
pub mod schema {
    /// `t, loss, grad_norm[, theta_0..theta_{d−1} when d ≤ 8]`.
    pub const TRACE: &str = "trace";
    /// `kappa, lr, rho, rate`.
    pub const RATE_CURVE: &str = "rate-curve";
    /// JSON: method, condition numbers and grid of one rate curve.
    pub const RATE_SIDECAR: &str = "rate-sidecar";
    /// `kappa, beta_star, rate`.
    pub const ENVELOPE: &str = "envelope";
    /// `t, value`.
    pub const SERIES: &str = "series";
    /// `t, inst_regret, cum_regret, avg_regret`.
    pub const REGRET: &str = "regret";
    /// JSON: bound terms, measured regret and assumption checks of one trial.
    pub const REGRET_BOUND: &str = "regret-bound";
    /// `trial, dim, conforms, final_regret, bound, within_bound`.
    pub const REGRET_SUMMARY: &str = "regret-summary";
    /// `method, seed, lr, final_loss, increase_count, max_relative_overshoot, diverged, best`.
    pub const FUNNEL_RUNS: &str = "funnel-runs";
    /// `method, seeds, median_increase_count, median_final_loss, median_max_relative_overshoot`.
    pub const FUNNEL_SUMMARY: &str = "funnel-summary";
    /// `# seed=S, sigma=σ` comment line, then `x,y`.
    pub const DATASET: &str = "dataset";
}

/// Picks the output directory: explicit setting, then `AGGMO_OUT_DIR`, then
/// `aggmo-out` in the working directory.
pub fn resolve_out_dir(explicit: Option<&PathBuf>) -> PathBuf {
    explicit
        .cloned()
        .or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from("aggmo-out"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory.
    pub path: String,
    pub schema: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Outcome of one optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    pub steps: u64,
    pub final_loss: f64,
    pub increase_count: usize,
    pub max_relative_overshoot: f64,
    pub non_finite_count: usize,
    pub diverged: bool,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Diverged,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    pub command: String,
    pub config: RunConfig,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<serde_json::Value>,
    pub runs: Vec<RunSummary>,
    pub files: Vec<FileEntry>,
    /// Command-specific results.
    pub summary: serde_json::Value,
}

pub fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// Collects every file a command writes, with its digest. All writes go
/// through one collector so parallel runs never interleave output.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    format: Format,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: PathBuf, format: Format) -> Result<Self> {
        fs::create_dir_all(&root)
            .map_err(|e| CliError::io(format!("creating {}", root.display()), e))?;
        Ok(Self {
            root,
            format,
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Writes raw bytes to `name` and records them under `schema`.
    pub fn write_bytes(&mut self, name: &str, schema: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, bytes)
            .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        self.files.push(FileEntry {
            path: name.to_owned(),
            schema: format!("{schema}/v{SCHEMA_VERSION}"),
            sha256: hex_digest(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Writes `table` as `{stem}.csv` or `{stem}.json` and returns the file name.
    pub fn write_table(&mut self, stem: &str, schema: &str, table: &Table) -> Result<String> {
        let name = format!("{stem}.{}", self.format.extension());
        self.write_bytes(&name, schema, &table.encode(self.format)?)?;
        Ok(name)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, schema: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(name, schema, &bytes)
    }

    /// Writes `manifest.json`. The manifest itself is not listed in `files`.
    pub fn write_manifest(&self, manifest: &RunManifest) -> Result<()> {
        let path = self.root.join(MANIFEST_FILE);
        let mut bytes = serde_json::to_vec_pretty(manifest)?;
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}
