//! Subcommand implementations.
//!
//! Every command validates its whole configuration before touching the file
//! system, runs its jobs (in parallel where they are independent), writes its
//! outputs through one [`OutputDir`] and finishes with a manifest, also when a
//! run diverges or fails.

mod equiv;
mod funnel;
mod optimize;
mod regret;
mod sweep;

use std::time::Instant;

use aggmo_core::diagnostics::oscillation_metrics;
use aggmo_core::Trace;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{
    resolve_out_dir, unix_ms, OutputDir, RunManifest, RunSummary, Status, SCHEMA_VERSION,
};
use crate::table::{Cell, Table};

pub use equiv::series_table;

/// What a command hands back for the manifest.
#[derive(Debug, Default)]
pub(crate) struct Report {
    runs: Vec<RunSummary>,
    summary: serde_json::Value,
    /// Set when a required run diverged.
    diverged: Option<String>,
}

/// Runs `config` end to end and returns the manifest that was written.
///
/// Configuration errors are reported before any file is created. A diverged
/// run still writes every output and the manifest, then returns
/// [`CliError::Diverged`].
pub fn execute(config: &RunConfig) -> Result<RunManifest> {
    validate(config)?;
    let mut out = OutputDir::create(resolve_out_dir(config.out()), config.format())?;
    let started = unix_ms();
    let result = match config {
        RunConfig::Optimize(c) => optimize::run(c, &mut out),
        RunConfig::FunnelRegression(c) => funnel::run(c, &mut out),
        RunConfig::SweepRates(c) => sweep::run(c, &mut out),
        RunConfig::EquivCheck(c) => equiv::run(c, &mut out),
        RunConfig::RegretCheck(c) => regret::run(c, &mut out),
    };
    let (status, error, report) = match &result {
        Ok(r) if r.diverged.is_some() => (Status::Diverged, None, Some(r)),
        Ok(r) => (Status::Ok, None, Some(r)),
        Err(e) => (Status::Failed, Some(e.record()), None),
    };
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").to_owned(),
        command: config.command().to_owned(),
        config: config.clone(),
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        status,
        error,
        runs: report.map(|r| r.runs.clone()).unwrap_or_default(),
        files: out.files().to_vec(),
        summary: report.map(|r| r.summary.clone()).unwrap_or_default(),
    };
    out.write_manifest(&manifest)?;
    match result? {
        Report {
            diverged: Some(msg),
            ..
        } => Err(CliError::Diverged(msg)),
        _ => Ok(manifest),
    }
}

/// Checks `config` without running anything.
pub fn validate(config: &RunConfig) -> Result<()> {
    match config {
        RunConfig::Optimize(c) => optimize::validate(c),
        RunConfig::FunnelRegression(c) => funnel::validate(c),
        RunConfig::SweepRates(c) => sweep::validate(c),
        RunConfig::EquivCheck(c) => equiv::validate(c),
        RunConfig::RegretCheck(c) => regret::validate(c),
    }
}

/// Largest dimension whose parameters are written into trace files.
pub const TRACE_THETA_MAX_DIM: usize = 8;

/// `t, loss, grad_norm`, then `theta_0..theta_{d−1}` when `d ≤ 8`.
pub fn trace_table(trace: &Trace) -> Table {
    let d = trace.records.first().map_or(0, |r| r.theta.len());
    let with_theta = d <= TRACE_THETA_MAX_DIM;
    let mut columns: Vec<String> = vec!["t".into(), "loss".into(), "grad_norm".into()];
    if with_theta {
        columns.extend((0..d).map(|j| format!("theta_{j}")));
    }
    let mut t = Table::new(columns);
    for r in &trace.records {
        let mut row = vec![Cell::Int(r.t), Cell::Num(r.loss), Cell::Num(r.grad_norm)];
        if with_theta {
            row.extend(r.theta.iter().map(|x| Cell::Num(*x)));
        }
        t.push(row);
    }
    t
}

pub(crate) fn summarize(
    label: String,
    seed: Option<u64>,
    lr: Option<f64>,
    trace: &Trace,
    started: Instant,
) -> RunSummary {
    let losses = trace.losses();
    let m = oscillation_metrics(&losses).expect("a trace holds at least the initial record");
    RunSummary {
        label,
        seed,
        lr,
        steps: trace.records.last().map_or(0, |r| r.t),
        final_loss: m.final_loss,
        increase_count: m.increase_count,
        max_relative_overshoot: m.max_relative_overshoot,
        non_finite_count: m.non_finite_count,
        diverged: trace.diverged(),
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    }
}

/// Learning rate as it appears in file names (`1e-6`, `0.33`).
pub(crate) fn lr_tag(lr: f64) -> String {
    let plain = lr.to_string();
    let sci = format!("{lr:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

pub(crate) fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}
