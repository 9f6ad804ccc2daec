use std::time::Instant;

use aggmo_core::{run as run_optimizer, RunOptions, Trace};
use rayon::prelude::*;
use serde_json::json;

use super::{lr_tag, require, summarize, trace_table, Report};
use crate::config::OptimizeConfig;
use crate::error::Result;
use crate::output::{schema, OutputDir};

pub(super) fn validate(c: &OptimizeConfig) -> Result<()> {
    c.method.build()?;
    require(!c.lrs.is_empty(), || {
        "optimize needs at least one learning rate".into()
    })?;
    require(!c.seeds.is_empty(), || {
        "optimize needs at least one seed".into()
    })?;
    require(c.divergence_threshold > 0.0, || {
        format!(
            "divergence_threshold must be positive, got {}",
            c.divergence_threshold
        )
    })?;
    for &lr in &c.lrs {
        c.schedule.build(lr)?;
    }
    let seed = c.seeds[0];
    let objective = c.problem.objective(seed)?;
    let theta0 = c
        .theta0
        .clone()
        .unwrap_or_else(|| c.problem.default_theta0(seed));
    require(theta0.len() == objective.dim(), || {
        format!(
            "theta0 has {} entries, problem has dimension {}",
            theta0.len(),
            objective.dim()
        )
    })?;
    c.method.optimizer(theta0)?;
    Ok(())
}

fn one_run(c: &OptimizeConfig, seed: u64, lr: f64) -> Result<Trace> {
    let objective = c.problem.objective(seed)?;
    let theta0 = c
        .theta0
        .clone()
        .unwrap_or_else(|| c.problem.default_theta0(seed));
    let mut opt = c.method.optimizer(theta0)?;
    let options = RunOptions {
        divergence_threshold: c.divergence_threshold,
    };
    Ok(run_optimizer(
        objective.as_ref(),
        &mut opt,
        &c.schedule.build(lr)?,
        c.steps,
        options,
    )?)
}

pub(super) fn run(c: &OptimizeConfig, out: &mut OutputDir) -> Result<Report> {
    let label = c.method.label();
    let jobs: Vec<(u64, f64)> = c
        .seeds
        .iter()
        .flat_map(|&s| c.lrs.iter().map(move |&lr| (s, lr)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(seed, lr)| {
            let started = Instant::now();
            one_run(c, seed, lr).map(|t| {
                let s = summarize(label.clone(), Some(seed), Some(lr), &t, started);
                (seed, lr, t, s)
            })
        })
        .collect();

    let mut report = Report::default();
    let mut files = Vec::new();
    let mut diverged = Vec::new();
    for r in results {
        let (seed, lr, trace, summary) = r?;
        let stem = format!("trace-{label}-seed{seed}-lr{}", lr_tag(lr));
        files.push(out.write_table(&stem, schema::TRACE, &trace_table(&trace))?);
        if summary.diverged {
            diverged.push(format!("seed {seed}, lr {lr}"));
        }
        report.runs.push(summary);
    }
    report.summary = json!({ "method": label, "traces": files, "diverged_runs": diverged.len() });
    if !diverged.is_empty() {
        report.diverged = Some(format!("{label} diverged: {}", diverged.join("; ")));
    }
    Ok(report)
}
