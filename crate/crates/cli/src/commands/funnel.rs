use std::collections::BTreeSet;
use std::time::Instant;

use aggmo_core::problems::MlpRegression;
use aggmo_core::{run as run_optimizer, RunOptions, Schedule, Trace};
use rayon::prelude::*;
use serde_json::json;

use super::{median, require, summarize, trace_table, Report};
use crate::config::{invalid, FunnelConfig};
use crate::dataset::dataset_to_csv;
use crate::error::Result;
use crate::output::{schema, OutputDir, RunSummary};
use crate::table::{Cell, Table};

pub(super) fn validate(c: &FunnelConfig) -> Result<()> {
    require(!c.seeds.is_empty(), || {
        "funnel-regression needs at least one seed".into()
    })?;
    require(!c.lrs.is_empty(), || {
        "funnel-regression needs at least one learning rate".into()
    })?;
    require(!c.methods.is_empty(), || {
        "funnel-regression needs at least one method".into()
    })?;
    require(c.points > 0, || {
        "funnel-regression needs at least one point".into()
    })?;
    for &lr in &c.lrs {
        Schedule::constant(lr).map_err(invalid)?;
    }
    let mut labels = BTreeSet::new();
    for m in &c.methods {
        m.build()?;
        require(labels.insert(m.label()), || {
            format!("duplicate method label {}", m.label())
        })?;
    }
    Ok(())
}

pub(super) fn run(c: &FunnelConfig, out: &mut OutputDir) -> Result<Report> {
    let problem = c.problem();
    let datasets = c
        .seeds
        .par_iter()
        .map(|&s| problem.dataset(s))
        .collect::<Result<Vec<_>>>()?;
    for d in &datasets {
        out.write_bytes(
            &format!("dataset-seed{}.csv", d.seed),
            schema::DATASET,
            &dataset_to_csv(d)?,
        )?;
    }

    let mut jobs = Vec::new();
    for (si, &seed) in c.seeds.iter().enumerate() {
        for (mi, m) in c.methods.iter().enumerate() {
            for &lr in &c.lrs {
                jobs.push((si, seed, mi, m, lr));
            }
        }
    }
    let results: Vec<(usize, usize, Trace, RunSummary)> = jobs
        .par_iter()
        .map(|&(si, seed, mi, m, lr)| {
            let started = Instant::now();
            let objective =
                MlpRegression::new(datasets[si].clone()).with_reduction(c.reduction.into());
            let mut opt = m.optimizer(problem.default_theta0(seed))?;
            let schedule = Schedule::constant(lr).map_err(invalid)?;
            let trace = run_optimizer(
                &objective,
                &mut opt,
                &schedule,
                c.steps,
                RunOptions::default(),
            )?;
            let s = summarize(m.label(), Some(seed), Some(lr), &trace, started);
            Ok((si, mi, trace, s))
        })
        .collect::<Result<_>>()?;

    let mut runs = Table::new([
        "method",
        "seed",
        "lr",
        "final_loss",
        "increase_count",
        "max_relative_overshoot",
        "diverged",
        "best",
    ]);
    let mut report = Report::default();
    let mut failed = Vec::new();
    let mut summary = Table::new([
        "method",
        "seeds",
        "median_increase_count",
        "median_final_loss",
        "median_max_relative_overshoot",
    ]);
    let mut ranking = Vec::new();
    for (mi, m) in c.methods.iter().enumerate() {
        let label = m.label();
        let mut best_runs: Vec<&RunSummary> = Vec::new();
        for (si, &seed) in c.seeds.iter().enumerate() {
            let best = results
                .iter()
                .filter(|r| r.0 == si && r.1 == mi && !r.3.diverged)
                .min_by(|a, b| a.3.final_loss.total_cmp(&b.3.final_loss));
            match best {
                Some((_, _, trace, s)) => {
                    out.write_table(
                        &format!("funnel-{label}-seed{seed}"),
                        schema::TRACE,
                        &trace_table(trace),
                    )?;
                    best_runs.push(s);
                }
                None => failed.push(format!("{label} seed {seed}")),
            }
            for (_, _, _, s) in results.iter().filter(|r| r.0 == si && r.1 == mi) {
                let is_best = best.is_some_and(|b| std::ptr::eq(&b.3, s));
                runs.push(vec![
                    Cell::Text(label.clone()),
                    Cell::Int(seed),
                    Cell::Num(s.lr.unwrap_or(f64::NAN)),
                    Cell::Num(s.final_loss),
                    Cell::Int(s.increase_count as u64),
                    Cell::Num(s.max_relative_overshoot),
                    Cell::Bool(s.diverged),
                    Cell::Bool(is_best),
                ]);
            }
        }
        let med = |f: fn(&RunSummary) -> f64| median(best_runs.iter().map(|s| f(s)).collect());
        let inc = med(|s| s.increase_count as f64);
        let loss = med(|s| s.final_loss);
        let over = med(|s| s.max_relative_overshoot);
        summary.push(vec![
            Cell::Text(label.clone()),
            Cell::Int(best_runs.len() as u64),
            Cell::Num(inc.unwrap_or(f64::NAN)),
            Cell::Num(loss.unwrap_or(f64::NAN)),
            Cell::Num(over.unwrap_or(f64::NAN)),
        ]);
        ranking.push(json!({
            "method": label,
            "seeds": best_runs.len(),
            "median_increase_count": inc,
            "median_final_loss": loss,
            "median_max_relative_overshoot": over,
        }));
    }
    out.write_table("funnel-runs", schema::FUNNEL_RUNS, &runs)?;
    out.write_table("funnel-summary", schema::FUNNEL_SUMMARY, &summary)?;

    report.runs = results.into_iter().map(|r| r.3).collect();
    report.summary = json!({ "methods": ranking });
    if !failed.is_empty() {
        report.diverged = Some(format!(
            "every learning rate diverged for {}",
            failed.join(", ")
        ));
    }
    Ok(report)
}
