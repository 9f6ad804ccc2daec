use aggmo_core::diagnostics::{nesterov_equivalence_trace, EquivalenceMode};
use serde_json::json;

use super::{require, Report};
use crate::config::{invalid, EquivConfig, ModeSpec};
use crate::error::Result;
use crate::output::{schema, OutputDir};
use crate::table::{Cell, Table};

impl From<ModeSpec> for EquivalenceMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Exact => Self::Exact,
            ModeSpec::Approximate => Self::Approximate,
        }
    }
}

/// `t, value` with `t` counting from zero.
pub fn series_table(values: &[f64]) -> Table {
    let mut t = Table::new(["t", "value"]);
    for (i, &v) in values.iter().enumerate() {
        t.push(vec![Cell::Int(i as u64), Cell::Num(v)]);
    }
    t
}

fn theta0(c: &EquivConfig) -> Vec<f64> {
    c.theta0
        .clone()
        .unwrap_or_else(|| c.problem.default_theta0(0))
}

pub(super) fn validate(c: &EquivConfig) -> Result<()> {
    let objective = c.problem.objective(0)?;
    let th = theta0(c);
    require(th.len() == objective.dim(), || {
        format!(
            "theta0 has {} entries, problem has dimension {}",
            th.len(),
            objective.dim()
        )
    })?;
    // A zero-step check exercises every parameter check without iterating.
    nesterov_equivalence_trace(objective.as_ref(), &th, c.beta, c.gamma, 0, c.mode.into())
        .map_err(invalid)?;
    Ok(())
}

pub(super) fn run(c: &EquivConfig, out: &mut OutputDir) -> Result<Report> {
    let objective = c.problem.objective(0)?;
    let report = nesterov_equivalence_trace(
        objective.as_ref(),
        &theta0(c),
        c.beta,
        c.gamma,
        c.steps as usize,
        c.mode.into(),
    )?;
    let file = out.write_table(
        "equivalence",
        schema::SERIES,
        &series_table(&report.deviations),
    )?;
    Ok(Report {
        summary: json!({
            "mode": c.mode,
            "steps": c.steps,
            "max_abs_deviation": report.max_abs_deviation,
            "deviations": file,
        }),
        ..Report::default()
    })
}
