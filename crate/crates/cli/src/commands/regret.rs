use aggmo_core::regret::{
    online_run, regret_bound, AlternatingLinear, DriftingQuadratic, OnlineProblem,
};
use aggmo_core::{DampingDecay, DampingVector};
use rayon::prelude::*;
use serde_json::json;

use super::{require, Report};
use crate::config::{invalid, RegretConfig, RegretFamily};
use crate::error::Result;
use crate::output::{schema, OutputDir};
use crate::table::{Cell, Table};

/// Problem seed of trial `i`: distinct per trial, and unrelated across base
/// seeds.
fn trial_seed(base: u64, i: usize) -> u64 {
    base ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn problem(c: &RegretConfig, i: usize) -> Result<Box<dyn OnlineProblem + Send + Sync>> {
    let dim = c.dims[i % c.dims.len()];
    Ok(match c.family {
        RegretFamily::DriftingQuadratic {
            curvature,
            half_width,
            radius,
        } => Box::new(
            DriftingQuadratic::generate(
                trial_seed(c.seed, i),
                dim,
                curvature,
                half_width,
                radius,
                c.steps,
            )
            .map_err(invalid)?,
        ),
        RegretFamily::AlternatingLinear { slope, radius } => {
            Box::new(AlternatingLinear::new(dim, slope, radius, c.steps).map_err(invalid)?)
        }
    })
}

pub(super) fn validate(c: &RegretConfig) -> Result<()> {
    require(!c.dims.is_empty(), || {
        "regret-check needs at least one dimension".into()
    })?;
    require(c.dims.iter().all(|&d| d > 0), || {
        "dimensions must be positive".into()
    })?;
    require(c.steps > 0, || {
        "regret-check needs at least one step".into()
    })?;
    require(c.gamma > 0.0 && c.gamma.is_finite(), || {
        format!("gamma must be positive, got {}", c.gamma)
    })?;
    require(c.lambda < 1.0, || {
        format!("lambda must be below 1, got {}", c.lambda)
    })?;
    DampingDecay::new(c.lambda).map_err(invalid)?;
    DampingVector::with_repeats(c.betas.clone()).map_err(invalid)?;
    for i in 0..c.dims.len() {
        problem(c, i)?;
    }
    Ok(())
}

pub(super) fn run(c: &RegretConfig, out: &mut OutputDir) -> Result<Report> {
    let trials = (0..c.trials)
        .into_par_iter()
        .map(|i| {
            let p = problem(c, i)?;
            let rec = online_run(p.as_ref(), &vec![0.0; p.dim()], &c.betas, c.gamma, c.lambda)?;
            let bound = regret_bound(&rec, &p.bounds(), &c.betas, c.gamma, c.lambda)?;
            Ok((p.dim(), p.bounds(), rec, bound))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = Table::new([
        "trial",
        "dim",
        "conforms",
        "final_regret",
        "bound",
        "within_bound",
    ]);
    let (mut conforming, mut within) = (0usize, 0usize);
    for (i, (dim, bounds, rec, bound)) in trials.iter().enumerate() {
        let mut t = Table::new(["t", "inst_regret", "cum_regret", "avg_regret"]);
        for s in &rec.steps {
            t.push(vec![
                Cell::Int(s.t as u64),
                Cell::Num(s.inst_regret),
                Cell::Num(s.cum_regret),
                Cell::Num(s.avg_regret),
            ]);
        }
        let stem = format!("regret-trial{i:04}");
        out.write_table(&stem, schema::REGRET, &t)?;
        let ok = rec.final_regret() <= bound.total;
        if rec.conforms() {
            conforming += 1;
            within += usize::from(ok);
        }
        out.write_json(
            &format!("{stem}-bound.json"),
            schema::REGRET_BOUND,
            &json!({
                "trial": i,
                "dim": dim,
                "horizon": rec.horizon(),
                "betas": c.betas,
                "gamma": c.gamma,
                "lambda": c.lambda,
                "declared": { "d": bounds.d, "d_inf": bounds.d_inf, "g": bounds.g, "g_inf": bounds.g_inf },
                "observed": { "d": rec.observed_d, "d_inf": rec.observed_d_inf },
                "violations": {
                    "gradient_inf": rec.violations.gradient_inf,
                    "gradient_l2": rec.violations.gradient_l2,
                    "domain": rec.violations.domain,
                },
                "conforms": rec.conforms(),
                "bound": {
                    "domain": bound.domain,
                    "gradient": bound.gradient,
                    "damping": bound.damping,
                    "total": bound.total,
                },
                "final_regret": rec.final_regret(),
                "average_regret": rec.average_regret(),
                "within_bound": ok,
            }),
        )?;
        summary.push(vec![
            Cell::Int(i as u64),
            Cell::Int(*dim as u64),
            Cell::Bool(rec.conforms()),
            Cell::Num(rec.final_regret()),
            Cell::Num(bound.total),
            Cell::Bool(ok),
        ]);
    }
    out.write_table("regret-summary", schema::REGRET_SUMMARY, &summary)?;

    let fraction = |n: usize, d: usize| (d > 0).then(|| n as f64 / d as f64);
    Ok(Report {
        summary: json!({
            "trials": c.trials,
            "conforming": conforming,
            "within_bound": within,
            "conforming_fraction": fraction(conforming, c.trials),
            "within_bound_fraction": fraction(within, conforming),
        }),
        ..Report::default()
    })
}
