use std::collections::BTreeSet;

use aggmo_core::analysis::{
    critical_damping, log_space, optimal_envelope, rate_curve, Dynamics, LrGrid,
};
use aggmo_core::Method;
use rayon::prelude::*;
use serde_json::json;

use super::{require, Report};
use crate::config::{invalid, MethodSpec, SweepConfig};
use crate::error::{CliError, Result};
use crate::output::{schema, OutputDir};
use crate::table::{Cell, Table};

fn dynamics(m: &MethodSpec) -> Result<Dynamics> {
    require(m.decay.is_none(), || {
        format!("{}: sweep-rates does not model damping decay", m.label())
    })?;
    match m.build()? {
        Method::Cm { beta } => Ok(Dynamics::cm(beta)),
        Method::Nesterov { beta } => Ok(Dynamics::Nesterov { beta }),
        Method::AggMo { damping } => Ok(Dynamics::AggMo {
            betas: damping.betas().to_vec(),
        }),
        other => Err(CliError::config(format!(
            "sweep-rates supports cm, nesterov and aggmo, not {}",
            other.name()
        ))),
    }
}

fn kappas(c: &SweepConfig) -> Result<Vec<f64>> {
    let ks = match &c.kappas {
        Some(k) => k.clone(),
        None => {
            require(c.kappa_count > 0, || "kappa_count must be positive".into())?;
            require(
                c.kappa_min >= 1.0 && c.kappa_max >= c.kappa_min && c.kappa_max.is_finite(),
                || {
                    format!(
                        "need 1 ≤ kappa_min ≤ kappa_max, got {} and {}",
                        c.kappa_min, c.kappa_max
                    )
                },
            )?;
            log_space(c.kappa_min, c.kappa_max, c.kappa_count)
        }
    };
    require(!ks.is_empty(), || {
        "sweep-rates needs at least one condition number".into()
    })?;
    for &k in &ks {
        critical_damping(k).map_err(invalid)?;
    }
    Ok(ks)
}

fn grid(c: &SweepConfig) -> Result<LrGrid> {
    match &c.lr_grid {
        Some(g) => {
            require(!g.is_empty(), || "lr_grid is empty".into())?;
            require(g.iter().all(|&l| l > 0.0 && l.is_finite()), || {
                "lr_grid entries must be positive and finite".into()
            })?;
            Ok(LrGrid::Explicit(g.clone()))
        }
        None => {
            require(c.grid_points >= 2, || {
                format!("grid_points must be at least 2, got {}", c.grid_points)
            })?;
            Ok(LrGrid::Auto {
                points: c.grid_points,
                refinements: c.refinements,
            })
        }
    }
}

pub(super) fn validate(c: &SweepConfig) -> Result<()> {
    require(!c.methods.is_empty(), || {
        "sweep-rates needs at least one method".into()
    })?;
    let mut labels = BTreeSet::new();
    for m in &c.methods {
        dynamics(m)?;
        require(labels.insert(m.label()), || {
            format!("duplicate method label {}", m.label())
        })?;
    }
    kappas(c)?;
    grid(c)?;
    Ok(())
}

pub(super) fn run(c: &SweepConfig, out: &mut OutputDir) -> Result<Report> {
    let ks = kappas(c)?;
    let g = grid(c)?;
    let curves = c
        .methods
        .par_iter()
        .map(|m| rate_curve(&dynamics(m)?, &ks, &g).map_err(CliError::from))
        .collect::<Result<Vec<_>>>()?;

    let mut methods = Vec::new();
    for (m, curve) in c.methods.iter().zip(&curves) {
        let label = m.label();
        let mut t = Table::new(["kappa", "lr", "rho", "rate"]);
        for p in curve {
            t.push(vec![
                Cell::Num(p.kappa),
                Cell::Num(p.lr),
                Cell::Num(p.rho),
                Cell::Num(p.rate),
            ]);
        }
        let file = out.write_table(&format!("rates-{label}"), schema::RATE_CURVE, &t)?;
        let grid_json = match &g {
            LrGrid::Explicit(lrs) => json!({ "kind": "explicit", "lrs": lrs }),
            LrGrid::Auto {
                points,
                refinements,
            } => {
                json!({ "kind": "auto", "points": points, "refinements": refinements })
            }
        };
        out.write_json(
            &format!("rates-{label}.meta.json"),
            schema::RATE_SIDECAR,
            &json!({ "label": label, "method": m, "kappas": ks, "grid": grid_json, "data": file }),
        )?;
        methods.push(json!({
            "label": label,
            "points": curve.len(),
            "converged_points": curve.iter().filter(|p| p.converges()).count(),
        }));
    }

    let rates = optimal_envelope(&ks).map_err(invalid)?;
    let mut env = Table::new(["kappa", "beta_star", "rate"]);
    for (&k, &r) in ks.iter().zip(&rates) {
        let (beta, _) = critical_damping(k).map_err(invalid)?;
        env.push(vec![Cell::Num(k), Cell::Num(beta), Cell::Num(r)]);
    }
    out.write_table("envelope", schema::ENVELOPE, &env)?;

    Ok(Report {
        summary: json!({ "kappas": ks.len(), "methods": methods }),
        ..Report::default()
    })
}
