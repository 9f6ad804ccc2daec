//! CSV form of the funnel-regression dataset.
//!
//! ```text
//! # seed=3, sigma=0.02
//! x,y
//! -0.41,0.52
//! ```

use aggmo_core::problems::FunnelDataset;

use crate::error::{CliError, Result};
use crate::table::{Cell, Table};

pub fn dataset_to_csv(d: &FunnelDataset) -> Result<Vec<u8>> {
    let mut t = Table::new(["x", "y"]);
    for (x, y) in d.xs.iter().zip(&d.ys) {
        t.push(vec![Cell::Num(*x), Cell::Num(*y)]);
    }
    let mut out = format!("# seed={}, sigma={}\n", d.seed, d.sigma).into_bytes();
    out.extend(t.to_csv()?);
    Ok(out)
}

pub fn dataset_from_csv(text: &str) -> Result<FunnelDataset> {
    let bad = |msg: &str| CliError::config(format!("dataset CSV: {msg}"));
    let (header, body) = text
        .split_once('\n')
        .ok_or_else(|| bad("missing header comment"))?;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| bad("first line must be a '#' comment"))?;
    let (mut seed, mut sigma) = (None, None);
    for part in header.split(',') {
        match part.trim().split_once('=') {
            Some(("seed", v)) => {
                seed = Some(v.trim().parse::<u64>().map_err(|_| bad("invalid seed"))?)
            }
            Some(("sigma", v)) => {
                sigma = Some(v.trim().parse::<f64>().map_err(|_| bad("invalid sigma"))?)
            }
            _ => return Err(bad(&format!("unexpected header field {:?}", part.trim()))),
        }
    }
    let (Some(seed), Some(sigma)) = (seed, sigma) else {
        return Err(bad("header needs seed and sigma"));
    };
    let mut r = csv::Reader::from_reader(body.as_bytes());
    if r.headers()?.iter().collect::<Vec<_>>() != ["x", "y"] {
        return Err(bad("columns must be x,y"));
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| {
            rec[i]
                .parse::<f64>()
                .map_err(|_| bad(&format!("invalid number {:?}", &rec[i])))
        };
        xs.push(num(0)?);
        ys.push(num(1)?);
    }
    Ok(FunnelDataset::from_points(xs, ys, sigma, seed)?)
}
