//! Aggregated Momentum (AggMo) and the analysis tooling around it.
//!
//! AggMo keeps `K` velocity vectors, each with its own damping coefficient,
//! and moves the parameters along their average. This crate holds the update
//! rules (classical momentum, Nesterov, AggMo and its per-velocity learning
//! rate generalization, Beta-averaged momentum), a set of differentiable test
//! objectives, the linear-dynamical-system analysis of momentum on quadratics,
//! cross-method diagnostics and an online-convex-programming regret harness.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel sweeps
//! and the experiment CLI live in the `aggmo-cli` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod damping;
pub mod diagnostics;
pub mod driver;
mod error;
pub mod objective;
pub mod optim;
pub mod problems;
pub mod regret;
pub mod schedule;

pub use damping::{build_damping_vector, DampingDecay, DampingVector};
pub use driver::{run, RunOptions, RunStatus, Trace, TraceRecord};
pub use error::{Error, Result};
pub use objective::Objective;
pub use optim::{Method, Optimizer, OptimizerState};
pub use schedule::Schedule;

/// Euclidean norm.
pub(crate) fn norm2(x: &[f64]) -> f64 {
    num_traits::Float::sqrt(x.iter().map(|v| v * v).sum::<f64>())
}

/// Largest absolute entry.
pub(crate) fn norm_inf(x: &[f64]) -> f64 {
    x.iter()
        .fold(0.0_f64, |m, v| if v.abs() > m { v.abs() } else { m })
}
