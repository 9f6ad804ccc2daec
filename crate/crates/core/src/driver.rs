//! The optimization loop and its per-iteration trace.

use alloc::vec::Vec;

use crate::optim::Optimizer;
use crate::schedule::Schedule;
use crate::{norm2, Objective, Result};

/// State of the iterate after `t` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    pub loss: f64,
    pub theta: Vec<f64>,
    pub grad_norm: f64,
    pub velocity_norms: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    /// Loss became non-finite or exceeded the divergence threshold at step `t`.
    Diverged {
        t: u64,
    },
}

/// Record 0 holds the initial point (velocities zero); record `t` the state
/// after `t` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub status: RunStatus,
}

impl Trace {
    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.loss).collect()
    }

    pub fn final_loss(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.loss)
    }

    pub fn diverged(&self) -> bool {
        matches!(self.status, RunStatus::Diverged { .. })
    }

    pub fn thetas(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.theta.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// A loss above this (or a non-finite loss) ends the run as diverged.
    pub divergence_threshold: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            divergence_threshold: 1e12,
        }
    }
}

/// Runs `steps` optimizer steps on `objective`, recording every iterate.
///
/// Step `t` uses learning rate `schedule.eval(t)`; Nesterov's lookahead uses
/// the previous step's rate.
pub fn run(
    objective: &dyn Objective,
    optimizer: &mut Optimizer,
    schedule: &Schedule,
    steps: u64,
    options: RunOptions,
) -> Result<Trace> {
    let mut records = Vec::with_capacity(steps as usize + 1);
    let reuse_grad = !matches!(optimizer.method(), crate::Method::Nesterov { .. });
    loop {
        let t = optimizer.state().t;
        let (loss, grad) = objective.value_grad(optimizer.theta())?;
        records.push(TraceRecord {
            t,
            loss,
            theta: optimizer.theta().to_vec(),
            grad_norm: norm2(&grad),
            velocity_norms: optimizer
                .state()
                .velocities
                .iter()
                .map(|v| norm2(v))
                .collect(),
        });
        if !loss.is_finite() || loss > options.divergence_threshold {
            return Ok(Trace {
                records,
                status: RunStatus::Diverged { t },
            });
        }
        if t >= steps {
            break;
        }
        let lr = schedule.eval(t + 1);
        if reuse_grad {
            optimizer.step(&grad, lr)?;
        } else {
            let q = optimizer.query_point(schedule.eval(t));
            let (_, g) = objective.value_grad(&q)?;
            optimizer.step(&g, lr)?;
        }
    }
    Ok(Trace {
        records,
        status: RunStatus::Completed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::FnObjective;
    use crate::optim::Method;
    use alloc::vec;

    fn quad() -> FnObjective<impl Fn(&[f64]) -> (f64, Vec<f64>)> {
        FnObjective::new(1, |x: &[f64]| (0.5 * x[0] * x[0], vec![x[0]]))
    }

    #[test]
    fn trace_layout() {
        let f = quad();
        let mut opt = Optimizer::new(Method::Cm { beta: 0.5 }, vec![2.0]).unwrap();
        let s = Schedule::constant(0.1).unwrap();
        let trace = run(&f, &mut opt, &s, 5, RunOptions::default()).unwrap();
        assert_eq!(trace.records.len(), 6);
        assert_eq!(trace.records[0].loss, 2.0);
        assert_eq!(trace.records[0].velocity_norms, vec![0.0]);
        assert!(trace.records.windows(2).all(|w| w[1].t == w[0].t + 1));
        assert_eq!(trace.status, RunStatus::Completed);

        let mut opt = Optimizer::new(Method::Cm { beta: 0.5 }, vec![2.0]).unwrap();
        let trace = run(&f, &mut opt, &s, 0, RunOptions::default()).unwrap();
        assert_eq!(trace.records.len(), 1);
    }

    #[test]
    fn divergence_is_recorded() {
        let f = quad();
        let mut opt = Optimizer::new(Method::Cm { beta: 0.9 }, vec![1.0]).unwrap();
        let s = Schedule::constant(10.0).unwrap();
        let trace = run(&f, &mut opt, &s, 1000, RunOptions::default()).unwrap();
        assert!(trace.diverged());
        assert!(trace.records.len() < 1001);
        assert!(trace.final_loss() > 1e12 || !trace.final_loss().is_finite());
    }
}
