use alloc::vec;
use alloc::vec::Vec;

use crate::objective::check_dim;
use crate::{norm_inf, Error, Objective, OptimizerState, Result, Trace};

/// Learning rates given to the two velocities of AggMo with damping `[0, β]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivalenceMode {
    /// `γ(1) = 2γ`, `γ(2) = 2βγ`: identical to Nesterov after the change of
    /// variables `φ = θ + γβv`.
    Exact,
    /// `γ(1) = γ(2) = 2γ`: close to Nesterov when `β` is near 1.
    Approximate,
}

impl EquivalenceMode {
    pub fn learning_rates(self, beta: f64, gamma: f64) -> [f64; 2] {
        match self {
            Self::Exact => [2.0 * gamma, 2.0 * beta * gamma],
            Self::Approximate => [2.0 * gamma, 2.0 * gamma],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub mode: EquivalenceMode,
    /// `‖φ_t − θ_t‖∞` for `t = 0..=T`.
    pub deviations: Vec<f64>,
    pub max_abs_deviation: f64,
}

/// Runs Nesterov and generalized AggMo side by side from `theta0` for `steps`
/// iterations and records the max-norm gap between the reparameterized
/// Nesterov iterate `φ_t = θ_t + γβv_t` and the AggMo iterate.
pub fn nesterov_equivalence_trace(
    problem: &dyn Objective,
    theta0: &[f64],
    beta: f64,
    gamma: f64,
    steps: usize,
    mode: EquivalenceMode,
) -> Result<EquivalenceReport> {
    check_dim(problem.dim(), theta0.len())?;
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::DampingOutOfRange(beta));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidLearningRate(gamma));
    }
    let betas = [0.0, beta];
    let lrs = mode.learning_rates(beta, gamma);
    let mut nesterov = OptimizerState::new(theta0.to_vec(), 1);
    let mut aggmo = OptimizerState::new(theta0.to_vec(), 2);
    let mut deviations = Vec::with_capacity(steps + 1);
    let mut phi = vec![0.0; theta0.len()];
    let mut max = 0.0_f64;
    for t in 0..=steps {
        let look = nesterov.lookahead(beta, gamma)?;
        for ((p, a), b) in phi.iter_mut().zip(&look).zip(&aggmo.theta) {
            *p = a - b;
        }
        let dev = norm_inf(&phi);
        max = max.max(dev);
        deviations.push(dev);
        if t == steps {
            break;
        }
        let (_, g) = problem.value_grad(&look)?;
        nesterov.step_nesterov(&g, beta, gamma)?;
        let (_, g) = problem.value_grad(&aggmo.theta)?;
        aggmo.step_aggmo_generalized(&g, &betas, &lrs)?;
    }
    Ok(EquivalenceReport {
        mode,
        deviations,
        max_abs_deviation: max,
    })
}

/// True when both traces have the same length and every loss,
/// parameter and gradient norm agrees bit for bit. Velocity norms are not
/// compared, so methods with different velocity counts can be matched.
pub fn traces_bitwise_equal(a: &Trace, b: &Trace) -> bool {
    fn same(x: &[f64], y: &[f64]) -> bool {
        x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits())
    }
    a.records.len() == b.records.len()
        && a.records.iter().zip(&b.records).all(|(r, s)| {
            r.t == s.t
                && r.loss.to_bits() == s.loss.to_bits()
                && r.grad_norm.to_bits() == s.grad_norm.to_bits()
                && same(&r.theta, &s.theta)
        })
}
