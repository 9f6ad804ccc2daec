//! Momentum update rules.
//!
//! Every method consumes exactly one gradient per step, evaluated at the point
//! returned by [`Optimizer::query_point`]: the current iterate for classical
//! momentum and AggMo, the lookahead `θ + γβv` for Nesterov.
//!
//! Velocities are updated first, then their (weighted) average, then `θ`.
//! Sums over velocities run left to right in index order starting from the
//! first term, which keeps trajectories bit-reproducible and makes the
//! single-velocity AggMo step bitwise identical to classical momentum.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::damping::{DampingDecay, DampingVector};
use crate::objective::check_dim;
use crate::{Error, Result};

/// Parameters, one velocity per damping coefficient, and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub theta: Vec<f64>,
    pub velocities: Vec<Vec<f64>>,
    pub t: u64,
}

impl OptimizerState {
    /// Fresh state at `t = 0` with `k` zero velocities.
    pub fn new(theta: Vec<f64>, k: usize) -> Self {
        let d = theta.len();
        Self {
            theta,
            velocities: vec![vec![0.0; d]; k],
            t: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// Nesterov lookahead `θ + γβv`. Requires exactly one velocity.
    pub fn lookahead(&self, beta: f64, lr: f64) -> Result<Vec<f64>> {
        if self.velocities.len() != 1 {
            return Err(Error::NesterovVelocityCount(self.velocities.len()));
        }
        let scale = lr * beta;
        Ok(self
            .theta
            .iter()
            .zip(&self.velocities[0])
            .map(|(th, v)| th + scale * v)
            .collect())
    }

    /// `v ← βv − g`, `θ ← θ + γv`.
    pub fn step_cm(&mut self, grad: &[f64], beta: f64, lr: f64) -> Result<()> {
        check_dim(self.dim(), grad.len())?;
        if self.velocities.len() != 1 {
            return Err(Error::VelocityCountMismatch {
                state: self.velocities.len(),
                required: 1,
            });
        }
        let v = &mut self.velocities[0];
        for ((th, vj), g) in self.theta.iter_mut().zip(v.iter_mut()).zip(grad) {
            *vj = beta * *vj - g;
            *th += lr * *vj;
        }
        self.t += 1;
        Ok(())
    }

    /// Same update as [`step_cm`](Self::step_cm); the caller supplies the
    /// gradient taken at [`lookahead`](Self::lookahead).
    pub fn step_nesterov(&mut self, grad_at_lookahead: &[f64], beta: f64, lr: f64) -> Result<()> {
        if self.velocities.len() != 1 {
            return Err(Error::NesterovVelocityCount(self.velocities.len()));
        }
        self.step_cm(grad_at_lookahead, beta, lr)
    }

    /// `v(i) ← β(i)v(i) − g` for every `i`, then `θ ← θ + (γ/K)·Σ v(i)`.
    pub fn step_aggmo(&mut self, grad: &[f64], betas: &[f64], lr: f64) -> Result<()> {
        self.update_velocities(grad, betas)?;
        let scale = lr / betas.len() as f64;
        for (j, th) in self.theta.iter_mut().enumerate() {
            let mut sum = self.velocities[0][j];
            for v in &self.velocities[1..] {
                sum += v[j];
            }
            *th += scale * sum;
        }
        self.t += 1;
        Ok(())
    }

    /// AggMo with one learning rate per velocity:
    /// `θ ← θ + (1/K)·Σ γ(i)·v(i)`.
    ///
    /// Rates may be zero (e.g. `γ(2) = 2βγ` with `β = 0`), never negative.
    pub fn step_aggmo_generalized(
        &mut self,
        grad: &[f64],
        betas: &[f64],
        lrs: &[f64],
    ) -> Result<()> {
        if lrs.len() != betas.len() {
            return Err(Error::LearningRateCount {
                expected: betas.len(),
                found: lrs.len(),
            });
        }
        if let Some(&bad) = lrs.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(Error::InvalidLearningRate(bad));
        }
        self.update_velocities(grad, betas)?;
        let k = betas.len() as f64;
        for (j, th) in self.theta.iter_mut().enumerate() {
            let mut sum = (lrs[0] / k) * self.velocities[0][j];
            for (v, lr) in self.velocities[1..].iter().zip(&lrs[1..]) {
                sum += (lr / k) * v[j];
            }
            *th += sum;
        }
        self.t += 1;
        Ok(())
    }

    fn update_velocities(&mut self, grad: &[f64], betas: &[f64]) -> Result<()> {
        check_dim(self.dim(), grad.len())?;
        if betas.is_empty() {
            return Err(Error::EmptyDamping);
        }
        if self.velocities.len() != betas.len() {
            return Err(Error::VelocityCountMismatch {
                state: self.velocities.len(),
                required: betas.len(),
            });
        }
        for (v, &beta) in self.velocities.iter_mut().zip(betas) {
            for (vj, g) in v.iter_mut().zip(grad) {
                *vj = beta * *vj - g;
            }
        }
        Ok(())
    }
}

/// Raw moment `E[b^k]` of `b ~ Beta(α, β)`: `∏_{r<k} (α+r)/(α+β+r)`.
pub fn beta_raw_moment(alpha: f64, beta: f64, k: usize) -> Result<f64> {
    check_shape(alpha, beta)?;
    Ok((0..k).fold(1.0, |m, r| {
        m * (alpha + r as f64) / (alpha + beta + r as f64)
    }))
}

fn check_shape(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "Beta shape alpha",
            value: alpha,
        });
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "Beta shape beta",
            value: beta,
        });
    }
    Ok(())
}

/// Weight sequence `m_0, m_1, …` applied to past gradients by Beta-averaged
/// momentum.
#[derive(Debug, Clone, PartialEq)]
pub enum Moments {
    /// Raw moments of `Beta(alpha, beta)`.
    Beta { alpha: f64, beta: f64 },
    /// `m_k = ratio^k`, which reproduces classical momentum with `β = ratio`.
    Geometric { ratio: f64 },
}

impl Moments {
    fn validate(&self) -> Result<()> {
        match *self {
            Self::Beta { alpha, beta } => check_shape(alpha, beta),
            Self::Geometric { ratio } if (0.0..1.0).contains(&ratio) => Ok(()),
            Self::Geometric { ratio } => Err(Error::DampingOutOfRange(ratio)),
        }
    }

    /// Extends `out` until it holds at least `n` moments.
    pub fn extend_to(&self, out: &mut Vec<f64>, n: usize) {
        while out.len() < n {
            let k = out.len();
            let next = match (k, self) {
                (0, _) => 1.0,
                (_, Self::Beta { alpha, beta }) => {
                    let r = (k - 1) as f64;
                    out[k - 1] * (alpha + r) / (alpha + beta + r)
                }
                (_, Self::Geometric { ratio }) => out[k - 1] * ratio,
            };
            out.push(next);
        }
    }
}

/// One Beta-averaged step:
/// `θ_t = θ_{t−1} − γ·Σ_{i=1..n} m_{i−1}·∇f(θ_{t−i})`, `n = min(t, truncation)`.
///
/// `history` holds past gradients oldest first, newest last.
pub fn step_beta_averaged(
    history: &[Vec<f64>],
    moments: &[f64],
    theta_prev: &[f64],
    lr: f64,
    truncation: Option<usize>,
) -> Result<Vec<f64>> {
    beta_averaged_update(
        history.iter().rev(),
        history.len(),
        moments,
        theta_prev,
        lr,
        truncation,
    )
}

fn beta_averaged_update<'a>(
    newest_first: impl Iterator<Item = &'a Vec<f64>>,
    available: usize,
    moments: &[f64],
    theta_prev: &[f64],
    lr: f64,
    truncation: Option<usize>,
) -> Result<Vec<f64>> {
    if available == 0 {
        return Err(Error::EmptyHistory);
    }
    let n = truncation.map_or(available, |cap| cap.min(available));
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "truncation",
            value: 0.0,
        });
    }
    if moments.len() < n {
        return Err(Error::MomentsTooShort {
            needed: n,
            available: moments.len(),
        });
    }
    let mut step = vec![0.0; theta_prev.len()];
    for (g, m) in newest_first.take(n).zip(moments) {
        check_dim(theta_prev.len(), g.len())?;
        for (s, gj) in step.iter_mut().zip(g) {
            *s += m * gj;
        }
    }
    Ok(theta_prev
        .iter()
        .zip(&step)
        .map(|(th, s)| th - lr * s)
        .collect())
}

/// Which update rule an [`Optimizer`] applies.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Cm {
        beta: f64,
    },
    Nesterov {
        beta: f64,
    },
    AggMo {
        damping: DampingVector,
    },
    /// Per-velocity learning rates `γ(i)_t = lr_scales[i]·γ_t`.
    AggMoGeneralized {
        damping: DampingVector,
        lr_scales: Vec<f64>,
    },
    BetaAveraged {
        moments: Moments,
        truncation: Option<usize>,
    },
}

impl Method {
    pub fn velocity_count(&self) -> usize {
        match self {
            Self::Cm { .. } | Self::Nesterov { .. } => 1,
            Self::AggMo { damping } | Self::AggMoGeneralized { damping, .. } => damping.k(),
            Self::BetaAveraged { .. } => 0,
        }
    }

    /// Damping coefficients in velocity order (empty for Beta-averaged).
    pub fn betas(&self) -> &[f64] {
        match self {
            Self::Cm { beta } | Self::Nesterov { beta } => core::slice::from_ref(beta),
            Self::AggMo { damping } | Self::AggMoGeneralized { damping, .. } => damping.betas(),
            Self::BetaAveraged { .. } => &[],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Cm { .. } => "cm",
            Self::Nesterov { .. } => "nesterov",
            Self::AggMo { .. } => "aggmo",
            Self::AggMoGeneralized { .. } => "aggmo-gen",
            Self::BetaAveraged { .. } => "beta-avg",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Cm { beta } | Self::Nesterov { beta } => {
                if !(0.0..1.0).contains(beta) {
                    return Err(Error::DampingOutOfRange(*beta));
                }
            }
            Self::AggMo { .. } => {}
            Self::AggMoGeneralized { damping, lr_scales } => {
                if lr_scales.len() != damping.k() {
                    return Err(Error::LearningRateCount {
                        expected: damping.k(),
                        found: lr_scales.len(),
                    });
                }
                if let Some(&bad) = lr_scales.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
                    return Err(Error::InvalidLearningRate(bad));
                }
            }
            Self::BetaAveraged {
                moments,
                truncation,
            } => {
                moments.validate()?;
                if *truncation == Some(0) {
                    return Err(Error::InvalidParameter {
                        name: "truncation",
                        value: 0.0,
                    });
                }
            }
        }
        Ok(())
    }
}

/// A method bound to its evolving state, optional damping decay and, for
/// Beta-averaged momentum, the gradient history.
#[derive(Debug, Clone)]
pub struct Optimizer {
    method: Method,
    decay: Option<DampingDecay>,
    state: OptimizerState,
    history: VecDeque<Vec<f64>>,
    moments: Vec<f64>,
    betas_t: Vec<f64>,
    lrs_t: Vec<f64>,
}

impl Optimizer {
    pub fn new(method: Method, theta0: Vec<f64>) -> Result<Self> {
        method.validate()?;
        if theta0.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("initial parameters"));
        }
        let state = OptimizerState::new(theta0, method.velocity_count());
        Ok(Self {
            method,
            decay: None,
            state,
            history: VecDeque::new(),
            moments: Vec::new(),
            betas_t: Vec::new(),
            lrs_t: Vec::new(),
        })
    }

    pub fn with_decay(mut self, decay: DampingDecay) -> Self {
        self.decay = Some(decay);
        self
    }

    pub fn method(&self) -> &Method {
        &self.method
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }

    pub fn theta(&self) -> &[f64] {
        &self.state.theta
    }

    /// Where the next gradient must be evaluated. `prev_lr` is `γ_{t−1}`, only
    /// used by Nesterov's lookahead.
    pub fn query_point(&self, prev_lr: f64) -> Vec<f64> {
        match &self.method {
            Method::Nesterov { beta } => {
                let beta = match self.decay {
                    Some(d) if self.state.t > 0 => beta * d.factor(self.state.t),
                    _ => *beta,
                };
                self.state
                    .lookahead(beta, prev_lr)
                    .expect("Nesterov state always has one velocity")
            }
            _ => self.state.theta.clone(),
        }
    }

    /// Applies one step with learning rate `γ_t`, `t = state.t + 1`.
    pub fn step(&mut self, grad: &[f64], lr: f64) -> Result<()> {
        if !(lr >= 0.0 && lr.is_finite()) {
            return Err(Error::InvalidLearningRate(lr));
        }
        let t = self.state.t + 1;
        let base = self.method.betas();
        match self.decay {
            Some(d) => d.apply(base, t, &mut self.betas_t),
            None => {
                self.betas_t.clear();
                self.betas_t.extend_from_slice(base);
            }
        }
        match &self.method {
            Method::Cm { .. } => self.state.step_cm(grad, self.betas_t[0], lr),
            Method::Nesterov { .. } => self.state.step_nesterov(grad, self.betas_t[0], lr),
            Method::AggMo { .. } => self.state.step_aggmo(grad, &self.betas_t, lr),
            Method::AggMoGeneralized { lr_scales, .. } => {
                self.lrs_t.clear();
                self.lrs_t.extend(lr_scales.iter().map(|s| s * lr));
                self.state
                    .step_aggmo_generalized(grad, &self.betas_t, &self.lrs_t)
            }
            Method::BetaAveraged {
                moments,
                truncation,
            } => {
                check_dim(self.state.dim(), grad.len())?;
                self.history.push_back(grad.to_vec());
                if let Some(cap) = *truncation {
                    while self.history.len() > cap {
                        self.history.pop_front();
                    }
                }
                moments.extend_to(&mut self.moments, self.history.len());
                let theta = beta_averaged_update(
                    self.history.iter().rev(),
                    self.history.len(),
                    &self.moments,
                    &self.state.theta,
                    lr,
                    *truncation,
                )?;
                self.state.theta = theta;
                self.state.t += 1;
                Ok(())
            }
        }
    }
}
