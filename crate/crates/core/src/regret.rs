//! Online convex programming with decaying-damping AggMo.
//!
//! At round `t = 1, 2, …` the learner plays `θ_t`, observes the convex cost
//! `f_t` and its gradient `g_t = ∇f_t(θ_t)`, then updates with
//! `β(i)_t = β(i)·λᵗ` and `γ_t = γ/√t`:
//! `v(i)_t = β(i)_t·v(i)_{t−1} − g_t`, `θ_{t+1} = θ_t + (γ_t/K)·Σ_i v(i)_t`.
//! Regret is measured against a fixed comparator `θ*` minimizing the summed
//! costs, which the problem families below compute in closed form.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, Uniform};

use num_traits::Float;

use crate::objective::check_dim;
use crate::{norm2, norm_inf, DampingDecay, Error, OptimizerState, Result};

/// Declared domain and gradient bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    /// `‖θ_n − θ_m‖₂ ≤ D`.
    pub d: f64,
    /// `‖θ_n − θ_m‖∞ ≤ D∞`.
    pub d_inf: f64,
    /// `‖g_t‖₂ ≤ G`.
    pub g: f64,
    /// `‖g_t‖∞ ≤ G∞`.
    pub g_inf: f64,
}

/// A sequence of convex costs over a fixed horizon.
pub trait OnlineProblem {
    fn dim(&self) -> usize;
    fn horizon(&self) -> usize;
    /// `f_t(θ)` and `∇f_t(θ)` for `t = 1..=horizon`.
    fn cost(&self, t: usize, theta: &[f64]) -> (f64, Vec<f64>);
    /// Minimizer of `Σ_t f_t` over the feasible box.
    fn theta_star(&self) -> &[f64];
    fn bounds(&self) -> Bounds;
    /// Half-width `r` of the box `[−r, r]^d` the iterates must stay in for
    /// [`bounds`](Self::bounds) to hold.
    fn radius(&self) -> f64;
}

/// `f_t(θ) = (c/2)·‖θ − m_t‖²` with minima `m_t` drawn uniformly from
/// `[−h, h]^d`. Inside the box `[−r, r]^d` (`r ≥ h`) the gradients obey
/// `G∞ = c(r + h)` and `G = c(r + h)√d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftingQuadratic {
    pub curvature: f64,
    pub half_width: f64,
    pub radius: f64,
    minima: Vec<Vec<f64>>,
    theta_star: Vec<f64>,
}

impl DriftingQuadratic {
    pub fn generate(
        seed: u64,
        dim: usize,
        curvature: f64,
        half_width: f64,
        radius: f64,
        horizon: usize,
    ) -> Result<Self> {
        positive("curvature", curvature)?;
        positive("radius", radius)?;
        if !(0.0..=radius).contains(&half_width) {
            return Err(Error::InvalidParameter {
                name: "half width",
                value: half_width,
            });
        }
        if dim == 0 || horizon == 0 {
            return Err(Error::Empty(if dim == 0 { "dimension" } else { "horizon" }));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let minima: Vec<Vec<f64>> = if half_width == 0.0 {
            vec![vec![0.0; dim]; horizon]
        } else {
            let u = Uniform::new_inclusive(-half_width, half_width).expect("finite range");
            (0..horizon)
                .map(|_| (0..dim).map(|_| u.sample(&mut rng)).collect())
                .collect()
        };
        Ok(Self::from_minima(curvature, half_width, radius, minima))
    }

    /// Every round shares the minimum `m`.
    pub fn stationary(
        curvature: f64,
        radius: f64,
        minimum: Vec<f64>,
        horizon: usize,
    ) -> Result<Self> {
        positive("curvature", curvature)?;
        let h = norm_inf(&minimum);
        if h > radius {
            return Err(Error::InvalidParameter {
                name: "half width",
                value: h,
            });
        }
        Ok(Self::from_minima(
            curvature,
            h,
            radius,
            vec![minimum; horizon.max(1)],
        ))
    }

    fn from_minima(curvature: f64, half_width: f64, radius: f64, minima: Vec<Vec<f64>>) -> Self {
        let d = minima[0].len();
        let n = minima.len() as f64;
        let theta_star = (0..d)
            .map(|j| minima.iter().map(|m| m[j]).sum::<f64>() / n)
            .collect();
        Self {
            curvature,
            half_width,
            radius,
            minima,
            theta_star,
        }
    }
}

impl OnlineProblem for DriftingQuadratic {
    fn dim(&self) -> usize {
        self.theta_star.len()
    }

    fn horizon(&self) -> usize {
        self.minima.len()
    }

    fn cost(&self, t: usize, theta: &[f64]) -> (f64, Vec<f64>) {
        let m = &self.minima[t - 1];
        let g: Vec<f64> = theta
            .iter()
            .zip(m)
            .map(|(x, c)| self.curvature * (x - c))
            .collect();
        let value = 0.5
            * theta
                .iter()
                .zip(m)
                .map(|(x, c)| (x - c) * (x - c))
                .sum::<f64>()
            * self.curvature;
        (value, g)
    }

    fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    fn bounds(&self) -> Bounds {
        let sd = Float::sqrt(self.dim() as f64);
        let g_inf = self.curvature * (self.radius + self.half_width);
        Bounds {
            d: 2.0 * self.radius * sd,
            d_inf: 2.0 * self.radius,
            g: g_inf * sd,
            g_inf,
        }
    }

    fn radius(&self) -> f64 {
        self.radius
    }
}

/// `f_t(θ) = s_t·G·Σ_j θ_j` with `s_t = +1` on odd rounds and `−1` on even
/// ones. The comparator sits on the box corner that minimizes the summed
/// cost (the origin when the rounds cancel).
#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingLinear {
    pub slope: f64,
    pub radius: f64,
    horizon: usize,
    theta_star: Vec<f64>,
}

impl AlternatingLinear {
    pub fn new(dim: usize, slope: f64, radius: f64, horizon: usize) -> Result<Self> {
        positive("slope", slope)?;
        positive("radius", radius)?;
        if dim == 0 || horizon == 0 {
            return Err(Error::Empty(if dim == 0 { "dimension" } else { "horizon" }));
        }
        let star = if horizon % 2 == 1 { -radius } else { 0.0 };
        Ok(Self {
            slope,
            radius,
            horizon,
            theta_star: vec![star; dim],
        })
    }
}

impl OnlineProblem for AlternatingLinear {
    fn dim(&self) -> usize {
        self.theta_star.len()
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn cost(&self, t: usize, theta: &[f64]) -> (f64, Vec<f64>) {
        let s = if t % 2 == 1 { self.slope } else { -self.slope };
        (s * theta.iter().sum::<f64>(), vec![s; theta.len()])
    }

    fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    fn bounds(&self) -> Bounds {
        let sd = Float::sqrt(self.dim() as f64);
        Bounds {
            d: 2.0 * self.radius * sd,
            d_inf: 2.0 * self.radius,
            g: self.slope * sd,
            g_inf: self.slope,
        }
    }

    fn radius(&self) -> f64 {
        self.radius
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretStep {
    pub t: usize,
    /// `f_t(θ_t) − f_t(θ*)`.
    pub inst_regret: f64,
    pub cum_regret: f64,
    pub avg_regret: f64,
}

/// Rounds where a declared bound failed to hold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Violations {
    pub gradient_inf: usize,
    pub gradient_l2: usize,
    pub domain: usize,
}

impl Violations {
    pub fn total(&self) -> usize {
        self.gradient_inf + self.gradient_l2 + self.domain
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretRecord {
    pub steps: Vec<RegretStep>,
    /// `‖g_{1:T,j}‖₄² = (Σ_t g_{t,j}⁴)^{1/2}` per coordinate.
    pub grad_norms4_sq: Vec<f64>,
    pub violations: Violations,
    /// Largest coordinate spread over all iterates and `θ*`.
    pub observed_d_inf: f64,
    /// Diagonal of the bounding box of all iterates and `θ*`; bounds every
    /// pairwise Euclidean distance.
    pub observed_d: f64,
}

impl RegretRecord {
    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn final_regret(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.cum_regret)
    }

    pub fn average_regret(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.avg_regret)
    }

    /// True when every declared bound held during the run.
    pub fn conforms(&self) -> bool {
        self.violations.total() == 0
    }
}

/// Plays every round of `p` starting from `theta1`.
///
/// Bound violations are counted and the run continues.
pub fn online_run(
    p: &dyn OnlineProblem,
    theta1: &[f64],
    betas: &[f64],
    gamma: f64,
    lambda: f64,
) -> Result<RegretRecord> {
    check_dim(p.dim(), theta1.len())?;
    check_schedule(betas, gamma, lambda)?;
    let decay = DampingDecay::new(lambda)?;
    let bounds = p.bounds();
    let tol = 1e-12;
    let d = p.dim();
    let star = p.theta_star();
    let mut lo = star.to_vec();
    let mut hi = star.to_vec();
    let mut sum4 = vec![0.0; d];
    let mut violations = Violations::default();
    let mut steps = Vec::with_capacity(p.horizon());
    let mut state = OptimizerState::new(theta1.to_vec(), betas.len());
    let mut betas_t = Vec::with_capacity(betas.len());
    let mut cum = 0.0;
    for t in 1..=p.horizon() {
        let theta = &state.theta;
        if norm_inf(theta) > p.radius() * (1.0 + tol) {
            violations.domain += 1;
        }
        for (j, x) in theta.iter().enumerate() {
            lo[j] = lo[j].min(*x);
            hi[j] = hi[j].max(*x);
        }
        let (f, g) = p.cost(t, theta);
        let (f_star, _) = p.cost(t, star);
        if norm_inf(&g) > bounds.g_inf * (1.0 + tol) {
            violations.gradient_inf += 1;
        }
        if norm2(&g) > bounds.g * (1.0 + tol) {
            violations.gradient_l2 += 1;
        }
        for (s, gj) in sum4.iter_mut().zip(&g) {
            *s += gj * gj * gj * gj;
        }
        let inst = f - f_star;
        cum += inst;
        steps.push(RegretStep {
            t,
            inst_regret: inst,
            cum_regret: cum,
            avg_regret: cum / t as f64,
        });
        decay.apply(betas, t as u64, &mut betas_t);
        state.step_aggmo(&g, &betas_t, gamma / Float::sqrt(t as f64))?;
    }
    let spreads: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| b - a).collect();
    let observed_d_inf = spreads.iter().copied().fold(0.0, f64::max);
    let observed_d = norm2(&spreads);
    if observed_d_inf > bounds.d_inf * (1.0 + tol) || observed_d > bounds.d * (1.0 + tol) {
        violations.domain += 1;
    }
    Ok(RegretRecord {
        steps,
        grad_norms4_sq: sum4.iter().map(|s| Float::sqrt(*s)).collect(),
        violations,
        observed_d_inf,
        observed_d,
    })
}

fn check_schedule(betas: &[f64], gamma: f64, lambda: f64) -> Result<()> {
    if betas.is_empty() {
        return Err(Error::EmptyDamping);
    }
    if let Some(&b) = betas.iter().find(|b| !(0.0..1.0).contains(*b)) {
        return Err(Error::DampingOutOfRange(b));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidLearningRate(gamma));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::DecayOutOfRange(lambda));
    }
    Ok(())
}

/// Right-hand side of the regret bound, term by term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretBound {
    /// `D∞²√T/γ`.
    pub domain: f64,
    /// `(γ√(1 + log T)/2K)·Σ_j‖g_{1:T,j}‖₄²·Σ_i (1 + β(i))/(1 − β(i))²`.
    pub gradient: f64,
    /// `D²/(2Kγ(1 − λ)²)·Σ_i β(i)`.
    pub damping: f64,
    pub total: f64,
}

/// Evaluates the bound for the first `horizon` rounds of `record`, using the
/// measured gradient 4-norms and the declared `D`, `D∞`.
pub fn regret_bound(
    record: &RegretRecord,
    bounds: &Bounds,
    betas: &[f64],
    gamma: f64,
    lambda: f64,
) -> Result<RegretBound> {
    check_schedule(betas, gamma, lambda)?;
    let t = record.horizon();
    if t == 0 {
        return Err(Error::EmptyHistory);
    }
    let k = betas.len() as f64;
    let tf = t as f64;
    let domain = bounds.d_inf * bounds.d_inf * Float::sqrt(tf) / gamma;
    let g4: f64 = record.grad_norms4_sq.iter().sum();
    let shape: f64 = betas
        .iter()
        .map(|b| (1.0 + b) / ((1.0 - b) * (1.0 - b)))
        .sum();
    let gradient = gamma * Float::sqrt(1.0 + Float::ln(tf)) / (2.0 * k) * g4 * shape;
    let damping = bounds.d * bounds.d / (2.0 * k * gamma * (1.0 - lambda) * (1.0 - lambda))
        * betas.iter().sum::<f64>();
    Ok(RegretBound {
        domain,
        gradient,
        damping,
        total: domain + gradient + damping,
    })
}
