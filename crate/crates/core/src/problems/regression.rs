//! One-dimensional "Gaussian funnel" regression with a small ReLU network.
//!
//! Inputs are drawn from a standard normal; targets follow
//! `0.5·sin(3x)` on `[−1, 1]` and the linear continuation `0.5·sin(3)·x`
//! outside, plus Gaussian noise of stddev 0.02. The network is trained by
//! minimizing the negative log-likelihood with the noise stddev fixed to the
//! true value, which makes the loss surface around the optimum very sharp.
//!
//! Random numbers come from ChaCha8 seeded with `seed_from_u64`; normal
//! variates use `rand_distr::StandardNormal` (ziggurat method). For each point
//! the input is drawn first, then its noise.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use num_traits::Float;

use crate::objective::check_dim;
use crate::{Error, Objective, Result};

pub const FUNNEL_POINTS: usize = 1000;
pub const FUNNEL_SIGMA: f64 = 0.02;
pub const HIDDEN: usize = 10;

// Flattened layout: W1 (H×1), b1 (H), W2 (H×H, row-major, row = output unit),
// b2 (H), W3 (1×H), b3 (1).
const W1: usize = 0;
const B1: usize = W1 + HIDDEN;
const W2: usize = B1 + HIDDEN;
const B2: usize = W2 + HIDDEN * HIDDEN;
const W3: usize = B2 + HIDDEN;
const B3: usize = W3 + HIDDEN;
pub const MLP_PARAMS: usize = B3 + 1;

/// Noise-free regression target.
pub fn funnel_target(x: f64) -> f64 {
    if (-1.0..=1.0).contains(&x) {
        0.5 * Float::sin(3.0 * x)
    } else {
        0.5 * Float::sin(3.0_f64) * x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunnelDataset {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Observation noise stddev assumed by the likelihood.
    pub sigma: f64,
    pub seed: u64,
}

impl FunnelDataset {
    pub fn from_points(xs: Vec<f64>, ys: Vec<f64>, sigma: f64, seed: u64) -> Result<Self> {
        check_dim(xs.len(), ys.len())?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: sigma,
            });
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset"));
        }
        Ok(Self {
            xs,
            ys,
            sigma,
            seed,
        })
    }

    /// `n` points with additive noise of stddev `noise`; the likelihood uses
    /// `sigma`.
    pub fn generate(seed: u64, n: usize, noise: f64, sigma: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let x: f64 = StandardNormal.sample(&mut rng);
            let eps: f64 = StandardNormal.sample(&mut rng);
            xs.push(x);
            ys.push(funnel_target(x) + noise * eps);
        }
        Self::from_points(xs, ys, sigma, seed)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// The first `n` points.
    pub fn head(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            xs: self.xs[..n].to_vec(),
            ys: self.ys[..n].to_vec(),
            sigma: self.sigma,
            seed: self.seed,
        }
    }
}

/// The standard dataset: 1000 points, noise and likelihood stddev 0.02.
pub fn make_funnel_dataset(seed: u64) -> FunnelDataset {
    FunnelDataset::generate(seed, FUNNEL_POINTS, FUNNEL_SIGMA, FUNNEL_SIGMA)
        .expect("standard dataset parameters are valid")
}

/// He-normal weights (stddev `√(2/fan_in)`), zero biases.
pub fn mlp_init(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = vec![0.0; MLP_PARAMS];
    let mut fill = |range: core::ops::Range<usize>, fan_in: usize| {
        let std = Float::sqrt(2.0 / fan_in as f64);
        for w in &mut p[range] {
            let z: f64 = StandardNormal.sample(&mut rng);
            *w = std * z;
        }
    };
    fill(W1..B1, 1);
    fill(W2..B2, HIDDEN);
    fill(W3..B3, HIDDEN);
    p
}

struct Activations {
    h1: [f64; HIDDEN],
    h2: [f64; HIDDEN],
    out: f64,
}

fn forward(p: &[f64], x: f64) -> Activations {
    let mut h1 = [0.0; HIDDEN];
    for (i, h) in h1.iter_mut().enumerate() {
        *h = relu(p[W1 + i] * x + p[B1 + i]);
    }
    let mut h2 = [0.0; HIDDEN];
    for (i, h) in h2.iter_mut().enumerate() {
        let row = &p[W2 + i * HIDDEN..W2 + (i + 1) * HIDDEN];
        let z = row
            .iter()
            .zip(&h1)
            .fold(p[B2 + i], |acc, (w, a)| acc + w * a);
        *h = relu(z);
    }
    let out = p[W3..B3]
        .iter()
        .zip(&h2)
        .fold(p[B3], |acc, (w, a)| acc + w * a);
    Activations { h1, h2, out }
}

fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

pub fn mlp_predict(params: &[f64], x: f64) -> Result<f64> {
    check_dim(MLP_PARAMS, params.len())?;
    Ok(forward(params, x).out)
}

/// Negative log-likelihood `Σ (y − net(x))²/(2σ²) + n·log(σ√(2π))` and its
/// gradient by backpropagation. The ReLU derivative at exactly zero is 0.
pub fn mlp_nll_grad(params: &[f64], data: &FunnelDataset) -> Result<(f64, Vec<f64>)> {
    check_dim(MLP_PARAMS, params.len())?;
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("network parameters"));
    }
    let inv_var = 1.0 / (data.sigma * data.sigma);
    let mut loss = data.len() as f64 * Float::ln(data.sigma * Float::sqrt(2.0 * PI));
    let mut grad = vec![0.0; MLP_PARAMS];
    for (&x, &y) in data.xs.iter().zip(&data.ys) {
        let act = forward(params, x);
        let r = act.out - y;
        loss += 0.5 * r * r * inv_var;

        let d_out = r * inv_var;
        grad[B3] += d_out;
        let mut d_z2 = [0.0; HIDDEN];
        for i in 0..HIDDEN {
            grad[W3 + i] += d_out * act.h2[i];
            if act.h2[i] > 0.0 {
                d_z2[i] = d_out * params[W3 + i];
            }
        }
        let mut d_h1 = [0.0; HIDDEN];
        for (i, &dz) in d_z2.iter().enumerate() {
            if dz == 0.0 {
                continue;
            }
            grad[B2 + i] += dz;
            let row = W2 + i * HIDDEN;
            for j in 0..HIDDEN {
                grad[row + j] += dz * act.h1[j];
                d_h1[j] += dz * params[row + j];
            }
        }
        for j in 0..HIDDEN {
            if act.h1[j] > 0.0 {
                grad[W1 + j] += d_h1[j] * x;
                grad[B1 + j] += d_h1[j];
            }
        }
    }
    Ok((loss, grad))
}

/// How [`MlpRegression`] aggregates the per-point negative log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    Sum,
    /// Sum divided by the number of points. Keeps the step size independent
    /// of the dataset size.
    #[default]
    Mean,
}

/// The regression loss as an [`Objective`] over the 141 flattened parameters.
#[derive(Debug, Clone)]
pub struct MlpRegression {
    pub data: FunnelDataset,
    pub reduction: Reduction,
}

impl MlpRegression {
    /// Mean reduction.
    pub fn new(data: FunnelDataset) -> Self {
        Self {
            data,
            reduction: Reduction::Mean,
        }
    }

    pub fn with_reduction(mut self, reduction: Reduction) -> Self {
        self.reduction = reduction;
        self
    }
}

impl Objective for MlpRegression {
    fn dim(&self) -> usize {
        MLP_PARAMS
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (loss, mut grad) = mlp_nll_grad(x, &self.data)?;
        match self.reduction {
            Reduction::Sum => Ok((loss, grad)),
            Reduction::Mean => {
                let n = self.data.len() as f64;
                for g in &mut grad {
                    *g /= n;
                }
                Ok((loss / n, grad))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn layout() {
        assert_eq!(MLP_PARAMS, 141);
        assert_eq!(mlp_init(3).len(), 141);
        assert!(mlp_init(3)[B1..W2].iter().all(|b| *b == 0.0));
    }

    #[test]
    fn target_is_continuous_at_the_kinks() {
        assert_eq!(funnel_target(0.0), 0.0);
        assert_relative_eq!(funnel_target(1.0), 0.5 * 3.0_f64.sin());
        assert_relative_eq!(funnel_target(2.0), 3.0_f64.sin(), max_relative = 1e-15);
        assert_relative_eq!(
            funnel_target(-1.0),
            funnel_target(-1.0 - 1e-12),
            epsilon = 1e-11
        );
        assert_relative_eq!(
            funnel_target(1.0 + 1e-12),
            funnel_target(1.0),
            epsilon = 1e-11
        );
    }

    #[test]
    fn dataset_is_a_function_of_the_seed() {
        let a = make_funnel_dataset(7);
        assert_eq!(a, make_funnel_dataset(7));
        assert_ne!(a.xs, make_funnel_dataset(8).xs);
        assert_eq!(a.len(), FUNNEL_POINTS);
    }

    #[test]
    fn dataset_noise_level() {
        let d = make_funnel_dataset(11);
        let res: Vec<f64> =
            d.xs.iter()
                .zip(&d.ys)
                .map(|(x, y)| y - funnel_target(*x))
                .collect();
        let mean = res.iter().sum::<f64>() / res.len() as f64;
        let var = res.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (res.len() - 1) as f64;
        let std = var.sqrt();
        assert!((std - 0.02).abs() <= 0.2 * 0.02, "{std}");
    }

    #[test]
    fn zero_residual_leaves_only_the_constant() {
        let params = mlp_init(5);
        let xs: Vec<f64> = (0..50).map(|i| -2.0 + 0.08 * i as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| mlp_predict(&params, x).unwrap())
            .collect();
        let data = FunnelDataset::from_points(xs, ys, 0.02, 0).unwrap();
        let (loss, _) = mlp_nll_grad(&params, &data).unwrap();
        let expected = 50.0 * (0.02 * (2.0 * PI).sqrt()).ln();
        assert_relative_eq!(loss, expected, max_relative = 1e-12);
    }

    #[test]
    fn zero_weights_predict_the_output_bias() {
        let mut params = vec![0.0; MLP_PARAMS];
        params[B3] = 0.3;
        let data = make_funnel_dataset(2).head(100);
        for &x in &data.xs {
            assert_eq!(mlp_predict(&params, x).unwrap(), 0.3);
        }
        let (loss, grad) = mlp_nll_grad(&params, &data).unwrap();
        let s2 = data.sigma * data.sigma;
        let closed: f64 = data
            .ys
            .iter()
            .map(|y| (y - 0.3) * (y - 0.3) / (2.0 * s2))
            .sum::<f64>()
            + 100.0 * (data.sigma * (2.0 * PI).sqrt()).ln();
        assert_relative_eq!(loss, closed, max_relative = 1e-12);
        let d_bias: f64 = data.ys.iter().map(|y| (0.3 - y) / s2).sum();
        assert_relative_eq!(grad[B3], d_bias, max_relative = 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let data = make_funnel_dataset(1).head(10);
        for seed in 0..3 {
            let params = mlp_init(seed);
            let (_, g) = mlp_nll_grad(&params, &data).unwrap();
            for k in 0..MLP_PARAMS {
                let h = 1e-5 * (1.0 + params[k].abs());
                let mut p = params.clone();
                p[k] += h;
                let fp = mlp_nll_grad(&p, &data).unwrap().0;
                p[k] -= 2.0 * h;
                let fm = mlp_nll_grad(&p, &data).unwrap().0;
                let fd = (fp - fm) / (2.0 * h);
                let scale = g[k].abs().max(1.0);
                assert!(
                    (fd - g[k]).abs() <= 1e-4 * scale,
                    "param {k}: fd {fd} vs {}",
                    g[k]
                );
            }
        }
    }

    #[test]
    fn mean_reduction_scales_the_sum() {
        let data = make_funnel_dataset(4).head(40);
        let p = mlp_init(4);
        let (ls, gs) = MlpRegression::new(data.clone())
            .with_reduction(Reduction::Sum)
            .value_grad(&p)
            .unwrap();
        let (lm, gm) = MlpRegression::new(data).value_grad(&p).unwrap();
        assert_relative_eq!(lm * 40.0, ls, max_relative = 1e-14);
        for (a, b) in gm.iter().zip(&gs) {
            assert_relative_eq!(a * 40.0, *b, max_relative = 1e-14);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let data = make_funnel_dataset(1).head(5);
        let mut p = mlp_init(0);
        p[3] = f64::NAN;
        assert_eq!(
            mlp_nll_grad(&p, &data),
            Err(Error::NonFinite("network parameters"))
        );
        assert!(mlp_nll_grad(&p[..10], &data).is_err());
    }
}
