//! Damping vectors and damping decay.

use alloc::vec::Vec;
use core::ops::Deref;

use num_traits::Float;

use crate::{Error, Result};

/// Ordered damping coefficients `[β(1), …, β(K)]`, one per velocity.
///
/// Every coefficient lies in `[0, 1)`. [`DampingVector::new`] additionally
/// requires the entries to be strictly increasing, which is what the
/// exponential construction produces. [`DampingVector::with_repeats`] relaxes
/// that to non-decreasing so degenerate configurations such as `[0, 0]` can be
/// expressed.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingVector {
    betas: Vec<f64>,
}

impl DampingVector {
    pub fn new(betas: impl Into<Vec<f64>>) -> Result<Self> {
        let betas = betas.into();
        check_range(&betas)?;
        if betas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DampingNotIncreasing);
        }
        Ok(Self { betas })
    }

    pub fn with_repeats(betas: impl Into<Vec<f64>>) -> Result<Self> {
        let betas = betas.into();
        check_range(&betas)?;
        if betas.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::DampingDecreasing);
        }
        Ok(Self { betas })
    }

    /// Single coefficient, i.e. classical momentum.
    pub fn single(beta: f64) -> Result<Self> {
        Self::new([beta])
    }

    pub fn k(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn max_beta(&self) -> f64 {
        self.betas[self.betas.len() - 1]
    }
}

impl Deref for DampingVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.betas
    }
}

fn check_range(betas: &[f64]) -> Result<()> {
    if betas.is_empty() {
        return Err(Error::EmptyDamping);
    }
    match betas.iter().find(|b| !(0.0..1.0).contains(*b)) {
        Some(&b) => Err(Error::DampingOutOfRange(b)),
        None => Ok(()),
    }
}

/// Exponentially spaced damping vector `β(i) = 1 − a^(i−1)` for `i = 1..=K`.
///
/// Spacing the coefficients this way spaces the terminal velocities
/// `1/(1−β)` by factors of `1/a`. `a = 0.1, K = 3` gives `[0, 0.9, 0.99]`.
pub fn build_damping_vector(a: f64, k: usize) -> Result<DampingVector> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::ScaleOutOfRange(a));
    }
    if k == 0 {
        return Err(Error::ZeroVelocities);
    }
    let betas: Vec<f64> = (0..k).map(|i| 1.0 - Float::powi(a, i as i32)).collect();
    // Tiny scale factors can round distinct powers to the same coefficient.
    DampingVector::new(betas)
}

/// Geometric decay of every damping coefficient: `β(i)_t = β(i)·λ^t`.
///
/// `t` is the optimizer step counter starting at 1, so the first step already
/// uses `β·λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingDecay {
    lambda: f64,
}

impl DampingDecay {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::DecayOutOfRange(lambda));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn factor(&self, t: u64) -> f64 {
        if self.lambda == 1.0 {
            1.0
        } else {
            Float::powf(self.lambda, t as f64)
        }
    }

    /// Writes the decayed coefficients for step `t` into `out`.
    pub fn apply(&self, betas: &[f64], t: u64, out: &mut Vec<f64>) {
        let f = self.factor(t);
        out.clear();
        out.extend(betas.iter().map(|b| b * f));
    }
}
