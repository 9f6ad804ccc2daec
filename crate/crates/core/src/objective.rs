//! The gradient-oracle contract shared by every problem.

use alloc::vec::Vec;

use crate::{Error, Result};

/// A differentiable objective: value and gradient at a query point.
pub trait Objective {
    fn dim(&self) -> usize;

    /// Returns `(f(x), ∇f(x))`. The gradient has the same length as `x`.
    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.value_grad(x).map(|(v, _)| v)
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        (**self).value_grad(x)
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        (**self).value(x)
    }
}

/// Adapts a closure returning `(value, gradient)` into an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(self.dim, x.len())?;
        let (v, g) = (self.f)(x);
        check_dim(self.dim, g.len())?;
        Ok((v, g))
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
