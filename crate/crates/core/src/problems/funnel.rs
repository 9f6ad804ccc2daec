use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::objective::check_dim;
use crate::{Objective, Result};

/// Non-convex toy problem with a flat region for `x ≪ 0` and a sequence of
/// funnels along `y = sin(ax)` that narrow as `x` grows:
///
/// `f(x, y) = lc(x) + b·lc(eˣ·(y − sin(ax)))`, `lc(u) = log(eᵘ + e⁻ᵘ)`.
///
/// The minimum is at the origin with value `(1 + b)·log 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyFunnel {
    pub a: f64,
    pub b: f64,
}

impl Default for ToyFunnel {
    fn default() -> Self {
        Self { a: 8.0, b: 10.0 }
    }
}

/// `log(eᵘ + e⁻ᵘ)` evaluated as `|u| + log1p(e^{−2|u|})`.
pub fn log_cosh2(u: f64) -> f64 {
    let a = u.abs();
    a + Float::ln_1p(Float::exp(-2.0 * a))
}

pub fn funnel_value_grad(p: &ToyFunnel, x: f64, y: f64) -> (f64, [f64; 2]) {
    let ex = Float::exp(x);
    let (s, c) = Float::sin_cos(p.a * x);
    let u = ex * (y - s);
    let value = log_cosh2(x) + p.b * log_cosh2(u);
    let tu = Float::tanh(u);
    let dx = Float::tanh(x) + p.b * tu * (u - p.a * ex * c);
    let dy = p.b * tu * ex;
    (value, [dx, dy])
}

impl Objective for ToyFunnel {
    fn dim(&self) -> usize {
        2
    }

    fn value_grad(&self, q: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(2, q.len())?;
        let (v, g) = funnel_value_grad(self, q[0], q[1]);
        Ok((v, vec![g[0], g[1]]))
    }
}
