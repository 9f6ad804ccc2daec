use alloc::vec;
use alloc::vec::Vec;

use crate::objective::check_dim;
use crate::{Objective, Result};

/// `f(x, y) = (y − x²)² + 100(x − 1)²`, minimized at `(1, 1)`.
///
/// Note the weights: the stiff term penalizes `x − 1`, not `y − x²` as in the
/// textbook Rosenbrock function.
pub fn rosenbrock_value_grad(x: f64, y: f64) -> (f64, [f64; 2]) {
    let r = y - x * x;
    let s = x - 1.0;
    let value = r * r + 100.0 * s * s;
    (value, [-4.0 * x * r + 200.0 * s, 2.0 * r])
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Rosenbrock;

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        2
    }

    fn value_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(2, p.len())?;
        let (v, g) = rosenbrock_value_grad(p[0], p[1]);
        Ok((v, vec![g[0], g[1]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_points() {
        assert_eq!(rosenbrock_value_grad(1.0, 1.0), (0.0, [0.0, 0.0]));
        assert_eq!(rosenbrock_value_grad(0.0, 0.0), (100.0, [-200.0, 0.0]));
    }

    proptest! {
        #[test]
        fn central_differences(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let (_, g) = rosenbrock_value_grad(x, y);
            let hx = 1e-5 * (1.0 + x.abs());
            let hy = 1e-5 * (1.0 + y.abs());
            let fx = (rosenbrock_value_grad(x + hx, y).0 - rosenbrock_value_grad(x - hx, y).0) / (2.0 * hx);
            let fy = (rosenbrock_value_grad(x, y + hy).0 - rosenbrock_value_grad(x, y - hy).0) / (2.0 * hy);
            prop_assert!((fx - g[0]).abs() <= 1e-6 * (1.0 + g[0].abs()));
            prop_assert!((fy - g[1]).abs() <= 1e-6 * (1.0 + g[1].abs()));
        }
    }
}
