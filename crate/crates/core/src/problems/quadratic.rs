use alloc::vec;
use alloc::vec::Vec;

use crate::objective::check_dim;
use crate::{Error, Objective, Result};

/// `f(x) = ½·Σ λ_j (x_j − θ*_j)²`: a quadratic already rotated into its
/// eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalQuadratic {
    eigs: Vec<f64>,
    offset: Vec<f64>,
}

impl DiagonalQuadratic {
    pub fn new(eigs: impl Into<Vec<f64>>) -> Result<Self> {
        let eigs = eigs.into();
        if eigs.is_empty() {
            return Err(Error::Empty("eigenvalue list"));
        }
        if let Some(&bad) = eigs.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParameter {
                name: "curvature",
                value: bad,
            });
        }
        let offset = vec![0.0; eigs.len()];
        Ok(Self { eigs, offset })
    }

    /// Moves the optimum to `offset`.
    pub fn with_offset(mut self, offset: impl Into<Vec<f64>>) -> Result<Self> {
        let offset = offset.into();
        check_dim(self.eigs.len(), offset.len())?;
        if offset.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("quadratic offset"));
        }
        self.offset = offset;
        Ok(self)
    }

    /// Two-eigenvalue quadratic `{1, 1/κ}` realizing condition number `κ`.
    pub fn with_condition_number(kappa: f64) -> Result<Self> {
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(Error::ConditionNumber(kappa));
        }
        Self::new([1.0, 1.0 / kappa])
    }

    pub fn eigs(&self) -> &[f64] {
        &self.eigs
    }

    pub fn optimum(&self) -> &[f64] {
        &self.offset
    }

    pub fn condition_number(&self) -> f64 {
        let (lo, hi) = self
            .eigs
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &l| {
                (lo.min(l), hi.max(l))
            });
        hi / lo
    }
}

impl Objective for DiagonalQuadratic {
    fn dim(&self) -> usize {
        self.eigs.len()
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(self.eigs.len(), x.len())?;
        let mut value = 0.0;
        let grad = self
            .eigs
            .iter()
            .zip(x)
            .zip(&self.offset)
            .map(|((l, xi), c)| {
                let d = xi - c;
                value += 0.5 * l * d * d;
                l * d
            })
            .collect();
        Ok((value, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn hand_values() {
        let q = DiagonalQuadratic::new([1.0, 0.001]).unwrap();
        let (v, g) = q.value_grad(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(v, 0.5005, max_relative = 1e-15);
        assert_eq!(g, vec![1.0, 0.001]);

        let q = q.with_offset([3.0, -2.0]).unwrap();
        assert_eq!(q.value_grad(&[3.0, -2.0]).unwrap(), (0.0, vec![0.0, 0.0]));
        assert_relative_eq!(q.condition_number(), 1000.0, max_relative = 1e-12);
    }

    #[test]
    fn errors() {
        assert!(DiagonalQuadratic::new([1.0, 0.0]).is_err());
        assert!(DiagonalQuadratic::new(Vec::new()).is_err());
        let q = DiagonalQuadratic::new([1.0]).unwrap();
        assert_eq!(
            q.value_grad(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );
        assert!(DiagonalQuadratic::with_condition_number(0.5).is_err());
    }

    proptest! {
        #[test]
        fn central_differences(
            x in proptest::collection::vec(-10.0f64..10.0, 3),
            eigs in proptest::collection::vec(0.001f64..5.0, 3),
            c in proptest::collection::vec(-3.0f64..3.0, 3),
        ) {
            let q = DiagonalQuadratic::new(eigs).unwrap().with_offset(c).unwrap();
            let (_, g) = q.value_grad(&x).unwrap();
            for j in 0..3 {
                let h = 1e-5 * (1.0 + x[j].abs());
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (q.value(&xp).unwrap() - q.value(&xm).unwrap()) / (2.0 * h);
                prop_assert!((fd - g[j]).abs() <= 1e-6 * (1.0 + g[j].abs()));
            }
        }

        #[test]
        fn non_negative_and_zero_only_at_optimum(
            x in proptest::collection::vec(-10.0f64..10.0, 2),
        ) {
            let q = DiagonalQuadratic::new([2.0, 0.5]).unwrap().with_offset([1.0, 1.0]).unwrap();
            let v = q.value(&x).unwrap();
            prop_assert!(v >= 0.0);
            if x != [1.0, 1.0] {
                prop_assert!(v > 0.0);
            }
        }
    }
}
