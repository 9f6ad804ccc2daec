use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::system::poly_mul;
use crate::objective::check_dim;
use crate::{norm_inf, Error, Objective, OptimizerState, Result};

/// AggMo with constant damping and learning rate, written as a linear
/// recurrence in `δ_t = θ_t − θ*` driven by the gradients:
///
/// `δ_{t+1} = Σ_{m=0}^{K} a_m·δ_{t−m} + Σ_{m=0}^{K−1} b_m·g_{t−m}`.
///
/// With `S` the backward shift, eliminating the velocities from
/// `(1 − β(i)S)·v(i)_{t+1} = −g_t` gives
/// `(1 − S)·∏_i(1 − β(i)S)·δ_{t+1} = −(γ/K)·Σ_i ∏_{j≠i}(1 − β(j)S)·g_t`.
/// For `K = 2`:
///
/// `δ_{t+1} = (1+β₁+β₂)δ_t − (β₁+β₂+β₁β₂)δ_{t−1} + β₁β₂δ_{t−2} − (γ/2)(2g_t − (β₁+β₂)g_{t−1})`.
///
/// Starting from zero velocities the recurrence holds for every `t ≥ K`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceEquation {
    /// `a_0, …, a_K`.
    pub delta_coeffs: Vec<f64>,
    /// `b_0, …, b_{K−1}`.
    pub grad_coeffs: Vec<f64>,
}

impl DifferenceEquation {
    pub fn derive(betas: &[f64], gamma: f64) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::EmptyDamping);
        }
        if let Some(&b) = betas.iter().find(|b| !(0.0..1.0).contains(*b)) {
            return Err(Error::DampingOutOfRange(b));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidLearningRate(gamma));
        }
        let k = betas.len();
        let lhs = betas
            .iter()
            .fold(vec![1.0, -1.0], |p, b| poly_mul(&p, &[1.0, -b]));
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            let q = betas
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(vec![1.0], |p, (_, b)| poly_mul(&p, &[1.0, -b]));
            for (r, c) in rhs.iter_mut().zip(q) {
                *r += c;
            }
        }
        let scale = gamma / k as f64;
        Ok(Self {
            delta_coeffs: lhs[1..].iter().map(|c| -c).collect(),
            grad_coeffs: rhs.iter().map(|c| -scale * c).collect(),
        })
    }

    /// Number of velocities `K`.
    pub fn order(&self) -> usize {
        self.grad_coeffs.len()
    }

    /// All coefficients, `a` then `b`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut c = self.delta_coeffs.clone();
        c.extend_from_slice(&self.grad_coeffs);
        c
    }

    /// Copy with coefficient `index` (in [`coefficients`](Self::coefficients)
    /// order) shifted by `delta`.
    pub fn perturbed(&self, index: usize, delta: f64) -> Self {
        let mut out = self.clone();
        let na = out.delta_coeffs.len();
        if index < na {
            out.delta_coeffs[index] += delta;
        } else {
            out.grad_coeffs[index - na] += delta;
        }
        out
    }

    /// `‖δ_{t+1} − RHS_t‖∞` for `t = K, …, T − 1`, where `thetas` holds
    /// `θ_0..=θ_T` and `grads[t] = ∇f(θ_t)`.
    pub fn residuals(
        &self,
        thetas: &[Vec<f64>],
        theta_star: &[f64],
        grads: &[Vec<f64>],
    ) -> Result<Vec<f64>> {
        let k = self.order();
        let d = theta_star.len();
        if thetas.len() < k + 2 {
            return Err(Error::MomentsTooShort {
                needed: k + 2,
                available: thetas.len(),
            });
        }
        let steps = thetas.len() - 1;
        if grads.len() < steps {
            return Err(Error::MomentsTooShort {
                needed: steps,
                available: grads.len(),
            });
        }
        for v in thetas.iter().chain(&grads[..steps]) {
            check_dim(d, v.len())?;
        }
        let delta: Vec<Vec<f64>> = thetas
            .iter()
            .map(|th| th.iter().zip(theta_star).map(|(a, b)| a - b).collect())
            .collect();
        let mut out = Vec::with_capacity(steps - k);
        let mut r = vec![0.0; d];
        for t in k..steps {
            r.copy_from_slice(&delta[t + 1]);
            for (m, a) in self.delta_coeffs.iter().enumerate() {
                for (x, y) in r.iter_mut().zip(&delta[t - m]) {
                    *x -= a * y;
                }
            }
            for (m, b) in self.grad_coeffs.iter().enumerate() {
                for (x, g) in r.iter_mut().zip(&grads[t - m]) {
                    *x -= b * g;
                }
            }
            out.push(norm_inf(&r));
        }
        Ok(out)
    }
}

/// Iterates and gradients of a constant-rate AggMo run.
#[derive(Debug, Clone, PartialEq)]
pub struct AggMoRun {
    /// `θ_0..=θ_T`.
    pub thetas: Vec<Vec<f64>>,
    /// `∇f(θ_0)..∇f(θ_{T−1})`.
    pub grads: Vec<Vec<f64>>,
}

pub fn record_aggmo_run(
    objective: &dyn Objective,
    theta0: &[f64],
    betas: &[f64],
    gamma: f64,
    steps: usize,
) -> Result<AggMoRun> {
    check_dim(objective.dim(), theta0.len())?;
    let mut state = OptimizerState::new(theta0.to_vec(), betas.len());
    let mut thetas = Vec::with_capacity(steps + 1);
    let mut grads = Vec::with_capacity(steps);
    thetas.push(theta0.to_vec());
    for _ in 0..steps {
        let (_, g) = objective.value_grad(&state.theta)?;
        state.step_aggmo(&g, betas, gamma)?;
        grads.push(g);
        thetas.push(state.theta.clone());
    }
    Ok(AggMoRun { thetas, grads })
}

/// Residuals of the derived recurrence on a recorded run.
pub fn finite_difference_residual(
    run: &AggMoRun,
    betas: &[f64],
    gamma: f64,
    theta_star: &[f64],
) -> Result<Vec<f64>> {
    DifferenceEquation::derive(betas, gamma)?.residuals(&run.thetas, theta_star, &run.grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::DiagonalQuadratic;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn k2_coefficients() {
        let (b1, b2, g) = (0.3, 0.8, 0.1);
        let e = DifferenceEquation::derive(&[b1, b2], g).unwrap();
        let want_a = [1.0 + b1 + b2, -(b1 + b2 + b1 * b2), b1 * b2];
        let want_b = [-g, g * (b1 + b2) / 2.0];
        for (x, y) in e.delta_coeffs.iter().zip(want_a) {
            assert_relative_eq!(*x, y, max_relative = 1e-15);
        }
        for (x, y) in e.grad_coeffs.iter().zip(want_b) {
            assert_relative_eq!(*x, y, max_relative = 1e-15);
        }
    }

    #[test]
    fn zero_damping_collapses_to_gradient_descent() {
        let e = DifferenceEquation::derive(&[0.0, 0.0], 0.2).unwrap();
        assert_eq!(e.delta_coeffs, vec![1.0, 0.0, 0.0]);
        assert_eq!(e.grad_coeffs, vec![-0.2, 0.0]);
    }

    #[test]
    fn one_dimensional_quadratic() {
        let q = DiagonalQuadratic::new(vec![1.0]).unwrap();
        let betas = [0.0, 0.9];
        let run = record_aggmo_run(&q, &[1.0], &betas, 0.1, 50).unwrap();
        let res = finite_difference_residual(&run, &betas, 0.1, &[0.0]).unwrap();
        assert_eq!(res.len(), 48);
        assert!(res.iter().all(|r| *r <= 1e-10), "{res:?}");
    }

    #[test]
    fn perturbation_trips() {
        let q = DiagonalQuadratic::new(vec![1.0, 0.05]).unwrap();
        let betas = [0.0, 0.9];
        let run = record_aggmo_run(&q, &[1.0, -2.0], &betas, 0.1, 50).unwrap();
        let e = DifferenceEquation::derive(&betas, 0.1).unwrap();
        for i in 0..e.coefficients().len() {
            let res = e
                .perturbed(i, 1e-3)
                .residuals(&run.thetas, &[0.0, 0.0], &run.grads)
                .unwrap();
            assert!(
                res.iter().copied().fold(0.0, f64::max) > 1e-5,
                "coefficient {i}"
            );
        }
    }

    #[test]
    fn short_runs_rejected() {
        let e = DifferenceEquation::derive(&[0.1, 0.2], 0.1).unwrap();
        assert!(e
            .residuals(
                &[vec![0.0], vec![0.0], vec![0.0]],
                &[0.0],
                &[vec![0.0], vec![0.0]]
            )
            .is_err());
        assert!(DifferenceEquation::derive(&[], 0.1).is_err());
        assert!(DifferenceEquation::derive(&[1.0], 0.1).is_err());
    }

    proptest! {
        #[test]
        fn translation_invariant(shift in -5.0f64..5.0, x0 in -3.0f64..3.0) {
            let betas = [0.2, 0.7];
            let base = DiagonalQuadratic::new(vec![0.5, 2.0]).unwrap();
            let moved = base.clone().with_offset(vec![shift, -shift]).unwrap();
            let a = record_aggmo_run(&base, &[x0, 1.0], &betas, 0.2, 40).unwrap();
            let b = record_aggmo_run(&moved, &[x0 + shift, 1.0 - shift], &betas, 0.2, 40).unwrap();
            let ra = finite_difference_residual(&a, &betas, 0.2, &[0.0, 0.0]).unwrap();
            let rb = finite_difference_residual(&b, &betas, 0.2, &[shift, -shift]).unwrap();
            for (x, y) in ra.iter().zip(&rb) {
                prop_assert!((x - y).abs() <= 1e-12, "{} vs {}", x, y);
            }
        }

        #[test]
        fn general_order_recurrence_holds(
            b in proptest::collection::vec(0.0f64..0.99, 1..5), lr in 0.01f64..0.5,
        ) {
            let q = DiagonalQuadratic::new(vec![1.0, 0.3]).unwrap();
            let run = record_aggmo_run(&q, &[1.0, 1.0], &b, lr, 30).unwrap();
            let res = finite_difference_residual(&run, &b, lr, &[0.0, 0.0]).unwrap();
            prop_assert!(res.iter().all(|r| *r <= 1e-10));
        }
    }
}
