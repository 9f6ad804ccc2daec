use alloc::vec;
use alloc::vec::Vec;

use super::eigen::{eigenvalues, Eigenvalue};
use crate::{Error, Result};

/// Largest supported system size (`K ≤ 15`).
pub const MAX_SYSTEM_SIZE: usize = 16;

/// Per-eigenvalue linear map of a momentum method on a quadratic.
///
/// For AggMo the state is `(v(1), …, v(K), θ − θ*)` along one eigendirection
/// with curvature `λ`, and the block is
///
/// ```text
/// ⎡ β(1)              −λ  ⎤
/// ⎢       ⋱            ⋮  ⎥
/// ⎢           β(K)    −λ  ⎥
/// ⎣ γβ(1)/K … γβ(K)/K  1−γλ ⎦
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrix {
    n: usize,
    entries: Vec<f64>,
    pub betas: Vec<f64>,
    pub lr: f64,
    pub lambda: f64,
}

impl SystemMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn eigenvalues(&self) -> Result<Vec<Eigenvalue>> {
        eigenvalues(self.n, &self.entries)
    }

    /// Applies the map to a state vector.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.entries[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

fn check_inputs(lr: f64, lambda: f64) -> Result<()> {
    if !(lr >= 0.0 && lr.is_finite()) {
        return Err(Error::InvalidLearningRate(lr));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "curvature",
            value: lambda,
        });
    }
    Ok(())
}

/// AggMo block for curvature `lambda`. `lr = 0` is accepted (frozen `θ`).
pub fn build_block(betas: &[f64], lr: f64, lambda: f64) -> Result<SystemMatrix> {
    check_inputs(lr, lambda)?;
    if betas.is_empty() {
        return Err(Error::EmptyDamping);
    }
    let k = betas.len();
    let n = k + 1;
    if n > MAX_SYSTEM_SIZE {
        return Err(Error::MatrixTooLarge(n));
    }
    let mut e = vec![0.0; n * n];
    for (i, &b) in betas.iter().enumerate() {
        e[i * n + i] = b;
        e[i * n + k] = -lambda;
        e[k * n + i] = lr * b / k as f64;
    }
    e[k * n + k] = 1.0 - lr * lambda;
    Ok(SystemMatrix {
        n,
        entries: e,
        betas: betas.to_vec(),
        lr,
        lambda,
    })
}

/// Nesterov block on the state `(v, θ − θ*)`:
/// `v' = β(1−γλ)v − λδ`, `δ' = γβ(1−γλ)v + (1−γλ)δ`.
pub fn build_nesterov_block(beta: f64, lr: f64, lambda: f64) -> Result<SystemMatrix> {
    check_inputs(lr, lambda)?;
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::DampingOutOfRange(beta));
    }
    let c = 1.0 - lr * lambda;
    Ok(SystemMatrix {
        n: 2,
        entries: vec![beta * c, -lambda, lr * beta * c, c],
        betas: vec![beta],
        lr,
        lambda,
    })
}

/// Maximum eigenvalue modulus.
pub fn spectral_radius(m: &SystemMatrix) -> Result<f64> {
    if m.n > MAX_SYSTEM_SIZE {
        return Err(Error::MatrixTooLarge(m.n));
    }
    Ok(m.eigenvalues()?
        .iter()
        .map(Eigenvalue::modulus)
        .fold(0.0, f64::max))
}

/// Characteristic polynomial `det(uI − B)` of the AggMo block, coefficients
/// in ascending powers of `u`.
///
/// The block is an arrowhead matrix, which gives the closed form
/// `(u − 1 + γλ)·∏(u − β(i)) + (γλ/K)·Σ_i β(i)·∏_{j≠i}(u − β(j))`.
/// For `K = 1` this is `u² − (1 + β − γλ)u + β`.
pub fn characteristic_polynomial(betas: &[f64], lr: f64, lambda: f64) -> Result<Vec<f64>> {
    check_inputs(lr, lambda)?;
    if betas.is_empty() {
        return Err(Error::EmptyDamping);
    }
    let k = betas.len();
    let mut lead = poly_from_roots(betas.iter().copied());
    lead = poly_mul(&lead, &[-(1.0 - lr * lambda), 1.0]);
    let w = lr * lambda / k as f64;
    for (i, &b) in betas.iter().enumerate() {
        let others = poly_from_roots(
            betas
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, &v)| v),
        );
        for (c, o) in lead.iter_mut().zip(&others) {
            *c += w * b * o;
        }
    }
    Ok(lead)
}

fn poly_from_roots(roots: impl Iterator<Item = f64>) -> Vec<f64> {
    roots.fold(vec![1.0], |p, r| poly_mul(&p, &[-r, 1.0]))
}

pub(crate) fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
