use alloc::vec::Vec;

use num_traits::Float;

use super::system::{build_block, build_nesterov_block, spectral_radius};
use crate::{Error, Result};

/// Rate of one method at one condition number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub kappa: f64,
    pub lr: f64,
    /// Spectral radius; the method converges iff `rho < 1`.
    pub rho: f64,
    /// `1 − rho`, larger is faster.
    pub rate: f64,
}

impl RatePoint {
    fn new(kappa: f64, lr: f64, rho: f64) -> Self {
        Self {
            kappa,
            lr,
            rho,
            rate: 1.0 - rho,
        }
    }

    pub fn converges(&self) -> bool {
        self.rho < 1.0
    }
}

/// Linear dynamics whose rate is analysed.
#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics {
    /// AggMo; a single coefficient is classical momentum.
    AggMo {
        betas: Vec<f64>,
    },
    Nesterov {
        beta: f64,
    },
}

impl Dynamics {
    pub fn cm(beta: f64) -> Self {
        Self::AggMo {
            betas: alloc::vec![beta],
        }
    }

    pub fn max_beta(&self) -> f64 {
        match self {
            Self::AggMo { betas } => betas.iter().copied().fold(0.0, f64::max),
            Self::Nesterov { beta } => *beta,
        }
    }

    /// Spectral radius at curvature `lambda`.
    pub fn radius(&self, lr: f64, lambda: f64) -> Result<f64> {
        match self {
            Self::AggMo { betas } => spectral_radius(&build_block(betas, lr, lambda)?),
            Self::Nesterov { beta } => spectral_radius(&build_nesterov_block(*beta, lr, lambda)?),
        }
    }

    /// Worst spectral radius over the spectrum `eigs`.
    pub fn radius_over(&self, lr: f64, eigs: &[f64]) -> Result<f64> {
        if eigs.is_empty() {
            return Err(Error::Empty("eigenvalues"));
        }
        eigs.iter()
            .try_fold(0.0_f64, |m, &l| Ok(m.max(self.radius(lr, l)?)))
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa >= 1.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::ConditionNumber(kappa))
    }
}

/// The two-point spectrum `{1, 1/κ}`.
pub fn spectrum(kappa: f64) -> [f64; 2] {
    [1.0, 1.0 / kappa]
}

/// Critically damped momentum and its optimal rate:
/// `β* = ((√κ − 1)/(√κ + 1))²`, rate `1 − (√κ − 1)/(√κ + 1)`.
pub fn critical_damping(kappa: f64) -> Result<(f64, f64)> {
    check_kappa(kappa)?;
    let s = Float::sqrt(kappa);
    let r = (s - 1.0) / (s + 1.0);
    Ok((r * r, 1.0 - r))
}

/// Condition number at which `beta` is the critical damping:
/// `((1 + √β)/(1 − √β))²`.
pub fn critical_kappa(beta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::DampingOutOfRange(beta));
    }
    let s = Float::sqrt(beta);
    let r = (1.0 + s) / (1.0 - s);
    Ok(r * r)
}

/// AggMo rate at a fixed learning rate; `kappa` is the spread of `eigs`.
pub fn convergence_rate(betas: &[f64], lr: f64, eigs: &[f64]) -> Result<RatePoint> {
    let dynamics = Dynamics::AggMo {
        betas: betas.to_vec(),
    };
    let rho = dynamics.radius_over(lr, eigs)?;
    let hi = eigs.iter().copied().fold(f64::MIN, f64::max);
    let lo = eigs.iter().copied().fold(f64::MAX, f64::min);
    Ok(RatePoint::new(hi / lo, lr, rho))
}

/// Best learning rate from an explicit grid on the spectrum `{1, 1/κ}`.
/// Ties go to the smaller rate.
pub fn optimal_lr_search(betas: &[f64], kappa: f64, lr_grid: &[f64]) -> Result<RatePoint> {
    search(
        &Dynamics::AggMo {
            betas: betas.to_vec(),
        },
        kappa,
        lr_grid,
    )
}

fn search(dynamics: &Dynamics, kappa: f64, lrs: &[f64]) -> Result<RatePoint> {
    Ok(search_indexed(dynamics, kappa, lrs)?.1)
}

fn search_indexed(dynamics: &Dynamics, kappa: f64, lrs: &[f64]) -> Result<(usize, RatePoint)> {
    check_kappa(kappa)?;
    if lrs.is_empty() {
        return Err(Error::Empty("learning-rate grid"));
    }
    let eigs = spectrum(kappa);
    let mut order: Vec<usize> = (0..lrs.len()).collect();
    order.sort_by(|&a, &b| lrs[a].total_cmp(&lrs[b]));
    let mut best: Option<(usize, RatePoint)> = None;
    for i in order {
        let rho = dynamics.radius_over(lrs[i], &eigs)?;
        if best.is_none_or(|(_, b)| rho < b.rho) {
            best = Some((i, RatePoint::new(kappa, lrs[i], rho)));
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// Learning-rate grid used per condition number.
#[derive(Debug, Clone, PartialEq)]
pub enum LrGrid {
    Explicit(Vec<f64>),
    /// `points` log-spaced rates over `[1e-4, 2(1 + max β)/(1 + 1/κ)]`,
    /// followed by `refinements` rounds that re-grid between the neighbours
    /// of the current best rate.
    Auto {
        points: usize,
        refinements: usize,
    },
}

impl Default for LrGrid {
    fn default() -> Self {
        Self::Auto {
            points: 200,
            refinements: 6,
        }
    }
}

/// Lower end of the automatic grid.
pub const AUTO_GRID_MIN: f64 = 1e-4;

/// Upper end of the automatic grid.
pub fn auto_grid_max(max_beta: f64, kappa: f64) -> f64 {
    2.0 * (1.0 + max_beta) / (1.0 + 1.0 / kappa)
}

/// `n` log-spaced points over `[lo, hi]`, endpoints included.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let (a, b) = (Float::ln(lo), Float::ln(hi));
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        Float::exp(a + (b - a) * i as f64 / (n - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

/// Best learning rate for `dynamics` on `{1, 1/κ}`.
pub fn best_rate(dynamics: &Dynamics, kappa: f64, grid: &LrGrid) -> Result<RatePoint> {
    match grid {
        LrGrid::Explicit(lrs) => search(dynamics, kappa, lrs),
        LrGrid::Auto {
            points,
            refinements,
        } => {
            check_kappa(kappa)?;
            if *points < 2 {
                return Err(Error::InvalidParameter {
                    name: "grid points",
                    value: *points as f64,
                });
            }
            let mut lrs = log_space(
                AUTO_GRID_MIN,
                auto_grid_max(dynamics.max_beta(), kappa),
                *points,
            );
            let (mut idx, mut best) = search_indexed(dynamics, kappa, &lrs)?;
            for _ in 0..*refinements {
                let lo = lrs[idx.saturating_sub(1)];
                let hi = lrs[(idx + 1).min(lrs.len() - 1)];
                lrs = log_space(lo, hi, *points);
                let (i, p) = search_indexed(dynamics, kappa, &lrs)?;
                idx = i;
                if p.rho < best.rho || (p.rho == best.rho && p.lr < best.lr) {
                    best = p;
                } else {
                    idx = lrs
                        .iter()
                        .position(|&l| l >= best.lr)
                        .unwrap_or(lrs.len() - 1);
                }
            }
            Ok(best)
        }
    }
}

/// One [`RatePoint`] per condition number, each searched independently.
pub fn rate_curve(dynamics: &Dynamics, kappas: &[f64], grid: &LrGrid) -> Result<Vec<RatePoint>> {
    kappas
        .iter()
        .map(|&k| best_rate(dynamics, k, grid))
        .collect()
}

/// Optimal rate over all momentum values at each condition number.
pub fn optimal_envelope(kappas: &[f64]) -> Result<Vec<f64>> {
    kappas
        .iter()
        .map(|&k| critical_damping(k).map(|(_, r)| r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn critical_damping_values() {
        assert_eq!(critical_damping(9.0).unwrap(), (0.25, 0.5));
        assert_eq!(critical_damping(1.0).unwrap(), (0.0, 1.0));
        assert!(critical_damping(1e16).unwrap().0 > 0.9999);
        assert!(critical_damping(0.5).is_err());
    }

    #[test]
    fn critical_kappa_inverts_critical_damping() {
        for beta in [0.1, 0.5, 0.9, 0.99] {
            let k = critical_kappa(beta).unwrap();
            assert_relative_eq!(critical_damping(k).unwrap().0, beta, max_relative = 1e-12);
        }
    }

    #[test]
    fn gradient_descent_closed_form() {
        let kappa: f64 = 50.0;
        let eigs = spectrum(kappa);
        let lr = 2.0 / (eigs[0] + eigs[1]);
        let p = convergence_rate(&[0.0], lr, &eigs).unwrap();
        assert_relative_eq!(p.rate, 2.0 / (kappa + 1.0), max_relative = 1e-9);
        assert_relative_eq!(p.kappa, kappa, max_relative = 1e-14);
    }

    #[test]
    fn single_point_grid() {
        let p = optimal_lr_search(&[0.5], 10.0, &[0.3]).unwrap();
        assert_eq!(p.lr, 0.3);
        assert!(optimal_lr_search(&[0.5], 10.0, &[]).is_err());
    }

    #[test]
    fn ties_prefer_smaller_rate() {
        // κ = 1, β = 0: ρ = |1 − γ|, so 0.5 and 1.5 tie.
        let q = optimal_lr_search(&[0.0], 1.0, &[1.5, 0.5]).unwrap();
        assert_eq!(q.lr, 0.5);
        assert_eq!(q.rho, 0.5);
    }

    #[test]
    fn cm_at_critical_damping_reaches_optimum() {
        let kappa = 100.0;
        let (beta, optimal) = critical_damping(kappa).unwrap();
        // The optimum is a kink in ρ(γ) at γ = 4κ/(√κ + 1)², so the oracle
        // grid must be dense around it.
        let lrs: Vec<f64> = (0..=20_000)
            .map(|i| 3.0 + 0.6 * i as f64 / 20_000.0)
            .collect();
        let p = optimal_lr_search(&[beta], kappa, &lrs).unwrap();
        assert_relative_eq!(optimal, 2.0 / 11.0, max_relative = 1e-14);
        assert!((p.rate - optimal).abs() < 1e-3, "{} vs {optimal}", p.rate);
    }

    #[test]
    fn refined_grid_matches_fine_grid() {
        let kappa = 100.0;
        let (beta, optimal) = critical_damping(kappa).unwrap();
        let p = best_rate(&Dynamics::cm(beta), kappa, &LrGrid::default()).unwrap();
        assert!((p.rate - optimal).abs() < 1e-4, "{} vs {optimal}", p.rate);
    }

    #[test]
    fn cm_plateau_below_critical_kappa() {
        let beta: f64 = 0.9;
        let curve = rate_curve(
            &Dynamics::cm(beta),
            &[10.0, 30.0, 100.0],
            &LrGrid::default(),
        )
        .unwrap();
        for p in curve {
            assert!((p.rate - (1.0 - beta.sqrt())).abs() < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn well_conditioned_gradient_descent_is_exact() {
        let gd = best_rate(&Dynamics::cm(0.0), 1.0, &LrGrid::default()).unwrap();
        assert!(gd.rate > 1.0 - 1e-6, "{gd:?}");
    }

    #[test]
    fn two_velocities_can_contract_faster_than_slowest_damping() {
        // Nonzero roots of [0, β] solve (u − 1 + γλ)(u − β) + γλβ/2 = 0, a
        // complex pair of modulus √(β(1 − γλ/2)) here.
        let (beta, lr, lambda) = (0.96, 1.6743764078767054, 0.2820588803170162);
        let rho = Dynamics::AggMo {
            betas: vec![0.0, beta],
        }
        .radius(lr, lambda)
        .unwrap();
        let gl = lr * lambda;
        assert_relative_eq!(rho, (beta * (1.0 - gl / 2.0)).sqrt(), max_relative = 1e-12);
        assert!(rho < beta);
    }

    #[test]
    fn log_space_endpoints() {
        let g = log_space(1e-4, 3.0, 200);
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[199], 3.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #[test]
        fn single_velocity_radius_at_least_sqrt_beta(
            beta in 0.0f64..0.999, lr in 1e-4f64..4.0, lambda in 1e-4f64..1.0,
        ) {
            // The two roots multiply to β.
            let rho = Dynamics::cm(beta).radius(lr, lambda).unwrap();
            prop_assert!(rho >= beta.sqrt() * (1.0 - 1e-9));
        }

        #[test]
        fn widening_grid_never_hurts(
            beta in 0.0f64..0.99, kappa in 1.0f64..1e4, lrs in proptest::collection::vec(1e-3f64..3.0, 1..20),
            extra in 1e-3f64..3.0,
        ) {
            let narrow = optimal_lr_search(&[beta], kappa, &lrs).unwrap();
            let mut wide = lrs.clone();
            wide.push(extra);
            let wide = optimal_lr_search(&[beta], kappa, &wide).unwrap();
            prop_assert!(wide.rho <= narrow.rho);
        }
    }
}
