use crate::{Error, Result};

/// Relative rise that counts as a loss increase.
pub const INCREASE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationMetrics {
    /// Steps with `loss_{t+1} − loss_t > 1e-6·|loss_t|`.
    pub increase_count: usize,
    /// `max_t (loss_t − m_t)/|m_t|` with `m_t` the running minimum.
    pub max_relative_overshoot: f64,
    pub final_loss: f64,
    /// Non-finite entries; they are skipped by the other two metrics.
    pub non_finite_count: usize,
}

/// Oscillation summary of a loss curve.
///
/// Differences are measured against `|loss|`, so curves that go negative
/// (e.g. log-likelihood losses) are handled. An increase from a zero loss
/// counts if it is positive; an overshoot above a zero running minimum is
/// infinite.
pub fn oscillation_metrics(losses: &[f64]) -> Result<OscillationMetrics> {
    let final_loss = *losses.last().ok_or(Error::Empty("losses"))?;
    let mut increase_count = 0;
    let mut non_finite_count = 0;
    let mut overshoot = 0.0_f64;
    let mut prev: Option<f64> = None;
    let mut running_min = f64::INFINITY;
    for &l in losses {
        if !l.is_finite() {
            non_finite_count += 1;
            prev = None;
            continue;
        }
        if let Some(p) = prev {
            if l - p > INCREASE_TOLERANCE * p.abs() {
                increase_count += 1;
            }
        }
        prev = Some(l);
        running_min = running_min.min(l);
        if l > running_min {
            let o = if running_min == 0.0 {
                f64::INFINITY
            } else {
                (l - running_min) / running_min.abs()
            };
            overshoot = overshoot.max(o);
        }
    }
    Ok(OscillationMetrics {
        increase_count,
        max_relative_overshoot: overshoot,
        final_loss,
        non_finite_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::DiagonalQuadratic;
    use crate::{run, Method, Optimizer, RunOptions, Schedule};
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn decreasing() {
        let m = oscillation_metrics(&[5.0, 4.0, 1.0, 0.5]).unwrap();
        assert_eq!(
            (m.increase_count, m.max_relative_overshoot, m.final_loss),
            (0, 0.0, 0.5)
        );
    }

    #[test]
    fn hand_count() {
        let m = oscillation_metrics(&[1.0, 2.0, 0.5]).unwrap();
        assert_eq!(
            (m.increase_count, m.max_relative_overshoot, m.final_loss),
            (1, 1.0, 0.5)
        );
    }

    #[test]
    fn jitter_is_ignored() {
        let m = oscillation_metrics(&[1.0, 1.0 + 1e-9, 1.0]).unwrap();
        assert_eq!(m.increase_count, 0);
    }

    #[test]
    fn negative_losses() {
        let m = oscillation_metrics(&[-10.0, -12.0, -11.0, -13.0]).unwrap();
        assert_eq!(m.increase_count, 1);
        assert!((m.max_relative_overshoot - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_entries() {
        let m = oscillation_metrics(&[1.0, f64::NAN, 2.0, f64::INFINITY]).unwrap();
        assert_eq!(m.non_finite_count, 2);
        assert_eq!(m.increase_count, 0);
        assert_eq!(m.max_relative_overshoot, 1.0);
        assert!(m.final_loss.is_infinite());
        assert!(oscillation_metrics(&[]).is_err());
    }

    #[test]
    fn heavy_momentum_oscillates() {
        let q = DiagonalQuadratic::new(vec![1.0]).unwrap();
        let mut opt = Optimizer::new(Method::Cm { beta: 0.999 }, vec![1.0]).unwrap();
        let trace = run(
            &q,
            &mut opt,
            &Schedule::constant(0.33).unwrap(),
            100,
            RunOptions::default(),
        )
        .unwrap();
        assert!(oscillation_metrics(&trace.losses()).unwrap().increase_count > 0);
    }

    proptest! {
        #[test]
        fn scale_behaviour(losses in proptest::collection::vec(0.01f64..100.0, 1..50), c in 0.1f64..10.0) {
            let a = oscillation_metrics(&losses).unwrap();
            let scaled: Vec<f64> = losses.iter().map(|l| l * c).collect();
            let b = oscillation_metrics(&scaled).unwrap();
            prop_assert_eq!(a.increase_count, b.increase_count);
            prop_assert!((a.max_relative_overshoot - b.max_relative_overshoot).abs() <= 1e-12 * (1.0 + a.max_relative_overshoot));
            prop_assert!((b.final_loss - c * a.final_loss).abs() <= 1e-12 * b.final_loss.abs());
        }
    }
}
