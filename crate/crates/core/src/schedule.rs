//! Learning-rate schedules.

use alloc::vec::Vec;

use num_traits::Float;

use crate::{Error, Result};

/// Learning rate as a function of the step counter `t ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Constant {
        base: f64,
    },
    /// `base / √t`.
    InverseSqrt {
        base: f64,
    },
    /// `base` multiplied by `factor` once for every milestone `m ≤ t`.
    Milestones {
        base: f64,
        milestones: Vec<u64>,
        factor: f64,
    },
}

impl Schedule {
    pub fn constant(base: f64) -> Result<Self> {
        check_positive("learning rate", base)?;
        Ok(Self::Constant { base })
    }

    pub fn inverse_sqrt(base: f64) -> Result<Self> {
        check_positive("learning rate", base)?;
        Ok(Self::InverseSqrt { base })
    }

    pub fn milestones(base: f64, milestones: impl Into<Vec<u64>>, factor: f64) -> Result<Self> {
        check_positive("learning rate", base)?;
        check_positive("decay factor", factor)?;
        let mut milestones = milestones.into();
        milestones.sort_unstable();
        Ok(Self::Milestones {
            base,
            milestones,
            factor,
        })
    }

    pub fn base(&self) -> f64 {
        match self {
            Self::Constant { base }
            | Self::InverseSqrt { base }
            | Self::Milestones { base, .. } => *base,
        }
    }

    /// Learning rate at step `t`. `t = 0` is treated as `t = 1`.
    pub fn eval(&self, t: u64) -> f64 {
        let t = t.max(1);
        match self {
            Self::Constant { base } => *base,
            Self::InverseSqrt { base } => base / Float::sqrt(t as f64),
            Self::Milestones {
                base,
                milestones,
                factor,
            } => {
                let passed = milestones.iter().take_while(|&&m| m <= t).count();
                base * Float::powi(*factor, passed as i32)
            }
        }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}
