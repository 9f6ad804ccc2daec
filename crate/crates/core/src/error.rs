use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("damping vector is empty")]
    EmptyDamping,
    #[error("damping coefficient {0} is outside [0, 1)")]
    DampingOutOfRange(f64),
    #[error("damping coefficients must be strictly increasing")]
    DampingNotIncreasing,
    #[error("damping coefficients must be non-decreasing")]
    DampingDecreasing,
    #[error("scale factor {0} is outside (0, 1)")]
    ScaleOutOfRange(f64),
    #[error("velocity count must be at least 1")]
    ZeroVelocities,
    #[error("decay factor {0} is outside (0, 1]")]
    DecayOutOfRange(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state has {state} velocities but {required} are required")]
    VelocityCountMismatch { state: usize, required: usize },
    #[error("Nesterov momentum needs exactly one velocity, state has {0}")]
    NesterovVelocityCount(usize),
    #[error("expected {expected} per-velocity learning rates, found {found}")]
    LearningRateCount { expected: usize, found: usize },
    #[error("learning rate {0} is invalid")]
    InvalidLearningRate(f64),
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("moment list too short: need {needed}, have {available}")]
    MomentsTooShort { needed: usize, available: usize },
    #[error("gradient history is empty")]
    EmptyHistory,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("matrix of size {0} exceeds the supported maximum of 16")]
    MatrixTooLarge(usize),
    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,
    #[error("condition number {0} is below 1")]
    ConditionNumber(f64),
}
