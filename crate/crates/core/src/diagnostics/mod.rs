//! Cross-method checks: Nesterov as a special case of AggMo, the
//! finite-difference form of AggMo on quadratics, and oscillation metrics for
//! loss traces.

pub mod equivalence;
pub mod oscillation;
pub mod recurrence;

pub use equivalence::{
    nesterov_equivalence_trace, traces_bitwise_equal, EquivalenceMode, EquivalenceReport,
};
pub use oscillation::{oscillation_metrics, OscillationMetrics, INCREASE_TOLERANCE};
pub use recurrence::{finite_difference_residual, record_aggmo_run, AggMoRun, DifferenceEquation};
