//! Momentum methods on quadratics as linear dynamical systems.
//!
//! Along each eigendirection of a quadratic with curvature `λ`, AggMo is a
//! linear map on `(v(1), …, v(K), θ − θ*)`. Its spectral radius `ρ` governs
//! the asymptotic contraction `ρᵗ`; rates are reported as `1 − ρ`.
//!
//! In the under-damped regime of classical momentum the two roots form a
//! conjugate pair of modulus `√β`, so the plateau rate is `1 − √β`.

pub mod eigen;
pub mod rates;
pub mod system;

pub use eigen::{eigenvalues, Eigenvalue};
pub use rates::{
    auto_grid_max, best_rate, convergence_rate, critical_damping, critical_kappa, log_space,
    optimal_envelope, optimal_lr_search, rate_curve, spectrum, Dynamics, LrGrid, RatePoint,
    AUTO_GRID_MIN,
};
pub use system::{
    build_block, build_nesterov_block, characteristic_polynomial, spectral_radius, SystemMatrix,
    MAX_SYSTEM_SIZE,
};
