//! Differentiable test objectives.

mod funnel;
mod quadratic;
mod regression;
mod rosenbrock;

pub use funnel::{funnel_value_grad, log_cosh2, ToyFunnel};
pub use quadratic::DiagonalQuadratic;
pub use regression::{
    funnel_target, make_funnel_dataset, mlp_init, mlp_nll_grad, mlp_predict, FunnelDataset,
    MlpRegression, Reduction, FUNNEL_POINTS, FUNNEL_SIGMA, HIDDEN, MLP_PARAMS,
};
pub use rosenbrock::{rosenbrock_value_grad, Rosenbrock};
