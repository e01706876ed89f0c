//! Functional linear regression `Y = a + ∫ b X + ε` on [0,1].
//!
//! Two estimators of the slope function `b` are provided: the spectral
//! cutoff (principal components) estimator and the Tikhonov (ridge)
//! estimator. Around them sit a simulation model with known truth, a Monte
//! Carlo harness reporting integrated squared bias, variance and MISE under
//! oracle tuning, and numerical checks of the operator perturbation bounds
//! that control eigenfunction estimation.

pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod grid;
pub mod io;
pub mod simulation;
pub mod spectral;

pub use error::{Error, Result};
pub use estimators::{
    compute_moments, estimate_intercept, pca_fit, predict, ridge_fit, CenteredMoments, Dataset,
    FittedModel, Method,
};
pub use evaluation::{mc_run, oracle_tune, rate_fit, McPlan, McResult, RateFit};
pub use grid::{
    apply_kernel, hs_norm, inner_product, l2_distance_sq, Grid, GridFunction, SymmetricKernel,
};
pub use simulation::{draw_dataset, SimConfig, Spacing, TruthBundle};
pub use spectral::{eigendecompose, EigenSystem, PerturbationReport};
