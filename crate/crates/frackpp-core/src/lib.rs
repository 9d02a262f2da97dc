//! Numerical laboratory for the Fisher-KPP equation u_t + A u = f(u) where A
//! generates an alpha-stable Feller semigroup: the fractional Laplacian
//! (-Delta)^alpha for alpha in (0,1), or the classical Laplacian at alpha = 1.
//!
//! The pieces:
//! - [`kernel`]: alpha-stable transition densities, closed-form and tabulated,
//!   with property checks (mass, scaling, semigroup law, two-sided bounds);
//! - [`operator`]: spectral and singular-integral forms of (-Delta)^alpha,
//!   cross-validating each other;
//! - [`reaction`]: KPP nonlinearities with exact logistic flow;
//! - [`grid`], [`evolve`]: Strang splitting on graded meshes with exact
//!   kernel-convolution steps and far-field tail closure;
//! - [`fronts`]: level-set extraction and spreading-rate fits;
//! - [`verify`]: supersolution, invasion and profile-residual checks.

// validation guards are written `!(x > 0)` so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolve;
pub mod fronts;
pub mod grid;
pub mod kernel;
pub mod operator;
pub mod quad;
pub mod reaction;
pub mod verify;

pub use error::{Error, Result};
pub use evolve::{
    convolve_exact, initial_field, kernel_for_config, linear_step, run, run_with, strang_step,
    ClampStats, ConvolutionPropagator, InitialCondition, RunOutput, SimulationConfig,
    SpectralPropagator,
};
pub use fronts::{
    check_invasion, extract_levels, fit_rate, stretch_diagnostic, FrontSide, FrontTrace,
    InvasionKind, InvasionRegion, InvasionReport, LevelCrossing, RateEstimate, RateModel,
};
pub use grid::{Field, GradedGrid, GradedGridSpec};
pub use kernel::{invert_profile, KernelBoundReport, KernelMode, StableKernel};
pub use operator::{operator_residual, SingularIntegralOperator, SpectralOperator};
pub use reaction::ReactionTerm;
pub use verify::{
    heuristic_front, lower_bound_check, profile_residual_sign, supersolution_check,
    AlgebraicProfile, LowerBoundReport, ProfileOrientation, ResidualSignSummary,
    SupersolutionReport,
};
