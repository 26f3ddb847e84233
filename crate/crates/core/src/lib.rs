//! Numerical toolkit for time-conformable Cauchy problems `T_alpha u = L u`.
//!
//! The conformable derivative in time turns into a classical evolution run on
//! the deterministic clock `t^alpha / alpha`. This crate implements that clock,
//! the conformable calculus around it, the stochastic processes whose
//! generators play the role of `L`, and four independent ways to compute the
//! solution: Monte Carlo, Fourier multipliers, Dirichlet eigenfunction
//! expansions and an explicit finite-difference oracle.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
mod exec;
pub mod export;
pub mod grid;
pub mod levy;
pub mod oracle;
pub mod order;
pub mod process;
pub mod quad;
pub mod rng;
pub mod solvers;
pub mod stats;

pub use calculus::{
    conformable_derivative_limit, conformable_derivative_smooth, conformable_eigenfunction,
    conformable_integral, EpsSchedule, ScalarFunction,
};
pub use error::{Error, Result};
pub use grid::GridField;
pub use levy::{conformable_characteristic, evaluate_symbol, LevySymbol};
pub use order::{nonlinear_clock, FractionalOrder};
pub use process::{
    fbm_covariance, first_exit_index, sample_fbm_marginal, sample_fbm_path, sample_levy_path,
    sample_stable_increment, FbmSampler, FbmSpec, IntervalDomain, Marginals, PointCloud, SamplePath,
    StableSpec,
};
pub use quad::Estimate;
