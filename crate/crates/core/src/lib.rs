//! Provable Wasserstein-1 bounds between nested univariate densities via
//! Stein kernels, and their application to measuring the impact of a prior on
//! a Bayesian posterior at fixed sample size.
//!
//! The crate is organized around five layers:
//!
//! - [`dist`]: a distribution catalog (normal, beta, gamma, exponential,
//!   skew-normal) plus user-supplied densities with numeric normalization.
//! - [`stein`]: Stein operators, the inverse operator, Stein kernels and the
//!   bounded-solution machinery.
//! - [`bounds`]: the bound engine — lower/upper Wasserstein bounds, the
//!   variance bound, exact distances under monotone likelihood ratio, and
//!   exponential tilting.
//! - [`oracle`]: an independent ground-truth Wasserstein-1 computation from
//!   the cdf-integral and quantile-integral forms, used to validate bounds.
//! - [`bayes`]: posterior pairs for the normal/binomial/Poisson models and
//!   the closed-form prior-impact bounds.

pub mod bayes;
pub mod bounds;
pub mod config;
pub mod dist;
pub mod error;
pub mod expr;
pub mod oracle;
pub mod quad;
pub mod report;
pub mod schema;
pub mod special;
pub mod stein;
pub mod suites;
pub mod tilt;

pub use config::QuadratureConfig;
pub use dist::{DerivativeOrigin, Distribution, FamilyTag, SupportInterval};
pub use error::{Error, Result};

/// Crate version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
