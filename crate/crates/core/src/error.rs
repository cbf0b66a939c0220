//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("density is not integrable: {0}")]
    NonIntegrable(String),

    #[error("density evaluated to NaN at x = {0}")]
    NaNDensity(f64),

    #[error("quantile argument {0} outside (0, 1)")]
    OutOfRange(f64),

    #[error("Stein kernel unstable: {0}")]
    KernelUnstable(String),

    #[error("Stein kernel vanished at x = {0}")]
    KernelZero(f64),

    #[error("test function not integrable against the density")]
    NonIntegrableTestFunction,

    #[error("support of the target is not nested in the support of the base")]
    SupportNotNested,

    #[error("quadrature failed to converge: {0}")]
    QuadratureDivergent(String),

    #[error("likelihood-ratio derivative appears unbounded")]
    UnboundedDerivative,

    #[error("likelihood ratio is not monotone")]
    NotMonotone,

    #[error("target mean {0} is not attainable by tilting")]
    MeanUnattainable(f64),

    #[error("moment generating function diverges at t = {0}")]
    MgfDivergent(f64),

    #[error("posterior does not normalize: {0}")]
    ImproperPosterior(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("oracle did not converge: {0}")]
    NonConvergent(String),

    #[error("expression error: {0}")]
    Expr(String),
}
