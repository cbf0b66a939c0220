//! JSON input schemas: distribution specs and Bayes model specs.

use serde::{Deserialize, Serialize};

use crate::bayes::{Prior, SamplingModel};
use crate::config::QuadratureConfig;
use crate::dist::{Distribution, SupportInterval};
use crate::error::{Error, Result};
use crate::expr::Expression;

/// A distribution described as `{"family": ..., "params": {...}}`.
///
/// Custom densities carry an expression in `x` plus support endpoints
/// (`null` meaning infinite).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum DistributionSpec {
    Normal { mu: f64, sigma: f64 },
    Beta { alpha: f64, beta: f64 },
    Gamma { shape: f64, scale: f64 },
    Exponential { rate: f64 },
    SkewNormal {
        #[serde(default)]
        location: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(alias = "lambda")]
        shape: f64,
    },
    Custom { pdf: String, lower: Option<f64>, upper: Option<f64> },
}

fn one() -> f64 {
    1.0
}

impl DistributionSpec {
    pub fn build(&self, cfg: &QuadratureConfig) -> Result<Distribution> {
        match self {
            DistributionSpec::Normal { mu, sigma } => Distribution::normal(*mu, *sigma),
            DistributionSpec::Beta { alpha, beta } => Distribution::beta(*alpha, *beta),
            DistributionSpec::Gamma { shape, scale } => Distribution::gamma(*shape, *scale),
            DistributionSpec::Exponential { rate } => Distribution::exponential(*rate),
            DistributionSpec::SkewNormal { location, scale, shape } => {
                Distribution::skew_normal(*location, *scale, *shape, cfg)
            }
            DistributionSpec::Custom { pdf, lower, upper } => {
                let expr = Expression::parse(pdf)?;
                let support = support_from_bounds(*lower, *upper)?;
                Distribution::custom_expr(&expr, support, cfg)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("distribution spec: {e}")))
    }
}

pub(crate) fn support_from_bounds(lower: Option<f64>, upper: Option<f64>) -> Result<SupportInterval> {
    let lo = lower.unwrap_or(f64::NEG_INFINITY);
    let hi = upper.unwrap_or(f64::INFINITY);
    SupportInterval::new(lo, hi, false, false)
}

/// Sampling-model half of a Bayes spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Normal { sigma: f64, n: u64, xbar: f64 },
    Binomial { n: u64, y: u64 },
    Poisson { n: u64, xbar: f64 },
}

impl ModelSpec {
    pub fn build(&self) -> SamplingModel {
        match self {
            ModelSpec::Normal { sigma, n, xbar } => {
                SamplingModel::NormalKnownVariance { sigma: *sigma, n: *n, xbar: *xbar }
            }
            ModelSpec::Binomial { n, y } => SamplingModel::Binomial { n: *n, y: *y },
            ModelSpec::Poisson { n, xbar } => SamplingModel::Poisson { n: *n, xbar: *xbar },
        }
    }
}

/// Prior half of a Bayes spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorSpec {
    Flat,
    Normal { mu: f64, delta: f64 },
    Beta { alpha: f64, beta: f64 },
    Jeffreys,
    Exponential { lambda: f64 },
    Custom { density: String, lower: Option<f64>, upper: Option<f64> },
}

impl PriorSpec {
    pub fn build(&self) -> Result<Prior> {
        Ok(match self {
            PriorSpec::Flat => Prior::Flat,
            PriorSpec::Normal { mu, delta } => Prior::Normal { mu: *mu, delta: *delta },
            PriorSpec::Beta { alpha, beta } => Prior::Beta { alpha: *alpha, beta: *beta },
            PriorSpec::Jeffreys => Prior::Jeffreys,
            PriorSpec::Exponential { lambda } => Prior::Exponential { lambda: *lambda },
            PriorSpec::Custom { density, lower, upper } => Prior::Custom {
                density: Expression::parse(density)?,
                support: support_from_bounds(*lower, *upper)?,
            },
        })
    }
}

/// A full Bayes problem: model plus prior.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BayesSpec {
    pub model: ModelSpec,
    pub prior: PriorSpec,
}

impl BayesSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("bayes spec: {e}")))
    }
}
