//! JSON report payloads.
//!
//! Reports embed the fully resolved configuration and the library version so
//! a run can be reproduced from its output alone. Field order is fixed by the
//! struct definitions, which keeps byte-identical output for identical input.

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundsResult, ConditionReport, Diagnostics, Method};
use crate::config::QuadratureConfig;
use crate::oracle::OracleResult;

/// Bounds result as serialized to disk. An infinite upper bound becomes
/// `"upper": null` with `upper_finite: false`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: Option<f64>,
    pub upper_finite: bool,
    pub exact: bool,
    pub method: Method,
    pub conditions: ConditionReport,
    pub diagnostics: Diagnostics,
    pub config: QuadratureConfig,
    pub version: String,
}

impl BoundsReport {
    pub fn new(result: &BoundsResult, cfg: &QuadratureConfig) -> Self {
        Self {
            lower: result.lower,
            upper: result.upper.is_finite().then_some(result.upper),
            upper_finite: result.upper.is_finite(),
            exact: result.exact,
            method: result.method,
            conditions: result.conditions.clone(),
            diagnostics: result.diagnostics.clone(),
            config: cfg.clone(),
            version: crate::VERSION.to_string(),
        }
    }
}

/// Oracle result as serialized to disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReport {
    pub value: f64,
    pub value_cdf: f64,
    pub value_quantile: f64,
    pub agreement: f64,
    pub converged: bool,
    pub config: QuadratureConfig,
    pub version: String,
}

impl OracleReport {
    pub fn new(result: &OracleResult, cfg: &QuadratureConfig) -> Self {
        Self {
            value: result.value(),
            value_cdf: result.value_cdf,
            value_quantile: result.value_quantile,
            agreement: result.agreement,
            converged: result.converged,
            config: cfg.clone(),
            version: crate::VERSION.to_string(),
        }
    }
}

/// Outcome of one verification suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: usize,
    pub failures: Vec<String>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, cases: usize, failures: Vec<String>) -> Self {
        let passed = failures.is_empty();
        Self { suite: suite.into(), cases, failures, passed }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_upper_serializes_as_null() {
        let result = BoundsResult {
            lower: 0.25,
            upper: f64::INFINITY,
            exact: false,
            method: Method::VarianceBound,
            conditions: ConditionReport {
                lower_endpoint_ok: true,
                upper_endpoint_ok: true,
                integrability_ok: false,
                warnings: vec!["upper diverged".into()],
            },
            diagnostics: Diagnostics {
                lower_direct: 0.25,
                lower_mean_diff: 0.25,
                upper_error: f64::INFINITY,
                monotonicity: None,
                cross_check: None,
                sup_derivative: None,
            },
        };
        let report = BoundsReport::new(&result, &QuadratureConfig::default());
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"upper\":null"));
        assert!(text.contains("\"upper_finite\":false"));
        assert!(text.contains("\"method\":\"variance_bound\""));
        // Report must re-parse under its own schema.
        let back: BoundsReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.lower, 0.25);
        assert_eq!(back.upper, None);
    }
}
