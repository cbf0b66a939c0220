//! Numeric configuration shared by every quadrature-backed operation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances, truncation policy and grid sizes.
///
/// A single `QuadratureConfig` value is threaded through the whole pipeline so
/// that a run is reproducible from its serialized report alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Absolute tolerance for adaptive quadrature.
    pub abs_tol: f64,
    /// Relative tolerance for adaptive quadrature.
    pub rel_tol: f64,
    /// Maximum bisection depth per initial quadrature interval.
    pub max_depth: u32,
    /// Tail mass dropped on each side when truncating infinite supports.
    pub tail_epsilon: f64,
    /// Number of points used for monotonicity scans and invariant grids.
    pub grid_points: usize,
    /// Scale of the central finite-difference step: h = fd_step_scale * max(1, |x|).
    pub fd_step_scale: f64,
    /// Seed for the randomized verification suites.
    pub seed: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_depth: 60,
            tail_epsilon: 1e-12,
            grid_points: 1025,
            fd_step_scale: 1e-6,
            seed: 0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("tail_epsilon", self.tail_epsilon),
            ("fd_step_scale", self.fd_step_scale),
        ];
        for (name, v) in positive {
            if v.is_nan() || v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidConfig("max_depth must be positive".into()));
        }
        if self.grid_points < 3 {
            return Err(Error::InvalidConfig("grid_points must be at least 3".into()));
        }
        if self.tail_epsilon >= 1e-3 {
            return Err(Error::InvalidConfig(format!(
                "tail_epsilon must be below 1e-3, got {}",
                self.tail_epsilon
            )));
        }
        Ok(())
    }

    /// Finite-difference step at `x`.
    pub fn fd_step(&self, x: f64) -> f64 {
        self.fd_step_scale * x.abs().max(1.0)
    }
}
