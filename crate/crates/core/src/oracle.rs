//! Ground-truth Wasserstein-1 distances, independent of the bound engine.
//!
//! Two textbook routes: the cdf-integral ∫|F₁ - F₂| dx and the
//! quantile-integral ∫₀¹ |F₁⁻¹(u) - F₂⁻¹(u)| du. The cdf form is the primary
//! value (no inversions); the quantile form is the cross-check. Sign changes
//! of F₁ - F₂ are located up front so the absolute value never presents a
//! kink to the quadrature rule.

use serde::Serialize;

use crate::config::QuadratureConfig;
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::quad::integrate_segmented;

/// Agreement threshold between the two formulas.
pub const AGREEMENT_TOL: f64 = 1e-5;

/// Result of running both Wasserstein formulas.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub value_cdf: f64,
    pub value_quantile: f64,
    pub agreement: f64,
    pub converged: bool,
}

impl OracleResult {
    /// The primary value (cdf-integral form).
    pub fn value(&self) -> f64 {
        self.value_cdf
    }
}

/// Locates sign changes of `g` on [lo, hi] by a uniform scan plus bisection.
fn sign_changes(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, scan_points: usize, cap: usize) -> Option<Vec<f64>> {
    let mut crossings = Vec::new();
    let step = (hi - lo) / (scan_points - 1) as f64;
    let mut prev_x = lo;
    let mut prev_v = g(lo);
    for i in 1..scan_points {
        let x = lo + step * i as f64;
        let v = g(x);
        if prev_v == 0.0 {
            crossings.push(prev_x);
        } else if prev_v * v < 0.0 {
            let (mut a, mut b) = (prev_x, x);
            let mut fa = prev_v;
            for _ in 0..64 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = g(m);
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            crossings.push(0.5 * (a + b));
        }
        if crossings.len() > cap {
            return None;
        }
        prev_x = x;
        prev_v = v;
    }
    Some(crossings)
}

/// ∫ |F₁(x) - F₂(x)| dx over the truncated union support.
pub fn oracle_cdf(p1: &Distribution, p2: &Distribution, cfg: &QuadratureConfig) -> Result<f64> {
    let (a1, b1) = p1.integration_domain(cfg);
    let (a2, b2) = p2.integration_domain(cfg);
    let (lo, hi) = (a1.min(a2), b1.max(b2));
    let diff = |x: f64| p1.cdf(x) - p2.cdf(x);

    let mut points = vec![lo, hi];
    if let Some(crossings) = sign_changes(&diff, lo, hi, 257, 32) {
        points.extend(crossings.into_iter().filter(|x| *x > lo && *x < hi));
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
    }
    let out = integrate_segmented(|x| diff(x).abs(), &points, cfg);
    out.require_converged("cdf-form Wasserstein integral")
        .map_err(|e| Error::NonConvergent(e.to_string()))
}

/// ∫₀¹ |F₁⁻¹(u) - F₂⁻¹(u)| du with an endpoint-avoiding rule.
///
/// Contributions from u below `u0 = 1e-9` (and above 1 - u0) are bounded by a
/// crude remainder and only widen the convergence assessment, never the value.
pub fn oracle_quantile(p1: &Distribution, p2: &Distribution, cfg: &QuadratureConfig) -> Result<f64> {
    const U0: f64 = 1e-9;
    let q1 = |u: f64| p1.quantile(u).expect("u inside (0,1)");
    let q2 = |u: f64| p2.quantile(u).expect("u inside (0,1)");
    let diff = |u: f64| q1(u) - q2(u);

    let mut points = vec![U0, 1.0 - U0];
    // Quantile differences steepen near the endpoints; seed a log ladder.
    for e in [1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.25, 0.5, 0.75] {
        points.push(e);
        points.push(1.0 - e);
    }
    if let Some(crossings) = sign_changes(&diff, U0, 1.0 - U0, 129, 32) {
        points.extend(crossings);
    }
    points.retain(|u| *u >= U0 && *u <= 1.0 - U0);
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();

    let out = integrate_segmented(|u| diff(u).abs(), &points, cfg);
    // Crude bound on the omitted endpoint slivers; it widens the convergence
    // assessment but never the value.
    let tail_bound = U0 * (diff(U0).abs() + diff(1.0 - U0).abs() + 1.0);
    if !out.converged || tail_bound > 1e-6 {
        return Err(Error::NonConvergent(format!(
            "quantile-form Wasserstein integral: value {:.6e}, residual {:.3e}, tail bound {tail_bound:.3e}",
            out.value, out.error
        )));
    }
    Ok(out.value)
}

/// Runs both formulas; converged means both converged and agree to 1e-5.
pub fn oracle(p1: &Distribution, p2: &Distribution, cfg: &QuadratureConfig) -> OracleResult {
    let cdf = oracle_cdf(p1, p2, cfg);
    let quantile = oracle_quantile(p1, p2, cfg);
    match (cdf, quantile) {
        (Ok(v1), Ok(v2)) => {
            let agreement = (v1 - v2).abs();
            OracleResult { value_cdf: v1, value_quantile: v2, agreement, converged: agreement <= AGREEMENT_TOL }
        }
        (c, q) => OracleResult {
            value_cdf: c.unwrap_or(f64::NAN),
            value_quantile: q.unwrap_or(f64::NAN),
            agreement: f64::NAN,
            converged: false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn shifted_normals() {
        let cfg = cfg();
        let p1 = Distribution::normal(0.0, 1.0).unwrap();
        let p2 = Distribution::normal(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(oracle_cdf(&p1, &p2, &cfg).unwrap(), 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(oracle_quantile(&p1, &p2, &cfg).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn identical_pair_is_zero() {
        let cfg = cfg();
        let p = Distribution::gamma(2.0, 1.0).unwrap();
        let r = oracle(&p, &p, &cfg);
        assert!(r.converged);
        assert_abs_diff_eq!(r.value_cdf, 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(r.value_quantile, 0.0, epsilon = 1e-7);
    }

    #[test]
    fn exponentials_mean_difference() {
        let cfg = cfg();
        let p1 = Distribution::exponential(1.0).unwrap();
        let p2 = Distribution::exponential(2.0).unwrap();
        assert_abs_diff_eq!(oracle_quantile(&p1, &p2, &cfg).unwrap(), 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(oracle_cdf(&p1, &p2, &cfg).unwrap(), 0.5, epsilon = 1e-7);
    }

    #[test]
    fn skew_normal_against_formula() {
        let cfg = cfg();
        let p1 = Distribution::normal(0.0, 1.0).unwrap();
        let p2 = Distribution::skew_normal(0.0, 1.0, 1.0, &cfg).unwrap();
        let expect = (2.0 / std::f64::consts::PI).sqrt() / 2f64.sqrt();
        let r = oracle(&p1, &p2, &cfg);
        assert!(r.converged, "agreement {}", r.agreement);
        assert_abs_diff_eq!(r.value(), expect, epsilon = 1e-5);
    }

    #[test]
    fn crossing_cdfs_centered_normals() {
        // F₁ - F₂ changes sign at the common mean.
        let cfg = cfg();
        let p1 = Distribution::normal(0.0, 2.0).unwrap();
        let p2 = Distribution::normal(0.0, 1.0).unwrap();
        let expect = (2.0 / std::f64::consts::PI).sqrt(); // (σ1-σ2)·E|Z|
        let r = oracle(&p1, &p2, &cfg);
        assert!(r.converged, "agreement {}", r.agreement);
        assert_abs_diff_eq!(r.value(), expect, epsilon = 1e-6);
    }

    #[test]
    fn symmetry() {
        let cfg = cfg();
        let p1 = Distribution::beta(2.0, 2.0).unwrap();
        let p2 = Distribution::beta(3.0, 4.0).unwrap();
        let a = oracle_cdf(&p1, &p2, &cfg).unwrap();
        let b = oracle_cdf(&p2, &p1, &cfg).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
    }
}
