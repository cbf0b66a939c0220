//! Exponential tilting: p₂(x) = p₁(x)·e^{λ₁x}/M₁(λ₁).
//!
//! Among densities with the base's support and a prescribed mean μ₂, the
//! tilted density minimizes KL(p₂ ‖ p₁); its tilt parameter solves
//! (log M₁)'(λ₁) = μ₂. Because the derivative of the log ratio is the constant
//! λ₁, the tilted pair is likelihood-ratio ordered and the Wasserstein
//! distance is exactly |λ₁|·E\[τ₁(X₂)\] = |μ₂ - μ₁-shift|.

use std::sync::Arc;

use serde::Serialize;

use crate::bounds::exact_distance_monotone;
use crate::config::QuadratureConfig;
use crate::dist::Distribution;
use crate::error::{Error, Result};

/// A solved tilt: the base law, the requested mean, λ₁ and M₁(λ₁).
#[derive(Debug, Clone, Serialize)]
pub struct TiltSpec {
    #[serde(skip)]
    pub base: Distribution,
    pub target_mean: f64,
    pub lambda1: f64,
    pub mgf_at_lambda1: f64,
}

/// Builds the tilted density at parameter `t`, returning it together with
/// log M₁(t). Errors map to `MgfDivergent` when e^{tx}·p₁(x) is not
/// integrable.
fn tilted_at(base: &Distribution, t: f64, cfg: &QuadratureConfig) -> Result<(Distribution, f64)> {
    let b = base.clone();
    let log_pdf = Arc::new(move |x: f64| t * x + b.log_pdf(x));
    let dist = Distribution::custom_log(log_pdf, *base.support(), cfg).map_err(|e| match e {
        Error::NonIntegrable(_) => Error::MgfDivergent(t),
        other => other,
    })?;
    // The base log-pdf is normalized, so the custom normalizer is M₁(t).
    let log_mgf = dist.custom_log_norm().expect("custom distribution");
    Ok((dist, log_mgf))
}

/// Solves (log M₁)'(t) = `target_mean` and returns the tilted distribution.
///
/// The map t ↦ (log M₁)'(t) is strictly increasing on the interior of the mgf
/// domain; the root is bracketed by geometric expansion (bisecting the domain
/// boundary on divergence) and then closed by bisection.
pub fn tilt_distribution(
    base: &Distribution,
    target_mean: f64,
    cfg: &QuadratureConfig,
) -> Result<(TiltSpec, Distribution)> {
    if !target_mean.is_finite() {
        return Err(Error::InvalidParams(format!("target mean {target_mean}")));
    }
    let mu1 = base.mean();
    let mean_tol = 1e-9 * (1.0 + target_mean.abs());
    if (target_mean - mu1).abs() <= mean_tol {
        let spec = TiltSpec { base: base.clone(), target_mean, lambda1: 0.0, mgf_at_lambda1: 1.0 };
        return Ok((spec, base.clone()));
    }

    let direction = (target_mean - mu1).signum();
    // Natural t-scale: one standard deviation of tilt moves the mean by about
    // one standard deviation.
    let t_scale = 1.0 / base.variance().sqrt().max(1e-6);

    // Expand a bracket [t_ok, t_hi] with ψ(t_ok) < μ₂ ≤ ψ(t_hi), bisecting
    // the mgf domain boundary to relative 1e-6 when expansion hits it.
    let mut t_ok = 0.0f64;
    let mut t_hi: Option<f64> = None;
    let mut t_step = 0.5 * t_scale * direction;
    let mut boundary: Option<f64> = None;
    for _ in 0..60 {
        let t_try = t_ok + t_step;
        match tilted_at(base, t_try, cfg) {
            Ok((dist, _)) => {
                if (dist.mean() - target_mean) * direction >= 0.0 {
                    t_hi = Some(t_try);
                    break;
                }
                t_ok = t_try;
                t_step *= 2.0;
            }
            Err(Error::MgfDivergent(_)) => {
                boundary = Some(t_try);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if t_hi.is_none() {
        if let Some(mut bad) = boundary {
            // Bisect the domain boundary; the attainable means are capped by
            // ψ just inside it.
            let mut good = t_ok;
            while (bad - good).abs() > 1e-6 * (1.0 + bad.abs()) {
                let mid = 0.5 * (good + bad);
                match tilted_at(base, mid, cfg) {
                    Ok((dist, _)) => {
                        if (dist.mean() - target_mean) * direction >= 0.0 {
                            t_hi = Some(mid);
                            break;
                        }
                        good = mid;
                    }
                    Err(_) => bad = mid,
                }
            }
            if t_hi.is_none() {
                return Err(Error::MeanUnattainable(target_mean));
            }
            t_ok = good.min(t_hi.unwrap().min(good).max(good));
        } else {
            return Err(Error::MeanUnattainable(target_mean));
        }
    }
    let mut hi = t_hi.unwrap();
    let mut lo = t_ok;

    // Bisection on the increasing mean map.
    let mut best: Option<(f64, Distribution, f64)> = None;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        match tilted_at(base, mid, cfg) {
            Ok((dist, log_mgf)) => {
                let psi = dist.mean();
                if (psi - target_mean).abs() <= mean_tol {
                    best = Some((mid, dist, log_mgf));
                    break;
                }
                if (psi - target_mean) * direction < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                best = Some((mid, dist, log_mgf));
            }
            Err(_) => {
                hi = mid;
            }
        }
    }
    let (lambda1, dist, log_mgf) = match best {
        Some(b) => b,
        None => return Err(Error::MeanUnattainable(target_mean)),
    };
    let (lambda1, dist, log_mgf) = {
        // Re-solve at the bracket midpoint for the final answer.
        let t = 0.5 * (lo + hi);
        match tilted_at(base, t, cfg) {
            Ok((d, m)) => (t, d, m),
            Err(_) => (lambda1, dist, log_mgf),
        }
    };
    let achieved = dist.mean();
    if (achieved - target_mean).abs() > 1e-7 * (1.0 + target_mean.abs()) {
        return Err(Error::MeanUnattainable(target_mean));
    }
    let spec = TiltSpec { base: base.clone(), target_mean, lambda1, mgf_at_lambda1: log_mgf.exp() };
    Ok((spec, dist))
}

/// Wasserstein distance and KL divergence of a solved tilt:
/// d_W through the monotone-LR route, KL = λ₁μ₂ - log M₁(λ₁).
pub fn tilt_distance_and_kl(spec: &TiltSpec, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let kl = spec.lambda1 * spec.target_mean - spec.mgf_at_lambda1.ln();
    if spec.lambda1 == 0.0 {
        return Ok((0.0, kl));
    }
    let (_, tilted) = {
        let b = spec.base.clone();
        let t = spec.lambda1;
        let log_pdf = Arc::new(move |x: f64| t * x + b.log_pdf(x));
        let dist = Distribution::custom_log(log_pdf, *spec.base.support(), cfg)?;
        ((), dist)
    };
    let bounds = exact_distance_monotone(&spec.base, &tilted, cfg)?;
    Ok((bounds.value(), kl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn gamma_tilt_closed_form_lambda() {
        // Gamma(k, λ): λ₁ = 1/λ - k/μ₂.
        let cfg = cfg();
        let base = Distribution::gamma(2.0, 1.0).unwrap();
        let (spec, tilted) = tilt_distribution(&base, 3.0, &cfg).unwrap();
        assert_abs_diff_eq!(spec.lambda1, 1.0 - 2.0 / 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(tilted.mean(), 3.0, epsilon = 1e-7);
        // M₁(1/3) = (1 - 1/3)^{-2} = 2.25
        assert_relative_eq!(spec.mgf_at_lambda1, 2.25, max_relative = 1e-6);
    }

    #[test]
    fn gamma_tilt_distance_and_kl() {
        let cfg = cfg();
        let base = Distribution::gamma(2.0, 1.0).unwrap();
        let (spec, _) = tilt_distribution(&base, 3.0, &cfg).unwrap();
        let (dw, kl) = tilt_distance_and_kl(&spec, &cfg).unwrap();
        // d_W = |μ₂ - λk| = 1; KL = 0.189069783783671 (independent value).
        assert_abs_diff_eq!(dw, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(kl, 0.189069783783671, epsilon = 1e-6);
    }

    #[test]
    fn identity_tilt() {
        let cfg = cfg();
        let base = Distribution::gamma(2.0, 1.0).unwrap();
        let (spec, tilted) = tilt_distribution(&base, 2.0, &cfg).unwrap();
        assert_eq!(spec.lambda1, 0.0);
        assert_eq!(spec.mgf_at_lambda1, 1.0);
        assert_abs_diff_eq!(tilted.mean(), 2.0, epsilon = 1e-9);
        let (dw, kl) = tilt_distance_and_kl(&spec, &cfg).unwrap();
        assert_eq!(dw, 0.0);
        assert_eq!(kl, 0.0);
    }

    #[test]
    fn normal_tilt_is_shift() {
        // (log M)'(t) = t for N(0,1), so λ₁ = m.
        let cfg = cfg();
        let base = Distribution::normal(0.0, 1.0).unwrap();
        let (spec, tilted) = tilt_distribution(&base, 0.7, &cfg).unwrap();
        assert_abs_diff_eq!(spec.lambda1, 0.7, epsilon = 1e-6);
        assert_abs_diff_eq!(tilted.mean(), 0.7, epsilon = 1e-8);
        let (dw, _) = tilt_distance_and_kl(&spec, &cfg).unwrap();
        assert_abs_diff_eq!(dw, 0.7, epsilon = 1e-6);
    }

    #[test]
    fn gamma_tilt_near_mgf_boundary() {
        // Target mean 50 needs λ₁ = 1 - 2/50 = 0.96, just inside the mgf
        // domain boundary t < 1; the bracket expansion must bisect past the
        // divergent region.
        let cfg = cfg();
        let base = Distribution::gamma(2.0, 1.0).unwrap();
        let (spec, tilted) = tilt_distribution(&base, 50.0, &cfg).unwrap();
        assert_abs_diff_eq!(spec.lambda1, 0.96, epsilon = 1e-5);
        assert_abs_diff_eq!(tilted.mean(), 50.0, epsilon = 1e-5 * 50.0);
        let (dw, _) = tilt_distance_and_kl(&spec, &cfg).unwrap();
        assert_abs_diff_eq!(dw, 48.0, epsilon = 1e-4 * 48.0);
    }

    #[test]
    fn unattainable_mean_rejected() {
        // Beta's support is (0,1): no tilt reaches mean 2.
        let cfg = cfg();
        let base = Distribution::beta(2.0, 2.0).unwrap();
        let r = tilt_distribution(&base, 2.0, &cfg);
        assert!(matches!(r, Err(Error::MeanUnattainable(_))), "{r:?}");
    }
}
