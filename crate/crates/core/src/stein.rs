//! Stein operators, inverse operators and Stein kernels.
//!
//! For a density p with support closure [a, b] and mean μ the crate uses the
//! density-approach operator T_p f = (fp)'/p = f' + f·(log p)', with the
//! convention that T_p f = 0 outside the support. Its inverse maps a centered
//! test function h to (1/p(x))·∫_a^x h p, and the Stein kernel is
//! τ(x) = T⁻¹(μ - Id)(x), which is nonnegative with E\[τ(X)\] = Var\[X\].
//!
//! Numeric kernels integrate from the nearer support endpoint and divide in
//! log space, which keeps the τ = (∫)/p ratio meaningful long after p itself
//! has decayed to the underflow edge.

use std::sync::Arc;

use crate::config::QuadratureConfig;
use crate::dist::{DerivativeOrigin, Distribution};
use crate::error::{Error, Result};
use crate::quad::integrate_segmented;

/// Whether a kernel evaluation uses a closed form or the integral table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelOrigin {
    Analytic,
    Numeric,
}

/// Scaled one-sided kernel integral anchored at `x`:
/// the left form gives ∫ (μ-y)·exp(log p(y) - log p(x)) dy over [reach, x],
/// the right form its mirror image. The scaling keeps tail evaluations within
/// floating-point range; the reach extends until the density ratio has
/// decayed below e⁻⁴⁶, or to a finite support endpoint.
fn scaled_side_integral(
    d: &Distribution,
    mu: f64,
    x: f64,
    left: bool,
    cfg: &QuadratureConfig,
) -> f64 {
    let log_px = d.log_pdf(x);
    if !log_px.is_finite() {
        return 0.0;
    }
    let (support_lo, support_hi) = (d.support().lower(), d.support().upper());
    let mut w = {
        let score = d.score(x, cfg).abs();
        (1.0 / (1.0 + score)).max(1e-8)
    };
    let boundary = if left { x - support_lo } else { support_hi - x };
    for _ in 0..90 {
        if w >= boundary {
            w = boundary;
            break;
        }
        let probe = if left { x - w } else { x + w };
        if d.log_pdf(probe) - log_px <= -46.0 {
            break;
        }
        w *= 2.0;
    }
    let integrand = |y: f64| {
        let e = d.log_pdf(y) - log_px;
        let ratio = if e > 700.0 { f64::INFINITY } else { e.exp() };
        if left {
            (mu - y) * ratio
        } else {
            (y - mu) * ratio
        }
    };
    let (a, b) = if left { (x - w, x) } else { (x, x + w) };
    // Log-spaced interior points resolve the exponential decay profile.
    let mut points = vec![a, b];
    for k in 1..6 {
        let f = 0.5f64.powi(k);
        points.push(if left { x - w * f } else { x + w * f });
    }
    points.sort_by(|p, q| p.partial_cmp(q).unwrap());
    points.dedup();
    integrate_segmented(integrand, &points, cfg).value
}

/// The Stein kernel τ of a distribution.
#[derive(Debug, Clone)]
pub struct SteinKernel {
    source: Distribution,
    origin: KernelOrigin,
    /// Tightened tolerances for the inner kernel integrals, so that kernel
    /// noise stays below whatever an outer quadrature can resolve.
    inner_cfg: QuadratureConfig,
}

impl SteinKernel {
    /// Kernel of `d`: the closed form when the family has one, otherwise the
    /// stabilized numeric integral.
    pub fn new(d: &Distribution, cfg: &QuadratureConfig) -> Result<Self> {
        if d.has_analytic_kernel() {
            Ok(Self {
                source: d.clone(),
                origin: KernelOrigin::Analytic,
                inner_cfg: Self::tighten(cfg),
            })
        } else {
            Self::numeric(d, cfg)
        }
    }

    /// Forces the numeric route even when a closed form exists.
    pub fn numeric(d: &Distribution, cfg: &QuadratureConfig) -> Result<Self> {
        let kernel = Self {
            source: d.clone(),
            origin: KernelOrigin::Numeric,
            inner_cfg: Self::tighten(cfg),
        };
        // Underflow screen over the bulk of the evaluation region.
        for i in 1..64 {
            let u = i as f64 / 64.0;
            let x = d.quantile(u).unwrap();
            if !d.log_pdf(x).is_finite() {
                return Err(Error::KernelUnstable(format!(
                    "density underflows at x = {x} inside the support"
                )));
            }
        }
        Ok(kernel)
    }

    fn tighten(cfg: &QuadratureConfig) -> QuadratureConfig {
        QuadratureConfig {
            abs_tol: (cfg.abs_tol * 1e-3).max(1e-15),
            rel_tol: (cfg.rel_tol * 1e-3).max(1e-13),
            max_depth: cfg.max_depth.min(45),
            ..cfg.clone()
        }
    }

    pub fn source(&self) -> &Distribution {
        &self.source
    }

    pub fn origin(&self) -> KernelOrigin {
        self.origin
    }

    /// τ(x); zero outside the support.
    pub fn eval(&self, x: f64) -> f64 {
        if !self.source.support().contains(x) {
            return 0.0;
        }
        if let Some(tau) = match self.origin {
            KernelOrigin::Analytic => self.source.analytic_kernel(x),
            KernelOrigin::Numeric => None,
        } {
            return tau;
        }
        let d = &self.source;
        let left = d.cdf(x) <= 0.5;
        scaled_side_integral(d, d.mean(), x, left, &self.inner_cfg)
    }
}

/// Applies the Stein operator: f'(x) + f(x)·(log p)'(x), zero outside the
/// support.
pub fn stein_operator_apply(
    d: &Distribution,
    f: &dyn Fn(f64) -> f64,
    f_prime: &dyn Fn(f64) -> f64,
    x: f64,
    cfg: &QuadratureConfig,
) -> f64 {
    if !d.support().contains(x) {
        return 0.0;
    }
    f_prime(x) + f(x) * d.score(x, cfg)
}

/// Applies the standardized operator τ(x)·f'(x) + (μ - x)·f(x).
pub fn standardized_operator_apply(
    d: &Distribution,
    kernel: &SteinKernel,
    f: &dyn Fn(f64) -> f64,
    f_prime: &dyn Fn(f64) -> f64,
    x: f64,
) -> f64 {
    if !d.support().contains(x) {
        return 0.0;
    }
    kernel.eval(x) * f_prime(x) + (d.mean() - x) * f(x)
}

/// Expectation of `h` under `d`, over the truncated working domain.
pub fn expectation(d: &Distribution, h: &dyn Fn(f64) -> f64, cfg: &QuadratureConfig) -> Result<f64> {
    let (lo, hi) = d.integration_domain(cfg);
    let points = breakpoints_in(&[d], lo, hi);
    let out = integrate_segmented(|y| h(y) * d.pdf(y), &points, cfg);
    if !out.converged {
        return Err(Error::NonIntegrableTestFunction);
    }
    Ok(out.value)
}

/// Sorted breakpoint list covering [lo, hi], seeded with the quantile ladders
/// of every distribution given.
pub(crate) fn breakpoints_in(dists: &[&Distribution], lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for d in dists {
        pts.extend(d.quantile_ladder().into_iter().filter(|x| *x > lo && *x < hi));
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

/// The inverse Stein operator T⁻¹(h - E h)(x) = (1/p(x))·∫_a^x (h - E h) p.
///
/// Evaluated from the nearer endpoint with the density ratio folded into the
/// integrand, so tail evaluations neither overflow nor underflow.
pub fn inverse_stein_operator(
    d: &Distribution,
    h: &dyn Fn(f64) -> f64,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let eh = expectation(d, h, cfg)?;
    let log_px = d.log_pdf(x);
    if !log_px.is_finite() {
        return Err(Error::KernelUnstable(format!("density underflows at x = {x}")));
    }
    let scaled = |y: f64| {
        let e = d.log_pdf(y) - log_px;
        if e > 709.0 {
            f64::INFINITY
        } else {
            (h(y) - eh) * e.exp()
        }
    };
    let (lo, hi) = d.integration_domain(cfg);
    let x_clamped = x.clamp(lo, hi);
    let out = if d.cdf(x) <= 0.5 {
        let mut points = breakpoints_in(&[d], lo, x_clamped);
        if points.len() < 2 {
            points = vec![lo, x_clamped];
        }
        integrate_segmented(scaled, &points, cfg)
    } else {
        let mut points = breakpoints_in(&[d], x_clamped, hi);
        if points.len() < 2 {
            points = vec![x_clamped, hi];
        }
        let out = integrate_segmented(scaled, &points, cfg);
        crate::quad::QuadOutcome { value: -out.value, ..out }
    };
    out.require_converged("inverse Stein operator")
        .map_err(|_| Error::NonIntegrableTestFunction)
}

/// g_h(x) = T⁻¹(h - E h)(x)/τ(x); bounded by 1 in sup-norm for Lipschitz-1 h.
pub fn g_h_eval(
    d: &Distribution,
    kernel: &SteinKernel,
    h: &dyn Fn(f64) -> f64,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let tau = kernel.eval(x);
    if tau.is_nan() || tau.abs() <= 1e-300 {
        return Err(Error::KernelZero(x));
    }
    Ok(inverse_stein_operator(d, h, x, cfg)? / tau)
}

/// A logarithmic derivative ρ = p'/p packaged as a value.
#[derive(Clone)]
pub struct ScoreFunction {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    origin: DerivativeOrigin,
}

impl std::fmt::Debug for ScoreFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScoreFunction").field("origin", &self.origin).finish()
    }
}

impl ScoreFunction {
    pub fn new(f: Arc<dyn Fn(f64) -> f64 + Send + Sync>, origin: DerivativeOrigin) -> Self {
        Self { f, origin }
    }

    /// Score of a distribution's density.
    pub fn of(d: &Distribution, cfg: &QuadratureConfig) -> Self {
        let d = d.clone();
        let cfg = cfg.clone();
        let origin = d.score_origin();
        Self { f: Arc::new(move |x| d.score(x, &cfg)), origin }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn origin(&self) -> DerivativeOrigin {
        self.origin
    }
}

/// The nested-density ratio π₀ = p₂/p₁ with derivatives.
#[derive(Debug, Clone)]
pub struct LikelihoodRatio {
    base: Distribution,
    target: Distribution,
    derivative_origin: DerivativeOrigin,
    cfg: QuadratureConfig,
}

impl LikelihoodRatio {
    /// Requires support(p₂) ⊆ support(p₁), checked on endpoints.
    pub fn new(p1: &Distribution, p2: &Distribution, cfg: &QuadratureConfig) -> Result<Self> {
        if !p2.support().nested_in(p1.support()) {
            return Err(Error::SupportNotNested);
        }
        let derivative_origin = if p1.score_origin() == DerivativeOrigin::Analytic
            && p2.score_origin() == DerivativeOrigin::Analytic
        {
            DerivativeOrigin::Analytic
        } else {
            DerivativeOrigin::FiniteDifference
        };
        Ok(Self { base: p1.clone(), target: p2.clone(), derivative_origin, cfg: cfg.clone() })
    }

    pub fn base(&self) -> &Distribution {
        &self.base
    }

    pub fn target(&self) -> &Distribution {
        &self.target
    }

    pub fn derivative_origin(&self) -> DerivativeOrigin {
        self.derivative_origin
    }

    /// π₀(x) = p₂(x)/p₁(x); zero outside the support of p₂.
    pub fn ratio(&self, x: f64) -> f64 {
        if !self.target.support().contains(x) {
            return 0.0;
        }
        (self.target.log_pdf(x) - self.base.log_pdf(x)).exp()
    }

    /// (log π₀)'(x) = ρ₂(x) - ρ₁(x).
    pub fn log_derivative(&self, x: f64) -> f64 {
        match self.derivative_origin {
            DerivativeOrigin::Analytic => {
                self.target.score(x, &self.cfg) - self.base.score(x, &self.cfg)
            }
            DerivativeOrigin::FiniteDifference => {
                let h = self.cfg.fd_step(x);
                let log_ratio = |y: f64| self.target.log_pdf(y) - self.base.log_pdf(y);
                (log_ratio(x + h) - log_ratio(x - h)) / (2.0 * h)
            }
        }
    }

    /// π₀'(x) = π₀(x)·(ρ₂ - ρ₁)(x) when analytic, central difference of the
    /// ratio otherwise.
    pub fn derivative(&self, x: f64) -> f64 {
        match self.derivative_origin {
            DerivativeOrigin::Analytic => self.ratio(x) * self.log_derivative(x),
            DerivativeOrigin::FiniteDifference => {
                let h = self.cfg.fd_step(x);
                (self.ratio(x + h) - self.ratio(x - h)) / (2.0 * h)
            }
        }
    }
}

/// Builds the likelihood ratio π₀ = p₂/p₁.
pub fn likelihood_ratio(p1: &Distribution, p2: &Distribution, cfg: &QuadratureConfig) -> Result<LikelihoodRatio> {
    LikelihoodRatio::new(p1, p2, cfg)
}

/// A test function φ paired with its derivative φ'.
pub type TestFunction<'a> = (&'a str, &'a dyn Fn(f64) -> f64, &'a dyn Fn(f64) -> f64);

/// One row of a kernel-identity verification.
#[derive(Debug, Clone, serde::Serialize)]
pub struct KernelIdentityCheck {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub pass: bool,
}

/// Report of E[τ(X)·φ'(X)] = E[(X-μ)·φ(X)] checks.
#[derive(Debug, Clone, serde::Serialize)]
pub struct KernelIdentityReport {
    pub checks: Vec<KernelIdentityCheck>,
    pub pass: bool,
}

/// Verifies the defining kernel identity for a list of (label, φ, φ') triples.
pub fn verify_kernel_identity(
    d: &Distribution,
    kernel: &SteinKernel,
    test_fns: &[TestFunction<'_>],
    cfg: &QuadratureConfig,
) -> KernelIdentityReport {
    let mu = d.mean();
    let (lo, hi) = d.integration_domain(cfg);
    let points = breakpoints_in(&[d], lo, hi);
    let mut checks = Vec::with_capacity(test_fns.len());
    for (label, phi, phi_prime) in test_fns {
        let lhs = integrate_segmented(|x| kernel.eval(x) * phi_prime(x) * d.pdf(x), &points, cfg);
        let rhs = integrate_segmented(|x| (x - mu) * phi(x) * d.pdf(x), &points, cfg);
        let abs_diff = (lhs.value - rhs.value).abs();
        let tol = 1e-7 * (1.0 + lhs.value.abs().max(rhs.value.abs()));
        checks.push(KernelIdentityCheck {
            label: label.to_string(),
            lhs: lhs.value,
            rhs: rhs.value,
            abs_diff,
            pass: lhs.converged && rhs.converged && abs_diff <= tol,
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    KernelIdentityReport { checks, pass }
}
