//! Impact of the prior on a Bayesian posterior, at fixed sample size.
//!
//! For a one-parameter sampling model the flat-prior posterior P₁ (the
//! normalized likelihood) is compared against the posterior P₂ under a chosen
//! prior. Since p₂ ∝ π₀·p₁ with π₀ the prior density, the bound engine
//! applies with π₀'/π₀ = ρ₀ the prior score, giving
//!
//!   |E[τ₁(Θ₂)·ρ₀(Θ₂)]|  ≤  d_W(P₁, P₂)  ≤  E[τ₁(Θ₂)·|ρ₀(Θ₂)|].
//!
//! Conjugate cases (normal/normal, binomial/beta, binomial/Jeffreys,
//! Poisson/exponential) also carry the closed-form bounds, each paired with a
//! quadrature twin that recomputes the same algebraic skeleton with
//! quadrature moments.

use std::sync::Arc;

use crate::bounds::{
    detect_monotone, exact_distance_monotone, check_conditions, BoundsResult, ConditionReport,
    Diagnostics, Method, Monotonicity,
};
use crate::config::QuadratureConfig;
use crate::dist::{DerivativeOrigin, Distribution, SupportInterval};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::quad::integrate_segmented;
use crate::stein::{breakpoints_in, LikelihoodRatio, ScoreFunction, SteinKernel};

/// One-parameter sampling models with their sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplingModel {
    /// n observations from N(θ, σ²) with known σ, summarized by x̄.
    NormalKnownVariance { sigma: f64, n: u64, xbar: f64 },
    /// One observation y from Binomial(n, θ).
    Binomial { n: u64, y: u64 },
    /// n observations from Poisson(θ), summarized by x̄ (n·x̄ integral, ≥ 1).
    Poisson { n: u64, xbar: f64 },
}

impl SamplingModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            SamplingModel::NormalKnownVariance { sigma, n, xbar } => {
                if !(sigma.is_finite() && *sigma > 0.0) || *n == 0 || !xbar.is_finite() {
                    return Err(Error::InvalidData(format!(
                        "normal model requires sigma > 0, n >= 1, finite xbar; got sigma={sigma}, n={n}, xbar={xbar}"
                    )));
                }
            }
            SamplingModel::Binomial { n, y } => {
                if *n == 0 || y > n {
                    return Err(Error::InvalidData(format!(
                        "binomial model requires 0 <= y <= n with n >= 1; got n={n}, y={y}"
                    )));
                }
            }
            SamplingModel::Poisson { n, xbar } => {
                if *n == 0 || !xbar.is_finite() || *xbar < 0.0 {
                    return Err(Error::InvalidData(format!(
                        "poisson model requires n >= 1 and xbar >= 0; got n={n}, xbar={xbar}"
                    )));
                }
                let sum = *n as f64 * *xbar;
                if (sum - sum.round()).abs() > 1e-9 {
                    return Err(Error::InvalidData(format!(
                        "poisson model requires n·xbar integral; got {sum}"
                    )));
                }
                if sum.round() < 1.0 {
                    return Err(Error::InvalidData(
                        "poisson model requires n·xbar >= 1 (the zero-count case is excluded)".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The flat-prior posterior P₁: the likelihood normalized in θ.
    pub fn flat_posterior(&self) -> Result<Distribution> {
        self.validate()?;
        match self {
            SamplingModel::NormalKnownVariance { sigma, n, xbar } => {
                Distribution::normal(*xbar, sigma / (*n as f64).sqrt())
            }
            SamplingModel::Binomial { n, y } => {
                Distribution::beta(*y as f64 + 1.0, (*n - *y) as f64 + 1.0)
            }
            SamplingModel::Poisson { n, xbar } => {
                let shape = (*n as f64 * *xbar).round() + 1.0;
                Distribution::gamma(shape, 1.0 / *n as f64)
            }
        }
    }
}

/// Prior densities; improper ones are only ever used through their score or
/// as reweighting factors, never normalized standalone.
#[derive(Debug, Clone)]
pub enum Prior {
    Flat,
    Normal { mu: f64, delta: f64 },
    Beta { alpha: f64, beta: f64 },
    Jeffreys,
    Exponential { lambda: f64 },
    Custom { density: Expression, support: SupportInterval },
}

impl Prior {
    pub fn validate(&self) -> Result<()> {
        match self {
            Prior::Normal { mu, delta } => {
                if !(mu.is_finite() && delta.is_finite() && *delta > 0.0) {
                    return Err(Error::InvalidParams(format!("normal prior (mu={mu}, delta={delta})")));
                }
            }
            Prior::Beta { alpha, beta } => {
                if !(alpha.is_finite() && beta.is_finite() && *alpha > 0.0 && *beta > 0.0) {
                    return Err(Error::InvalidParams(format!("beta prior (alpha={alpha}, beta={beta})")));
                }
            }
            Prior::Exponential { lambda } => {
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return Err(Error::InvalidParams(format!("exponential prior (lambda={lambda})")));
                }
            }
            Prior::Flat | Prior::Jeffreys | Prior::Custom { .. } => {}
        }
        Ok(())
    }

    /// Whether the prior normalizes on its own.
    pub fn proper(&self) -> bool {
        !matches!(self, Prior::Flat | Prior::Jeffreys)
    }

    /// Support of the prior density; `None` means "everywhere the posterior
    /// lives" (the flat prior).
    pub fn support(&self) -> Option<SupportInterval> {
        match self {
            Prior::Flat => None,
            Prior::Normal { .. } => Some(SupportInterval::unbounded()),
            Prior::Beta { .. } | Prior::Jeffreys => Some(SupportInterval::unit()),
            Prior::Exponential { .. } => {
                Some(SupportInterval::new(0.0, f64::INFINITY, true, false).unwrap())
            }
            Prior::Custom { support, .. } => Some(*support),
        }
    }

    /// Unnormalized log density (normalized for the proper parametric kinds).
    pub fn log_density(&self, theta: f64) -> f64 {
        if let Some(s) = self.support() {
            if !s.contains(theta) {
                return f64::NEG_INFINITY;
            }
        }
        match self {
            Prior::Flat => 0.0,
            Prior::Normal { mu, delta } => {
                let z = (theta - mu) / delta;
                -0.5 * z * z - delta.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            Prior::Beta { alpha, beta } => {
                (alpha - 1.0) * theta.ln() + (beta - 1.0) * (1.0 - theta).ln()
                    - statrs::function::beta::ln_beta(*alpha, *beta)
            }
            Prior::Jeffreys => -0.5 * (theta.ln() + (1.0 - theta).ln()),
            Prior::Exponential { lambda } => lambda.ln() - lambda * theta,
            Prior::Custom { density, .. } => density.eval(theta).ln(),
        }
    }

    /// The prior score ρ₀ = π₀'/π₀.
    pub fn score(&self, theta: f64, cfg: &QuadratureConfig) -> f64 {
        match self {
            Prior::Flat => 0.0,
            Prior::Normal { mu, delta } => -(theta - mu) / (delta * delta),
            Prior::Beta { alpha, beta } => {
                (alpha - 1.0) / theta - (beta - 1.0) / (1.0 - theta)
            }
            Prior::Jeffreys => (2.0 * theta - 1.0) / (2.0 * theta * (1.0 - theta)),
            Prior::Exponential { lambda } => -lambda,
            Prior::Custom { .. } => {
                let mut h = cfg.fd_step(theta);
                if let Some(s) = self.support() {
                    if s.lower().is_finite() {
                        h = h.min(0.5 * (theta - s.lower()));
                    }
                    if s.upper().is_finite() {
                        h = h.min(0.5 * (s.upper() - theta));
                    }
                }
                (self.log_density(theta + h) - self.log_density(theta - h)) / (2.0 * h)
            }
        }
    }

    pub fn score_origin(&self) -> DerivativeOrigin {
        match self {
            Prior::Custom { .. } => DerivativeOrigin::FiniteDifference,
            _ => DerivativeOrigin::Analytic,
        }
    }

    pub fn score_fn(&self, cfg: &QuadratureConfig) -> ScoreFunction {
        let prior = self.clone();
        let cfg = cfg.clone();
        let origin = self.score_origin();
        ScoreFunction::new(Arc::new(move |x| prior.score(x, &cfg)), origin)
    }

    /// The prior as a normalized distribution, for the proper kinds.
    pub fn as_distribution(&self, cfg: &QuadratureConfig) -> Result<Option<Distribution>> {
        self.validate()?;
        Ok(Some(match self {
            Prior::Flat | Prior::Jeffreys => return Ok(None),
            Prior::Normal { mu, delta } => Distribution::normal(*mu, *delta)?,
            Prior::Beta { alpha, beta } => Distribution::beta(*alpha, *beta)?,
            Prior::Exponential { lambda } => Distribution::exponential(*lambda)?,
            Prior::Custom { density, support } => {
                Distribution::custom_expr(density, *support, cfg)?
            }
        }))
    }
}

/// The flat-prior posterior P₁ and the prior posterior P₂ for one model.
#[derive(Debug, Clone)]
pub struct PosteriorPair {
    pub p1: Distribution,
    pub p2: Distribution,
    pub model: SamplingModel,
    pub prior: Prior,
}

/// Builds the posterior pair, using conjugate closed forms where they exist
/// and the generic reweighting route otherwise.
pub fn build_posteriors(model: &SamplingModel, prior: &Prior, cfg: &QuadratureConfig) -> Result<PosteriorPair> {
    model.validate()?;
    prior.validate()?;
    let p1 = model.flat_posterior()?;
    let p2 = match (model, prior) {
        (_, Prior::Flat) => p1.clone(),
        (SamplingModel::NormalKnownVariance { sigma, n, xbar }, Prior::Normal { mu, delta }) => {
            let a = *n as f64 / (sigma * sigma) + 1.0 / (delta * delta);
            let b = *xbar * *n as f64 / (sigma * sigma) + mu / (delta * delta);
            Distribution::normal(b / a, (1.0 / a).sqrt())?
        }
        (SamplingModel::Binomial { n, y }, Prior::Beta { alpha, beta }) => {
            Distribution::beta(alpha + *y as f64, beta + (*n - *y) as f64)?
        }
        (SamplingModel::Binomial { n, y }, Prior::Jeffreys) => {
            Distribution::beta(*y as f64 + 0.5, (*n - *y) as f64 + 0.5)?
        }
        (SamplingModel::Poisson { n, xbar }, Prior::Exponential { lambda }) => {
            let shape = (*n as f64 * *xbar).round() + 1.0;
            Distribution::gamma(shape, 1.0 / (*n as f64 + lambda))?
        }
        (_, prior) => {
            // Generic route: reweight the flat posterior by the prior.
            let support = match prior.support() {
                Some(s) => intersect_support(&s, p1.support())?,
                None => *p1.support(),
            };
            let prior = prior.clone();
            let p1c = p1.clone();
            Distribution::custom_log(
                Arc::new(move |t: f64| prior.log_density(t) + p1c.log_pdf(t)),
                support,
                cfg,
            )
            .map_err(|e| match e {
                Error::NonIntegrable(msg) => Error::ImproperPosterior(msg),
                other => other,
            })?
        }
    };
    Ok(PosteriorPair { p1, p2, model: model.clone(), prior: prior.clone() })
}

fn intersect_support(a: &SupportInterval, b: &SupportInterval) -> Result<SupportInterval> {
    let lo = a.lower().max(b.lower());
    let hi = a.upper().min(b.upper());
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::InvalidData(
            "prior support does not overlap the posterior support".into(),
        ));
    }
    SupportInterval::new(
        lo,
        hi,
        lo.is_finite() && a.contains(lo) && b.contains(lo),
        hi.is_finite() && a.contains(hi) && b.contains(hi),
    )
}

/// Prior-impact bounds: expectations of τ₁·ρ₀ against P₂, with the
/// P₁-weighted form as a cross-check and a monotone fast path.
pub fn prior_impact_bounds(pair: &PosteriorPair, cfg: &QuadratureConfig) -> Result<BoundsResult> {
    let p1 = &pair.p1;
    let p2 = &pair.p2;
    let lr = LikelihoodRatio::new(p1, p2, cfg)?;

    let mut boundary_warning = None;
    if let SamplingModel::Binomial { n, y } = &pair.model {
        if *y == 0 || y == n {
            boundary_warning =
                Some("binomial data on the boundary (y = 0 or y = n); bounds may be loose".to_string());
        }
    }

    if detect_monotone(&lr, cfg) != Monotonicity::NonMonotone {
        let mut r = exact_distance_monotone(p1, p2, cfg)?;
        r.conditions.warnings.extend(boundary_warning);
        return Ok(r);
    }

    let kernel = SteinKernel::new(p1, cfg)?;
    let (lo, hi) = p2.integration_domain(cfg);
    let points = breakpoints_in(&[p1, p2], lo, hi);
    let rho = |t: f64| pair.prior.score(t, cfg);

    let signed = integrate_segmented(|t| kernel.eval(t) * rho(t) * p2.pdf(t), &points, cfg);
    let absolute = integrate_segmented(|t| kernel.eval(t) * rho(t).abs() * p2.pdf(t), &points, cfg);
    let mean_diff = (p2.mean() - p1.mean()).abs();

    // P₁-weighted form: E[τ₁·π₀'(Θ₁)]/E[π₀(Θ₁)], insensitive to the prior's
    // normalization.
    let pi0 = |t: f64| pair.prior.log_density(t).exp();
    let (plo, phi) = p1.integration_domain(cfg);
    let (plo, phi) = (plo.max(lo), phi.min(hi));
    let ppoints = breakpoints_in(&[p1, p2], plo, phi);
    let denom = integrate_segmented(|t| pi0(t) * p1.pdf(t), &ppoints, cfg);
    let num_abs = integrate_segmented(
        |t| kernel.eval(t) * (pi0(t) * rho(t)).abs() * p1.pdf(t),
        &ppoints,
        cfg,
    );

    let mut conditions = check_conditions(p1, p2, &kernel, &lr, cfg);
    conditions.warnings.extend(boundary_warning);

    let mut diagnostics = Diagnostics::new();
    diagnostics.lower_direct = signed.value.abs();
    diagnostics.lower_mean_diff = mean_diff;
    diagnostics.upper_error = absolute.error;
    if denom.converged && num_abs.converged && denom.value > 0.0 {
        diagnostics.cross_check = Some(num_abs.value / denom.value);
    }

    let upper = if absolute.converged {
        absolute.value
    } else {
        conditions.warnings.push(format!(
            "upper-bound integral did not converge (residual {:.3e}); upper set to infinity",
            absolute.error
        ));
        f64::INFINITY
    };
    let lower = diagnostics.lower_direct.max(mean_diff);
    let exact = upper.is_finite() && (upper - lower) <= 1e-7 * (1.0 + upper.abs());
    Ok(BoundsResult { lower, upper, exact, method: Method::SteinKernel, conditions, diagnostics })
}

fn closed_form_result(lower: f64, upper: f64, exact: bool, method: Method) -> BoundsResult {
    let mut diagnostics = Diagnostics::new();
    diagnostics.lower_direct = lower;
    diagnostics.lower_mean_diff = lower;
    BoundsResult { lower, upper, exact, method, conditions: ConditionReport::passing(), diagnostics }
}

/// Normal model, normal prior: closed-form bound pair
/// σ²/(nδ²+σ²)·|x̄-μ|  and  the same plus √(2/π)·σ³/(nδ·√(δ²n+σ²)).
pub fn normal_normal_closed_form(sigma: f64, n: u64, xbar: f64, mu: f64, delta: f64) -> Result<BoundsResult> {
    SamplingModel::NormalKnownVariance { sigma, n, xbar }.validate()?;
    (Prior::Normal { mu, delta }).validate()?;
    let nf = n as f64;
    let s2 = sigma * sigma;
    let lower = s2 / (nf * delta * delta + s2) * (xbar - mu).abs();
    let upper = lower
        + (2.0 / std::f64::consts::PI).sqrt() * sigma.powi(3)
            / (nf * delta * (delta * delta * nf + s2).sqrt());
    Ok(closed_form_result(lower, upper, false, Method::SteinKernel))
}

/// Quadrature twin of the normal-normal closed form: the same algebraic
/// skeleton with every moment computed by quadrature against the posteriors.
pub fn normal_normal_quadrature(
    sigma: f64,
    n: u64,
    xbar: f64,
    mu: f64,
    delta: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let model = SamplingModel::NormalKnownVariance { sigma, n, xbar };
    let pair = build_posteriors(&model, &Prior::Normal { mu, delta }, cfg)?;
    let nf = n as f64;
    let mean1 = quad_mean(&pair.p1, cfg)?;
    let mean2 = quad_mean(&pair.p2, cfg)?;
    let lower = (mean2 - mean1).abs();
    let folded = quad_expect(&pair.p2, |t| (t - mean2).abs(), cfg)?;
    let upper = sigma * sigma / (nf * delta * delta) * (folded + (mean2 - mu).abs());
    Ok((lower, upper))
}

/// Binomial model, Beta(α, β) prior: closed-form bound pair.
pub fn binomial_beta_closed_form(n: u64, y: u64, alpha: f64, beta: f64) -> Result<BoundsResult> {
    SamplingModel::Binomial { n, y }.validate()?;
    (Prior::Beta { alpha, beta }).validate()?;
    let (nf, yf) = (n as f64, y as f64);
    let lower = ((yf + 1.0) / (nf + 2.0) * (alpha + beta - 2.0) / (nf + alpha + beta)
        - (alpha - 1.0) / (nf + alpha + beta))
        .abs();
    let upper = ((alpha - 1.0).abs()
        + (yf + alpha) / (nf + alpha + beta) * ((beta - 1.0).abs() - (alpha - 1.0).abs()))
        / (nf + 2.0);
    Ok(closed_form_result(lower, upper, false, Method::SteinKernel))
}

/// Quadrature twin of the binomial-beta closed form.
pub fn binomial_beta_quadrature(
    n: u64,
    y: u64,
    alpha: f64,
    beta: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let model = SamplingModel::Binomial { n, y };
    let pair = build_posteriors(&model, &Prior::Beta { alpha, beta }, cfg)?;
    let nf = n as f64;
    let mean1 = quad_mean(&pair.p1, cfg)?;
    let mean2 = quad_mean(&pair.p2, cfg)?;
    let lower = (mean2 - mean1).abs();
    let upper =
        ((alpha - 1.0).abs() * (1.0 - mean2) + (beta - 1.0).abs() * mean2) / (nf + 2.0);
    Ok((lower, upper))
}

/// Binomial model, Jeffreys prior: closed-form bound pair.
pub fn binomial_jeffreys_closed_form(n: u64, y: u64) -> Result<BoundsResult> {
    SamplingModel::Binomial { n, y }.validate()?;
    let (nf, yf) = (n as f64, y as f64);
    let lower = ((yf + 1.0) / (nf + 2.0) - 0.5).abs() / (nf + 1.0);
    let upper = (((yf + 0.5) * (nf - yf + 0.5) / ((nf + 2.0) * (nf + 1.0) * (nf + 1.0))).sqrt()
        + ((yf + 0.5) / (nf + 1.0) - 0.5).abs())
        / (nf + 2.0);
    Ok(closed_form_result(lower, upper, false, Method::SteinKernel))
}

/// Quadrature twin of the Jeffreys closed form.
pub fn binomial_jeffreys_quadrature(n: u64, y: u64, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let model = SamplingModel::Binomial { n, y };
    let pair = build_posteriors(&model, &Prior::Jeffreys, cfg)?;
    let nf = n as f64;
    let mean1 = quad_mean(&pair.p1, cfg)?;
    let mean2 = quad_mean(&pair.p2, cfg)?;
    let var2 = quad_expect(&pair.p2, |t| (t - mean2) * (t - mean2), cfg)?;
    let lower = (mean2 - mean1).abs();
    let upper = (var2.sqrt() + (mean2 - 0.5).abs()) / (nf + 2.0);
    Ok((lower, upper))
}

/// Poisson model, Exp(λ) prior: the exact distance
/// λ·x̄/(n+λ) + λ/(n·(n+λ)), from the monotone likelihood-ratio route.
pub fn poisson_exponential_exact(n: u64, xbar: f64, lambda: f64) -> Result<BoundsResult> {
    SamplingModel::Poisson { n, xbar }.validate()?;
    (Prior::Exponential { lambda }).validate()?;
    let nf = n as f64;
    let value = lambda * xbar / (nf + lambda) + lambda / (nf * (nf + lambda));
    Ok(closed_form_result(value, value, true, Method::MonotoneLr))
}

/// Poisson model, general differentiable prior:
/// upper = sup|π₀'|·(x̄ + 1/n)/n, lower = the posterior mean difference.
pub fn poisson_general_bound(n: u64, xbar: f64, prior: &Prior, cfg: &QuadratureConfig) -> Result<BoundsResult> {
    let model = SamplingModel::Poisson { n, xbar };
    model.validate()?;
    prior.validate()?;
    let nf = n as f64;

    let sup = match prior {
        Prior::Flat => Some(0.0),
        Prior::Exponential { lambda } => Some(lambda * lambda),
        Prior::Normal { mu, delta } => {
            // |π₀'(θ)| = |θ-μ|·φ_δ(θ-μ)/δ² on θ ≥ 0; the stationary points
            // are θ = μ ± δ, plus the boundary θ = 0.
            let d2 = delta * delta;
            let dens = |t: f64| {
                let z = (t - mu) / delta;
                (-0.5 * z * z).exp() / (delta * (2.0 * std::f64::consts::PI).sqrt())
            };
            let candidates = [mu - delta, mu + delta, 0.0];
            Some(
                candidates
                    .iter()
                    .filter(|t| **t >= 0.0)
                    .map(|t| (t - mu).abs() / d2 * dens(*t))
                    .fold(0.0f64, f64::max),
            )
        }
        _ => {
            // The bound needs π₀ differentiable on all of θ ≥ 0: a prior
            // whose support ends inside the half-line has a kink there.
            let covers = prior
                .support()
                .map(|s| s.lower() <= 0.0 && s.upper() == f64::INFINITY)
                .unwrap_or(true);
            if !covers {
                return Err(Error::InvalidParams(
                    "prior must have a differentiable density on the whole positive half-line".into(),
                ));
            }
            let dist = prior.as_distribution(cfg)?.ok_or_else(|| {
                Error::InvalidParams("prior has no normalizable density on the positive half-line".into())
            })?;
            numeric_sup_density_derivative(&dist, cfg)
        }
    };

    let pair = build_posteriors(&model, prior, cfg)?;
    let lower = (pair.p2.mean() - pair.p1.mean()).abs();
    let mut result = match sup {
        Some(sup) => {
            let upper = sup * (xbar + 1.0 / nf) / nf;
            let mut r = closed_form_result(lower, upper, false, Method::VarianceBound);
            r.diagnostics.sup_derivative = Some(sup);
            r
        }
        None => {
            let mut r = closed_form_result(lower, f64::INFINITY, false, Method::VarianceBound);
            r.conditions
                .warnings
                .push("sup|π₀'| keeps growing under grid refinement; upper set to infinity".into());
            r
        }
    };
    result.exact = false;
    Ok(result)
}

/// Stabilized grid supremum of |π'| for a normalized density.
fn numeric_sup_density_derivative(d: &Distribution, cfg: &QuadratureConfig) -> Option<f64> {
    let sup_on = |m: usize| -> f64 {
        let mut best = 0.0f64;
        for i in 0..m {
            let u = (i as f64 + 1.0) / (m as f64 + 1.0);
            let t = d.quantile(u).expect("u inside (0,1)");
            let v = (d.pdf(t) * d.score(t, cfg)).abs();
            if v > best {
                best = v;
            }
        }
        best
    };
    let n = cfg.grid_points;
    let (s1, s2, s3) = (sup_on(n), sup_on(2 * n + 1), sup_on(4 * n + 3));
    let growth = |a: f64, b: f64| b > a * 1.05 + 1e-12;
    if growth(s1, s2) && growth(s2, s3) {
        None
    } else {
        Some(s3.max(s2).max(s1))
    }
}

fn quad_mean(d: &Distribution, cfg: &QuadratureConfig) -> Result<f64> {
    quad_expect(d, |t| t, cfg)
}

fn quad_expect(d: &Distribution, h: impl Fn(f64) -> f64, cfg: &QuadratureConfig) -> Result<f64> {
    let (lo, hi) = d.integration_domain(cfg);
    let points = breakpoints_in(&[d], lo, hi);
    integrate_segmented(|t| h(t) * d.pdf(t), &points, cfg)
        .require_converged("posterior expectation")
}
