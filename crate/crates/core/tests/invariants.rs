//! Library-wide invariant suites: normalization, kernel identities, bound
//! sandwiches, oracle metric axioms and Bayes conjugacy cross-checks.

mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use stein_bounds::bayes::{
    binomial_beta_closed_form, binomial_beta_quadrature, binomial_jeffreys_closed_form,
    binomial_jeffreys_quadrature, build_posteriors, normal_normal_closed_form,
    normal_normal_quadrature, prior_impact_bounds, Prior, SamplingModel,
};
use stein_bounds::bounds::wasserstein_bounds;
use stein_bounds::oracle::{oracle, oracle_cdf};
use stein_bounds::quad::integrate_segmented;
use stein_bounds::stein::{
    expectation, inverse_stein_operator, likelihood_ratio, stein_operator_apply, SteinKernel,
};
use stein_bounds::suites;
use stein_bounds::{Distribution, QuadratureConfig};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn catalog() -> Vec<Distribution> {
    let cfg = cfg();
    vec![
        Distribution::normal(0.0, 1.0).unwrap(),
        Distribution::normal(-1.2, 0.6).unwrap(),
        Distribution::beta(2.0, 2.0).unwrap(),
        Distribution::beta(0.9, 3.0).unwrap(),
        Distribution::gamma(2.0, 1.0).unwrap(),
        Distribution::gamma(4.5, 0.4).unwrap(),
        Distribution::exponential(1.0).unwrap(),
        Distribution::exponential(0.25).unwrap(),
        Distribution::skew_normal(0.0, 1.0, 1.0, &cfg).unwrap(),
        Distribution::skew_normal(1.0, 2.0, -4.0, &cfg).unwrap(),
    ]
}

#[test]
fn catalog_density_mass_is_one() {
    let cfg = cfg();
    for d in catalog() {
        let (lo, hi) = d.integration_domain(&cfg);
        let out = integrate_segmented(|x| d.pdf(x), &[lo, 0.5 * (lo + hi), hi], &cfg);
        assert!(out.converged);
        assert!(
            (out.value - 1.0).abs() <= 1e-8,
            "{:?}: mass {}",
            d.family(),
            out.value
        );
    }
}

#[test]
fn catalog_moments_match_quadrature() {
    let cfg = cfg();
    for d in catalog() {
        let mean = expectation(&d, &|x| x, &cfg).unwrap();
        let second = expectation(&d, &|x| x * x, &cfg).unwrap();
        let var = second - mean * mean;
        assert!(
            (mean - d.mean()).abs() <= 1e-6 * (1.0 + d.mean().abs()),
            "{:?}: mean {} vs {}",
            d.family(),
            mean,
            d.mean()
        );
        assert!(
            (var - d.variance()).abs() <= 1e-6 * (1.0 + d.variance()),
            "{:?}: var {} vs {}",
            d.family(),
            var,
            d.variance()
        );
    }
}

#[test]
fn quantile_cdf_identity_on_grid() {
    let cfg = cfg();
    for d in catalog() {
        for i in 0..101 {
            let u = 1e-6 + (1.0 - 2e-6) * i as f64 / 100.0;
            let x = d.quantile(u).unwrap();
            // Identity in the x-domain, as |quantile(cdf(x)) - x|.
            let x_back = d.quantile(d.cdf(x).clamp(1e-15, 1.0 - 1e-15)).unwrap();
            assert!(
                (x_back - x).abs() <= 1e-7 * (1.0 + x.abs()),
                "{:?} at u={u}: {x} vs {x_back}",
                d.family()
            );
        }
        let _ = cfg;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_quantile_monotone_and_consistent(
        family in 0..4usize,
        a in 0.6f64..4.0,
        b in 0.4f64..3.0,
        u1 in 1e-4f64..0.9999,
        u2 in 1e-4f64..0.9999,
    ) {
        let d = match family {
            0 => Distribution::normal(a - 2.0, b).unwrap(),
            1 => Distribution::beta(a, b + 0.4).unwrap(),
            2 => Distribution::gamma(a, b).unwrap(),
            _ => Distribution::exponential(b).unwrap(),
        };
        let (lo, hi) = (u1.min(u2), u1.max(u2));
        let (xlo, xhi) = (d.quantile(lo).unwrap(), d.quantile(hi).unwrap());
        prop_assert!(xlo <= xhi, "quantile not monotone: q({lo})={xlo} > q({hi})={xhi}");
        prop_assert!((d.cdf(xlo) - lo).abs() < 1e-9);
        prop_assert!(d.pdf(xlo) >= 0.0);
    }
}

#[test]
fn numeric_kernel_suite_clean() {
    let report = suites::run_kernel_suite(&cfg());
    assert!(report.passed, "{:#?}", report.failures);
}

#[test]
fn g_h_suite_clean() {
    let report = suites::run_gh_suite(&cfg());
    assert!(report.passed, "{:#?}", report.failures);
}

#[test]
fn inverse_operator_followed_by_operator_recovers_h() {
    // T_P(T_P⁻¹ h)(x) = h(x) - E[h(X)], with the outer derivative taken by
    // finite differences.
    let cfg = cfg();
    let dists = [Distribution::normal(0.0, 1.0).unwrap(), Distribution::beta(2.0, 2.0).unwrap()];
    type Named = (&'static str, fn(f64) -> f64);
    let hs: [Named; 3] = [("id", |y| y), ("square", |y| y * y), ("sin", |y| y.sin())];
    for d in &dists {
        for (name, h) in &hs {
            let eh = expectation(d, h, &cfg).unwrap();
            for i in 1..8 {
                let u = i as f64 / 8.0;
                let x = d.quantile(u).unwrap();
                let f = |t: f64| inverse_stein_operator(d, h, t, &cfg).unwrap();
                let dx = 1e-5 * (1.0 + x.abs());
                let f_prime = (f(x + dx) - f(x - dx)) / (2.0 * dx);
                let recovered = f_prime + f(x) * d.score(x, &cfg);
                assert!(
                    (recovered - (h(x) - eh)).abs() <= 1e-6 * (1.0 + (h(x) - eh).abs()),
                    "{:?}, h={name}, x={x}: {recovered} vs {}",
                    d.family(),
                    h(x) - eh
                );
            }
        }
    }
}

#[test]
fn operator_zero_mean_on_catalog() {
    let cfg = cfg();
    let id = |x: f64| x;
    let one = |_: f64| 1.0;
    let zero = |_: f64| 0.0;
    let sq = |x: f64| x * x;
    let dsq = |x: f64| 2.0 * x;
    for d in [Distribution::normal(0.0, 1.0).unwrap(), Distribution::beta(2.0, 2.0).unwrap()] {
        type FnPair = (fn(f64) -> f64, fn(f64) -> f64);
        let fs: [FnPair; 3] = [(one, zero), (id, one), (sq, dsq)];
        for (f, fp) in fs {
            let e = expectation(&d, &|x| stein_operator_apply(&d, &f, &fp, x, &cfg), &cfg).unwrap();
            assert!(e.abs() <= 1e-7, "{:?}: E[Tf] = {e}", d.family());
        }
    }
}

#[test]
fn inverse_operator_against_simpson_oracle() {
    // Independent Simpson evaluation of (1/p(x))·∫_0^x (h - E h)·p for
    // Beta(2,2) and h = Id.
    let cfg = cfg();
    let d = Distribution::beta(2.0, 2.0).unwrap();
    let pdf = |y: f64| d.pdf(y);
    let h = |y: f64| y;
    let eh = common::simpson_dense(&|y| h(y) * pdf(y), 1e-12, 1.0 - 1e-12);
    for x in [0.2, 0.5, 0.7] {
        let oracle_value =
            common::simpson_dense(&|y| (h(y) - eh) * pdf(y), 1e-12, x) / d.pdf(x);
        let got = inverse_stein_operator(&d, &h, x, &cfg).unwrap();
        assert_abs_diff_eq!(got, oracle_value, epsilon = 1e-8);
    }
}

#[test]
fn mean_difference_identity_signed() {
    // E[π₀'(X₁)·τ₁(X₁)] = E[X₂] - E[X₁], with sign.
    let cfg = cfg();
    let pairs = [
        (Distribution::normal(0.0, 1.0).unwrap(), Distribution::normal(0.7, 0.8).unwrap()),
        (Distribution::beta(2.0, 2.0).unwrap(), Distribution::beta(3.0, 4.0).unwrap()),
        (Distribution::gamma(2.0, 1.0).unwrap(), Distribution::gamma(3.0, 0.8).unwrap()),
    ];
    for (p1, p2) in pairs {
        let lr = likelihood_ratio(&p1, &p2, &cfg).unwrap();
        let kernel = SteinKernel::new(&p1, &cfg).unwrap();
        let signed = expectation(&p1, &|x| lr.derivative(x) * kernel.eval(x), &cfg).unwrap();
        let mean_diff = p2.mean() - p1.mean();
        assert!(
            (signed - mean_diff).abs() <= 1e-7,
            "{:?} vs {:?}: {signed} vs {mean_diff}",
            p1.family(),
            p2.family()
        );
    }
}

#[test]
fn likelihood_ratio_has_unit_mean() {
    let cfg = cfg();
    let pairs = [
        (Distribution::normal(0.0, 1.0).unwrap(), Distribution::skew_normal(0.0, 1.0, 2.0, &cfg).unwrap()),
        (Distribution::beta(2.0, 2.0).unwrap(), Distribution::beta(0.9, 1.5).unwrap()),
        (Distribution::exponential(1.0).unwrap(), Distribution::gamma(2.0, 0.7).unwrap()),
    ];
    for (p1, p2) in pairs {
        let lr = likelihood_ratio(&p1, &p2, &cfg).unwrap();
        let e = expectation(&p1, &|x| lr.ratio(x), &cfg).unwrap();
        assert!(
            (e - 1.0).abs() <= 1e-7,
            "{:?} vs {:?}: E[π₀] = {e}",
            p1.family(),
            p2.family()
        );
    }
}

#[test]
fn sandwich_suite_sample() {
    let cfg = QuadratureConfig { seed: 42, ..cfg() };
    let report = suites::run_sandwich_suite(40, &cfg);
    assert!(report.passed, "{:#?}", report.failures);
}

#[test]
fn oracle_suite_sample() {
    let cfg = QuadratureConfig { seed: 42, ..cfg() };
    let report = suites::run_oracle_suite(12, &cfg);
    assert!(report.passed, "{:#?}", report.failures);
}

#[test]
fn oracle_shift_equivariance() {
    let cfg = cfg();
    let p1 = Distribution::normal(0.0, 1.0).unwrap();
    for m in [0.1, 0.5, 1.0, 3.0] {
        let p2 = Distribution::normal(m, 1.0).unwrap();
        let v = oracle_cdf(&p1, &p2, &cfg).unwrap();
        assert!((v - m).abs() <= 1e-6, "m={m}: oracle {v}");
    }
}

#[test]
fn conjugacy_cross_check_cdf_grids() {
    // The generic reweighting posterior agrees with the conjugate closed form
    // on a 201-point cdf grid.
    let cfg = cfg();
    let cases: Vec<(SamplingModel, Prior)> = vec![
        (
            SamplingModel::NormalKnownVariance { sigma: 1.0, n: 4, xbar: 0.5 },
            Prior::Normal { mu: 0.0, delta: 1.0 },
        ),
        (SamplingModel::Binomial { n: 10, y: 5 }, Prior::Beta { alpha: 2.0, beta: 2.0 }),
        (SamplingModel::Poisson { n: 10, xbar: 2.0 }, Prior::Exponential { lambda: 1.0 }),
    ];
    for (model, prior) in cases {
        let conjugate = build_posteriors(&model, &prior, &cfg).unwrap();
        // Rebuild the posterior through the generic custom route.
        let p1 = conjugate.p1.clone();
        let prior_clone = prior.clone();
        let support = prior.support().unwrap_or(*p1.support());
        let lo = support.lower().max(p1.support().lower());
        let hi = support.upper().min(p1.support().upper());
        let custom = Distribution::custom_log(
            std::sync::Arc::new(move |t: f64| prior_clone.log_density(t) + p1.log_pdf(t)),
            stein_bounds::SupportInterval::new(lo, hi, false, false).unwrap(),
            &cfg,
        )
        .unwrap();
        let mut max_diff = 0.0f64;
        for i in 0..201 {
            let u = 1e-4 + (1.0 - 2e-4) * i as f64 / 200.0;
            let t = conjugate.p2.quantile(u).unwrap();
            max_diff = max_diff.max((custom.cdf(t) - conjugate.p2.cdf(t)).abs());
        }
        assert!(max_diff <= 1e-6, "{model:?}: max cdf discrepancy {max_diff}");
    }
}

#[test]
fn closed_forms_match_quadrature_twins() {
    let cfg = cfg();
    for (n, y, a, b) in [(10u64, 5u64, 2.0, 2.0), (25, 7, 1.5, 3.0), (40, 35, 4.0, 0.8)] {
        let closed = binomial_beta_closed_form(n, y, a, b).unwrap();
        let (lo, up) = binomial_beta_quadrature(n, y, a, b, &cfg).unwrap();
        assert_abs_diff_eq!(lo, closed.lower, epsilon = 1e-6);
        assert_abs_diff_eq!(up, closed.upper, epsilon = 1e-6);
    }
    for (n, y) in [(10u64, 5u64), (100, 37)] {
        let closed = binomial_jeffreys_closed_form(n, y).unwrap();
        let (lo, up) = binomial_jeffreys_quadrature(n, y, &cfg).unwrap();
        assert_abs_diff_eq!(lo, closed.lower, epsilon = 1e-5);
        assert_abs_diff_eq!(up, closed.upper, epsilon = 1e-5);
    }
    for (sigma, n, xbar, mu, delta) in [(1.0, 4u64, 0.5, 0.0, 1.0), (2.0, 25, -0.4, 0.1, 0.7)] {
        let closed = normal_normal_closed_form(sigma, n, xbar, mu, delta).unwrap();
        let (lo, up) = normal_normal_quadrature(sigma, n, xbar, mu, delta, &cfg).unwrap();
        assert_abs_diff_eq!(lo, closed.lower, epsilon = 1e-6);
        assert_abs_diff_eq!(up, closed.upper, epsilon = 1e-6);
    }
}

#[test]
fn bayes_cases_sandwich_the_oracle() {
    let cfg = cfg();
    let cases: Vec<(SamplingModel, Prior)> = vec![
        (
            SamplingModel::NormalKnownVariance { sigma: 1.0, n: 4, xbar: 0.5 },
            Prior::Normal { mu: 0.0, delta: 1.0 },
        ),
        (SamplingModel::Binomial { n: 10, y: 5 }, Prior::Beta { alpha: 2.0, beta: 2.0 }),
        (SamplingModel::Binomial { n: 10, y: 5 }, Prior::Jeffreys),
        (SamplingModel::Poisson { n: 10, xbar: 2.0 }, Prior::Exponential { lambda: 1.0 }),
    ];
    for (model, prior) in cases {
        let pair = build_posteriors(&model, &prior, &cfg).unwrap();
        let bounds = prior_impact_bounds(&pair, &cfg).unwrap();
        let o = oracle(&pair.p1, &pair.p2, &cfg);
        assert!(o.converged, "{model:?}: oracle agreement {}", o.agreement);
        assert!(
            bounds.lower - 1e-5 <= o.value() && o.value() <= bounds.upper + 1e-5,
            "{model:?}: oracle {} outside [{}, {}]",
            o.value(),
            bounds.lower,
            bounds.upper
        );
    }
}

#[test]
fn normal_normal_upper_decay_rate() {
    // With x̄ = μ only the O(n^{-3/2}) term remains: a hundredfold n scales
    // the bound by ~1e-3.
    let upper = |n: u64| normal_normal_closed_form(1.0, n, 0.3, 0.3, 1.0).unwrap().upper;
    for n in [100u64, 1000] {
        let ratio = upper(100 * n) / upper(n);
        assert!(ratio <= 0.011 + 1e-3, "n={n}: ratio {ratio}");
    }
}

#[test]
fn wasserstein_bounds_conditions_pass_on_smooth_pairs() {
    let cfg = cfg();
    let p1 = Distribution::normal(0.0, 1.0).unwrap();
    let p2 = Distribution::skew_normal(0.0, 1.0, 2.0, &cfg).unwrap();
    let r = wasserstein_bounds(&p1, &p2, &cfg).unwrap();
    assert!(r.conditions.lower_endpoint_ok);
    assert!(r.conditions.upper_endpoint_ok);
    assert!(r.conditions.integrability_ok);
    assert!(r.conditions.warnings.is_empty(), "{:?}", r.conditions.warnings);
}
