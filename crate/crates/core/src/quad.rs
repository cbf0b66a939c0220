//! Adaptive Gauss-Kronrod quadrature.
//!
//! A 10-point Gauss / 21-point Kronrod pair drives global adaptive bisection:
//! the interval with the largest error estimate is split until the summed
//! error meets `max(abs_tol, rel_tol * |integral|)`, a per-interval depth cap
//! is reached, or the segment budget runs out. Kronrod nodes are strictly
//! interior, so integrands may be singular at interval endpoints.

use crate::config::QuadratureConfig;
use crate::error::{Error, Result};

/// Kronrod abscissae for the positive half of [-1, 1] (G10-K21 pair).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.000000000000000000000000000000000,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

/// 10-point Gauss weights (positive half).
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome {
    pub value: f64,
    /// Estimated absolute error remaining.
    pub error: f64,
    /// Whether the requested tolerance was met.
    pub converged: bool,
    /// Number of interval bisections performed.
    pub subdivisions: u32,
}

impl QuadOutcome {
    /// Converts a non-converged outcome into an error.
    pub fn require_converged(self, what: &str) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::QuadratureDivergent(format!(
                "{what}: value {:.6e}, residual error {:.3e}",
                self.value, self.error
            )))
        }
    }
}

/// One Gauss-Kronrod evaluation on [a, b]. Returns (integral, error estimate).
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut resabs = kronrod.abs();
    let mut fv = [0.0f64; 21];
    fv[10] = fc;

    for (j, xk) in XGK.iter().enumerate().take(10) {
        let dx = half * xk;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[20 - j] = f2;
        let sum = f1 + f2;
        kronrod += WGK[j] * sum;
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }

    let mean = kronrod * 0.5;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for (j, v) in fv.iter().enumerate().take(10) {
        resasc += WGK[j] * ((v - mean).abs() + (fv[20 - j] - mean).abs());
    }

    let value = kronrod * half;
    resabs *= half.abs();
    resasc *= half.abs();

    // QUADPACK-style error rescaling.
    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

/// Hard cap on the number of segments a single integral may accumulate.
const SEGMENT_BUDGET: usize = 4096;

fn adaptive(points: &[f64], f: &dyn Fn(f64) -> f64, cfg: &QuadratureConfig) -> (Vec<Segment>, QuadOutcome) {
    let mut segs: Vec<Segment> = Vec::with_capacity(64);
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gauss_kronrod(&f, w[0], w[1]);
            segs.push(Segment { a: w[0], b: w[1], value: v, error: e, depth: 0 });
        }
    }
    if segs.is_empty() {
        return (
            segs,
            QuadOutcome { value: 0.0, error: 0.0, converged: true, subdivisions: 0 },
        );
    }

    let mut subdivisions = 0u32;
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        if !total.is_finite() {
            return (
                segs,
                QuadOutcome { value: total, error: f64::INFINITY, converged: false, subdivisions },
            );
        }
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if err <= tol {
            return (segs, QuadOutcome { value: total, error: err, converged: true, subdivisions });
        }
        // Worst splittable segment; first match wins for determinism.
        let mut worst: Option<usize> = None;
        for (i, s) in segs.iter().enumerate() {
            if s.depth < cfg.max_depth && s.error > tol / segs.len() as f64 {
                match worst {
                    Some(w) if segs[w].error >= s.error => {}
                    _ => worst = Some(i),
                }
            }
        }
        let Some(i) = worst else {
            return (segs, QuadOutcome { value: total, error: err, converged: false, subdivisions });
        };
        if segs.len() >= SEGMENT_BUDGET {
            return (segs, QuadOutcome { value: total, error: err, converged: false, subdivisions });
        }
        let s = segs[i];
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // Interval exhausted at floating-point resolution; freeze it.
            segs[i].depth = cfg.max_depth;
            continue;
        }
        let (v1, e1) = gauss_kronrod(&f, s.a, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, s.b);
        segs[i] = Segment { a: s.a, b: mid, value: v1, error: e1, depth: s.depth + 1 };
        segs.push(Segment { a: mid, b: s.b, value: v2, error: e2, depth: s.depth + 1 });
        subdivisions += 1;
    }
}

/// Integrate `f` over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> QuadOutcome {
    adaptive(&[a, b], &f, cfg).1
}

/// Integrate `f` over a sorted list of breakpoints (at least two).
///
/// Breakpoints seed the initial partition; they are the tool of choice for
/// integrands with kinks or sharp local features at known locations.
pub fn integrate_segmented<F: Fn(f64) -> f64>(f: F, points: &[f64], cfg: &QuadratureConfig) -> QuadOutcome {
    adaptive(points, &f, cfg).1
}

/// A cumulative-integral table over a fixed partition.
///
/// Built once from an adaptive pass, it answers prefix integrals
/// `F(x) = ∫_a^x f` with a single non-adaptive Gauss-Kronrod evaluation on the
/// residual sliver, which keeps repeated cdf/kernel queries cheap.
#[derive(Debug, Clone)]
pub struct CumulativeTable {
    /// Segment edges, strictly increasing, length n + 1.
    edges: Vec<f64>,
    /// Per-segment integrals, length n.
    seg: Vec<f64>,
    /// Prefix sums: prefix[i] = ∫_{edges[0]}^{edges[i]} f, length n + 1.
    prefix: Vec<f64>,
}

impl CumulativeTable {
    /// Runs the adaptive integrator and freezes its final partition.
    pub fn build<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<(Self, QuadOutcome)> {
        let (mut segs, outcome) = adaptive(&[a, b], &(move |x| f(x)), cfg);
        if !outcome.value.is_finite() {
            return Err(Error::NonIntegrable(format!(
                "integral not finite on [{a}, {b}]"
            )));
        }
        segs.sort_by(|s, t| s.a.partial_cmp(&t.a).unwrap());
        let mut edges = Vec::with_capacity(segs.len() + 1);
        let mut seg = Vec::with_capacity(segs.len());
        edges.push(segs[0].a);
        for s in &segs {
            edges.push(s.b);
            seg.push(s.value);
        }
        let mut prefix = Vec::with_capacity(seg.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for v in &seg {
            acc += v;
            prefix.push(acc);
        }
        Ok((Self { edges, seg, prefix }, outcome))
    }

    pub fn lower(&self) -> f64 {
        self.edges[0]
    }

    pub fn upper(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Total integral over the partition.
    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    /// Index of the segment containing `x` (clamped into range).
    fn segment_of(&self, x: f64) -> usize {
        match self.edges.binary_search_by(|e| e.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.seg.len() - 1),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.seg.len() - 1),
        }
    }

    /// Prefix integral ∫_{lower}^{x} f, re-evaluating `f` on the tail sliver.
    pub fn prefix_at<F: Fn(f64) -> f64>(&self, f: &F, x: f64) -> f64 {
        if x <= self.lower() {
            return 0.0;
        }
        if x >= self.upper() {
            return self.total();
        }
        let i = self.segment_of(x);
        let a = self.edges[i];
        if x <= a {
            return self.prefix[i];
        }
        let (partial, _) = gauss_kronrod(f, a, x);
        self.prefix[i] + partial
    }

    /// Applies a different integrand on the frozen partition.
    ///
    /// Useful when a companion integrand (same smoothness structure) must be
    /// accumulated over the identical segments, e.g. moment integrals.
    pub fn reintegrate<F: Fn(f64) -> f64>(&self, f: &F) -> f64 {
        let mut acc = 0.0;
        for w in self.edges.windows(2) {
            acc += gauss_kronrod(f, w[0], w[1]).0;
        }
        acc
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
    fn polynomial_is_exact() {
        let out = integrate(|x| 3.0 * x * x, 0.0, 2.0, &cfg());
        assert!(out.converged);
        assert_abs_diff_eq!(out.value, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_mass() {
        let out = integrate(|x| (-0.5 * x * x).exp(), -12.0, 12.0, &cfg());
        assert!(out.converged);
        assert_abs_diff_eq!(out.value, (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2; Kronrod nodes never touch x = 0.
        let out = integrate(|x| x.powf(-0.5), 0.0, 1.0, &cfg());
        assert!(out.converged, "residual error {}", out.error);
        assert_abs_diff_eq!(out.value, 2.0, epsilon = 1e-7);
    }

    #[test]
    fn divergent_integrand_reports_failure() {
        let out = integrate(|x| 1.0 / x, 0.0, 1.0, &cfg());
        assert!(!out.converged);
    }

    #[test]
    fn breakpoints_resolve_kinks() {
        let f = |x: f64| (x - 0.3).abs();
        let direct = integrate_segmented(f, &[0.0, 0.3, 1.0], &cfg());
        assert!(direct.converged);
        // ∫_0^1 |x - 0.3| = 0.3²/2 + 0.7²/2
        assert_abs_diff_eq!(direct.value, 0.045 + 0.245, epsilon = 1e-12);
    }

    #[test]
    fn moderate_spike_found_without_seeding() {
        // Width-1e-2 spike; plain adaptivity must find it from the midpoint rule.
        let lam = 1e2;
        let f = move |x: f64| {
            2.0 * lam * (-0.5 * (lam * x) * (lam * x)).exp() / (2.0 * std::f64::consts::PI).sqrt()
                * (-0.5 * x * x).exp()
                / (2.0 * std::f64::consts::PI).sqrt()
        };
        let out = integrate(f, -8.5, 8.5, &cfg());
        let expect = (2.0 / std::f64::consts::PI).sqrt() * lam / (1.0 + lam * lam).sqrt();
        assert!(out.converged);
        assert_abs_diff_eq!(out.value, expect, epsilon = 1e-8);
    }

    #[test]
    fn narrow_spike_needs_seeded_breakpoints() {
        // A width-1e-4 spike hides between Kronrod nodes of a wide interval;
        // callers integrating density-weighted quantities must seed the
        // partition with quantile-ladder breakpoints of the measures involved.
        let lam = 1e4;
        let f = move |x: f64| {
            2.0 * lam * (-0.5 * (lam * x) * (lam * x)).exp() / (2.0 * std::f64::consts::PI).sqrt()
                * (-0.5 * x * x).exp()
                / (2.0 * std::f64::consts::PI).sqrt()
        };
        let points = [-8.5, -1.1e-3, -2.8e-4, -6.0e-5, 1.2e-6, 1.25e-4, 1.25e-2, 8.5];
        let out = integrate_segmented(f, &points, &cfg());
        let expect = (2.0 / std::f64::consts::PI).sqrt() * lam / (1.0 + lam * lam).sqrt();
        assert!(out.converged);
        assert_abs_diff_eq!(out.value, expect, epsilon = 1e-8);
    }

    #[test]
    fn cumulative_table_prefix_matches_direct() {
        let f = |x: f64| (-x).exp();
        let (table, out) = CumulativeTable::build(&f, 0.0, 30.0, &cfg()).unwrap();
        assert!(out.converged);
        for x in [0.0, 0.1, 1.0, 2.5, 7.0, 29.9] {
            assert_abs_diff_eq!(table.prefix_at(&f, x), 1.0 - (-x).exp(), epsilon = 1e-10);
        }
        assert_abs_diff_eq!(table.total(), 1.0 - (-30.0f64).exp(), epsilon = 1e-10);
    }
}
