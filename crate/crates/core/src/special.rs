//! Small special-function helpers on top of `statrs`.

use std::f64::consts::PI;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Log of the standard normal density.
pub fn normal_log_pdf(z: f64) -> f64 {
    -0.5 * z * z - 0.5 * (2.0 * PI).ln()
}

/// Standard normal cdf.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// Log of the standard normal cdf, stable for large negative arguments.
///
/// `erfc` carries Φ(z) down to z ≈ -37 before underflow; past that the
/// asymptotic expansion Φ(z) ~ φ(z)/|z| · Σ (-1)ᵏ(2k-1)!!/z²ᵏ takes over,
/// where its truncation error is far below machine precision.
pub fn normal_log_cdf(z: f64) -> f64 {
    if z > -37.0 {
        normal_cdf(z).ln()
    } else {
        let z2 = z * z;
        let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2)
            + 105.0 / (z2 * z2 * z2 * z2)
            - 945.0 / (z2 * z2 * z2 * z2 * z2);
        normal_log_pdf(z) - (-z).ln() + series.ln()
    }
}

/// Ratio φ(z)/Φ(z) (the inverse Mills ratio), stable everywhere.
pub fn mills_ratio_inverse(z: f64) -> f64 {
    (normal_log_pdf(z) - normal_log_cdf(z)).exp()
}
