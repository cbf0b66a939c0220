//! Shared test utilities: a deliberately simple composite-Simpson integrator,
//! independent of the library's Gauss-Kronrod machinery, used as the oracle
//! for derived expected values.

/// Composite Simpson rule with `panels` panels (rounded up to even).
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = if panels.is_multiple_of(2) { panels } else { panels + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        acc += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Simpson with a dense fixed grid, enough for the smooth integrands used in
/// these tests.
pub fn simpson_dense(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    simpson(f, a, b, 20_000)
}
