use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::function::erf::erfc;

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adaptive(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, whole: f64, m: f64, fm: f64, tol: f64, depth: u32) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
        + adaptive(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(&f, a, fa, b, fb);
    adaptive(&f, a, fa, b, fb, whole, m, fm, tol, 50)
}

/// `P(Q < x)` for the range of `k` independent standard normals (the
/// studentized range with infinite degrees of freedom).
pub fn studentized_range_cdf(x: f64, k: usize) -> f64 {
    if x <= 0.0 || k < 2 {
        return 0.0;
    }
    let power = (k - 1) as i32;
    let integrand = |z: f64| normal_pdf(z) * (normal_cdf(z) - normal_cdf(z - x)).powi(power);
    // The integrand is negligible outside [-9, 9 + x].
    let split = x / 2.0;
    let total = integrate(integrand, -9.0, split, 1e-12) + integrate(integrand, split, 9.0 + x, 1e-12);
    (k as f64 * total).clamp(0.0, 1.0)
}

/// Upper tail `P(Q >= x)`.
pub fn studentized_range_sf(x: f64, k: usize) -> f64 {
    (1.0 - studentized_range_cdf(x, k)).clamp(0.0, 1.0)
}
