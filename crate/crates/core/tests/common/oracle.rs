//! Independent numerical oracles for the special functions.

use statrs::function::gamma::gamma;

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Tanh-sinh quadrature of f(t, 1 - t) over [0, 1]. The complement is passed
/// separately so endpoint singularities are evaluated without cancellation.
pub fn tanh_sinh(f: impl Fn(f64, f64) -> f64) -> f64 {
    let h = 1.0 / 128.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut sum = 0.0;
    for k in -(6 * 128)..=(6 * 128) {
        let s = k as f64 * h;
        let q = 2.0 * half_pi * s.sinh();
        let t = 1.0 / (1.0 + (-q).exp());
        let c = 1.0 / (1.0 + q.exp());
        if t == 0.0 || c == 0.0 {
            continue;
        }
        let w = t * c * 2.0 * half_pi * s.cosh();
        sum += w * f(t, c);
    }
    sum * h
}

/// Euler integral representation, valid for c > b > 0 and z < 1.
pub fn euler_2f1(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let pre = gamma(c) / (gamma(b) * gamma(c - b));
    pre * tanh_sinh(|t, s| t.powf(b - 1.0) * s.powf(c - b - 1.0) * (1.0 - z * t).powf(-a))
}

/// Term-by-term Gauss series with no early exit.
pub fn brute_series(a: f64, b: f64, c: f64, z: f64, n: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..n {
        let k = k as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
    }
    sum
}

pub fn erfi_quadrature(x: f64) -> f64 {
    std::f64::consts::FRAC_2_SQRT_PI * x * tanh_sinh(|t, _| (x * t).powi(2).exp())
}
