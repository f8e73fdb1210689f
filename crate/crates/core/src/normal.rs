//! Standard normal CDF and quantile on top of the complementary error function.

use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::SQRT_2;

/// Φ(x), evaluated through `erfc` so the lower tail keeps full relative precision.
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// 1 − Φ(x) without cancellation in the upper tail.
pub fn survival(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Φ⁻¹(u) for u in (0, 1).
pub fn quantile(u: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * u)
}

/// Inverse of `survival`: returns x with 1 − Φ(x) = q.
pub fn survival_quantile(q: f64) -> f64 {
    SQRT_2 * erfc_inv(2.0 * q)
}

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}
