//! Exact sampling from the univariate truncated normal distribution.
//!
//! The standardized interval `(a, b)` selects one of three exact samplers:
//!
//! * `a > 0.66` (or symmetrically `b < -0.66`): Rayleigh-proposal rejection
//!   in the tail, with acceptance probability bounded away from zero however
//!   far out the interval lies;
//! * wide intervals touching the bulk: plain rejection from N(0, 1);
//! * narrow bulk intervals: inversion of the CDF through `erfc`.

use rand::Rng;
use rand_distr::{Open01, StandardNormal};

use crate::error::{Error, Result};
use crate::normal;

/// Standardized bound beyond which the tail sampler is used.
const TAIL_THRESHOLD: f64 = 0.66;
/// Interval width above which rejection from the untruncated normal is efficient.
const REJECTION_WIDTH: f64 = 2.0;
const MAX_BOUNDARY_RETRIES: usize = 32;

/// Draws from N(mu, sigma2) truncated to the open interval `(lower, upper)`.
///
/// Either bound may be infinite. The returned value lies strictly inside the
/// interval.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    mu: f64,
    sigma2: f64,
    lower: f64,
    upper: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::argument(format!(
            "truncated normal variance must be positive and finite, got {sigma2}"
        )));
    }
    if !mu.is_finite() {
        return Err(Error::argument(format!(
            "truncated normal mean must be finite, got {mu}"
        )));
    }
    if lower.is_nan() || upper.is_nan() || !(lower < upper) {
        return Err(Error::argument(format!(
            "empty truncation interval ({lower}, {upper})"
        )));
    }
    let sd = sigma2.sqrt();
    let a = (lower - mu) / sd;
    let b = (upper - mu) / sd;
    for _ in 0..MAX_BOUNDARY_RETRIES {
        let x = mu + sd * standard_truncated(a, b, rng);
        // Rounding in the affine map can land exactly on a bound.
        if lower < x && x < upper {
            return Ok(x);
        }
    }
    // The interval is a handful of ulps wide; the law is a point mass to
    // working precision.
    let mid = lower + 0.5 * (upper - lower);
    if lower < mid && mid < upper {
        Ok(mid)
    } else {
        Err(Error::numeric(format!(
            "no representable value strictly inside ({lower}, {upper})"
        )))
    }
}

/// Draws Z ~ N(0, 1) conditioned on `a < Z < b`.
pub fn standard_truncated<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if a > TAIL_THRESHOLD {
        tail(a, b, rng)
    } else if b < -TAIL_THRESHOLD {
        -tail(-b, -a, rng)
    } else if b - a > REJECTION_WIDTH {
        loop {
            let z: f64 = rng.sample(StandardNormal);
            if a < z && z < b {
                return z;
            }
        }
    } else {
        inversion(a, b, rng)
    }
}

/// Tail sampler for `0 < a < b <= inf`: proposes from the Rayleigh law truncated
/// to `(a, b)` and accepts with probability `a / z`.
///
/// Written in terms of the excess `e = z^2 - a^2` so that proposals keep full
/// precision when `a` is large.
fn tail<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    // expm1(-inf) = -1 handles the one-sided case.
    let f = (0.5 * (a - b) * (a + b)).exp_m1();
    loop {
        let u: f64 = rng.sample(Open01);
        let v: f64 = rng.sample(Open01);
        let e = -2.0 * (u * f).ln_1p();
        let z = a + e / (a + a.hypot(e.sqrt()));
        if v * z <= a {
            return z;
        }
    }
}

/// CDF inversion for bounded intervals within a few units of the origin.
/// Works on whichever side of zero keeps the tail probabilities accurate.
fn inversion<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    if a >= 0.0 {
        let qa = normal::survival(a);
        let qb = normal::survival(b);
        normal::survival_quantile(qa - (qa - qb) * u).clamp(a, b)
    } else {
        let pa = normal::cdf(a);
        let pb = normal::cdf(b);
        normal::quantile(pa + (pb - pa) * u).clamp(a, b)
    }
}
