//! Standard Gaussian and binomial helpers shared by the exact solvers.
//!
//! The CDF is evaluated through the complementary error function so both
//! tails keep full relative precision; the recursions in [`crate::naive`]
//! compose thousands of these evaluations.

use statrs::function::gamma::ln_gamma;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal distribution function Φ(x).
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density φ(x).
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Natural log of the binomial coefficient `C(n, k)`.
pub fn ln_choose(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    ln_gamma(f64::from(n) + 1.0) - ln_gamma(f64::from(k) + 1.0) - ln_gamma(f64::from(n - k) + 1.0)
}

/// Probability that a Binomial(n, q) variable equals `k`.
///
/// Computed in log space; the endpoints `q = 0` and `q = 1` are exact.
pub fn binomial_pmf(k: u32, n: u32, q: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if q <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if q >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let ln_p = ln_choose(n, k) + f64::from(k) * q.ln() + f64::from(n - k) * (-q).ln_1p();
    ln_p.exp()
}

/// The full Binomial(n, q) pmf as a vector indexed by `k = 0..=n`.
pub fn binomial_row(n: u32, q: f64) -> Vec<f64> {
    (0..=n).map(|k| binomial_pmf(k, n, q)).collect()
}
