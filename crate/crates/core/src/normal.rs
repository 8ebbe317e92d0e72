//! Standard normal helpers.

use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided critical value for alpha = 0.05.
pub fn z_975() -> f64 {
    quantile(0.975)
}

pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// `2 * (1 - cdf(|z|))`, computed through `erfc` for tail accuracy.
pub fn two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}
