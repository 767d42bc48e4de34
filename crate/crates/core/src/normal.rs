//! Standard normal density and distribution function.
//!
//! The CDF goes through `erfc` (musl port, sub-ulp accuracy) so both tails keep
//! full relative precision instead of cancelling against 1.

use std::f64::consts::FRAC_1_SQRT_2;

/// 1/√(2π)
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Density of N(mean, 1) at `x`.
#[inline]
pub fn pdf_shifted(x: f64, mean: f64) -> f64 {
    pdf(x - mean)
}

#[inline]
pub fn cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail 1 − Φ(z).
#[inline]
pub fn sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// P(lo < Z ≤ hi) for a standard normal Z, using whichever tail avoids cancellation.
pub fn interval_prob(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo >= 0.0 {
        (sf(lo) - sf(hi)).max(0.0)
    } else {
        (cdf(hi) - cdf(lo)).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Independent oracle: Maclaurin series of erf, accurate for |x| ≲ 3.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn cdf_matches_series_oracle() {
        for i in -40..=40 {
            let z = i as f64 * 0.1;
            let oracle = 0.5 * (1.0 + erf_series(z * FRAC_1_SQRT_2));
            assert!((cdf(z) - oracle).abs() < 1e-14, "z={z}");
        }
    }

    #[test]
    fn reference_values() {
        assert!((pdf(1.0) - 0.241_970_724_519_143_37).abs() < 1e-15);
        assert!((cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((1.0 - cdf(1e6)).abs() < 1e-12);
        assert_eq!(cdf(-1e6), 0.0);
    }

    #[test]
    fn interval_prob_keeps_tail_precision() {
        let p = interval_prob(8.0, 9.0);
        let expect = sf(8.0) - sf(9.0);
        assert!(p > 0.0 && (p - expect).abs() / expect < 1e-12);
        assert_eq!(interval_prob(1.0, 1.0), 0.0);
        assert!((interval_prob(f64::NEG_INFINITY, f64::INFINITY) - 1.0).abs() < 1e-15);
    }
}
