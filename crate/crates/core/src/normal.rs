//! Standard normal distribution function.

const P: f64 = 0.231_641_9;
const B: [f64; 5] = [
    0.319_381_530,
    -0.356_563_782,
    1.781_477_937,
    -1.821_255_978,
    1.330_274_429,
];

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Upper tail `1 - Phi(x)` for `x >= 0` by the Abramowitz–Stegun 26.2.17
/// rational approximation (absolute error below 7.5e-8).
fn upper_tail_nonneg(x: f64) -> f64 {
    let t = 1.0 / (1.0 + P * x);
    let poly = t * (B[0] + t * (B[1] + t * (B[2] + t * (B[3] + t * B[4]))));
    normal_pdf(x) * poly
}

/// `Phi(x)`, absolute error at most 7.5e-8.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= 0.0 {
        1.0 - upper_tail_nonneg(x)
    } else {
        upper_tail_nonneg(-x)
    }
}

/// Two-sided p-value `2 (1 - Phi(|z|))`, capped at 1.
pub fn two_sided_p_value(z: f64) -> f64 {
    (2.0 * upper_tail_nonneg(z.abs())).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn matches_reference_within_stated_error() {
        let reference = Normal::standard();
        let mut x = -8.0;
        while x <= 8.0 {
            assert!((normal_cdf(x) - reference.cdf(x)).abs() <= 7.5e-8, "x = {x}");
            x += 0.01;
        }
    }

    #[test]
    fn symmetry_and_landmarks() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-9);
        assert!((normal_cdf(1.959_963_985) - 0.975).abs() < 1e-7);
        for x in [0.3, 1.1, 2.7] {
            assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-15);
        }
        assert!((two_sided_p_value(1.959_963_985) - 0.05).abs() < 2e-7);
    }
}
