//! The linear correlation coefficient: population value, plug-in estimator,
//! influence function and asymptotic variance.
//!
//! For i.i.d. pairs with finite fourth moments and `|rho| < 1`,
//!
//! ```text
//! sqrt(n) (rho_n - rho)  ->  N(0, sigma^2)
//!
//! sigma^2 = (1 + rho^2/2) m22 / (sx^2 sy^2)
//!         + rho^2 (m40 / sx^4 + m04 / sy^4) / 4
//!         - rho (m31 / (sx^3 sy) + m13 / (sx sy^3))
//! ```
//!
//! with `mpq = E[(X - mu_x)^p (Y - mu_y)^q]`. Under `rho = 0` this reduces to
//! `m22 / (sx^2 sy^2)`, and to 1 under independence.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{AsymptoticExpansion, NEGATIVE_TOLERANCE};
use crate::function::StatFunction;
use crate::normal::two_sided_p_value;
use crate::sample::{mean_sd, PairedSample};

/// `|rho|` at or above this is treated as affine dependence.
const AFFINE_TOLERANCE: f64 = 1e-12;

/// Default plug-in kurtosis above which heavy tails are reported.
pub const DEFAULT_KURTOSIS_WARNING: f64 = 100.0;

/// Means, variances, covariance and the fourth-order central moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BivariateMoments {
    pub mu_x: f64,
    pub mu_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
    /// `E[(X - mu_x)^2 (Y - mu_y)^2]`
    pub m22: f64,
    /// `E[(X - mu_x)^3 (Y - mu_y)]`
    pub m31: f64,
    /// `E[(X - mu_x) (Y - mu_y)^3]`
    pub m13: f64,
    /// `E[(X - mu_x)^4]`
    pub m40: f64,
    /// `E[(Y - mu_y)^4]`
    pub m04: f64,
}

impl BivariateMoments {
    /// Checks the moment inequalities every real law satisfies.
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.mu_x, self.mu_y, self.var_x, self.var_y, self.cov_xy, self.m22, self.m31,
            self.m13, self.m40, self.m04,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InconsistentMoments("non-finite moment".into()));
        }
        if self.var_x.is_nan() || self.var_x <= 0.0 {
            return Err(Error::DegeneratedMarginal("x"));
        }
        if self.var_y.is_nan() || self.var_y <= 0.0 {
            return Err(Error::DegeneratedMarginal("y"));
        }
        let slack = 1.0 + 1e-12;
        if self.m40 * slack < self.var_x * self.var_x || self.m04 * slack < self.var_y * self.var_y {
            return Err(Error::InconsistentMoments(
                "fourth moment below squared variance".into(),
            ));
        }
        if self.m22 < -NEGATIVE_TOLERANCE {
            return Err(Error::InconsistentMoments("negative m22".into()));
        }
        if self.cov_xy.abs() > (self.var_x * self.var_y).sqrt() * slack {
            return Err(Error::InconsistentMoments(
                "covariance exceeds the Cauchy-Schwarz bound".into(),
            ));
        }
        Ok(())
    }

    pub fn sd_x(&self) -> f64 {
        self.var_x.sqrt()
    }

    pub fn sd_y(&self) -> f64 {
        self.var_y.sqrt()
    }

    /// Plug-in kurtoses `(m40 / var_x^2, m04 / var_y^2)`.
    pub fn kurtosis(&self) -> (f64, f64) {
        (
            self.m40 / (self.var_x * self.var_x),
            self.m04 / (self.var_y * self.var_y),
        )
    }

    /// A warning when either marginal kurtosis exceeds `threshold`: the
    /// normal approximation needs finite fourth-order moments and will be
    /// slow to kick in.
    pub fn heavy_tail_warning(&self, threshold: f64) -> Option<String> {
        let (kx, ky) = self.kurtosis();
        (kx > threshold || ky > threshold).then(|| {
            format!(
                "plug-in kurtosis ({kx:.3}, {ky:.3}) exceeds {threshold}; fourth moments may not exist"
            )
        })
    }
}

/// `rho = cov_xy / (sd_x sd_y)`, refusing `|rho| = 1`.
pub fn population_rho(m: &BivariateMoments) -> Result<f64> {
    m.validate()?;
    let rho = m.cov_xy / (m.var_x * m.var_y).sqrt();
    let rho = rho.clamp(-1.0, 1.0);
    if rho.abs() >= 1.0 - AFFINE_TOLERANCE {
        return Err(Error::AffineDependence(rho));
    }
    Ok(rho)
}

/// Plug-in correlation with denominator-`n` moments.
pub fn compute_rho_n(s: &PairedSample) -> Result<f64> {
    compute_rho_n_points(s.xs(), s.ys())
}

pub(crate) fn compute_rho_n_points(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let (mx, sx) = mean_sd(xs, "x")?;
    let (my, sy) = mean_sd(ys, "y")?;
    let n = xs.len() as f64;
    let cov = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / n;
    Ok(cov / (sx * sy))
}

/// Plug-in means, variances and central moments of a sample (denominator `n`).
pub fn estimate_moments(s: &PairedSample) -> Result<BivariateMoments> {
    let (mu_x, _) = mean_sd(s.xs(), "x")?;
    let (mu_y, _) = mean_sd(s.ys(), "y")?;
    let n = s.len() as f64;
    let mut acc = [0.0f64; 8];
    for (x, y) in s.iter() {
        let (u, v) = (x - mu_x, y - mu_y);
        let (u2, v2) = (u * u, v * v);
        acc[0] += u2;
        acc[1] += v2;
        acc[2] += u * v;
        acc[3] += u2 * v2;
        acc[4] += u2 * u * v;
        acc[5] += u * v2 * v;
        acc[6] += u2 * u2;
        acc[7] += v2 * v2;
    }
    let [var_x, var_y, cov_xy, m22, m31, m13, m40, m04] = acc.map(|a| a / n);
    Ok(BivariateMoments {
        mu_x,
        mu_y,
        var_x,
        var_y,
        cov_xy,
        m22,
        m31,
        m13,
        m40,
        m04,
    })
}

/// Influence function of `rho_n` in standardized coordinates
/// `u = (x - mu_x)/sd_x`, `v = (y - mu_y)/sd_y`:
///
/// ```text
/// H(x, y) = u v - (rho / 2) (u^2 + v^2)
/// ```
///
/// `E[H] = rho - rho = 0`. The general-form influence obtained by chaining
/// the expansion rules differs from this one only by an additive constant,
/// which does not affect `Gamma`.
pub fn correlation_influence(m: &BivariateMoments) -> Result<StatFunction> {
    let rho = population_rho(m)?;
    let u = (StatFunction::pi1() - StatFunction::constant(m.mu_x)).scale(1.0 / m.sd_x());
    let v = (StatFunction::pi2() - StatFunction::constant(m.mu_y)).scale(1.0 / m.sd_y());
    let h = &(&u * &v) - &(&u.powi(2) + &v.powi(2)).scale(rho / 2.0);
    Ok(h.with_label(&format!("uv - ({rho}/2)(u^2 + v^2)")))
}

/// Asymptotic variance of `sqrt(n) (rho_n - rho)` from the fourth-order moments.
pub fn sigma_squared(m: &BivariateMoments) -> Result<f64> {
    let rho = population_rho(m)?;
    let (sx, sy) = (m.sd_x(), m.sd_y());
    let (vx, vy) = (m.var_x, m.var_y);
    let rho2 = rho * rho;
    let s2 = (1.0 + rho2 / 2.0) * m.m22 / (vx * vy)
        + rho2 * (m.m40 / (vx * vx) + m.m04 / (vy * vy)) / 4.0
        - rho * (m.m31 / (vx * sx * sy) + m.m13 / (sx * vy * sy));
    if s2 < -NEGATIVE_TOLERANCE || !s2.is_finite() {
        return Err(Error::InconsistentMoments(format!(
            "asymptotic variance evaluates to {s2:e}"
        )));
    }
    Ok(s2.max(0.0))
}

/// Asymptotic variance of `sqrt(n) rho_n` when `rho = 0`: `m22 / (var_x var_y)`.
pub fn sigma1_squared(m: &BivariateMoments) -> Result<f64> {
    m.validate()?;
    Ok((m.m22 / (m.var_x * m.var_y)).max(0.0))
}

/// The expansion of `rho_n = A_n / B_n` built step by step from empirical
/// means:
///
/// * `A_n = mean(xy) - mean(x) mean(y)`, giving `(cov_xy, H1)`;
/// * `mean(x^2) - mean(x)^2`, then its square root, giving `(sd_x, .)`,
///   likewise for `y`, and their product `B_n = (sd_x sd_y, H2)`;
/// * the quotient rule on `A_n / B_n`.
pub fn correlation_expansion(m: &BivariateMoments) -> Result<AsymptoticExpansion> {
    m.validate()?;
    let (pi1, pi2) = (StatFunction::pi1(), StatFunction::pi2());
    let xbar = AsymptoticExpansion::from_mean(pi1.clone(), m.mu_x);
    let ybar = AsymptoticExpansion::from_mean(pi2.clone(), m.mu_y);
    let xy = AsymptoticExpansion::from_mean(StatFunction::p(), m.cov_xy + m.mu_x * m.mu_y);
    let numerator = xy.sub(&xbar.mul(&ybar));

    let sd = |mean: &AsymptoticExpansion, coord: &StatFunction, var: f64| {
        let second = AsymptoticExpansion::from_mean(coord.powi(2), var + mean.value * mean.value);
        let mean_sq = mean.smooth_map(|t| t * t, |t| 2.0 * t)?;
        second
            .sub(&mean_sq)
            .smooth_map(f64::sqrt, |t| 0.5 / t.sqrt())
    };
    let denominator = sd(&xbar, &pi1, m.var_x)?.mul(&sd(&ybar, &pi2, m.var_y)?);

    let rho = numerator.div(&denominator)?;
    if rho.value.abs() >= 1.0 - AFFINE_TOLERANCE {
        return Err(Error::AffineDependence(rho.value));
    }
    Ok(AsymptoticExpansion {
        value: rho.value,
        influence: rho.influence.with_label("H"),
    })
}

/// Outcome of the large-sample test of `rho = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroCorrelationTest {
    pub rho_n: f64,
    pub sigma1_squared: f64,
    pub z: f64,
    pub p_value: f64,
    pub warnings: Vec<String>,
}

/// Sample size below which the normal approximation is flagged.
pub const ZTEST_MIN_RECOMMENDED_N: usize = 30;

/// `z = sqrt(n) rho_n / sigma1_hat` with a two-sided normal p-value, where
/// `sigma1_hat^2` is the plug-in `m22 / (var_x var_y)`.
pub fn test_zero_correlation(s: &PairedSample) -> Result<ZeroCorrelationTest> {
    let m = estimate_moments(s)?;
    let rho_n = compute_rho_n(s)?;
    let s1 = sigma1_squared(&m)?;
    if s1 < 1e-12 {
        return Err(Error::InconsistentMoments(format!(
            "plug-in null variance {s1:e} too small"
        )));
    }
    let mut warnings = Vec::new();
    if s.len() < ZTEST_MIN_RECOMMENDED_N {
        warnings.push(format!(
            "n = {} is below the recommended {ZTEST_MIN_RECOMMENDED_N} for the normal approximation",
            s.len()
        ));
    }
    warnings.extend(m.heavy_tail_warning(DEFAULT_KURTOSIS_WARNING));
    let z = (s.len() as f64).sqrt() * rho_n / s1.sqrt();
    Ok(ZeroCorrelationTest {
        rho_n,
        sigma1_squared: s1,
        z,
        p_value: two_sided_p_value(z),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Standardized bivariate Gaussian moments via Isserlis: m22 = 1 + 2 rho^2,
    /// m31 = m13 = 3 rho, m40 = m04 = 3.
    fn isserlis(rho: f64) -> BivariateMoments {
        BivariateMoments {
            mu_x: 0.0,
            mu_y: 0.0,
            var_x: 1.0,
            var_y: 1.0,
            cov_xy: rho,
            m22: 1.0 + 2.0 * rho * rho,
            m31: 3.0 * rho,
            m13: 3.0 * rho,
            m40: 3.0,
            m04: 3.0,
        }
    }

    #[test]
    fn population_rho_examples() {
        assert_eq!(population_rho(&isserlis(0.5)).unwrap(), 0.5);
        assert_eq!(population_rho(&isserlis(0.0)).unwrap(), 0.0);
        let m = BivariateMoments {
            var_x: 4.0,
            var_y: 9.0,
            cov_xy: 3.0,
            m40: 48.0,
            m04: 243.0,
            ..isserlis(0.0)
        };
        assert_eq!(population_rho(&m).unwrap(), 0.5);
        let affine = BivariateMoments {
            cov_xy: 1.0,
            ..isserlis(0.0)
        };
        assert!(matches!(population_rho(&affine), Err(Error::AffineDependence(_))));
        let flat = BivariateMoments {
            var_x: 0.0,
            ..isserlis(0.0)
        };
        assert!(matches!(population_rho(&flat), Err(Error::DegeneratedMarginal("x"))));
    }

    #[test]
    fn rho_n_examples() {
        let sym = PairedSample::from_pairs(&[(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]).unwrap();
        assert_eq!(compute_rho_n(&sym).unwrap(), 0.0);

        let xs: Vec<f64> = vec![0.3, -1.2, 4.0, 2.5, 0.0];
        let ys = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let affine = PairedSample::new(xs, ys).unwrap();
        assert!((compute_rho_n(&affine).unwrap() - 1.0).abs() < 1e-12);

        let four = PairedSample::from_pairs(&[(1.0, 1.0), (2.0, 3.0), (3.0, 2.0), (4.0, 4.0)]).unwrap();
        assert!((compute_rho_n(&four).unwrap() - 0.8).abs() < 1e-12);

        let flat = PairedSample::from_pairs(&[(1.0, 2.0), (2.0, 2.0), (3.0, 2.0)]).unwrap();
        assert_eq!(compute_rho_n(&flat), Err(Error::DegeneratedMarginal("y")));
    }

    #[test]
    fn influence_examples() {
        let h = correlation_influence(&isserlis(0.0)).unwrap();
        assert_eq!(h.eval(2.0, 3.0), 6.0);
        let h = correlation_influence(&isserlis(0.5)).unwrap();
        assert_eq!(h.eval(1.0, 1.0), 0.5);
        assert_eq!(h.eval(0.0, 0.0), 0.0);
    }

    #[test]
    fn sigma_squared_examples() {
        assert_eq!(sigma_squared(&isserlis(0.0)).unwrap(), 1.0);
        assert!((sigma_squared(&isserlis(0.5)).unwrap() - 0.5625).abs() < 1e-15);
        let m = BivariateMoments {
            m22: 2.7,
            ..isserlis(0.0)
        };
        assert_eq!(sigma_squared(&m).unwrap(), 2.7);
        assert!(matches!(
            sigma_squared(&BivariateMoments { cov_xy: -1.0, ..isserlis(0.0) }),
            Err(Error::AffineDependence(_))
        ));
    }

    #[test]
    fn sigma1_examples() {
        assert_eq!(sigma1_squared(&isserlis(0.0)).unwrap(), 1.0);
        let m = BivariateMoments {
            var_x: 4.0,
            m40: 16.0,
            m22: 8.0,
            ..isserlis(0.0)
        };
        assert_eq!(sigma1_squared(&m).unwrap(), 2.0);
        assert_eq!(sigma1_squared(&m).unwrap(), sigma_squared(&m).unwrap());
    }

    #[test]
    fn moments_of_two_points() {
        let s = PairedSample::from_pairs(&[(1.0, 0.0), (-1.0, 1.0)]).unwrap();
        let m = estimate_moments(&s).unwrap();
        assert_eq!((m.mu_x, m.var_x, m.m40), (0.0, 1.0, 1.0));
        let flat = PairedSample::from_pairs(&[(1.0, 5.0), (-1.0, 5.0)]).unwrap();
        assert_eq!(estimate_moments(&flat), Err(Error::DegeneratedMarginal("y")));
    }

    #[test]
    fn standardized_sample_reestimates_to_unit_moments() {
        let s = PairedSample::from_pairs(&[(3.0, 1.0), (7.5, -2.0), (-1.0, 4.0), (2.0, 2.0), (0.5, 0.1)]).unwrap();
        let m = estimate_moments(&s.standardized().unwrap()).unwrap();
        assert!(m.mu_x.abs() < 1e-12 && m.mu_y.abs() < 1e-12);
        assert!((m.var_x - 1.0).abs() < 1e-12 && (m.var_y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expansion_value_and_influence() {
        let m = isserlis(0.5);
        let e = correlation_expansion(&m).unwrap();
        assert!((e.value - population_rho(&m).unwrap()).abs() < 1e-15);
        let h = correlation_influence(&m).unwrap();
        let offset = e.influence.eval(0.0, 0.0) - h.eval(0.0, 0.0);
        for i in 0..10 {
            for j in 0..10 {
                let (x, y) = (-2.0 + 0.45 * i as f64, -2.2 + 0.5 * j as f64);
                assert!((e.influence.eval(x, y) - h.eval(x, y) - offset).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_correlation_test_exact_zero() {
        let s = PairedSample::from_pairs(&[(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)]).unwrap();
        let t = test_zero_correlation(&s).unwrap();
        assert_eq!(t.z, 0.0);
        assert!((t.p_value - 1.0).abs() < 1.5e-7);
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn heavy_tails_warn() {
        let m = BivariateMoments {
            m40: 250.0,
            ..isserlis(0.0)
        };
        assert!(m.heavy_tail_warning(100.0).is_some());
        assert!(isserlis(0.3).heavy_tail_warning(100.0).is_none());
    }

    fn sample_strategy() -> impl Strategy<Value = PairedSample> {
        prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 5..40)
            .prop_filter_map("degenerate", |pts| {
                let s = PairedSample::from_pairs(&pts).ok()?;
                compute_rho_n(&s).ok()?;
                Some(s)
            })
    }

    proptest! {
        #[test]
        fn rho_n_location_scale_invariant(
            s in sample_strategy(),
            a in 0.1..20.0f64, b in -100.0..100.0f64,
            c in 0.1..20.0f64, d in -100.0..100.0f64,
        ) {
            let r = compute_rho_n(&s).unwrap();
            prop_assert!(r.abs() <= 1.0 + 1e-12);
            let pos = compute_rho_n(&s.affine(a, b, c, d).unwrap()).unwrap();
            prop_assert!((pos - r).abs() <= 1e-12);
            let neg = compute_rho_n(&s.affine(-a, b, c, d).unwrap()).unwrap();
            prop_assert!((neg + r).abs() <= 1e-12);
        }
    }
}
