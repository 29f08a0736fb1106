//! Synthetic bivariate laws with exact moment oracles.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::correlation::{population_rho, BivariateMoments};
use crate::error::{Error, Result};
use crate::expansion::{exact_expectation, McBudget, MomentOracle};
use crate::function::Polynomial;
use crate::rng::{normal_pair, StreamRng};
use crate::sample::PairedSample;

/// Marginal distributions, each shifted and scaled to mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marginal {
    StandardNormal,
    /// `(U - 1/2) sqrt(12)` for `U ~ Uniform(0, 1)`.
    UniformStd,
    /// `E - 1` for `E ~ Exp(1)`.
    ExponentialStd,
    Rademacher,
}

impl Marginal {
    pub const ALL: [Marginal; 4] = [
        Marginal::StandardNormal,
        Marginal::UniformStd,
        Marginal::ExponentialStd,
        Marginal::Rademacher,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Marginal::StandardNormal => "standard_normal",
            Marginal::UniformStd => "uniform_std",
            Marginal::ExponentialStd => "exponential_std",
            Marginal::Rademacher => "rademacher",
        }
    }

    /// `E[X^k]`.
    pub fn moment(self, k: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        match self {
            Marginal::StandardNormal => {
                if k % 2 == 1 {
                    0.0
                } else {
                    double_factorial(k - 1)
                }
            }
            Marginal::UniformStd => {
                if k % 2 == 1 {
                    0.0
                } else {
                    3f64.powi(k as i32 / 2) / (k as f64 + 1.0)
                }
            }
            // central moments of Exp(1) are the derangement numbers
            Marginal::ExponentialStd => {
                let (mut prev, mut cur) = (1.0, 0.0);
                for m in 2..=k {
                    let next = (m as f64 - 1.0) * (cur + prev);
                    prev = cur;
                    cur = next;
                }
                cur
            }
            Marginal::Rademacher => {
                if k % 2 == 1 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn draw(self, rng: &mut StreamRng) -> f64 {
        match self {
            Marginal::StandardNormal => normal_pair(rng).0,
            Marginal::UniformStd => (rng.random::<f64>() - 0.5) * 12f64.sqrt(),
            Marginal::ExponentialStd => -(1.0 - rng.random::<f64>()).ln() - 1.0,
            Marginal::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Marginal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Marginal::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidLaw(format!("unknown marginal '{s}'")))
    }
}

fn double_factorial(k: u32) -> f64 {
    (1..=k).rev().step_by(2).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// A bivariate law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LawSpec {
    /// Standard bivariate normal with correlation `rho`, drawn as
    /// `(Z1, rho Z1 + sqrt(1 - rho^2) Z2)`.
    Gaussian { rho: f64 },
    /// Independent coordinates.
    Independent { x: Marginal, y: Marginal },
    /// Finite mixture; `weights` positive and summing to 1.
    Mixture {
        components: Vec<LawSpec>,
        weights: Vec<f64>,
    },
    /// `(loc_x + scale_x X, loc_y + scale_y Y)` for `(X, Y) ~ base`.
    Affine {
        base: Box<LawSpec>,
        loc_x: f64,
        loc_y: f64,
        scale_x: f64,
        scale_y: f64,
    },
}

impl LawSpec {
    pub fn gaussian(rho: f64) -> Result<Self> {
        let law = LawSpec::Gaussian { rho };
        law.validate()?;
        Ok(law)
    }

    pub fn independent(x: Marginal, y: Marginal) -> Self {
        LawSpec::Independent { x, y }
    }

    pub fn mixture(components: Vec<LawSpec>, weights: Vec<f64>) -> Result<Self> {
        let law = LawSpec::Mixture {
            components,
            weights,
        };
        law.validate()?;
        Ok(law)
    }

    pub fn affine(self, loc_x: f64, loc_y: f64, scale_x: f64, scale_y: f64) -> Result<Self> {
        let law = LawSpec::Affine {
            base: Box::new(self),
            loc_x,
            loc_y,
            scale_x,
            scale_y,
        };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LawSpec::Gaussian { rho } => {
                if !rho.is_finite() {
                    return Err(Error::InvalidLaw(format!("rho = {rho}")));
                }
                if rho.abs() >= 1.0 {
                    return Err(Error::AffineDependence(*rho));
                }
                Ok(())
            }
            LawSpec::Independent { .. } => Ok(()),
            LawSpec::Mixture {
                components,
                weights,
            } => {
                if components.is_empty() || components.len() != weights.len() {
                    return Err(Error::InvalidLaw(
                        "mixture needs one positive weight per component".into(),
                    ));
                }
                if weights.iter().any(|w| w.is_nan() || *w <= 0.0) {
                    return Err(Error::InvalidLaw("mixture weights must be positive".into()));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidLaw(format!(
                        "mixture weights sum to {total}, not 1"
                    )));
                }
                components.iter().try_for_each(LawSpec::validate)
            }
            LawSpec::Affine {
                base,
                loc_x,
                loc_y,
                scale_x,
                scale_y,
            } => {
                let params = [*loc_x, *loc_y, *scale_x, *scale_y];
                if params.iter().any(|v| !v.is_finite()) || *scale_x == 0.0 || *scale_y == 0.0 {
                    return Err(Error::InvalidLaw(
                        "affine map needs finite parameters and nonzero scales".into(),
                    ));
                }
                base.validate()
            }
        }
    }

    /// Exact `E[X^i Y^j]`.
    pub fn raw(&self, i: u32, j: u32) -> f64 {
        match self {
            LawSpec::Gaussian { rho } => {
                // Y = rho X + s Z with Z independent of X
                let s = (1.0 - rho * rho).sqrt();
                let normal = Marginal::StandardNormal;
                (0..=j)
                    .map(|k| {
                        binomial(j, k)
                            * rho.powi(k as i32)
                            * s.powi((j - k) as i32)
                            * normal.moment(i + k)
                            * normal.moment(j - k)
                    })
                    .sum()
            }
            LawSpec::Independent { x, y } => x.moment(i) * y.moment(j),
            LawSpec::Mixture {
                components,
                weights,
            } => components
                .iter()
                .zip(weights)
                .map(|(c, w)| w * c.raw(i, j))
                .sum(),
            LawSpec::Affine {
                base,
                loc_x,
                loc_y,
                scale_x,
                scale_y,
            } => {
                let mut total = 0.0;
                for k in 0..=i {
                    let cx = binomial(i, k) * loc_x.powi((i - k) as i32) * scale_x.powi(k as i32);
                    for l in 0..=j {
                        let cy =
                            binomial(j, l) * loc_y.powi((j - l) as i32) * scale_y.powi(l as i32);
                        total += cx * cy * base.raw(k, l);
                    }
                }
                total
            }
        }
    }

    pub fn sample_point(&self, rng: &mut StreamRng) -> (f64, f64) {
        match self {
            LawSpec::Gaussian { rho } => {
                let (z1, z2) = normal_pair(rng);
                (z1, rho * z1 + (1.0 - rho * rho).sqrt() * z2)
            }
            LawSpec::Independent {
                x: Marginal::StandardNormal,
                y: Marginal::StandardNormal,
            } => normal_pair(rng),
            LawSpec::Independent { x, y } => (x.draw(rng), y.draw(rng)),
            LawSpec::Mixture {
                components,
                weights,
            } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (c, w) in components.iter().zip(weights) {
                    acc += w;
                    if u < acc {
                        return c.sample_point(rng);
                    }
                }
                components[components.len() - 1].sample_point(rng)
            }
            LawSpec::Affine {
                base,
                loc_x,
                loc_y,
                scale_x,
                scale_y,
            } => {
                let (x, y) = base.sample_point(rng);
                (loc_x + scale_x * x, loc_y + scale_y * y)
            }
        }
    }

    /// Means, variances, covariance and fourth-order central moments.
    pub fn moments(&self) -> Result<BivariateMoments> {
        self.validate()?;
        let mu_x = self.raw(1, 0);
        let mu_y = self.raw(0, 1);
        let central = |p: u32, q: u32| {
            let u = &Polynomial::monomial(1.0, 1, 0) + &Polynomial::constant(-mu_x);
            let v = &Polynomial::monomial(1.0, 0, 1) + &Polynomial::constant(-mu_y);
            let poly = &u.powi(p) * &v.powi(q);
            exact_expectation(&poly, self).unwrap_or(f64::NAN)
        };
        let m = BivariateMoments {
            mu_x,
            mu_y,
            var_x: central(2, 0),
            var_y: central(0, 2),
            cov_xy: central(1, 1),
            m22: central(2, 2),
            m31: central(3, 1),
            m13: central(1, 3),
            m40: central(4, 0),
            m04: central(0, 4),
        };
        m.validate()?;
        Ok(m)
    }

    /// Population correlation, computed from the moment oracle.
    pub fn rho(&self) -> Result<f64> {
        population_rho(&self.moments()?)
    }

    /// `n` i.i.d. draws from `rng`.
    pub fn sample(&self, n: usize, rng: &mut StreamRng) -> Result<PairedSample> {
        self.validate()?;
        let (xs, ys) = (0..n).map(|_| self.sample_point(rng)).unzip();
        PairedSample::new(xs, ys)
    }

    pub fn with_budget(&self, budget: McBudget) -> BudgetedLaw<'_> {
        BudgetedLaw { law: self, budget }
    }
}

impl MomentOracle for LawSpec {
    fn raw_moment(&self, i: u32, j: u32) -> Option<f64> {
        Some(self.raw(i, j))
    }

    fn draw(&self, rng: &mut StreamRng) -> (f64, f64) {
        self.sample_point(rng)
    }
}

/// A law paired with an explicit Monte Carlo budget.
#[derive(Debug, Clone, Copy)]
pub struct BudgetedLaw<'a> {
    pub law: &'a LawSpec,
    pub budget: McBudget,
}

impl MomentOracle for BudgetedLaw<'_> {
    fn raw_moment(&self, i: u32, j: u32) -> Option<f64> {
        Some(self.law.raw(i, j))
    }

    fn draw(&self, rng: &mut StreamRng) -> (f64, f64) {
        self.law.sample_point(rng)
    }

    fn mc_budget(&self) -> McBudget {
        self.budget
    }
}

/// `n` i.i.d. draws from `law` on the given stream.
pub fn sample_law(law: &LawSpec, n: usize, rng: &mut StreamRng) -> Result<PairedSample> {
    law.sample(n, rng)
}

/// The empirical distribution of a sample, for plug-in `Gamma`.
#[derive(Debug, Clone)]
pub struct EmpiricalLaw<'a> {
    sample: &'a PairedSample,
}

impl<'a> EmpiricalLaw<'a> {
    pub fn new(sample: &'a PairedSample) -> Self {
        Self { sample }
    }
}

impl MomentOracle for EmpiricalLaw<'_> {
    fn raw_moment(&self, i: u32, j: u32) -> Option<f64> {
        let n = self.sample.len() as f64;
        Some(
            self.sample
                .iter()
                .map(|(x, y)| x.powi(i as i32) * y.powi(j as i32))
                .sum::<f64>()
                / n,
        )
    }

    fn draw(&self, rng: &mut StreamRng) -> (f64, f64) {
        let k = rng.random_range(0..self.sample.len());
        (self.sample.xs()[k], self.sample.ys()[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{compute_rho_n, sigma_squared};
    use crate::rng::stream;

    #[test]
    fn marginal_moments() {
        for m in Marginal::ALL {
            assert_eq!(m.moment(0), 1.0);
            assert_eq!(m.moment(1), 0.0, "{m}");
            assert!((m.moment(2) - 1.0).abs() < 1e-15, "{m}");
        }
        assert_eq!(Marginal::StandardNormal.moment(4), 3.0);
        assert_eq!(Marginal::StandardNormal.moment(6), 15.0);
        assert!((Marginal::UniformStd.moment(4) - 1.8).abs() < 1e-15);
        assert_eq!(Marginal::ExponentialStd.moment(3), 2.0);
        assert_eq!(Marginal::ExponentialStd.moment(4), 9.0);
        assert_eq!(Marginal::Rademacher.moment(4), 1.0);
    }

    #[test]
    fn marginal_moments_match_draws() {
        let mut rng = stream(5, 0);
        let m = 400_000;
        for marg in Marginal::ALL {
            let draws: Vec<f64> = (0..m).map(|_| marg.draw(&mut rng)).collect();
            for k in 1..=4u32 {
                let emp = draws.iter().map(|x| x.powi(k as i32)).sum::<f64>() / m as f64;
                let exact = marg.moment(k);
                let sd = (marg.moment(2 * k) - exact * exact).sqrt() / (m as f64).sqrt();
                assert!((emp - exact).abs() < 5.0 * sd + 1e-12, "{marg} k={k}: {emp} vs {exact}");
            }
        }
    }

    #[test]
    fn parse_marginals() {
        assert_eq!("rademacher".parse::<Marginal>().unwrap(), Marginal::Rademacher);
        assert!("cauchy".parse::<Marginal>().is_err());
    }

    #[test]
    fn gaussian_isserlis_moments() {
        let law = LawSpec::gaussian(0.5).unwrap();
        let m = law.moments().unwrap();
        assert_eq!(m.cov_xy, 0.5);
        assert!((m.m22 - 1.5).abs() < 1e-15);
        assert!((m.m31 - 1.5).abs() < 1e-15);
        assert!((m.m13 - 1.5).abs() < 1e-15);
        assert_eq!(m.m40, 3.0);
        assert!((m.m04 - 3.0).abs() < 1e-15);
        assert!(matches!(LawSpec::gaussian(1.0), Err(Error::AffineDependence(_))));
    }

    #[test]
    fn invalid_mixtures() {
        let g = LawSpec::gaussian(0.1).unwrap();
        assert!(LawSpec::mixture(vec![g.clone(), g.clone()], vec![0.5, 0.6]).is_err());
        assert!(LawSpec::mixture(vec![g.clone(), g.clone()], vec![1.0, 0.0]).is_err());
        assert!(LawSpec::mixture(vec![g.clone()], vec![1.0]).is_ok());
    }

    #[test]
    fn mixture_rho_from_oracle() {
        let law = LawSpec::mixture(
            vec![
                LawSpec::gaussian(0.8).unwrap(),
                LawSpec::independent(Marginal::ExponentialStd, Marginal::UniformStd),
            ],
            vec![0.25, 0.75],
        )
        .unwrap();
        assert!((law.rho().unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn affine_moments() {
        let law = LawSpec::gaussian(-0.3)
            .unwrap()
            .affine(2.0, -1.0, 3.0, 0.5)
            .unwrap();
        let m = law.moments().unwrap();
        assert!((m.mu_x - 2.0).abs() < 1e-12 && (m.mu_y + 1.0).abs() < 1e-12);
        assert!((m.var_x - 9.0).abs() < 1e-12 && (m.var_y - 0.25).abs() < 1e-12);
        assert!((law.rho().unwrap() + 0.3).abs() < 1e-12);
        assert!((m.m40 - 3.0 * 81.0).abs() < 1e-9);
        // negative scale flips the sign
        let flipped = LawSpec::gaussian(-0.3).unwrap().affine(0.0, 0.0, -1.0, 1.0).unwrap();
        assert!((flipped.rho().unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn gaussian_sample_correlation_near_zero() {
        let law = LawSpec::gaussian(0.0).unwrap();
        let s = law.sample(1_000_000, &mut stream(2024, 0)).unwrap();
        assert!(compute_rho_n(&s).unwrap().abs() < 0.004);
    }

    #[test]
    fn sampling_is_deterministic() {
        let law = LawSpec::independent(Marginal::ExponentialStd, Marginal::StandardNormal);
        let a = sample_law(&law, 1000, &mut stream(9, 4)).unwrap();
        let b = sample_law(&law, 1000, &mut stream(9, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rademacher_support() {
        let law = LawSpec::independent(Marginal::Rademacher, Marginal::Rademacher);
        let s = law.sample(5000, &mut stream(1, 1)).unwrap();
        assert!(s.iter().all(|(x, y)| x.abs() == 1.0 && y.abs() == 1.0));
    }

    #[test]
    fn independent_standardized_marginals_have_unit_sigma2() {
        for x in Marginal::ALL {
            for y in Marginal::ALL {
                let m = LawSpec::independent(x, y).moments().unwrap();
                assert!((m.m22 - 1.0).abs() < 1e-15);
                assert!((sigma_squared(&m).unwrap() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn empirical_law_moments() {
        let s = PairedSample::from_pairs(&[(1.0, 2.0), (3.0, -1.0)]).unwrap();
        let law = EmpiricalLaw::new(&s);
        assert_eq!(law.raw_moment(1, 1), Some(-0.5));
        assert_eq!(law.raw_moment(2, 0), Some(5.0));
    }
}
