//! The functional empirical process and the algebra of asymptotic expansions.
//!
//! An [`AsymptoticExpansion`] `(t, h)` stands for the statement
//!
//! ```text
//! T_n = t + n^{-1/2} G_n(h) + o_P(n^{-1/2})
//! ```
//!
//! where `G_n(f) = n^{-1/2} sum_i (f(Z_i) - E f(Z))`. The remainder is never
//! represented numerically; every combinator maps expansions of this form to
//! another expansion of the same form, so `sqrt(n) (T_n - t)` converges to
//! `N(0, Gamma(h, h))` for anything built with them.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::{Polynomial, StatFunction};
use crate::rng::{stream, StreamRng};
use crate::sample::PairedSample;

/// Absolute floor on `|B|` below which a quotient is refused.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Tolerance on negative variances and eigenvalues coming from round-off.
pub const NEGATIVE_TOLERANCE: f64 = 1e-10;

/// Replicate budget and seed for Monte Carlo integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McBudget {
    pub replicates: usize,
    pub seed: u64,
}

impl Default for McBudget {
    fn default() -> Self {
        Self {
            replicates: 1_000_000,
            seed: 0x5EED,
        }
    }
}

/// A law on the plane that can integrate [`StatFunction`]s.
///
/// Laws with known mixed moments answer [`raw_moment`](Self::raw_moment) and
/// integrate polynomial functions exactly. Everything else goes through
/// [`draw`](Self::draw) and the Monte Carlo budget.
pub trait MomentOracle: Sync {
    /// Exact `E[X^i Y^j]`, when known.
    fn raw_moment(&self, i: u32, j: u32) -> Option<f64>;

    /// One observation from the law.
    fn draw(&self, rng: &mut StreamRng) -> (f64, f64);

    fn mc_budget(&self) -> McBudget {
        McBudget::default()
    }
}

/// A computed expectation or covariance; `std_error` is set for Monte Carlo
/// results and `None` for exact ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: Option<f64>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.std_error.is_none()
    }
}

/// `G_n(f) = n^{-1/2} sum (f(z_i) - mean_f)`.
pub fn gn_eval(sample: &PairedSample, f: &StatFunction, mean_f: f64) -> Result<f64> {
    gn_eval_points(sample.xs(), sample.ys(), f, mean_f)
}

/// [`gn_eval`] on raw columns, for callers that reuse buffers.
pub fn gn_eval_points(xs: &[f64], ys: &[f64], f: &StatFunction, mean_f: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut acc = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let v = f.eval(x, y);
        if !v.is_finite() {
            return Err(Error::NonFiniteEvaluation {
                label: f.label().to_string(),
                x,
                y,
            });
        }
        acc += v - mean_f;
    }
    Ok(acc / (xs.len() as f64).sqrt())
}

/// Exact `E[poly(X, Y)]` when the oracle knows every moment involved.
pub fn exact_expectation(poly: &Polynomial, law: &dyn MomentOracle) -> Option<f64> {
    let mut total = 0.0;
    for ((i, j), c) in poly.terms() {
        total += c * law.raw_moment(i, j)?;
    }
    Some(total)
}

/// `E f(Z)` under the law: exact for polynomials over a moment-known law,
/// Monte Carlo otherwise.
pub fn expectation(f: &StatFunction, law: &dyn MomentOracle) -> Result<Estimate> {
    if let Some(v) = f
        .to_polynomial()
        .and_then(|poly| exact_expectation(&poly, law))
    {
        return check_finite(v, f.label()).map(Estimate::exact);
    }
    let budget = law.mc_budget();
    let sums = mc_chunks(law, budget, |x, y| f.eval(x, y))?;
    let (value, se) = mean_and_se(&sums, budget.replicates);
    check_finite(value, f.label())?;
    Ok(Estimate {
        value,
        std_error: Some(se),
    })
}

/// `Gamma(f, g) = E[f g] - E[f] E[g]`.
///
/// Exact when both functions are polynomials and the law knows the needed
/// moments. Otherwise a two-pass Monte Carlo integral over
/// `law.mc_budget()` draws; the reported standard error is that of the mean
/// of the centered products. The draws depend only on the budget seed, so
/// repeated calls share common random numbers.
pub fn gamma(f: &StatFunction, g: &StatFunction, law: &dyn MomentOracle) -> Result<Estimate> {
    if let (Some(pf), Some(pg)) = (f.to_polynomial(), g.to_polynomial()) {
        if let (Some(ef), Some(eg), Some(efg)) = (
            exact_expectation(&pf, law),
            exact_expectation(&pg, law),
            exact_expectation(&(&pf * &pg), law),
        ) {
            let v = efg - ef * eg;
            return check_finite(v, &format!("{} x {}", f.label(), g.label())).map(Estimate::exact);
        }
    }

    let budget = law.mc_budget();
    let label = format!("{} x {}", f.label(), g.label());
    let fsum = mc_chunks(law, budget, |x, y| f.eval(x, y))?;
    let gsum = mc_chunks(law, budget, |x, y| g.eval(x, y))?;
    let (mf, _) = mean_and_se(&fsum, budget.replicates);
    let (mg, _) = mean_and_se(&gsum, budget.replicates);
    check_finite(mf, &label)?;
    check_finite(mg, &label)?;
    let prods = mc_chunks(
        law,
        budget,
        |x, y| (f.eval(x, y) - mf) * (g.eval(x, y) - mg),
    )?;
    let (value, se) = mean_and_se(&prods, budget.replicates);
    check_finite(value, &label)?;
    Ok(Estimate {
        value,
        std_error: Some(se),
    })
}

fn check_finite(v: f64, label: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::MomentDoesNotExist(label.to_string()))
    }
}

const MC_CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, Default)]
struct ChunkSums {
    sum: f64,
    sum_sq: f64,
}

/// Per-chunk sums of `h(draw)` and `h(draw)^2`, in chunk order. Chunk `c`
/// uses stream `c` of the budget seed, so the result does not depend on the
/// worker count.
fn mc_chunks<H>(
    law: &dyn MomentOracle,
    budget: McBudget,
    h: H,
) -> Result<Vec<ChunkSums>>
where
    H: Fn(f64, f64) -> f64 + Sync,
{
    if budget.replicates < 2 {
        return Err(Error::InvalidConfig("Monte Carlo budget must be >= 2".into()));
    }
    let chunks = budget.replicates.div_ceil(MC_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(budget.seed, c as u64);
            let len = MC_CHUNK.min(budget.replicates - c * MC_CHUNK);
            let mut s = ChunkSums::default();
            for _ in 0..len {
                let (x, y) = law.draw(&mut rng);
                let v = h(x, y);
                s.sum += v;
                s.sum_sq += v * v;
            }
            if s.sum.is_finite() && s.sum_sq.is_finite() {
                Ok(s)
            } else {
                Err(Error::MomentDoesNotExist(format!(
                    "running sum overflowed in chunk {c}"
                )))
            }
        })
        .collect()
}

fn mean_and_se(chunks: &[ChunkSums], n: usize) -> (f64, f64) {
    let nf = n as f64;
    let (s, s2) = chunks
        .iter()
        .fold((0.0, 0.0), |(a, b), c| (a + c.sum, b + c.sum_sq));
    let mean = s / nf;
    let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Symmetric positive semidefinite matrix `Gamma(f_i, f_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub entries: DMatrix<f64>,
    pub labels: Vec<String>,
    /// Standard errors of the entries when they were integrated by Monte Carlo.
    pub std_errors: Option<DMatrix<f64>>,
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.entries
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let k = self.dim();
        (0..k).all(|i| {
            (0..i).all(|j| {
                let (a, b) = (self.entries[(i, j)], self.entries[(j, i)]);
                (a - b).abs() <= rel_tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
            })
        })
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -NEGATIVE_TOLERANCE
    }
}

/// `[Gamma(f_i, f_j)]` for `i, j < k`.
pub fn gamma_matrix(fs: &[StatFunction], law: &dyn MomentOracle) -> Result<CovarianceMatrix> {
    if fs.is_empty() {
        return Err(Error::InvalidConfig("gamma_matrix needs at least one function".into()));
    }
    let k = fs.len();
    let mut entries = DMatrix::zeros(k, k);
    let mut ses = DMatrix::zeros(k, k);
    let mut any_mc = false;
    for i in 0..k {
        for j in 0..=i {
            let est = gamma(&fs[i], &fs[j], law).map_err(|e| Error::GammaEntry {
                i,
                j,
                source: Box::new(e),
            })?;
            entries[(i, j)] = est.value;
            entries[(j, i)] = est.value;
            if let Some(se) = est.std_error {
                any_mc = true;
                ses[(i, j)] = se;
                ses[(j, i)] = se;
            }
        }
    }
    let m = CovarianceMatrix {
        entries,
        labels: fs.iter().map(|f| f.label().to_string()).collect(),
        std_errors: any_mc.then_some(ses),
    };
    if !m.is_symmetric(1e-12) || !m.is_psd() {
        return Err(Error::Internal(format!(
            "covariance matrix is not a Gram matrix (min eigenvalue {:e})",
            m.min_eigenvalue()
        )));
    }
    Ok(m)
}

/// `(t, h)` meaning `T_n = t + n^{-1/2} G_n(h) + o_P(n^{-1/2})`.
#[derive(Debug, Clone)]
pub struct AsymptoticExpansion {
    pub value: f64,
    pub influence: StatFunction,
}

#[allow(clippy::should_implement_trait)]
impl AsymptoticExpansion {
    /// The empirical mean `n^{-1} sum f(Z_i) = mu + n^{-1/2} G_n(f)`.
    pub fn from_mean(f: StatFunction, mu: f64) -> Self {
        Self {
            value: mu,
            influence: f,
        }
    }

    /// A deterministic constant: `(c, 0)`.
    pub fn constant(c: f64) -> Self {
        Self {
            value: c,
            influence: StatFunction::zero(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            value: self.value + other.value,
            influence: &self.influence + &other.influence,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.mul(&Self::constant(c))
    }

    /// `A_n B_n = AB + n^{-1/2} G_n(B L + A H) + o_P(n^{-1/2})`.
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (self.value, other.value);
        Self {
            value: a * b,
            influence: &self.influence.scale(b) + &other.influence.scale(a),
        }
    }

    /// `A_n / B_n = A/B + n^{-1/2} G_n(L/B - A H / B^2) + o_P(n^{-1/2})`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let (a, b) = (self.value, other.value);
        if b.is_nan() || b.abs() <= DENOMINATOR_FLOOR {
            return Err(Error::DegenerateDenominator(b));
        }
        Ok(Self {
            value: a / b,
            influence: &self.influence.scale(1.0 / b) - &other.influence.scale(a / (b * b)),
        })
    }

    /// Delta method: `g(T_n) = g(t) + n^{-1/2} G_n(g'(t) h) + o_P(n^{-1/2})`.
    pub fn smooth_map<G, D>(&self, g: G, g_prime: D) -> Result<Self>
    where
        G: Fn(f64) -> f64,
        D: Fn(f64) -> f64,
    {
        let (gv, dv) = (g(self.value), g_prime(self.value));
        if !gv.is_finite() || !dv.is_finite() {
            return Err(Error::DeltaMethodInapplicable(self.value));
        }
        Ok(Self {
            value: gv,
            influence: self.influence.scale(dv),
        })
    }

    /// `Gamma(h, h)`, the variance of the normal limit of `sqrt(n) (T_n - t)`.
    pub fn asymptotic_variance(&self, law: &dyn MomentOracle) -> Result<f64> {
        Ok(self.asymptotic_variance_estimate(law)?.value)
    }

    pub fn asymptotic_variance_estimate(&self, law: &dyn MomentOracle) -> Result<Estimate> {
        let mut est = gamma(&self.influence, &self.influence, law)?;
        if est.value < -NEGATIVE_TOLERANCE {
            return Err(Error::Internal(format!(
                "negative asymptotic variance {:e}",
                est.value
            )));
        }
        est.value = est.value.max(0.0);
        Ok(est)
    }
}
