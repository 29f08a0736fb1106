//! Asymptotic normality of plug-in statistics through the functional
//! empirical process.
//!
//! A statistic written as a smooth combination of empirical means
//! `n^{-1} sum H(Z_i)` is expanded as `t + n^{-1/2} G_n(h) + o_P(n^{-1/2})`
//! by chaining [`AsymptoticExpansion`] combinators; the limit law of
//! `sqrt(n) (T_n - t)` is then `N(0, Gamma(h, h))`. The sample linear
//! correlation coefficient is worked through in [`correlation`], and
//! [`montecarlo`] checks the resulting limits by simulation.

pub mod acceptance;
pub mod cli;
pub mod correlation;
pub mod error;
pub mod expansion;
pub mod function;
pub mod montecarlo;
pub mod normal;
pub mod rng;
pub mod sample;

pub use correlation::{
    compute_rho_n, correlation_expansion, correlation_influence, estimate_moments,
    population_rho, sigma1_squared, sigma_squared, test_zero_correlation, BivariateMoments,
    ZeroCorrelationTest,
};
pub use error::{Error, Result};
pub use expansion::{
    expectation, gamma, gamma_matrix, gn_eval, AsymptoticExpansion, CovarianceMatrix, Estimate,
    McBudget, MomentOracle,
};
pub use function::{Polynomial, StatFunction};
pub use sample::PairedSample;
