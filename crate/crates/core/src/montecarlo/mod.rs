//! Synthetic laws and Monte Carlo verification of the normal limits.

mod experiment;
mod ks;
mod law;

pub use experiment::{
    default_threads, run_clt_experiment, run_lemma1_experiment, Check, CltSummary,
    CoordinateSummary, ExperimentConfig, Lemma1Summary, SimulationReport, Summary,
    COVARIANCE_ABS_TOLERANCE, KS_THRESHOLD, MIN_REPS, THREADS_ENV, VARIANCE_REL_TOLERANCE,
};
pub use ks::ks_statistic;
pub use law::{sample_law, BudgetedLaw, EmpiricalLaw, LawSpec, Marginal};
