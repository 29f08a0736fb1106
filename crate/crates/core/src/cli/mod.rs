//! Command-line front end.
//!
//! Every command produces a [`Report`] with the fixed top-level layout
//! `{command, config, results, checks, seed}`. Exit codes: 0 when every
//! check passes, 1 when a check fails, 2 on usage or I/O errors.

pub mod csv_io;
mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

pub use report::{OutputFormat, Report};

use crate::acceptance;
use crate::correlation::{
    compute_rho_n, correlation_expansion, estimate_moments, population_rho, sigma_squared,
    test_zero_correlation, DEFAULT_KURTOSIS_WARNING,
};
use crate::error::{Error, Result};
use crate::function::StatFunction;
use crate::montecarlo::{
    default_threads, run_clt_experiment, run_lemma1_experiment, Check, EmpiricalLaw,
    ExperimentConfig, LawSpec, Marginal, THREADS_ENV,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fep", version, about = "Asymptotic laws of the sample correlation coefficient")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Plug-in correlation, asymptotic variance, 95% interval and zero-correlation test for a CSV file
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact asymptotic variance for a synthetic law, cross-checked through the expansion pipeline
    Variance {
        #[command(flatten)]
        law: LawArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Replicate sqrt(n)(rho_n - rho) and compare with its normal limit
    Simulate {
        #[command(flatten)]
        law: LawArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Replicate (G_n(f_1), ..., G_n(f_k)) and compare with Gamma
    Lemma1 {
        #[command(flatten)]
        law: LawArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated functions: pi1, pi2, p, pi1^2, pi2^2, or a numeric constant
        #[arg(long, default_value = "pi1,pi2,p")]
        functions: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the acceptance suite
    Check {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    Gaussian,
    Independent,
    Mixture,
}

#[derive(Debug, Clone, Args)]
pub struct LawArgs {
    #[arg(long, value_enum)]
    pub law: LawKind,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub mx: Option<String>,
    #[arg(long)]
    pub my: Option<String>,
    /// Mixture as JSON: {"components": [<law>, ...], "weights": [...]}
    #[arg(long)]
    pub mixture: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 5000)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads (0 = all cores)
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Estimate,
    Variance,
    Simulate,
    Lemma1,
    Check,
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub input_path: Option<PathBuf>,
    pub law: Option<LawSpec>,
    pub functions: Option<Vec<String>>,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
}

impl LawArgs {
    pub fn to_law(&self) -> Result<LawSpec> {
        let law = match self.law {
            LawKind::Gaussian => {
                let rho = self
                    .rho
                    .ok_or_else(|| Error::InvalidConfig("--law gaussian requires --rho".into()))?;
                LawSpec::gaussian(rho)?
            }
            LawKind::Independent => {
                let pick = |v: &Option<String>, flag: &str| -> Result<Marginal> {
                    v.as_deref()
                        .ok_or_else(|| {
                            Error::InvalidConfig(format!("--law independent requires {flag}"))
                        })?
                        .parse()
                };
                LawSpec::independent(pick(&self.mx, "--mx")?, pick(&self.my, "--my")?)
            }
            LawKind::Mixture => {
                let text = self.mixture.as_deref().ok_or_else(|| {
                    Error::InvalidConfig("--law mixture requires --mixture".into())
                })?;
                #[derive(serde::Deserialize)]
                struct MixtureJson {
                    components: Vec<LawSpec>,
                    weights: Vec<f64>,
                }
                let m: MixtureJson = serde_json::from_str(text)
                    .map_err(|e| Error::InvalidLaw(format!("--mixture: {e}")))?;
                LawSpec::mixture(m.components, m.weights)?
            }
        };
        law.validate()?;
        Ok(law)
    }
}

/// Parses a function name as accepted by `--functions`.
pub fn parse_function(name: &str) -> Result<StatFunction> {
    Ok(match name.trim() {
        "pi1" => StatFunction::pi1(),
        "pi2" => StatFunction::pi2(),
        "p" => StatFunction::p(),
        "pi1^2" => StatFunction::pi1().powi(2).with_label("pi1^2"),
        "pi2^2" => StatFunction::pi2().powi(2).with_label("pi2^2"),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|c| c.is_finite())
            .map(StatFunction::constant)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown function '{other}'")))?,
    })
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let blank = |command, out: &OutputArgs| RunConfig {
            command,
            input_path: None,
            law: None,
            functions: None,
            n: None,
            reps: None,
            seed: None,
            threads: None,
            output_format: out.format,
            output_path: out.output.clone(),
        };
        let with_run = |mut cfg: RunConfig, run: &RunArgs| {
            cfg.n = Some(run.n);
            cfg.reps = Some(run.reps);
            cfg.seed = Some(run.seed);
            cfg.threads = Some(run.threads.unwrap_or_else(default_threads));
            cfg
        };
        Ok(match &cli.command {
            CommandArgs::Estimate { input, out } => RunConfig {
                input_path: Some(input.clone()),
                ..blank(Command::Estimate, out)
            },
            CommandArgs::Variance { law, out } => RunConfig {
                law: Some(law.to_law()?),
                ..blank(Command::Variance, out)
            },
            CommandArgs::Simulate { law, run, out } => with_run(
                RunConfig {
                    law: Some(law.to_law()?),
                    ..blank(Command::Simulate, out)
                },
                run,
            ),
            CommandArgs::Lemma1 {
                law,
                run,
                functions,
                out,
            } => with_run(
                RunConfig {
                    law: Some(law.to_law()?),
                    functions: Some(functions.split(',').map(|s| s.trim().to_string()).collect()),
                    ..blank(Command::Lemma1, out)
                },
                run,
            ),
            CommandArgs::Check { seed, out } => RunConfig {
                seed: Some(*seed),
                ..blank(Command::Check, out)
            },
        })
    }

    fn experiment(&self) -> Result<ExperimentConfig> {
        let law = self.require_law()?;
        let cfg = ExperimentConfig {
            law,
            n: self.n.unwrap_or(2000),
            reps: self.reps.unwrap_or(5000),
            seed: self.seed.unwrap_or(42),
            threads: self.threads.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn require_law(&self) -> Result<LawSpec> {
        self.law
            .clone()
            .ok_or_else(|| Error::InvalidConfig("law parameters required".into()))
    }
}

/// Runs a resolved configuration.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    match cfg.command {
        Command::Estimate => cmd_estimate(cfg),
        Command::Variance => cmd_variance(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::Lemma1 => cmd_lemma1(cfg),
        Command::Check => cmd_check(cfg),
    }
}

pub fn cmd_estimate(cfg: &RunConfig) -> Result<Report> {
    let path = cfg
        .input_path
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("estimate requires --input".into()))?;
    let sample = csv_io::read_paired_csv_file(path)?;
    let n = sample.len();
    let rho_n = compute_rho_n(&sample)?;
    let m = estimate_moments(&sample)?;
    let sigma2 = sigma_squared(&m)?;
    let pipeline = correlation_expansion(&m)?.asymptotic_variance(&EmpiricalLaw::new(&sample))?;
    let sigma = sigma2.sqrt();
    let half = 1.96 * sigma / (n as f64).sqrt();
    let ztest = test_zero_correlation(&sample)?;
    let mut warnings = ztest.warnings.clone();
    if let Some(w) = m.heavy_tail_warning(DEFAULT_KURTOSIS_WARNING) {
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    }
    let results = json!({
        "n": n,
        "rho_n": rho_n,
        "sigma2_hat": sigma2,
        "sigma_hat": sigma,
        "sigma2_hat_pipeline": pipeline,
        "ci95": [rho_n - half, rho_n + half],
        "moments": m,
        "zero_correlation_test": {
            "z": ztest.z,
            "p_value": ztest.p_value,
            "sigma1_squared": ztest.sigma1_squared,
        },
        "warnings": warnings,
    });
    Ok(Report::new(cfg, results, Vec::new()))
}

pub fn cmd_variance(cfg: &RunConfig) -> Result<Report> {
    let law = cfg.require_law()?;
    let m = law.moments()?;
    let rho = population_rho(&m)?;
    let sigma2 = sigma_squared(&m)?;
    let pipeline = correlation_expansion(&m)?.asymptotic_variance(&law)?;
    let diff = (sigma2 - pipeline).abs();
    let results = json!({
        "rho": rho,
        "sigma2": sigma2,
        "sigma2_pipeline": pipeline,
        "abs_difference": diff,
        "moments": m,
    });
    Ok(Report::new(
        cfg,
        results,
        vec![Check::below("pipeline_abs_difference", diff, 1e-9)],
    ))
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Report> {
    let exp = cfg.experiment()?;
    let rep = run_clt_experiment(&exp)?;
    let results = serde_json::to_value(&rep.summary).expect("summary serializes");
    Ok(Report::new(cfg, results, rep.checks))
}

pub fn cmd_lemma1(cfg: &RunConfig) -> Result<Report> {
    let exp = cfg.experiment()?;
    let names = cfg
        .functions
        .clone()
        .unwrap_or_else(|| vec!["pi1".into(), "pi2".into(), "p".into()]);
    let fs = names
        .iter()
        .map(|n| parse_function(n))
        .collect::<Result<Vec<_>>>()?;
    let rep = run_lemma1_experiment(&fs, &exp)?;
    let results = serde_json::to_value(&rep.summary).expect("summary serializes");
    Ok(Report::new(cfg, results, rep.checks))
}

pub fn cmd_check(cfg: &RunConfig) -> Result<Report> {
    let seed = cfg.seed.unwrap_or(42);
    let outcomes = acceptance::run_all(seed)?;
    for o in &outcomes {
        eprintln!("{}", o.line());
    }
    let checks = outcomes
        .iter()
        .map(|o| Check::at_least(format!("criterion_{}", o.id), f64::from(u8::from(o.pass)), 1.0))
        .collect();
    let results = serde_json::to_value(&outcomes).expect("outcomes serialize");
    Ok(Report::new(cfg, json!({ "criteria": results }), checks))
}

/// Parses arguments, runs, writes the report, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let outcome = RunConfig::from_cli(&cli).and_then(|cfg| {
        let report = run(&cfg)?;
        report.emit(cfg.output_format, cfg.output_path.as_deref())?;
        Ok(report)
    });
    match outcome {
        Ok(report) if report.passed() => EXIT_PASS,
        Ok(_) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
