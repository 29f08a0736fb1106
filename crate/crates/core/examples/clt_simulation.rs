//! Simulate sqrt(n) (rho_n - rho) and compare with its predicted normal limit.
//!
//! ```bash
//! cargo run --release -p fep --example clt_simulation -- 0.5 2000 5000
//! ```

use fep::montecarlo::{run_clt_experiment, ExperimentConfig, LawSpec};

fn main() -> fep::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let rho = args.first().copied().unwrap_or(0.5);
    let n = args.get(1).map_or(2000, |&v| v as usize);
    let reps = args.get(2).map_or(5000, |&v| v as usize);

    let cfg = ExperimentConfig::new(LawSpec::gaussian(rho)?, n, reps, 42);
    let report = run_clt_experiment(&cfg)?;
    let s = report.clt().expect("clt summary");

    println!("rho = {rho}, n = {n}, reps = {reps}");
    println!("predicted variance  {:.4}", s.predicted_sigma2);
    println!("empirical variance  {:.4}", s.empirical_variance);
    println!("empirical mean      {:.4}", s.empirical_mean);
    println!("KS distance         {:.4}", s.ks_distance);
    for c in &report.checks {
        println!("  {:<24} {:.4} vs {:.4}  {}", c.name, c.value, c.threshold, if c.pass { "ok" } else { "FAIL" });
    }
    Ok(())
}
