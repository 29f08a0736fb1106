//! Test H0: rho = 0 without assuming Gaussian data.
//!
//! ```bash
//! cargo run -p fep --example zero_correlation_test
//! ```

use fep::montecarlo::{LawSpec, Marginal};
use fep::rng::stream;
use fep::test_zero_correlation;

fn main() -> fep::Result<()> {
    let mut rng = stream(2024, 0);

    // Dependent but uncorrelated: y = x^2 - 1 has the same sign pattern for +-x.
    let x = LawSpec::independent(Marginal::StandardNormal, Marginal::StandardNormal).sample(800, &mut rng)?;
    let pairs: Vec<(f64, f64)> = x.xs().iter().map(|&v| (v, v * v - 1.0)).collect();
    let dependent = fep::PairedSample::from_pairs(&pairs)?;

    let cases = [
        ("independent normals", LawSpec::gaussian(0.0)?.sample(800, &mut rng)?),
        ("gaussian rho=0.2", LawSpec::gaussian(0.2)?.sample(800, &mut rng)?),
        ("y = x^2 - 1", dependent),
    ];
    for (name, s) in &cases {
        let t = test_zero_correlation(s)?;
        println!(
            "{name:<22} rho_n {:>7.4}  z {:>7.3}  p {:.4}",
            t.rho_n, t.z, t.p_value
        );
        for w in &t.warnings {
            println!("    warning: {w}");
        }
    }
    Ok(())
}
