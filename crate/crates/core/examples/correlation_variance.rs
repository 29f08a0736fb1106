//! Asymptotic variance of the sample correlation under several laws,
//! from the closed form and from the expansion pipeline.
//!
//! ```bash
//! cargo run -p fep --example correlation_variance
//! ```

use fep::montecarlo::{LawSpec, Marginal};
use fep::{correlation_expansion, sigma_squared};

fn main() -> fep::Result<()> {
    let laws = vec![
        ("gaussian rho=0", LawSpec::gaussian(0.0)?),
        ("gaussian rho=0.5", LawSpec::gaussian(0.5)?),
        ("gaussian rho=-0.9", LawSpec::gaussian(-0.9)?),
        (
            "uniform x exponential",
            LawSpec::independent(Marginal::UniformStd, Marginal::ExponentialStd),
        ),
        (
            "exponential x exponential",
            LawSpec::independent(Marginal::ExponentialStd, Marginal::ExponentialStd),
        ),
        (
            "mixture",
            LawSpec::mixture(
                vec![
                    LawSpec::gaussian(0.8)?,
                    LawSpec::independent(Marginal::Rademacher, Marginal::ExponentialStd),
                ],
                vec![0.6, 0.4],
            )?,
        ),
    ];

    println!("{:<28} {:>8} {:>12} {:>12} {:>10}", "law", "rho", "closed", "pipeline", "diff");
    for (name, law) in &laws {
        let m = law.moments()?;
        let closed = sigma_squared(&m)?;
        let e = correlation_expansion(&m)?;
        let pipeline = e.asymptotic_variance(law)?;
        println!(
            "{name:<28} {:>8.4} {closed:>12.6} {pipeline:>12.6} {:>10.1e}",
            e.value,
            (closed - pipeline).abs()
        );
    }
    Ok(())
}
