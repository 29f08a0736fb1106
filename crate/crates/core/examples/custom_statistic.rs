//! The same calculus applied to another statistic: the sample variance
//! `s^2 = mean(x^2) - mean(x)^2` and the coefficient of variation `s / xbar`.
//! Both limits are checked against a quick simulation.
//!
//! ```bash
//! cargo run --release -p fep --example custom_statistic
//! ```

use fep::montecarlo::{LawSpec, Marginal};
use fep::rng::stream;
use fep::{AsymptoticExpansion, StatFunction};

fn main() -> fep::Result<()> {
    // x = 3 + uniform, so E x = 3 and Var x = 1.
    let law = LawSpec::independent(Marginal::UniformStd, Marginal::StandardNormal)
        .affine(3.0, 0.0, 1.0, 1.0)?;
    let x = StatFunction::pi1();

    let xbar = AsymptoticExpansion::from_mean(x.clone(), 3.0);
    let x2bar = AsymptoticExpansion::from_mean(x.powi(2), 10.0);
    let var = x2bar.sub(&xbar.mul(&xbar));
    let sd = var.smooth_map(f64::sqrt, |v| 0.5 / v.sqrt())?;
    let cv = sd.div(&xbar)?;

    let predicted_var = var.asymptotic_variance(&law)?;
    let predicted_cv = cv.asymptotic_variance(&law)?;

    let (n, reps) = (2000, 2000);
    let mut v_stats = Vec::with_capacity(reps);
    let mut cv_stats = Vec::with_capacity(reps);
    for r in 0..reps {
        let s = law.sample(n, &mut stream(99, r as u64))?;
        let m = s.xs().iter().sum::<f64>() / n as f64;
        let s2 = s.xs().iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64;
        let root_n = (n as f64).sqrt();
        v_stats.push(root_n * (s2 - var.value));
        cv_stats.push(root_n * (s2.sqrt() / m - cv.value));
    }

    println!("statistic   value   predicted   simulated");
    println!("s^2        {:6.4}   {predicted_var:9.4}   {:9.4}", var.value, sample_var(&v_stats));
    println!("s / xbar   {:6.4}   {predicted_cv:9.4}   {:9.4}", cv.value, sample_var(&cv_stats));
    Ok(())
}

fn sample_var(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}
