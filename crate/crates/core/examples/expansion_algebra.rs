//! Build expansions by hand and read off their asymptotic variances.
//!
//! ```bash
//! cargo run -p fep --example expansion_algebra
//! ```

use fep::montecarlo::LawSpec;
use fep::{gamma_matrix, AsymptoticExpansion, StatFunction};

fn main() -> fep::Result<()> {
    let law = LawSpec::gaussian(0.5)?;
    let x = StatFunction::pi1();
    let y = StatFunction::pi2();

    let fs = [x.clone(), y.clone(), &x * &y];
    let g = gamma_matrix(&fs, &law)?;
    println!("Gamma for [x, y, xy] under N(0, 0.5):");
    for i in 0..g.dim() {
        let row: Vec<String> = (0..g.dim()).map(|j| format!("{:8.4}", g.get(i, j))).collect();
        println!("  {}", row.join(" "));
    }
    println!("  min eigenvalue {:.4}", g.min_eigenvalue());

    // Means of x and y, each with mean 0.
    let xbar = AsymptoticExpansion::from_mean(x.clone(), 0.0);
    let ybar = AsymptoticExpansion::from_mean(y.clone(), 0.0);

    let sum = xbar.add(&ybar);
    println!("xbar + ybar      -> {:.4}", sum.asymptotic_variance(&law)?);

    // The product is degenerate at zero: the first-order term vanishes.
    let prod = xbar.mul(&ybar);
    println!("xbar * ybar      -> {:.4}", prod.asymptotic_variance(&law)?);

    let shifted = AsymptoticExpansion::from_mean(&x + &StatFunction::constant(2.0), 2.0);
    let ratio = ybar.div(&shifted)?;
    println!("ybar / (xbar+2)  -> {:.4}", ratio.asymptotic_variance(&law)?);

    let e = shifted.smooth_map(f64::exp, f64::exp)?;
    println!("exp(xbar + 2)    -> {:.4}  (e^4 = {:.4})", e.asymptotic_variance(&law)?, 4f64.exp());

    match xbar.div(&ybar) {
        Ok(_) => println!("unexpected"),
        Err(err) => println!("xbar / ybar      -> {err}"),
    }
    Ok(())
}
