//! Acceptance suite. Each criterion prints one PASS/FAIL line.
//!
//! `cargo test -p fep --test acceptance -- --nocapture` shows the lines.

use std::time::{Duration, Instant};

use fep::acceptance::{self, CriterionOutcome};

const SEED: u64 = 42;

fn report(outcome: fep::Result<CriterionOutcome>, elapsed: Duration, budget: Option<Duration>) {
    let outcome = outcome.expect("criterion ran");
    println!("{} ({:.2?})", outcome.line(), elapsed);
    for c in outcome.checks.iter().filter(|c| !c.pass) {
        println!("    failed check {}: value {:e}, threshold {:e}", c.name, c.value, c.threshold);
    }
    assert!(outcome.pass, "{}", outcome.line());
    if let Some(limit) = budget {
        assert!(elapsed < limit, "criterion {} took {elapsed:?} (limit {limit:?})", outcome.id);
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

#[test]
fn criterion_1_gaussian_closed_form() {
    let (o, t) = timed(acceptance::gaussian_closed_form);
    report(o, t, Some(Duration::from_secs(1)));
}

#[test]
fn criterion_2_clt_gaussian() {
    let (o, t) = timed(|| acceptance::clt_gaussian(SEED));
    report(o, t, Some(Duration::from_secs(60)));
}

#[test]
fn criterion_3_clt_independent_pairings() {
    let (o, t) = timed(|| acceptance::clt_independent(SEED));
    let n_pairings = o.as_ref().map(|o| o.checks.len() / 2).unwrap_or(0);
    assert_eq!(n_pairings, 16);
    report(o, t, None);
}

#[test]
fn criterion_4_derivation_oracle() {
    let (o, t) = timed(|| acceptance::derivation_oracle(SEED));
    report(o, t, None);
}

#[test]
fn criterion_5_lemma1_joint_normality() {
    let (o, t) = timed(|| acceptance::lemma1_joint(SEED));
    report(o, t, None);
}

#[test]
fn criterion_6_exact_invariants() {
    let (o, t) = timed(|| acceptance::exact_invariants(SEED));
    report(o, t, None);
}

#[test]
fn criterion_7_ztest_calibration() {
    let (o, t) = timed(|| acceptance::ztest_calibration(SEED));
    report(o, t, None);
}
