//! Adaptedness is access control: functionals see a path prefix, and the
//! probe re-evaluates them against fresh continuations of the path.
//!
//! ```bash
//! cargo run -p stochint --example adaptedness
//! ```

use stochint::process::probe_adaptedness;
use stochint::rng::{derive_seed, Purpose};
use stochint::wiener::{sample_path, TimeGrid};
use stochint::IntegrandFunctional;

fn main() -> stochint::Result<()> {
    let w = sample_path(
        &TimeGrid::dyadic(6, 1.0)?,
        derive_seed(4, 0, Purpose::PathIncrements),
    );

    let running_max = IntegrandFunctional::new("running-max", true, true, |_, prefix| {
        Ok(prefix
            .values()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max))
    });
    let r = probe_adaptedness(&running_max, 0.5, &w, 16);
    println!(
        "running max:  passed={} evaluations={}",
        r.passed, r.evaluations
    );

    let peeking = IntegrandFunctional::new("peeking", true, true, |_, prefix| prefix.value_at(1.0));
    let r = probe_adaptedness(&peeking, 0.5, &w, 16);
    println!(
        "reads W(1):   passed={} violation={:?}",
        r.passed, r.violation
    );
    Ok(())
}
