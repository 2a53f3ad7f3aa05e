//! Exceedance probabilities and Ky Fan distances of `I(b_k)(1) - I(b_finest)(1)`.
//!
//! ```bash
//! cargo run --release -p stochint --example convergence_in_probability
//! ```

use stochint::approximation::{ApproximationScheme, Truncation};
use stochint::convergence::DEFAULT_EPS_GRID;
use stochint::verification::check_convergence;
use stochint::wiener::PathEnsemble;
use stochint::BuiltinIntegrand;

fn main() -> stochint::Result<()> {
    let scheme = ApproximationScheme::dyadic(1.0, 4, 10, Truncation::Auto)?;
    let ensemble = PathEnsemble::new(2024, scheme.finest_grid().clone(), 2_000)?;
    let f = BuiltinIntegrand::Wiener.functional();
    let (result, report) = check_convergence(&f, 1.0, &scheme, &ensemble, &DEFAULT_EPS_GRID, 0.05)?;
    print!("{}", report.to_csv());
    println!();
    for row in &report.rows {
        println!(
            "level {:>2}: ky_fan {:.4} +- {:.4}",
            row.level, row.ky_fan, row.ky_fan_se
        );
    }
    println!("{}", result.summary_line());
    Ok(())
}
