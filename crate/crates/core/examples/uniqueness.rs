//! Two approximating schemes on the same coupled paths: dyadic grids against
//! `3 * 2^k` grids with level-index truncation, for the non-H2 integrand
//! `exp(W^2)`.
//!
//! ```bash
//! cargo run --release -p stochint --example uniqueness
//! ```

use stochint::approximation::{ApproximationScheme, GridFamily, Truncation};
use stochint::convergence::DEFAULT_EPS_GRID;
use stochint::verification::check_uniqueness;
use stochint::wiener::PathEnsemble;
use stochint::BuiltinIntegrand;

fn main() -> stochint::Result<()> {
    let t = 0.5;
    let a = ApproximationScheme::new(GridFamily::Dyadic, t, 4, 12, Truncation::Auto)?;
    let b = ApproximationScheme::new(GridFamily::Scaled(3), t, 4, 12, Truncation::LevelIndex)?;
    let ensemble = PathEnsemble::new(7, a.finest_grid().union(b.finest_grid()), 1_000)?
        .with_base(a.finest_grid().clone())?;
    let f = BuiltinIntegrand::ExpWSquared.functional();
    let (result, report) = check_uniqueness(&f, t, &a, &b, &ensemble, &DEFAULT_EPS_GRID, 0.05)?;
    for row in &report.rows {
        println!(
            "level {:>2}: ky_fan(I_A - I_B) = {:.4}",
            row.level, row.ky_fan
        );
    }
    println!("{}", result.summary_line());
    Ok(())
}
