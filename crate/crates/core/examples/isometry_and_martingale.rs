//! Isometry and martingale-increment checks for `b = W`.
//!
//! ```bash
//! cargo run --release -p stochint --example isometry_and_martingale
//! ```

use stochint::verification::{check_isometry, check_martingale, TestFunctional};
use stochint::wiener::{PathEnsemble, TimeGrid};
use stochint::BuiltinIntegrand;

fn main() -> stochint::Result<()> {
    let ensemble = PathEnsemble::new(11, TimeGrid::dyadic(10, 1.0)?, 5_000)?;
    let f = BuiltinIntegrand::Wiener.functional();

    let iso = check_isometry(&f, 1.0, 10, &ensemble)?;
    print!("{}", iso.diagnostics.to_csv());
    println!("{}\n", iso.summary_line());

    let tests = [
        TestFunctional::one(),
        TestFunctional::wiener(),
        TestFunctional::sin_of_w(),
    ];
    let mg = check_martingale(&f, 0.5, 1.0, 10, &tests, &ensemble)?;
    print!("{}", mg.diagnostics.to_csv());
    println!("{}", mg.summary_line());

    // the non-H2 integrand is refused rather than measured
    let refused = check_isometry(
        &BuiltinIntegrand::ExpWSquared.functional(),
        1.0,
        10,
        &ensemble,
    );
    println!("\nexp-w-squared: {}", refused.unwrap_err());
    Ok(())
}
