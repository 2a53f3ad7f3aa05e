//! Itô's lemma residuals `f(W_t) - f(0) - int f'(W) dW - 1/2 int f''(W) ds`
//! per level, with the final threshold calibrated from a finer pilot level.
//!
//! ```bash
//! cargo run --release -p stochint --example ito_lemma
//! ```

use stochint::approximation::{ApproximationScheme, Truncation};
use stochint::verification::{calibrate_ito_threshold, check_ito_lemma, SmoothFunction};
use stochint::wiener::PathEnsemble;

fn main() -> stochint::Result<()> {
    let (seed, paths, t) = (5, 2_000, 0.5);
    let scheme = ApproximationScheme::dyadic(t, 4, 10, Truncation::Auto)?;
    let ensemble = PathEnsemble::new(seed, scheme.finest_grid().clone(), paths)?;
    for fun in [
        SmoothFunction::identity(),
        SmoothFunction::square(),
        SmoothFunction::exp(),
    ] {
        let threshold = calibrate_ito_threshold(&fun, t, 10, 12, seed, paths)?;
        let r = check_ito_lemma(&fun, t, &scheme, &ensemble, threshold)?;
        print!("{}", r.diagnostics.to_csv());
        println!("{}\n", r.summary_line());
    }
    Ok(())
}
