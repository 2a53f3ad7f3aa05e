//! The level-by-level trace `I(b_k)(t)` for a general adapted integrand,
//! exported as CSV.
//!
//! ```bash
//! cargo run -p stochint --example general_trace -- sin-of-w
//! ```

use stochint::approximation::{ApproximationScheme, Truncation};
use stochint::rng::{derive_seed, Purpose};
use stochint::wiener::sample_path;
use stochint::{integrate_general, BuiltinIntegrand};

fn main() -> stochint::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "sin-of-w".into());
    let b = BuiltinIntegrand::from_name(&name, &[])?;
    let t = if b.h2() { 1.0 } else { 0.5 };
    let scheme = ApproximationScheme::dyadic(t, 2, 14, Truncation::Auto)?;
    let w = sample_path(
        scheme.finest_grid(),
        derive_seed(3, 0, Purpose::PathIncrements),
    );
    let trace = integrate_general(&b.functional(), t, &scheme, &w)?;
    print!("{}", trace.to_csv());
    eprintln!("accepted I({name})({t}) = {}", trace.accepted_value);
    Ok(())
}
