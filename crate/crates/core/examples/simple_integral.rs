//! Integrals of simple processes on one sampled path.
//!
//! ```bash
//! cargo run -p stochint --example simple_integral
//! ```

use stochint::rng::{derive_seed, Purpose};
use stochint::wiener::{sample_path, TimeGrid};
use stochint::{integral_path, integrate_simple, SimpleProcess};

fn main() -> stochint::Result<()> {
    let grid = TimeGrid::dyadic(8, 1.0)?;
    let w = sample_path(&grid, derive_seed(1, 0, Purpose::PathIncrements));

    // c_i = W(t_{i-1}): the integral telescopes to (W(1)^2 - sum dW^2) / 2
    let left = SimpleProcess::new(grid.clone(), 0.0, |_, prefix| Ok(prefix.current()));
    let i = integrate_simple(&left, 1.0, &w)?;
    let w1 = w.value_at(1.0)?;
    println!("I(W)(1)                = {i:.15}");
    println!(
        "(W(1)^2 - QV) / 2      = {:.15}",
        (w1 * w1 - w.quadratic_variation()) / 2.0
    );

    // deterministic coefficients on a coarse grid, integrated up to a time
    // inside the last interval
    let coarse = TimeGrid::new(vec![0.0, 0.25, 0.5])?;
    let sp = SimpleProcess::from_values(coarse, 0.0, vec![2.0, -1.0])?;
    println!(
        "I(sp)(0.375)           = {:.6}",
        integrate_simple(&sp, 0.375, &w)?
    );

    let unit = SimpleProcess::constant(grid, 1.0);
    let ip = integral_path(&unit, &w)?;
    println!("unit integral path reproduces W at {} knots", ip.len());
    for (t, v) in ip.iter().step_by(64) {
        println!("  t = {t:<8} I = {v:+.6}  W = {:+.6}", w.value_at(*t)?);
    }
    Ok(())
}
