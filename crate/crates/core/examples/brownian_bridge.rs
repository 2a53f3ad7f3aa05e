//! Coupling resolutions: sample coarse, refine by Brownian bridge, and keep
//! every original knot bit-identical.
//!
//! ```bash
//! cargo run -p stochint --example brownian_bridge
//! ```

use stochint::rng::{derive_seed, Purpose};
use stochint::wiener::{refine, sample_path, PathEnsemble, TimeGrid};

fn main() -> stochint::Result<()> {
    let coarse = TimeGrid::dyadic(2, 1.0)?;
    let fine = TimeGrid::dyadic(4, 1.0)?;
    let w = sample_path(&coarse, derive_seed(9, 0, Purpose::PathIncrements));
    let r = refine(&w, &fine, derive_seed(9, 0, Purpose::BridgeRefinement))?;
    println!("t,coarse,refined");
    for &t in fine.knots() {
        let c = w.value_at(t).map(|v| v.to_string()).unwrap_or_default();
        println!("{t},{c},{}", r.value_at(t)?);
    }

    // an ensemble on a 3 * 2^4 grid built on a dyadic base: the base knots
    // match a plain dyadic ensemble with the same seed
    let base = TimeGrid::dyadic(4, 1.0)?;
    let union = base.union(&TimeGrid::uniform(48, 1.0)?);
    let coupled = PathEnsemble::new(9, union, 4)?.with_base(base.clone())?;
    let plain = PathEnsemble::new(9, base.clone(), 4)?;
    let agree = (0..4).all(|i| coupled.path(i).restrict(&base).ok() == Some(plain.path(i)));
    println!("base knots agree across ensembles: {agree}");
    Ok(())
}
