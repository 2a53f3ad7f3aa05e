//! A full experiment from a TOML configuration, as the `stochint run`
//! subcommand does it.
//!
//! ```bash
//! cargo run --release -p stochint --example run_experiment -- /tmp/stochint-demo
//! ```

use stochint::experiment::{run, Overrides, RawConfig};

const CONFIG: &str = r#"
seed = "0x5eed"
horizon = 1.0
paths = 1000
levels = [4, 10]
truncation = "auto"
checks = ["convergence", "uniqueness", "isometry", "martingale", "continuity", "l2-decay", "ito-lemma"]

[integrand]
kind = "sin-of-w"

[thresholds]
convergence = 0.05
uniqueness = 0.05
"#;

fn main() -> stochint::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir()
            .join("stochint-demo")
            .display()
            .to_string()
    });
    let config = RawConfig::from_toml(CONFIG)?.resolve(&Overrides {
        output: Some(out.clone().into()),
        ..Default::default()
    })?;
    let outcome = run(&config)?;
    for r in &outcome.results {
        println!("{}", r.summary_line());
    }
    println!(
        "files in {out}, exit status would be {}",
        outcome.exit_code()
    );
    Ok(())
}
