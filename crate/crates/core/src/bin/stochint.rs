use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stochint::experiment::{
    dump_paths, list_integrands, parse_levels, parse_seed, run, CheckName, ExperimentConfig,
    Overrides, RawConfig,
};

#[derive(Parser)]
#[command(version, about = "Itô integral experiments on simulated Wiener paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured checks and write CSV tables, a summary and a manifest.
    Run(RunArgs),
    /// Print the built-in integrand library.
    ListIntegrands,
    /// Write sampled paths as `t,w` CSV files, one per path.
    DumpPaths(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, decimal or 0x-hex.
    #[arg(long, value_parser = |s: &str| parse_seed(s).map_err(|e| e.to_string()))]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated check names.
    #[arg(long, value_delimiter = ',')]
    check: Option<Vec<String>>,
    /// Level range as kmin:kmax.
    #[arg(long, value_parser = |s: &str| parse_levels(s).map_err(|e| e.to_string()))]
    levels: Option<(u32, u32)>,
    #[arg(long)]
    paths: Option<usize>,
}

impl RunArgs {
    fn resolve(&self) -> stochint::Result<ExperimentConfig> {
        let checks = self
            .check
            .as_ref()
            .map(|names| names.iter().map(|n| n.parse::<CheckName>()).collect())
            .transpose()?;
        let overrides = Overrides {
            seed: self.seed,
            output: self.out.clone(),
            checks,
            levels: self.levels,
            paths: self.paths,
        };
        match &self.config {
            Some(path) => ExperimentConfig::from_file(path, &overrides),
            None => RawConfig::default().resolve(&overrides),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListIntegrands => {
            print!("{}", list_integrands());
            ExitCode::SUCCESS
        }
        Command::Run(args) => {
            let config = match args.resolve() {
                Ok(c) => c,
                Err(e) => return usage_error(e),
            };
            match run(&config) {
                Ok(outcome) => {
                    for r in &outcome.results {
                        println!("{}", r.summary_line());
                    }
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(e) => usage_error(e),
            }
        }
        Command::DumpPaths(args) => {
            let config = match args.resolve() {
                Ok(c) => c,
                Err(e) => return usage_error(e),
            };
            let count = args.paths.unwrap_or(10);
            match dump_paths(
                config.seed,
                config.horizon,
                config.k_max,
                count,
                &config.output,
            ) {
                Ok(files) => {
                    println!(
                        "wrote {} path files to {}",
                        files.len(),
                        config.output.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => usage_error(e),
            }
        }
    }
}

fn usage_error(e: stochint::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}
