//! Experiment configuration and the runner behind the `stochint` binary.
//!
//! A run is a pure function of its resolved configuration: every check draws
//! its paths from the master seed, and every output file is rendered from the
//! results with a fixed float format.
//!
//! Configuration files are TOML:
//!
//! ```toml
//! seed = "0x2a"            # or an integer
//! horizon = 1.0
//! paths = 10000
//! levels = [4, 12]
//! truncation = "auto"      # auto | none | level | <number>
//! checks = ["convergence", "uniqueness", "continuity"]
//! output = "out"
//!
//! [integrand]
//! kind = "sin-of-w"
//! params = []
//! ```
//!
//! Output files, all with a header row:
//!
//! * `<check>.csv`: the check's diagnostics table. `convergence` and
//!   `uniqueness` use `level,eps,p_hat,se,ky_fan`.
//! * `summary.csv`: `name,statistic,tolerance,passed`, one line per check.
//! * `manifest.json`: resolved configuration, crate version and seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::approximation::{ApproximationScheme, GridFamily, Truncation, MAX_LEVEL};
use crate::convergence::DEFAULT_EPS_GRID;
use crate::error::{Error, Result};
use crate::process::BuiltinIntegrand;
use crate::verification::{
    calibrate_ito_threshold, check_continuity, check_convergence, check_isometry, check_ito_lemma,
    check_l2_decay, check_martingale, check_uniqueness, summary_csv, CheckResult, SmoothFunction,
    TestFunctional,
};
use crate::wiener::{PathEnsemble, TimeGrid};

pub const DEFAULT_SEED: u64 = 20_181_201;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    Convergence,
    Uniqueness,
    Isometry,
    Martingale,
    Continuity,
    L2Decay,
    ItoLemma,
}

impl CheckName {
    pub const ALL: [CheckName; 7] = [
        CheckName::Convergence,
        CheckName::Uniqueness,
        CheckName::Isometry,
        CheckName::Martingale,
        CheckName::Continuity,
        CheckName::L2Decay,
        CheckName::ItoLemma,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckName::Convergence => "convergence",
            CheckName::Uniqueness => "uniqueness",
            CheckName::Isometry => "isometry",
            CheckName::Martingale => "martingale",
            CheckName::Continuity => "continuity",
            CheckName::L2Decay => "l2-decay",
            CheckName::ItoLemma => "ito-lemma",
        }
    }
}

impl FromStr for CheckName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| {
                let known: Vec<_> = Self::ALL.iter().map(|c| c.as_str()).collect();
                Error::Config(format!("unknown check `{s}` (known: {})", known.join(", ")))
            })
    }
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(s: &str) -> Result<u64> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| Error::Config(format!("`{s}` is not a valid u64 seed")))
}

/// `kmin:kmax`
pub fn parse_levels(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::Config(format!("levels must look like `kmin:kmax`, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SeedValue {
    Int(u64),
    Text(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrand {
    kind: String,
    #[serde(default)]
    params: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    convergence: Option<f64>,
    uniqueness: Option<f64>,
    ito_lemma: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIsometry {
    level: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMartingale {
    s: Option<f64>,
    level: Option<u32>,
    tests: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawItoLemma {
    functions: Option<Vec<String>>,
    pilot_level: Option<u32>,
}

/// The configuration file as written, before defaults and validation.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    seed: Option<SeedValue>,
    horizon: Option<f64>,
    paths: Option<usize>,
    levels: Option<(u32, u32)>,
    truncation: Option<String>,
    integrand: Option<RawIntegrand>,
    checks: Option<Vec<String>>,
    eps: Option<Vec<f64>>,
    output: Option<PathBuf>,
    #[serde(default)]
    thresholds: RawThresholds,
    #[serde(default)]
    isometry: RawIsometry,
    #[serde(default)]
    martingale: RawMartingale,
    #[serde(default)]
    ito_lemma: RawItoLemma,
}

/// Command-line overrides; `None` keeps the file's value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub checks: Option<Vec<CheckName>>,
    pub levels: Option<(u32, u32)>,
    pub paths: Option<usize>,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn resolve(self, overrides: &Overrides) -> Result<ExperimentConfig> {
        let seed = match (overrides.seed, self.seed) {
            (Some(s), _) => s,
            (None, Some(SeedValue::Int(s))) => s,
            (None, Some(SeedValue::Text(s))) => parse_seed(&s)?,
            (None, None) => DEFAULT_SEED,
        };
        let horizon = self.horizon.unwrap_or(1.0);
        let paths = overrides.paths.or(self.paths).unwrap_or(10_000);
        let (k_min, k_max) = overrides.levels.or(self.levels).unwrap_or((4, 12));
        let truncation = match self.truncation {
            Some(t) => t.parse()?,
            None => Truncation::Auto,
        };
        let integrand = match self.integrand {
            Some(i) => BuiltinIntegrand::from_name(&i.kind, &i.params)?,
            None => BuiltinIntegrand::Wiener,
        };
        let checks = match &overrides.checks {
            Some(c) => c.clone(),
            None => match self.checks {
                Some(names) => names.iter().map(|n| n.parse()).collect::<Result<_>>()?,
                None => CheckName::ALL.to_vec(),
            },
        };
        let tests = self
            .martingale
            .tests
            .unwrap_or_else(|| vec!["one".into(), "w".into(), "sin-of-w".into()]);
        let functions = self
            .ito_lemma
            .functions
            .unwrap_or_else(|| vec!["x".into(), "x2".into(), "exp".into()]);
        let config = ExperimentConfig {
            seed,
            horizon,
            paths,
            k_min,
            k_max,
            truncation,
            integrand,
            checks,
            eps_grid: self.eps.unwrap_or_else(|| DEFAULT_EPS_GRID.to_vec()),
            convergence_threshold: self.thresholds.convergence.unwrap_or(0.02),
            uniqueness_threshold: self.thresholds.uniqueness.unwrap_or(0.05),
            ito_threshold: self.thresholds.ito_lemma,
            isometry_level: self.isometry.level.unwrap_or(k_max.min(10)),
            martingale_s: self.martingale.s.unwrap_or(horizon / 2.0),
            martingale_level: self.martingale.level.unwrap_or(k_max),
            martingale_tests: tests,
            ito_functions: functions,
            ito_pilot_level: self.ito_lemma.pilot_level.unwrap_or(k_max + 2),
            output: overrides
                .output
                .clone()
                .or(self.output)
                .unwrap_or_else(|| PathBuf::from("stochint-out")),
        };
        config.validate()?;
        Ok(config)
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub horizon: f64,
    pub paths: usize,
    pub k_min: u32,
    pub k_max: u32,
    pub truncation: Truncation,
    #[serde(serialize_with = "integrand_name")]
    pub integrand: BuiltinIntegrand,
    pub checks: Vec<CheckName>,
    pub eps_grid: Vec<f64>,
    pub convergence_threshold: f64,
    pub uniqueness_threshold: f64,
    /// Fixed Itô-lemma threshold; calibrated from a pilot run when unset.
    pub ito_threshold: Option<f64>,
    pub isometry_level: u32,
    pub martingale_s: f64,
    pub martingale_level: u32,
    pub martingale_tests: Vec<String>,
    pub ito_functions: Vec<String>,
    pub ito_pilot_level: u32,
    #[serde(skip)]
    pub output: PathBuf,
}

fn integrand_name<S: serde::Serializer>(
    b: &BuiltinIntegrand,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match b {
        BuiltinIntegrand::Const(v) => s.serialize_str(&format!("const({v})")),
        other => s.serialize_str(other.name()),
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path, overrides: &Overrides) -> Result<Self> {
        RawConfig::load(path)?.resolve(overrides)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.k_min < 1 {
            return fail("k_min must be at least 1".into());
        }
        if self.k_max < self.k_min {
            return fail(format!(
                "k_max {} is below k_min {}",
                self.k_max, self.k_min
            ));
        }
        if self.k_max > MAX_LEVEL || self.ito_pilot_level > MAX_LEVEL {
            return fail(format!("levels above {MAX_LEVEL} are not supported"));
        }
        if self.paths < 2 {
            return fail("at least two paths are needed".into());
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return fail(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.checks.is_empty() {
            return fail("no checks selected".into());
        }
        if self.eps_grid.is_empty() || self.eps_grid.iter().any(|e| e.is_nan() || *e <= 0.0) {
            return fail("eps grid must be non-empty and positive".into());
        }
        let sel = |c| self.checks.contains(&c);
        if (sel(CheckName::Convergence) || sel(CheckName::Uniqueness)) && self.k_min == self.k_max {
            return fail("convergence and uniqueness need at least two levels".into());
        }
        if sel(CheckName::Isometry) && !self.integrand.h2() {
            return fail(format!(
                "isometry needs an H2 integrand; `{}` is not",
                self.integrand.name()
            ));
        }
        if sel(CheckName::Isometry) && !(1..=self.k_max).contains(&self.isometry_level) {
            return fail("isometry level must lie in 1..=k_max".into());
        }
        if sel(CheckName::Martingale) {
            if !(1..=self.k_max).contains(&self.martingale_level) {
                return fail("martingale level must lie in 1..=k_max".into());
            }
            if !(self.martingale_s > 0.0 && self.martingale_s < self.horizon) {
                return fail("martingale s must lie in (0, horizon)".into());
            }
            let grid = TimeGrid::dyadic(self.martingale_level, self.horizon)?;
            if !grid.contains(self.martingale_s) {
                return fail(format!(
                    "martingale s = {} is not a knot of level {}",
                    self.martingale_s, self.martingale_level
                ));
            }
            for t in &self.martingale_tests {
                test_functional(t)?;
            }
        }
        if sel(CheckName::ItoLemma) {
            for f in &self.ito_functions {
                SmoothFunction::by_name(f)?;
            }
            if self.ito_threshold.is_none() && self.ito_pilot_level <= self.k_max {
                return fail("ito-lemma pilot level must exceed k_max".into());
            }
        }
        Ok(())
    }

    fn scheme(&self, family: GridFamily, truncation: Truncation) -> Result<ApproximationScheme> {
        ApproximationScheme::new(family, self.horizon, self.k_min, self.k_max, truncation)
    }

    fn ensemble(&self, grid: TimeGrid) -> Result<PathEnsemble> {
        PathEnsemble::new(self.seed, grid, self.paths)
    }
}

fn test_functional(name: &str) -> Result<TestFunctional> {
    match name {
        "one" => Ok(TestFunctional::one()),
        "w" => Ok(TestFunctional::wiener()),
        "sin-of-w" => Ok(TestFunctional::sin_of_w()),
        other => Err(Error::Config(format!(
            "unknown test functional `{other}` (known: one, w, sin-of-w)"
        ))),
    }
}

/// Results of a run, in check order.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub results: Vec<CheckResult>,
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    name: &'static str,
    version: &'static str,
    seed: String,
    config: &'a ExperimentConfig,
    checks: Vec<&'a str>,
}

/// Runs every selected check, then writes the output files.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let f = config.integrand.functional();
    let t = config.horizon;
    let base_scheme = config.scheme(GridFamily::Dyadic, config.truncation)?;
    let ensemble = config.ensemble(base_scheme.finest_grid().clone())?;
    let mut results = Vec::new();
    for check in &config.checks {
        match check {
            CheckName::Convergence => {
                let (r, _) = check_convergence(
                    &f,
                    t,
                    &base_scheme,
                    &ensemble,
                    &config.eps_grid,
                    config.convergence_threshold,
                )?;
                results.push(r);
            }
            CheckName::Uniqueness => {
                // second scheme: 3 * 2^k grids, bounded coefficients
                let other = config.scheme(GridFamily::Scaled(3), Truncation::LevelIndex)?;
                let grid = base_scheme.finest_grid().union(other.finest_grid());
                let coupled = config
                    .ensemble(grid)?
                    .with_base(base_scheme.finest_grid().clone())?;
                let (r, _) = check_uniqueness(
                    &f,
                    t,
                    &base_scheme,
                    &other,
                    &coupled,
                    &config.eps_grid,
                    config.uniqueness_threshold,
                )?;
                results.push(r);
            }
            CheckName::Isometry => {
                let ens = config.ensemble(TimeGrid::dyadic(config.isometry_level, t)?)?;
                results.push(check_isometry(&f, t, config.isometry_level, &ens)?);
            }
            CheckName::Martingale => {
                let tests = config
                    .martingale_tests
                    .iter()
                    .map(|n| test_functional(n))
                    .collect::<Result<Vec<_>>>()?;
                let ens = config.ensemble(TimeGrid::dyadic(config.martingale_level, t)?)?;
                results.push(check_martingale(
                    &f,
                    config.martingale_s,
                    t,
                    config.martingale_level,
                    &tests,
                    &ens,
                )?);
            }
            CheckName::Continuity => {
                results.push(check_continuity(&f, t, &base_scheme, &ensemble)?);
            }
            CheckName::L2Decay => {
                results.push(check_l2_decay(&f, t, &base_scheme, &ensemble)?);
            }
            CheckName::ItoLemma => {
                for name in &config.ito_functions {
                    let fun = SmoothFunction::by_name(name)?;
                    let threshold = match config.ito_threshold {
                        Some(th) => th,
                        None => calibrate_ito_threshold(
                            &fun,
                            t,
                            config.k_max,
                            config.ito_pilot_level,
                            config.seed,
                            config.paths,
                        )?,
                    };
                    results.push(check_ito_lemma(
                        &fun,
                        t,
                        &base_scheme,
                        &ensemble,
                        threshold,
                    )?);
                }
            }
        }
    }
    write_outputs(config, &results)?;
    Ok(RunOutcome { results })
}

fn write_outputs(config: &ExperimentConfig, results: &[CheckResult]) -> Result<()> {
    let dir = &config.output;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, contents: &str| {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(path, e))
    };
    for r in results {
        write(&format!("{}.csv", r.name), &r.diagnostics.to_csv())?;
    }
    write("summary.csv", &summary_csv(results))?;
    let manifest = Manifest {
        name: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: format!("{:#x}", config.seed),
        config,
        checks: results.iter().map(|r| r.name.as_str()).collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write("manifest.json", &(json + "\n"))
}

/// The built-in integrand library as a table with header
/// `name,parameters,h2,pathwise_continuous,formula`.
pub fn list_integrands() -> String {
    let mut out = String::from("name,parameters,h2,pathwise_continuous,formula\n");
    for e in BuiltinIntegrand::catalog() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.name, e.parameters, e.h2, e.pathwise_continuous, e.formula
        );
    }
    out
}

/// Writes `path_<i>.csv` (header `t,w`) for the first `count` paths of the
/// ensemble on the dyadic grid of `level` over `[0, horizon]`.
pub fn dump_paths(
    seed: u64,
    horizon: f64,
    level: u32,
    count: usize,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let ensemble = PathEnsemble::new(seed, TimeGrid::dyadic(level, horizon)?, count)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    (0..count)
        .map(|i| {
            let file = dir.join(format!("path_{i}.csv"));
            ensemble.path(i).write_csv(&file)?;
            Ok(file)
        })
        .collect()
}
