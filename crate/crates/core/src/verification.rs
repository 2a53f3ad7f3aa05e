//! Monte Carlo checks of the integral's defining and classical properties.
//!
//! Every check reads paths from a [`PathEnsemble`], computes per-path
//! quantities in parallel, and reduces them in path order, so results are
//! bit-reproducible for a given seed.
//!
//! Checks whose verdict combines a trend with a final threshold report the
//! final-level value as their statistic when the trend holds, and
//! `max(final, threshold + excess)` when it does not, so that
//! `passed == (statistic <= tolerance)` always.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::approximation::{approximate, l2_error, ApproximationScheme, Truncation};
use crate::convergence::{trend_violation, ConvergenceReport, MonteCarloEstimate};
use crate::error::{Error, Result};
use crate::integrator::{integral_path, integrate_general, integrate_simple, CompensatedSum};
use crate::process::{IntegrandFunctional, PathPrefix, PrefixFn};
use crate::wiener::{PathEnsemble, TimeGrid, WienerPath};

/// A table of diagnostics, rendered as CSV.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Diagnostics {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn estimate_row(level: u32, e: &MonteCarloEstimate) -> Vec<String> {
    vec![
        level.to_string(),
        e.value.to_string(),
        e.std_error.to_string(),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub statistic: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub diagnostics: Diagnostics,
    /// Named estimates behind the statistic, for callers that want more
    /// than the verdict.
    pub estimates: Vec<(String, MonteCarloEstimate)>,
}

impl CheckResult {
    fn new(name: &str, statistic: f64, tolerance: f64, diagnostics: Diagnostics) -> Self {
        Self {
            name: name.to_string(),
            statistic,
            tolerance,
            passed: statistic <= tolerance,
            diagnostics,
            estimates: Vec::new(),
        }
    }

    fn with_estimates(mut self, estimates: Vec<(String, MonteCarloEstimate)>) -> Self {
        self.estimates = estimates;
        self
    }

    pub fn estimate(&self, name: &str) -> Option<&MonteCarloEstimate> {
        self.estimates
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, e)| e)
    }

    /// `name,statistic,tolerance,passed`
    pub fn summary_line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.name, self.statistic, self.tolerance, self.passed
        )
    }
}

fn trend_statistic(last: f64, threshold: f64, violation: f64) -> f64 {
    if violation > 0.0 {
        last.max(threshold + violation)
    } else {
        last
    }
}

fn per_level_estimates(levels: &[u32], per_path: &[Vec<f64>]) -> Result<Vec<MonteCarloEstimate>> {
    (0..levels.len())
        .map(|l| {
            let column: Vec<f64> = per_path.iter().map(|v| v[l]).collect();
            MonteCarloEstimate::mean_of(&column)
        })
        .collect()
}

fn transpose(per_path: &[Vec<f64>], columns: usize) -> Vec<Vec<f64>> {
    (0..columns)
        .map(|l| per_path.iter().map(|v| v[l]).collect())
        .collect()
}

fn require_grid(ensemble: &PathEnsemble, grid: &TimeGrid) -> Result<()> {
    match grid.first_missing_from(ensemble.grid()) {
        Some(t) => Err(Error::Usage(format!(
            "ensemble grid lacks knot {t} needed by the scheme"
        ))),
        None => Ok(()),
    }
}

/// Convergence of `I(b_k)(t)` to the finest level's value across the levels
/// of `scheme`.
pub fn check_convergence(
    f: &IntegrandFunctional,
    t: f64,
    scheme: &ApproximationScheme,
    ensemble: &PathEnsemble,
    eps_grid: &[f64],
    threshold: f64,
) -> Result<(CheckResult, ConvergenceReport)> {
    require_grid(ensemble, scheme.finest_grid())?;
    let traces = ensemble.try_map(|_, path| integrate_general(f, t, scheme, path))?;
    let levels: Vec<u32> = scheme.levels().collect();
    let diffs: Vec<(u32, Vec<f64>)> = levels
        .iter()
        .enumerate()
        .map(|(l, &k)| {
            let d = traces
                .iter()
                .map(|tr| tr.levels[l].value - tr.accepted_value)
                .collect();
            (k, d)
        })
        .collect();
    let report = ConvergenceReport::from_levels(&diffs, eps_grid, threshold)?;
    let result = report_check("convergence", &report);
    Ok((result, report))
}

fn report_check(name: &str, report: &ConvergenceReport) -> CheckResult {
    let statistic = trend_statistic(
        report.final_ky_fan(),
        report.threshold,
        report.trend_violation(),
    );
    let mut diagnostics = Diagnostics::new(&["level", "eps", "p_hat", "se", "ky_fan"]);
    for line in report.to_csv().lines().skip(1) {
        diagnostics.push(line.split(',').map(str::to_string).collect());
    }
    CheckResult::new(name, statistic, report.threshold, diagnostics)
}

/// Agreement of two approximation schemes on the same paths.
///
/// For each level present in both schemes, the per-path differences
/// `I_A(b_k)(t) - I_B(b_k)(t)` feed a convergence report; the check passes
/// iff that report does. The ensemble grid must contain both finest grids,
/// typically as their union sampled by bridge refinement.
pub fn check_uniqueness(
    f: &IntegrandFunctional,
    t: f64,
    scheme_a: &ApproximationScheme,
    scheme_b: &ApproximationScheme,
    ensemble: &PathEnsemble,
    eps_grid: &[f64],
    threshold: f64,
) -> Result<(CheckResult, ConvergenceReport)> {
    require_grid(ensemble, scheme_a.finest_grid())?;
    require_grid(ensemble, scheme_b.finest_grid())?;
    let levels: Vec<u32> = scheme_a
        .levels()
        .filter(|k| scheme_b.levels().contains(k))
        .collect();
    if levels.len() < 2 {
        return Err(Error::Usage(
            "schemes must share at least two levels".into(),
        ));
    }
    let per_path = ensemble.try_map(|_, path| {
        let a = integrate_general(f, t, scheme_a, path)?;
        let b = integrate_general(f, t, scheme_b, path)?;
        Ok(levels
            .iter()
            .map(|&k| a.value_at_level(k).unwrap() - b.value_at_level(k).unwrap())
            .collect::<Vec<f64>>())
    })?;
    let diffs: Vec<(u32, Vec<f64>)> = levels
        .iter()
        .copied()
        .zip(transpose(&per_path, levels.len()))
        .collect();
    let report = ConvergenceReport::from_levels(&diffs, eps_grid, threshold)?;
    let result = report_check("uniqueness", &report);
    Ok((result, report))
}

/// `|mean I(b_k)(t)^2 - mean int_0^t b_k^2 ds|` against three standard errors
/// of the paired difference.
///
/// Refuses integrands not claimed to be in H2: the identity needs a finite
/// second moment, and a sample mean of an infinite expectation says nothing.
pub fn check_isometry(
    f: &IntegrandFunctional,
    t: f64,
    level: u32,
    ensemble: &PathEnsemble,
) -> Result<CheckResult> {
    if !f.h2_claim() {
        return Err(Error::InapplicableCheck {
            check: "isometry".into(),
            reason: format!("integrand `{}` is not claimed to be in H2", f.name()),
        });
    }
    let scheme = ApproximationScheme::dyadic(t, level, level, Truncation::Auto)?;
    require_grid(ensemble, scheme.finest_grid())?;
    let grid = scheme.grid(level)?;
    let samples = ensemble.try_map(|_, path| {
        let sp = approximate(f, t, &scheme, level, path)?;
        let i = integrate_simple(&sp, t, path)?;
        let knots = grid.knots();
        let mut quad = CompensatedSum::default();
        for (j, c) in sp.coefficients(path)?.into_iter().enumerate() {
            quad.add((knots[j + 1] - knots[j]) * c * c);
        }
        Ok((i * i, quad.value()))
    })?;
    let second: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let quad: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let diff: Vec<f64> = samples.iter().map(|s| s.0 - s.1).collect();
    let second = MonteCarloEstimate::mean_of(&second)?;
    let quad = MonteCarloEstimate::mean_of(&quad)?;
    let diff = MonteCarloEstimate::mean_of(&diff)?;
    let mut diagnostics = Diagnostics::new(&["quantity", "mean", "se"]);
    for (name, e) in [
        ("integral_squared", &second),
        ("time_integral", &quad),
        ("difference", &diff),
    ] {
        diagnostics.push(vec![
            name.to_string(),
            e.value.to_string(),
            e.std_error.to_string(),
        ]);
    }
    Ok(CheckResult::new(
        "isometry",
        diff.value.abs(),
        3.0 * diff.std_error,
        diagnostics,
    )
    .with_estimates(vec![
        ("integral_squared".into(), second),
        ("time_integral".into(), quad),
        ("difference".into(), diff),
    ]))
}

/// A named functional of the path prefix at `s`, used as a test function
/// in [`check_martingale`].
#[derive(Clone)]
pub struct TestFunctional {
    pub name: String,
    pub g: PrefixFn,
}

impl TestFunctional {
    pub fn new<F>(name: &str, g: F) -> Self
    where
        F: Fn(&PathPrefix<'_>) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            g: Arc::new(g),
        }
    }

    pub fn one() -> Self {
        Self::new("one", |_| Ok(1.0))
    }

    pub fn wiener() -> Self {
        Self::new("w", |p| Ok(p.current()))
    }

    pub fn sin_of_w() -> Self {
        Self::new("sin-of-w", |p| Ok(p.current().sin()))
    }
}

impl std::fmt::Debug for TestFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunctional")
            .field("name", &self.name)
            .finish()
    }
}

/// Orthogonality of integral increments to the past:
/// `E[(I(t) - I(s)) g(prefix_s)] = 0` for each `g`.
///
/// The statistic is the largest `|mean| / (3 se)` over the test functionals,
/// with tolerance 1.
pub fn check_martingale(
    f: &IntegrandFunctional,
    s: f64,
    t: f64,
    level: u32,
    tests: &[TestFunctional],
    ensemble: &PathEnsemble,
) -> Result<CheckResult> {
    if s.is_nan() || s >= t {
        return Err(Error::Usage(format!("need s < t, got s = {s}, t = {t}")));
    }
    if tests.is_empty() {
        return Err(Error::Usage("no test functionals given".into()));
    }
    let scheme = ApproximationScheme::dyadic(t, level, level, Truncation::Auto)?;
    require_grid(ensemble, scheme.finest_grid())?;
    scheme.grid(level)?.index_of(s)?;
    let per_path = ensemble.try_map(|_, path| {
        let sp = approximate(f, t, &scheme, level, path)?;
        let increment = integrate_simple(&sp, t, path)? - integrate_simple(&sp, s, path)?;
        let prefix = PathPrefix::new(path, s)?;
        tests
            .iter()
            .map(|g| Ok(increment * (g.g)(&prefix)?))
            .collect::<Result<Vec<f64>>>()
    })?;
    let mut diagnostics = Diagnostics::new(&["test_functional", "mean", "se", "tolerance"]);
    let mut worst: f64 = 0.0;
    let mut estimates = Vec::new();
    for (g, column) in tests.iter().zip(transpose(&per_path, tests.len())) {
        let e = MonteCarloEstimate::mean_of(&column)?;
        let tol = 3.0 * e.std_error;
        let ratio = if e.value == 0.0 {
            0.0
        } else {
            e.value.abs() / tol
        };
        worst = worst.max(ratio);
        diagnostics.push(vec![
            g.name.clone(),
            e.value.to_string(),
            e.std_error.to_string(),
            tol.to_string(),
        ]);
        estimates.push((g.name.clone(), e));
    }
    Ok(CheckResult::new("martingale", worst, 1.0, diagnostics).with_estimates(estimates))
}

fn level_estimates(
    levels: &[u32],
    per_path: &[Vec<f64>],
) -> Result<Vec<(String, MonteCarloEstimate)>> {
    Ok(levels
        .iter()
        .zip(per_level_estimates(levels, per_path)?)
        .map(|(k, e)| (format!("level-{k}"), e))
        .collect())
}

/// Per level, the ensemble mean of the largest increment of the integral
/// path on the level grid. Passes iff it does not increase across levels
/// beyond slack.
pub fn check_continuity(
    f: &IntegrandFunctional,
    t: f64,
    scheme: &ApproximationScheme,
    ensemble: &PathEnsemble,
) -> Result<CheckResult> {
    require_grid(ensemble, scheme.finest_grid())?;
    let levels: Vec<u32> = scheme.levels().collect();
    let per_path = ensemble.try_map(|_, path| {
        levels
            .iter()
            .map(|&k| {
                let sp = approximate(f, t, scheme, k, path)?;
                let coarse = path.restrict(scheme.grid(k)?)?;
                let ip = integral_path(&sp, &coarse)?;
                Ok(ip
                    .windows(2)
                    .map(|w| (w[1].1 - w[0].1).abs())
                    .fold(0.0, f64::max))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let estimates = level_estimates(&levels, &per_path)?;
    let values: Vec<_> = estimates.iter().map(|e| e.1).collect();
    let mut diagnostics = Diagnostics::new(&["level", "mean_max_increment", "se"]);
    for (k, e) in levels.iter().zip(&values) {
        diagnostics.push(estimate_row(*k, e));
    }
    let statistic = trend_violation(&values).max(0.0);
    Ok(CheckResult::new("continuity", statistic, 0.0, diagnostics).with_estimates(estimates))
}

/// Per level, the ensemble mean of the pathwise L2 error
/// `int_0^t (b - b_k)^2 ds`, by left-endpoint quadrature on the ensemble
/// grid. Passes iff the means do not increase beyond slack.
pub fn check_l2_decay(
    f: &IntegrandFunctional,
    t: f64,
    scheme: &ApproximationScheme,
    ensemble: &PathEnsemble,
) -> Result<CheckResult> {
    require_grid(ensemble, scheme.finest_grid())?;
    let levels: Vec<u32> = scheme.levels().collect();
    let quadrature = ensemble.grid().truncate(t)?;
    let per_path = ensemble.try_map(|_, path| {
        levels
            .iter()
            .map(|&k| {
                let sp = approximate(f, t, scheme, k, path)?;
                l2_error(f, &sp, t, path, &quadrature)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let estimates = level_estimates(&levels, &per_path)?;
    let values: Vec<_> = estimates.iter().map(|e| e.1).collect();
    let mut diagnostics = Diagnostics::new(&["level", "mean_l2_error", "se"]);
    for (k, e) in levels.iter().zip(&values) {
        diagnostics.push(estimate_row(*k, e));
    }
    let statistic = trend_violation(&values).max(0.0);
    Ok(CheckResult::new("l2-decay", statistic, 0.0, diagnostics).with_estimates(estimates))
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A twice differentiable scalar function with its derivatives.
#[derive(Clone)]
pub struct SmoothFunction {
    pub name: String,
    pub value: ScalarFn,
    pub first: ScalarFn,
    pub second: ScalarFn,
}

impl SmoothFunction {
    pub fn new(
        name: &str,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        first: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.to_string(),
            value: Arc::new(value),
            first: Arc::new(first),
            second: Arc::new(second),
        }
    }

    pub fn identity() -> Self {
        Self::new("x", |x| x, |_| 1.0, |_| 0.0)
    }

    pub fn square() -> Self {
        Self::new("x2", |x| x * x, |x| 2.0 * x, |_| 2.0)
    }

    pub fn exp() -> Self {
        Self::new("exp", f64::exp, f64::exp, f64::exp)
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "x" => Ok(Self::identity()),
            "x2" => Ok(Self::square()),
            "exp" => Ok(Self::exp()),
            other => Err(Error::Config(format!(
                "unknown function `{other}` (known: x, x2, exp)"
            ))),
        }
    }

    /// `fun'(W)` as an integrand.
    fn derivative_integrand(&self) -> IntegrandFunctional {
        let d = self.first.clone();
        IntegrandFunctional::of_current(&format!("d{}", self.name), true, move |w| d(w))
    }
}

impl std::fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothFunction")
            .field("name", &self.name)
            .finish()
    }
}

/// `fun(W(t)) - fun(W(0)) - I(fun'(W))(t) - 1/2 int_0^t fun''(W) ds` at one
/// level, with the time integral by left-endpoint quadrature on the level
/// grid.
pub fn ito_residual(
    fun: &SmoothFunction,
    t: f64,
    scheme: &ApproximationScheme,
    level: u32,
    path: &WienerPath,
) -> Result<f64> {
    let integrand = fun.derivative_integrand();
    let sp = approximate(&integrand, t, scheme, level, path)?;
    let ito = integrate_simple(&sp, t, path)?;
    let coarse = path.restrict(scheme.grid(level)?)?;
    let (knots, w) = (coarse.grid().knots(), coarse.values());
    let mut time_integral = CompensatedSum::default();
    for j in 0..knots.len() - 1 {
        time_integral.add((fun.second)(w[j]) * (knots[j + 1] - knots[j]));
    }
    let change = (fun.value)(path.value_at(t)?) - (fun.value)(0.0);
    Ok(change - ito - 0.5 * time_integral.value())
}

/// Ensemble mean of `|residual|` per level. Passes iff the means do not
/// increase beyond slack and the finest level's mean is at most `threshold`.
pub fn check_ito_lemma(
    fun: &SmoothFunction,
    t: f64,
    scheme: &ApproximationScheme,
    ensemble: &PathEnsemble,
    threshold: f64,
) -> Result<CheckResult> {
    require_grid(ensemble, scheme.finest_grid())?;
    let levels: Vec<u32> = scheme.levels().collect();
    let per_path = ensemble.try_map(|_, path| {
        levels
            .iter()
            .map(|&k| Ok(ito_residual(fun, t, scheme, k, path)?.abs()))
            .collect::<Result<Vec<f64>>>()
    })?;
    let estimates = level_estimates(&levels, &per_path)?;
    let values: Vec<_> = estimates.iter().map(|e| e.1).collect();
    let mut diagnostics = Diagnostics::new(&["level", "mean_abs_residual", "se"]);
    for (k, e) in levels.iter().zip(&values) {
        diagnostics.push(estimate_row(*k, e));
    }
    let last = values.last().map_or(f64::NAN, |e| e.value);
    let statistic = trend_statistic(last, threshold, trend_violation(&values));
    Ok(CheckResult::new(
        &format!("ito-lemma-{}", fun.name),
        statistic,
        threshold,
        diagnostics,
    )
    .with_estimates(estimates))
}

/// Multiplier applied to the extrapolated pilot residual.
pub const PILOT_SAFETY_FACTOR: f64 = 1.5;

/// Final-level threshold for [`check_ito_lemma`], calibrated from a pilot
/// run at a finer level.
///
/// The mean absolute residual scales like the square root of the step, so
/// the pilot mean at `pilot_level` is scaled by `2^((pilot - final) / 2)`
/// and by [`PILOT_SAFETY_FACTOR`]. The pilot uses its own dyadic ensemble on
/// `[0, t]`, from the same master seed.
pub fn calibrate_ito_threshold(
    fun: &SmoothFunction,
    t: f64,
    final_level: u32,
    pilot_level: u32,
    master_seed: u64,
    paths: usize,
) -> Result<f64> {
    if pilot_level <= final_level {
        return Err(Error::Usage(
            "pilot level must be finer than the final level".into(),
        ));
    }
    let scheme = ApproximationScheme::dyadic(t, pilot_level, pilot_level, Truncation::Auto)?;
    let ensemble = PathEnsemble::new(master_seed, scheme.finest_grid().clone(), paths)?;
    let residuals =
        ensemble.try_map(|_, path| Ok(ito_residual(fun, t, &scheme, pilot_level, path)?.abs()))?;
    let pilot = MonteCarloEstimate::mean_of(&residuals)?.value;
    let scale = 2f64.powf(f64::from(pilot_level - final_level) / 2.0);
    Ok(PILOT_SAFETY_FACTOR * pilot * scale)
}

/// Renders a result list as the `name,statistic,tolerance,passed` summary.
pub fn summary_csv(results: &[CheckResult]) -> String {
    let mut out = String::from("name,statistic,tolerance,passed\n");
    for r in results {
        let _ = writeln!(out, "{}", r.summary_line());
    }
    out
}
