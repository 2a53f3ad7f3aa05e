//! Integrands: simple processes and general adapted functionals.
//!
//! Adaptedness is enforced by access control. Every evaluator receives a
//! [`PathPrefix`], which refuses reads past its cutoff, so nothing evaluated
//! at time `t` can depend on the path after `t`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, Purpose};
use crate::wiener::{TimeGrid, WienerPath};

/// Read-only view of a path up to and including a cutoff knot.
#[derive(Clone, Copy)]
pub struct PathPrefix<'a> {
    path: &'a WienerPath,
    cutoff: usize,
}

impl<'a> PathPrefix<'a> {
    pub fn new(path: &'a WienerPath, cutoff: f64) -> Result<Self> {
        let cutoff = path.grid().index_of(cutoff)?;
        Ok(Self { path, cutoff })
    }

    pub(crate) fn at_index(path: &'a WienerPath, cutoff: usize) -> Self {
        debug_assert!(cutoff < path.values().len());
        Self { path, cutoff }
    }

    pub fn cutoff(&self) -> f64 {
        self.path.grid().knots()[self.cutoff]
    }

    /// `W` at the cutoff.
    pub fn current(&self) -> f64 {
        self.path.values()[self.cutoff]
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        let cutoff = self.cutoff();
        if t > cutoff {
            return Err(Error::PrefixViolation {
                requested: t,
                cutoff,
            });
        }
        self.path.value_at(t)
    }

    /// Knots up to the cutoff.
    pub fn knots(&self) -> &'a [f64] {
        &self.path.grid().knots()[..=self.cutoff]
    }

    /// Values up to the cutoff.
    pub fn values(&self) -> &'a [f64] {
        &self.path.values()[..=self.cutoff]
    }
}

impl fmt::Debug for PathPrefix<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathPrefix")
            .field("cutoff", &self.cutoff())
            .field("current", &self.current())
            .finish()
    }
}

/// A real-valued functional of a path prefix.
pub type PrefixFn = Arc<dyn Fn(&PathPrefix<'_>) -> Result<f64> + Send + Sync>;

type CoefficientFn = Arc<dyn Fn(usize, &PathPrefix<'_>) -> Result<f64> + Send + Sync>;
type EvaluatorFn = Arc<dyn Fn(f64, &PathPrefix<'_>) -> Result<f64> + Send + Sync>;

/// `b = c0 1_{0} + sum_i c_i 1_(t_{i-1}, t_i]` with `c_i` a functional of the
/// path prefix up to `t_{i-1}`.
///
/// `c0` is a plain number: the filtration at time 0 carries no randomness.
#[derive(Clone)]
pub struct SimpleProcess {
    grid: TimeGrid,
    initial: f64,
    coefficient: CoefficientFn,
}

impl SimpleProcess {
    /// `coefficient(i, prefix)` gives `c_i` for `i` in `1..=n`; the prefix
    /// handed to it is cut at `t_{i-1}`.
    pub fn new<F>(grid: TimeGrid, initial: f64, coefficient: F) -> Self
    where
        F: Fn(usize, &PathPrefix<'_>) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            grid,
            initial,
            coefficient: Arc::new(coefficient),
        }
    }

    /// Deterministic coefficients `c_1..c_n`.
    pub fn from_values(grid: TimeGrid, initial: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.steps() {
            return Err(Error::Usage(format!(
                "{} coefficients for {} intervals",
                values.len(),
                grid.steps()
            )));
        }
        Ok(Self::new(grid, initial, move |i, _| Ok(values[i - 1])))
    }

    pub fn constant(grid: TimeGrid, value: f64) -> Self {
        Self::new(grid, value, move |_, _| Ok(value))
    }

    /// `c_i = g(prefix at t_{i-1})` for every interval, `c0 = initial`.
    pub fn left_sampled(grid: TimeGrid, initial: f64, g: PrefixFn) -> Self {
        Self::new(grid, initial, move |_, prefix| g(prefix))
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn knots(&self) -> &[f64] {
        self.grid.knots()
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn intervals(&self) -> usize {
        self.grid.steps()
    }

    /// `c_i` on `path`, for `i` in `1..=n`.
    pub fn coefficient(&self, i: usize, path: &WienerPath) -> Result<f64> {
        assert!(
            i >= 1 && i <= self.intervals(),
            "coefficient index {i} out of range"
        );
        let prefix = PathPrefix::new(path, self.knots()[i - 1])?;
        (self.coefficient)(i, &prefix)
    }

    pub(crate) fn coefficient_on_prefix(&self, i: usize, prefix: &PathPrefix<'_>) -> Result<f64> {
        (self.coefficient)(i, prefix)
    }

    /// `c_1..c_n` on `path`.
    pub fn coefficients(&self, path: &WienerPath) -> Result<Vec<f64>> {
        (1..=self.intervals())
            .map(|i| self.coefficient(i, path))
            .collect()
    }

    /// Value of the process at time `t`.
    pub fn eval(&self, t: f64, path: &WienerPath) -> Result<f64> {
        if t <= 0.0 {
            return Ok(self.initial);
        }
        // first knot >= t is the right end of the covering interval
        let i = self.knots().partition_point(|&k| k < t);
        if i > self.intervals() {
            return Ok(0.0);
        }
        self.coefficient(i, path)
    }

    /// Value on `(s, s + eps]` for small `eps`: the coefficient of the
    /// interval starting at or before `s`, and 0 from `t_n` on.
    pub fn right_limit(&self, s: f64, path: &WienerPath) -> Result<f64> {
        let i = self.knots().partition_point(|&k| k <= s);
        if i > self.intervals() {
            return Ok(0.0);
        }
        self.coefficient(i.max(1), path)
    }

    /// `alpha * a + beta * b` on a shared knot set.
    pub fn linear_combination(
        alpha: f64,
        a: &SimpleProcess,
        beta: f64,
        b: &SimpleProcess,
    ) -> Result<SimpleProcess> {
        if a.grid != b.grid {
            return Err(Error::Usage(
                "linear combination needs identical knots".into(),
            ));
        }
        let (fa, fb) = (a.coefficient.clone(), b.coefficient.clone());
        Ok(Self::new(
            a.grid.clone(),
            alpha * a.initial + beta * b.initial,
            move |i, p| Ok(alpha * fa(i, p)? + beta * fb(i, p)?),
        ))
    }

    /// This process as an integrand functional.
    ///
    /// The functional returns the value on the interval *starting* at the
    /// queried time (the right limit), so left-point sampling of it
    /// reproduces the process exactly. It differs from [`SimpleProcess::eval`]
    /// only at the knots, a Lebesgue-null set.
    pub fn as_integrand(&self, name: &str) -> IntegrandFunctional {
        let sp = self.clone();
        IntegrandFunctional::new(name, true, false, move |t, prefix| {
            let i = sp.knots().partition_point(|&k| k <= t);
            if i > sp.intervals() {
                return Ok(0.0);
            }
            let i = i.max(1);
            // the coefficient needs the prefix at t_{i-1} <= t
            let start = sp.knots()[i - 1];
            let cut = PathPrefix::at_index(prefix.path, prefix.path.grid().index_of(start)?);
            sp.coefficient_on_prefix(i, &cut)
        })
    }
}

impl fmt::Debug for SimpleProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimpleProcess")
            .field("intervals", &self.intervals())
            .field("horizon", &self.grid.horizon())
            .field("initial", &self.initial)
            .finish()
    }
}

/// Value of `sp` at `t` on `path`.
pub fn eval_simple(sp: &SimpleProcess, t: f64, path: &WienerPath) -> Result<f64> {
    sp.eval(t, path)
}

/// A general adapted integrand: `(t, prefix cut at t) -> value`.
///
/// `h2` and `pathwise_continuous` are claims made by whoever builds the
/// functional; checks that need them (isometry, default truncation) trust
/// them.
#[derive(Clone)]
pub struct IntegrandFunctional {
    name: String,
    h2: bool,
    pathwise_continuous: bool,
    evaluator: EvaluatorFn,
}

impl IntegrandFunctional {
    pub fn new<F>(name: &str, h2: bool, pathwise_continuous: bool, evaluator: F) -> Self
    where
        F: Fn(f64, &PathPrefix<'_>) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            h2,
            pathwise_continuous,
            evaluator: Arc::new(evaluator),
        }
    }

    /// Functional of the current value `W(t)` only.
    pub fn of_current<F>(name: &str, h2: bool, g: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(name, h2, true, move |_, p| Ok(g(p.current())))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn h2_claim(&self) -> bool {
        self.h2
    }

    pub fn pathwise_continuous_claim(&self) -> bool {
        self.pathwise_continuous
    }

    pub fn eval(&self, prefix: &PathPrefix<'_>) -> Result<f64> {
        (self.evaluator)(prefix.cutoff(), prefix)
    }

    pub fn eval_at(&self, t: f64, path: &WienerPath) -> Result<f64> {
        self.eval(&PathPrefix::new(path, t)?)
    }
}

impl fmt::Debug for IntegrandFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegrandFunctional")
            .field("name", &self.name)
            .field("h2", &self.h2)
            .field("pathwise_continuous", &self.pathwise_continuous)
            .finish()
    }
}

/// The built-in integrand library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinIntegrand {
    /// `b(s) = value`
    Const(f64),
    /// `b(s) = W(s)`
    Wiener,
    /// `b(s) = sin(W(s))`
    SinOfW,
    /// `b(s) = exp(W(s)^2)`. Pathwise continuous, but `E b(s)^2` is infinite
    /// from `s = 1/4` on, so it is not in H2.
    ExpWSquared,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub parameters: &'static str,
    pub h2: bool,
    pub pathwise_continuous: bool,
    pub formula: &'static str,
}

impl BuiltinIntegrand {
    pub const NAMES: [&'static str; 4] = ["const", "wiener", "sin-of-w", "exp-w-squared"];

    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let no_params = |b: BuiltinIntegrand| {
            if params.is_empty() {
                Ok(b)
            } else {
                Err(Error::Config(format!(
                    "integrand `{name}` takes no parameters"
                )))
            }
        };
        match name {
            "const" => match params {
                [] => Ok(Self::Const(1.0)),
                [v] if v.is_finite() => Ok(Self::Const(*v)),
                _ => Err(Error::Config(
                    "integrand `const` takes one finite parameter".into(),
                )),
            },
            "wiener" => no_params(Self::Wiener),
            "sin-of-w" => no_params(Self::SinOfW),
            "exp-w-squared" => no_params(Self::ExpWSquared),
            other => Err(Error::Config(format!(
                "unknown integrand `{other}` (known: {})",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Const(_) => "const",
            Self::Wiener => "wiener",
            Self::SinOfW => "sin-of-w",
            Self::ExpWSquared => "exp-w-squared",
        }
    }

    pub fn h2(&self) -> bool {
        !matches!(self, Self::ExpWSquared)
    }

    pub fn functional(&self) -> IntegrandFunctional {
        let h2 = self.h2();
        match *self {
            Self::Const(v) => IntegrandFunctional::new("const", h2, true, move |_, _| Ok(v)),
            Self::Wiener => IntegrandFunctional::of_current("wiener", h2, |w| w),
            Self::SinOfW => IntegrandFunctional::of_current("sin-of-w", h2, f64::sin),
            Self::ExpWSquared => {
                IntegrandFunctional::of_current("exp-w-squared", h2, |w| (w * w).exp())
            }
        }
    }

    pub fn catalog() -> Vec<CatalogEntry> {
        [
            (Self::Const(1.0), "value (default 1)", "b(s) = value"),
            (Self::Wiener, "none", "b(s) = W(s)"),
            (Self::SinOfW, "none", "b(s) = sin(W(s))"),
            (Self::ExpWSquared, "none", "b(s) = exp(W(s)^2)"),
        ]
        .into_iter()
        .map(|(b, parameters, formula)| CatalogEntry {
            name: b.name(),
            parameters,
            h2: b.h2(),
            pathwise_continuous: true,
            formula,
        })
        .collect()
    }
}

/// `E exp(a X^2)` for `X ~ N(0, var)`; infinite once `2 a var >= 1`.
pub fn gaussian_exp_square_moment(a: f64, var: f64) -> f64 {
    let d = 1.0 - 2.0 * a * var;
    if d <= 0.0 {
        f64::INFINITY
    } else {
        d.sqrt().recip()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptednessReport {
    pub passed: bool,
    pub evaluations: usize,
    /// Set when an evaluator failed, typically a read past its cutoff.
    pub violation: Option<String>,
}

const PROBE_MASTER_SEED: u64 = 0x0ada_7ed0_5eed;

/// Re-evaluates `f` at knot `t` against copies of `path` whose values after
/// `t` are replaced by fresh Wiener continuations. Passes iff every
/// evaluation succeeds and all are bit-identical.
pub fn probe_adaptedness(
    f: &IntegrandFunctional,
    t: f64,
    path: &WienerPath,
    perturbations: usize,
) -> AdaptednessReport {
    let cutoff = match path.grid().index_of(t) {
        Ok(i) => i,
        Err(e) => {
            return AdaptednessReport {
                passed: false,
                evaluations: 0,
                violation: Some(e.to_string()),
            }
        }
    };
    probe(cutoff, path, perturbations, |p| {
        f.eval(&PathPrefix::at_index(p, cutoff))
    })
}

/// Runs the adaptedness probe on every coefficient of `sp`.
pub fn probe_coefficients(
    sp: &SimpleProcess,
    path: &WienerPath,
    perturbations: usize,
) -> AdaptednessReport {
    let mut evaluations = 0;
    for i in 1..=sp.intervals() {
        let cutoff = match path.grid().index_of(sp.knots()[i - 1]) {
            Ok(c) => c,
            Err(e) => {
                return AdaptednessReport {
                    passed: false,
                    evaluations,
                    violation: Some(e.to_string()),
                }
            }
        };
        let report = probe(cutoff, path, perturbations, |p| {
            sp.coefficient_on_prefix(i, &PathPrefix::at_index(p, cutoff))
        });
        evaluations += report.evaluations;
        if !report.passed {
            return AdaptednessReport {
                evaluations,
                ..report
            };
        }
    }
    AdaptednessReport {
        passed: true,
        evaluations,
        violation: None,
    }
}

fn probe<F>(cutoff: usize, path: &WienerPath, perturbations: usize, eval: F) -> AdaptednessReport
where
    F: Fn(&WienerPath) -> Result<f64>,
{
    let fail = |evaluations, e: Error| AdaptednessReport {
        passed: false,
        evaluations,
        violation: Some(e.to_string()),
    };
    let reference = match eval(path) {
        Ok(v) => v,
        Err(e) => return fail(1, e),
    };
    for j in 0..perturbations {
        let seed = derive_seed(PROBE_MASTER_SEED, j as u64, Purpose::PathIncrements);
        let perturbed = path.with_fresh_continuation(cutoff, seed);
        match eval(&perturbed) {
            Ok(v) if v.to_bits() == reference.to_bits() => {}
            Ok(v) => {
                return AdaptednessReport {
                    passed: false,
                    evaluations: j + 2,
                    violation: Some(format!(
                    "value changed from {reference} to {v} when the path after the cutoff changed"
                )),
                }
            }
            Err(e) => return fail(j + 2, e),
        }
    }
    AdaptednessReport {
        passed: true,
        evaluations: perturbations + 1,
        violation: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wiener::sample_path;

    fn path(k: u32) -> WienerPath {
        sample_path(
            &TimeGrid::dyadic(k, 1.0).unwrap(),
            derive_seed(3, 0, Purpose::PathIncrements),
        )
    }

    #[test]
    fn prefix_refuses_reads_past_cutoff() {
        let p = path(4);
        let prefix = PathPrefix::new(&p, 0.5).unwrap();
        assert_eq!(prefix.current(), p.value_at(0.5).unwrap());
        assert!(prefix.value_at(0.25).is_ok());
        assert!(matches!(
            prefix.value_at(0.5625),
            Err(Error::PrefixViolation { .. })
        ));
        assert_eq!(prefix.values().len(), 9);
        assert_eq!(*prefix.knots().last().unwrap(), 0.5);
    }

    #[test]
    fn eval_simple_follows_half_open_intervals() {
        let grid = TimeGrid::new(vec![0.0, 0.25, 0.5]).unwrap();
        let sp = SimpleProcess::from_values(grid, 7.0, vec![1.0, 2.0]).unwrap();
        let p = path(2);
        assert_eq!(eval_simple(&sp, 0.0, &p).unwrap(), 7.0);
        assert_eq!(eval_simple(&sp, 0.25, &p).unwrap(), 1.0);
        assert_eq!(eval_simple(&sp, 0.5, &p).unwrap(), 2.0);
        assert_eq!(eval_simple(&sp, 0.75, &p).unwrap(), 0.0);
        assert_eq!(sp.right_limit(0.0, &p).unwrap(), 1.0);
        assert_eq!(sp.right_limit(0.25, &p).unwrap(), 2.0);
        assert_eq!(sp.right_limit(0.5, &p).unwrap(), 0.0);
    }

    #[test]
    fn eval_simple_reads_prefix_at_left_knot() {
        let grid = TimeGrid::dyadic(2, 1.0).unwrap();
        let sp = SimpleProcess::left_sampled(grid, 0.0, Arc::new(|p| Ok(p.current())));
        let p = path(4);
        assert_eq!(sp.eval(0.5, &p).unwrap(), p.value_at(0.25).unwrap());
        assert_eq!(sp.eval(0.3125, &p).unwrap(), p.value_at(0.25).unwrap());
        assert_eq!(sp.eval(1.0, &p).unwrap(), p.value_at(0.75).unwrap());
    }

    #[test]
    fn eval_simple_needs_knots_on_the_path() {
        let grid = TimeGrid::uniform(3, 1.0).unwrap();
        let sp = SimpleProcess::left_sampled(grid, 0.0, Arc::new(|p| Ok(p.current())));
        assert!(matches!(sp.eval(0.5, &path(4)), Err(Error::OffGrid { .. })));
    }

    #[test]
    fn probe_passes_for_current_value() {
        let p = path(5);
        let f = BuiltinIntegrand::Wiener.functional();
        let report = probe_adaptedness(&f, 0.5, &p, 8);
        assert!(report.passed, "{report:?}");
        assert_eq!(report.evaluations, 9);
    }

    #[test]
    fn probe_reports_peeking_functional() {
        let p = path(5);
        let peek = IntegrandFunctional::new("peek", true, true, |_, prefix| prefix.value_at(1.0));
        let report = probe_adaptedness(&peek, 0.5, &p, 4);
        assert!(!report.passed);
        assert!(report.violation.unwrap().contains("beyond prefix cutoff"));
    }

    #[test]
    fn probe_passes_for_simple_process_coefficients() {
        let p = path(5);
        let grid = TimeGrid::dyadic(3, 1.0).unwrap();
        let sp = SimpleProcess::left_sampled(
            grid,
            0.0,
            Arc::new(|pre| Ok(pre.values().iter().map(|w| w.abs()).sum())),
        );
        let report = probe_coefficients(&sp, &p, 4);
        assert!(report.passed, "{report:?}");
        assert_eq!(report.evaluations, 8 * 5);
    }

    #[test]
    fn catalog_flags() {
        let cat = BuiltinIntegrand::catalog();
        let names: Vec<_> = cat.iter().map(|c| c.name).collect();
        assert_eq!(names, BuiltinIntegrand::NAMES);
        let exp = cat.iter().find(|c| c.name == "exp-w-squared").unwrap();
        assert!(!exp.h2);
        assert!(cat.iter().find(|c| c.name == "const").unwrap().h2);
    }

    #[test]
    fn exp_w_squared_is_not_h2() {
        // E b(s)^2 = E exp(2 W_s^2), W_s ~ N(0, s).
        assert!((gaussian_exp_square_moment(2.0, 0.1) - 1.0 / 0.6f64.sqrt()).abs() < 1e-15);
        assert!(gaussian_exp_square_moment(2.0, 0.25).is_infinite());
        assert!(gaussian_exp_square_moment(2.0, 0.3).is_infinite());
        // so int_0^t E b^2 ds diverges for every t > 1/4
        assert_eq!(
            BuiltinIntegrand::ExpWSquared.h2(),
            gaussian_exp_square_moment(2.0, 0.5).is_finite()
        );
    }

    #[test]
    fn parse_builtins() {
        assert_eq!(
            BuiltinIntegrand::from_name("const", &[0.0]).unwrap(),
            BuiltinIntegrand::Const(0.0)
        );
        assert_eq!(
            BuiltinIntegrand::from_name("const", &[]).unwrap(),
            BuiltinIntegrand::Const(1.0)
        );
        assert!(BuiltinIntegrand::from_name("wiener", &[1.0]).is_err());
        assert!(BuiltinIntegrand::from_name("cos", &[]).is_err());
    }

    #[test]
    fn as_integrand_uses_right_limits() {
        let grid = TimeGrid::new(vec![0.0, 0.25, 0.5]).unwrap();
        let sp = SimpleProcess::from_values(grid, 1.0, vec![1.0, 2.0]).unwrap();
        let f = sp.as_integrand("s");
        let p = path(2);
        assert_eq!(f.eval_at(0.0, &p).unwrap(), 1.0);
        assert_eq!(f.eval_at(0.25, &p).unwrap(), 2.0);
        assert_eq!(f.eval_at(0.5, &p).unwrap(), 0.0);
    }
}
