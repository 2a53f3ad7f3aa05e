//! Itô integrals of simple processes, and the level-by-level limit for
//! general integrands.

use std::fmt::Write as _;

use serde::Serialize;

use crate::approximation::{approximate, ApproximationScheme};
use crate::error::{Error, Result};
use crate::process::{IntegrandFunctional, PathPrefix, SimpleProcess};
use crate::wiener::WienerPath;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    fn value_with(&self, x: f64) -> f64 {
        let mut s = *self;
        s.add(x);
        s.value()
    }
}

/// Partial sums `sum c_i (W(.) - W(t_{i-1}))`, with consecutive intervals of
/// bit-equal coefficient merged into one term. Merging keeps telescoping
/// sums exact: a unit integrand integrates to exactly `W(t)`.
struct RunningIntegral {
    closed: CompensatedSum,
    coefficient: f64,
    start_value: f64,
    open: bool,
}

impl RunningIntegral {
    fn new() -> Self {
        Self {
            closed: CompensatedSum::default(),
            coefficient: 0.0,
            start_value: 0.0,
            open: false,
        }
    }

    /// Enters a new interval with coefficient `c`, starting where `W = w_start`.
    fn enter(&mut self, c: f64, w_start: f64) {
        if self.open && c == self.coefficient {
            return;
        }
        if self.open {
            self.closed
                .add(self.coefficient * (w_start - self.start_value));
        }
        self.coefficient = c;
        self.start_value = w_start;
        self.open = true;
    }

    /// Integral up to a time where `W = w`, inside the current interval.
    fn value_at(&self, w: f64) -> f64 {
        if self.open {
            self.closed
                .value_with(self.coefficient * (w - self.start_value))
        } else {
            self.closed.value()
        }
    }
}

/// `I(sp)(t) = sum_i c_i (W(min(t_i, t)) - W(t_{i-1}))` over intervals with
/// `t_{i-1} < t`; 0 at `t = 0`.
pub fn integrate_simple(sp: &SimpleProcess, t: f64, path: &WienerPath) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::Usage(format!("integration time {t} is negative")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let knots = sp.knots();
    let grid = path.grid();
    let values = path.values();
    let last = knots.partition_point(|&k| k < t).min(sp.intervals());
    let mut run = RunningIntegral::new();
    for i in 1..=last {
        let start = grid.index_of(knots[i - 1])?;
        let c = sp.coefficient_on_prefix(i, &PathPrefix::at_index(path, start))?;
        run.enter(c, values[start]);
    }
    let end = t.min(knots[last]);
    Ok(run.value_at(path.value_at(end)?))
}

/// The integral process at every knot of the path grid.
///
/// Each value equals [`integrate_simple`] at that knot, bit for bit.
pub fn integral_path(sp: &SimpleProcess, path: &WienerPath) -> Result<Vec<(f64, f64)>> {
    let knots = sp.knots();
    let grid = path.grid();
    let values = path.values();
    let mut idx = Vec::with_capacity(knots.len());
    for &k in knots {
        idx.push(grid.index_of(k)?);
    }
    let mut out = Vec::with_capacity(values.len());
    out.push((0.0, 0.0));
    let mut run = RunningIntegral::new();
    for i in 1..idx.len() {
        let (a, b) = (idx[i - 1], idx[i]);
        let c = sp.coefficient_on_prefix(i, &PathPrefix::at_index(path, a))?;
        run.enter(c, values[a]);
        let covered = grid.knots()[a + 1..=b].iter().zip(&values[a + 1..=b]);
        out.extend(covered.map(|(&t, &w)| (t, run.value_at(w))));
    }
    let frozen = *idx.last().unwrap();
    for j in frozen + 1..values.len() {
        out.push((grid.knots()[j], run.value_at(values[frozen])));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceLevel {
    pub level: u32,
    pub grid_size: usize,
    pub value: f64,
}

/// `I(b_n)(t)` for each approximation level; the accepted value is the
/// finest level's, without extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralTrace {
    pub t: f64,
    pub levels: Vec<TraceLevel>,
    pub accepted_value: f64,
}

impl IntegralTrace {
    /// CSV with header `level,grid_size,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,grid_size,value\n");
        for l in &self.levels {
            let _ = writeln!(out, "{},{},{}", l.level, l.grid_size, l.value);
        }
        out
    }

    pub fn value_at_level(&self, level: u32) -> Option<f64> {
        self.levels
            .iter()
            .find(|l| l.level == level)
            .map(|l| l.value)
    }
}

/// Integrates `f` up to `t` through every level of `scheme` on one path.
///
/// `path` must carry the finest level's knots; coarser levels read the same
/// path at their own knots.
pub fn integrate_general(
    f: &IntegrandFunctional,
    t: f64,
    scheme: &ApproximationScheme,
    path: &WienerPath,
) -> Result<IntegralTrace> {
    let mut levels = Vec::with_capacity(scheme.level_count());
    for level in scheme.levels() {
        let sp = approximate(f, t, scheme, level, path)?;
        levels.push(TraceLevel {
            level,
            grid_size: sp.intervals(),
            value: integrate_simple(&sp, t, path)?,
        });
    }
    let accepted_value = levels.last().expect("scheme has levels").value;
    Ok(IntegralTrace {
        t,
        levels,
        accepted_value,
    })
}
