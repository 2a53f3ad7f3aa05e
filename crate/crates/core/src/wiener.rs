//! Wiener paths on time grids and Brownian-bridge refinement.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, GaussianStream, Purpose, SeedSpec};

/// Strictly increasing knots starting at 0.
///
/// Cloning is cheap; the knots are shared.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    knots: Arc<[f64]>,
}

impl TimeGrid {
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidGrid("a grid needs at least two knots".into()));
        }
        if knots[0] != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "first knot is {}, not 0",
                knots[0]
            )));
        }
        for w in knots.windows(2) {
            if !w[1].is_finite() || w[1] <= w[0] {
                return Err(Error::InvalidGrid(format!(
                    "knots must be finite and strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            knots: knots.into(),
        })
    }

    /// `steps` equal steps on `[0, horizon]`.
    ///
    /// Knot `i` is computed as `horizon * (i / steps)`, so two uniform grids
    /// whose knots coincide as rationals coincide bit for bit. This is what
    /// makes nested families (dyadic levels, `3 * 2^k` levels) share knots.
    pub fn uniform(steps: usize, horizon: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidGrid(
                "uniform grid needs at least one step".into(),
            ));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        let n = steps as f64;
        let knots = (0..=steps).map(|i| horizon * (i as f64 / n)).collect();
        Self::new(knots)
    }

    /// `2^level` equal steps on `[0, horizon]`.
    pub fn dyadic(level: u32, horizon: f64) -> Result<Self> {
        if level > 30 {
            return Err(Error::InvalidGrid(format!(
                "dyadic level {level} is too fine"
            )));
        }
        Self::uniform(1 << level, horizon)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn horizon(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn steps(&self) -> usize {
        self.knots.len() - 1
    }

    /// Index of the knot exactly equal to `t`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        self.knots
            .binary_search_by(|k| k.total_cmp(&t))
            .map_err(|_| Error::OffGrid { t })
    }

    pub fn contains(&self, t: f64) -> bool {
        self.index_of(t).is_ok()
    }

    /// First knot of `self` missing from `other`, if any.
    pub fn first_missing_from(&self, other: &TimeGrid) -> Option<f64> {
        let theirs = other.knots();
        let mut j = 0;
        for &t in self.knots.iter() {
            while j < theirs.len() && theirs[j] < t {
                j += 1;
            }
            if j == theirs.len() || theirs[j] != t {
                return Some(t);
            }
        }
        None
    }

    pub fn is_superset_of(&self, other: &TimeGrid) -> bool {
        other.first_missing_from(self).is_none()
    }

    /// Sorted union of both knot sets.
    pub fn union(&self, other: &TimeGrid) -> TimeGrid {
        let (a, b) = (self.knots(), other.knots());
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                    x
                }
                (Some(&x), Some(&y)) if x < y => {
                    i += 1;
                    x
                }
                (Some(_), Some(&y)) => {
                    j += 1;
                    y
                }
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            out.push(next);
        }
        TimeGrid { knots: out.into() }
    }

    /// The knots in `[0, t]`; `t` must be a knot other than 0.
    pub fn truncate(&self, t: f64) -> Result<TimeGrid> {
        let idx = self.index_of(t)?;
        if idx == 0 {
            return Err(Error::InvalidGrid("cannot truncate a grid at 0".into()));
        }
        Ok(TimeGrid {
            knots: self.knots[..=idx].into(),
        })
    }
}

/// One sampled Wiener trajectory, stored at the knots of its grid only.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl WienerPath {
    pub fn from_values(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "{} values for a grid of {} knots",
                values.len(),
                grid.len()
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::Usage("a Wiener path starts at 0".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon()
    }

    /// Stored value at knot `t`. Off-grid times are an error, never
    /// interpolated.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.grid.index_of(t)?])
    }

    /// The path seen only at the knots of `grid`.
    pub fn restrict(&self, grid: &TimeGrid) -> Result<WienerPath> {
        let mut values = Vec::with_capacity(grid.len());
        let mine = self.grid.knots();
        let mut j = 0;
        for &t in grid.knots() {
            while j < mine.len() && mine[j] < t {
                j += 1;
            }
            if j == mine.len() || mine[j] != t {
                return Err(Error::OffGrid { t });
            }
            values.push(self.values[j]);
        }
        Ok(WienerPath {
            grid: grid.clone(),
            values,
        })
    }

    /// Quadratic variation `sum (dW)^2` over the grid.
    pub fn quadratic_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
    }

    /// CSV with header `t,w`, one row per knot.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,w\n");
        for (t, w) in self.grid.knots().iter().zip(&self.values) {
            let _ = writeln!(out, "{t},{w}");
        }
        out
    }

    pub fn write_csv(&self, file: &Path) -> Result<()> {
        std::fs::write(file, self.to_csv()).map_err(|e| Error::io(file, e))
    }

    /// Copy whose values strictly after knot index `cutoff` are replaced by a
    /// fresh Wiener continuation started from the value at `cutoff`.
    pub(crate) fn with_fresh_continuation(&self, cutoff: usize, seed: SeedSpec) -> WienerPath {
        let mut values = self.values.clone();
        let knots = self.grid.knots();
        let mut stream = seed.stream();
        for i in cutoff + 1..values.len() {
            values[i] = values[i - 1] + (knots[i] - knots[i - 1]).sqrt() * stream.next_gaussian();
        }
        WienerPath {
            grid: self.grid.clone(),
            values,
        }
    }
}

/// Draws a Wiener path on `grid` from independent Gaussian increments.
pub fn sample_path(grid: &TimeGrid, seed: SeedSpec) -> WienerPath {
    let mut stream = seed.stream();
    let knots = grid.knots();
    let mut values = Vec::with_capacity(knots.len());
    let mut w = 0.0;
    values.push(w);
    for pair in knots.windows(2) {
        w += (pair[1] - pair[0]).sqrt() * stream.next_gaussian();
        values.push(w);
    }
    WienerPath {
        grid: grid.clone(),
        values,
    }
}

/// Extends `path` to `fine_grid`, keeping every original value.
///
/// Knots inserted between original knots `a < b` are drawn left to right from
/// the Brownian-bridge law conditioned on the last drawn value and on `W(b)`.
/// Knots past the original horizon are drawn as free Wiener increments.
pub fn refine(path: &WienerPath, fine_grid: &TimeGrid, seed: SeedSpec) -> Result<WienerPath> {
    if let Some(t) = path.grid.first_missing_from(fine_grid) {
        return Err(Error::RefinementMismatch { t });
    }
    if fine_grid.len() == path.grid.len() {
        return Ok(path.clone());
    }
    let coarse_t = path.grid.knots();
    let coarse_w = &path.values;
    let fine = fine_grid.knots();
    let mut stream: GaussianStream = seed.stream();
    let mut values = Vec::with_capacity(fine.len());
    values.push(0.0);
    // index of the next original knot at or after the current fine knot
    let mut next = 1;
    for i in 1..fine.len() {
        let s = fine[i];
        let (prev_t, prev_w) = (fine[i - 1], values[i - 1]);
        if next < coarse_t.len() && coarse_t[next] == s {
            values.push(coarse_w[next]);
            next += 1;
            continue;
        }
        let w = if next < coarse_t.len() {
            let (b, wb) = (coarse_t[next], coarse_w[next]);
            let mean = prev_w + (s - prev_t) / (b - prev_t) * (wb - prev_w);
            let var = (s - prev_t) * (b - s) / (b - prev_t);
            mean + var.sqrt() * stream.next_gaussian()
        } else {
            prev_w + (s - prev_t).sqrt() * stream.next_gaussian()
        };
        values.push(w);
    }
    Ok(WienerPath {
        grid: fine_grid.clone(),
        values,
    })
}

/// A finite, reproducible sample of Wiener paths.
///
/// Path `i` depends only on the master seed, `i` and the grids. When a base
/// grid is set, paths are drawn on the base grid and then bridge-refined onto
/// the ensemble grid, so the base-grid values do not depend on what extra
/// knots the ensemble grid carries.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    master_seed: u64,
    grid: TimeGrid,
    base: Option<TimeGrid>,
    count: usize,
}

impl PathEnsemble {
    pub fn new(master_seed: u64, grid: TimeGrid, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Usage("an ensemble needs at least one path".into()));
        }
        Ok(Self {
            master_seed,
            grid,
            base: None,
            count,
        })
    }

    pub fn with_base(mut self, base: TimeGrid) -> Result<Self> {
        if let Some(t) = base.first_missing_from(&self.grid) {
            return Err(Error::RefinementMismatch { t });
        }
        self.base = Some(base);
        Ok(self)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn path(&self, index: usize) -> WienerPath {
        let i = index as u64;
        let increments = derive_seed(self.master_seed, i, Purpose::PathIncrements);
        match &self.base {
            None => sample_path(&self.grid, increments),
            Some(base) => {
                let coarse = sample_path(base, increments);
                refine(
                    &coarse,
                    &self.grid,
                    derive_seed(self.master_seed, i, Purpose::BridgeRefinement),
                )
                .expect("base grid checked at construction")
            }
        }
    }

    /// Applies `f` to every path, in parallel; results come back in path
    /// order regardless of scheduling.
    pub fn map<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &WienerPath) -> T + Sync,
    {
        (0..self.count)
            .into_par_iter()
            .map(|i| f(i, &self.path(i)))
            .collect()
    }

    pub fn try_map<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, &WienerPath) -> Result<T> + Sync,
    {
        (0..self.count)
            .into_par_iter()
            .map(|i| f(i, &self.path(i)))
            .collect()
    }
}
