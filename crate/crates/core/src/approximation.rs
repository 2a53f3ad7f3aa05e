//! Simple-process approximations of adapted integrands and their pathwise
//! L2 error.
//!
//! Level `k` samples the integrand at the left knot of every interval of the
//! level grid on `[0, t]` and clamps the sample to `[-L_k, L_k]`. Bounded
//! coefficients put every approximation in H2 even when the integrand is not.
//! For pathwise-continuous integrands the L2 error goes to zero path by path.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{IntegrandFunctional, PathPrefix, SimpleProcess};
use crate::wiener::{TimeGrid, WienerPath};

/// Finest level any scheme may use.
pub const MAX_LEVEL: u32 = 24;

/// Family of nested grids on `[0, t]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridFamily {
    /// `2^k` steps at level `k`.
    Dyadic,
    /// `factor * 2^k` steps at level `k`. With factor 3 every level contains
    /// the dyadic level of the same index, but the two families never share
    /// a finest grid.
    Scaled(u32),
}

impl GridFamily {
    pub fn steps(&self, level: u32) -> usize {
        match self {
            GridFamily::Dyadic => 1 << level,
            GridFamily::Scaled(m) => (*m as usize) << level,
        }
    }
}

/// Per-level coefficient bound `L_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    /// No bound for integrands claimed in H2, `L_k = k` otherwise.
    Auto,
    /// No bound.
    Unbounded,
    /// `L_k = k`.
    LevelIndex,
    /// The same bound at every level.
    Constant(f64),
}

impl Truncation {
    pub fn bound(&self, level: u32, f: &IntegrandFunctional) -> f64 {
        match *self {
            Truncation::Auto if f.h2_claim() => f64::INFINITY,
            Truncation::Auto | Truncation::LevelIndex => f64::from(level),
            Truncation::Unbounded => f64::INFINITY,
            Truncation::Constant(l) => l,
        }
    }
}

impl FromStr for Truncation {
    type Err = Error;

    /// `auto`, `none`, `level` or a positive number.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(Truncation::Auto),
            "none" => Ok(Truncation::Unbounded),
            "level" => Ok(Truncation::LevelIndex),
            other => match other.parse::<f64>() {
                Ok(l) if l > 0.0 => Ok(Truncation::Constant(l)),
                _ => Err(Error::Config(format!(
                    "truncation must be auto, none, level or a positive number, got `{other}`"
                ))),
            },
        }
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truncation::Auto => f.write_str("auto"),
            Truncation::Unbounded => f.write_str("none"),
            Truncation::LevelIndex => f.write_str("level"),
            Truncation::Constant(l) => write!(f, "{l}"),
        }
    }
}

/// Nested grids for levels `k_min..=k_max` on `[0, horizon]` plus a
/// truncation schedule.
#[derive(Debug, Clone)]
pub struct ApproximationScheme {
    family: GridFamily,
    horizon: f64,
    k_min: u32,
    truncation: Truncation,
    grids: Vec<TimeGrid>,
}

impl ApproximationScheme {
    pub fn new(
        family: GridFamily,
        horizon: f64,
        k_min: u32,
        k_max: u32,
        truncation: Truncation,
    ) -> Result<Self> {
        if k_max < k_min {
            return Err(Error::Config(format!(
                "level range {k_min}..{k_max} is empty"
            )));
        }
        if k_max > MAX_LEVEL {
            return Err(Error::Config(format!(
                "level {k_max} exceeds the maximum {MAX_LEVEL}"
            )));
        }
        if let GridFamily::Scaled(0) = family {
            return Err(Error::Config("grid scale factor must be positive".into()));
        }
        if let Truncation::Constant(l) = truncation {
            if l.is_nan() || l <= 0.0 {
                return Err(Error::Config(format!(
                    "truncation bound {l} must be positive"
                )));
            }
        }
        let grids = (k_min..=k_max)
            .map(|k| TimeGrid::uniform(family.steps(k), horizon))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            family,
            horizon,
            k_min,
            truncation,
            grids,
        })
    }

    pub fn dyadic(horizon: f64, k_min: u32, k_max: u32, truncation: Truncation) -> Result<Self> {
        Self::new(GridFamily::Dyadic, horizon, k_min, k_max, truncation)
    }

    pub fn family(&self) -> GridFamily {
        self.family
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn levels(&self) -> RangeInclusive<u32> {
        self.k_min..=self.k_min + self.grids.len() as u32 - 1
    }

    pub fn level_count(&self) -> usize {
        self.grids.len()
    }

    pub fn grid(&self, level: u32) -> Result<&TimeGrid> {
        level
            .checked_sub(self.k_min)
            .and_then(|i| self.grids.get(i as usize))
            .ok_or_else(|| Error::Usage(format!("level {level} is outside {:?}", self.levels())))
    }

    pub fn finest_grid(&self) -> &TimeGrid {
        self.grids.last().expect("at least one level")
    }

    pub fn bound(&self, level: u32, f: &IntegrandFunctional) -> f64 {
        self.truncation.bound(level, f)
    }
}

fn clamp(v: f64, bound: f64) -> f64 {
    if bound.is_finite() {
        v.clamp(-bound, bound)
    } else {
        v
    }
}

/// The level-`level` simple approximation of `f` on `[0, t]`.
///
/// `c_i = clamp(f(t_{i-1}, prefix), L)`; the process vanishes after `t`.
/// `path` is only used to check that it carries the level's knots and to
/// read `f` at time 0, where the prefix holds nothing but `W(0) = 0`.
pub fn approximate(
    f: &IntegrandFunctional,
    t: f64,
    scheme: &ApproximationScheme,
    level: u32,
    path: &WienerPath,
) -> Result<SimpleProcess> {
    if t != scheme.horizon() {
        return Err(Error::Usage(format!(
            "scheme is built on [0, {}], not [0, {t}]",
            scheme.horizon()
        )));
    }
    let grid = scheme.grid(level)?;
    if let Some(missing) = grid.first_missing_from(path.grid()) {
        return Err(Error::OffGrid { t: missing });
    }
    let bound = scheme.bound(level, f);
    let initial = clamp(f.eval(&PathPrefix::at_index(path, 0))?, bound);
    let f = f.clone();
    Ok(SimpleProcess::new(
        grid.clone(),
        initial,
        move |_, prefix| Ok(clamp(f.eval(prefix)?, bound)),
    ))
}

/// Left-endpoint quadrature of `(f - sp)^2` over `[0, t]` on
/// `quadrature_grid`.
///
/// On each cell `[s_j, s_{j+1})` the integrand is sampled at `s_j` and the
/// simple process takes its value on the open cell, so two identical simple
/// processes have error exactly 0.
pub fn l2_error(
    f: &IntegrandFunctional,
    sp: &SimpleProcess,
    t: f64,
    path: &WienerPath,
    quadrature_grid: &TimeGrid,
) -> Result<f64> {
    let quad = quadrature_grid.knots();
    let cells = quad.partition_point(|&s| s < t);
    if cells == quad.len() && quadrature_grid.horizon() < t {
        return Err(Error::Usage(format!(
            "quadrature grid ends at {} before {t}",
            quadrature_grid.horizon()
        )));
    }
    if quad.get(cells) != Some(&t) {
        return Err(Error::OffGrid { t });
    }
    let sp_knots = sp.knots();
    for &k in sp_knots.iter().take_while(|&&k| k <= t) {
        if quadrature_grid.index_of(k).is_err() {
            return Err(Error::Usage(format!(
                "quadrature grid does not refine the simple process (missing {k})"
            )));
        }
    }
    let path_knots = path.grid().knots();
    let mut path_idx = 0;
    // `next` counts sp knots <= s: the interval whose open part covers s
    let mut next = 0;
    let mut interval = 0;
    let mut coefficient = 0.0;
    let mut total = 0.0;
    for j in 0..cells {
        let s = quad[j];
        while path_idx < path_knots.len() && path_knots[path_idx] < s {
            path_idx += 1;
        }
        if path_knots.get(path_idx) != Some(&s) {
            return Err(Error::OffGrid { t: s });
        }
        while next < sp_knots.len() && sp_knots[next] <= s {
            next += 1;
        }
        let i = next;
        if i != interval {
            interval = i;
            coefficient = if i > sp.intervals() {
                0.0
            } else {
                sp.coefficient(i, path)?
            };
        }
        let prefix = PathPrefix::at_index(path, path_idx);
        let d = f.eval(&prefix)? - coefficient;
        total += (quad[j + 1] - s) * d * d;
    }
    Ok(total)
}
