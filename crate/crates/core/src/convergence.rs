//! Monte Carlo evidence for convergence in probability.
//!
//! `X_n -> X` in probability means `P(|X_n - X| > eps) -> 0` for every
//! `eps > 0`. Given samples of `X_n - X` we estimate those exceedance
//! probabilities on an eps grid, and the Ky Fan distance
//! `inf { eps >= 0 : P(|X_n - X| > eps) <= eps }`, which metrizes the same
//! convergence with a single number per level.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default eps grid for exceedance tables.
pub const DEFAULT_EPS_GRID: [f64; 4] = [1e-3, 1e-2, 1e-1, 1.0];

/// Allowed increase between consecutive levels, in combined standard errors.
pub const TREND_SLACK_SE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub sample_count: usize,
}

impl MonteCarloEstimate {
    /// Sample mean with standard error `s / sqrt(n)`, `s` the sample standard
    /// deviation (n - 1 denominator). Samples are summed in slice order.
    pub fn mean_of(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Usage("cannot estimate from zero samples".into()));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(Self {
            value: mean,
            std_error: (var / n).sqrt(),
            sample_count: samples.len(),
        })
    }

    /// `|value - target| <= k * std_error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

/// Fraction of `|d| > eps`, with binomial standard error.
pub fn exceedance_prob(diffs: &[f64], eps: f64) -> Result<MonteCarloEstimate> {
    if diffs.is_empty() {
        return Err(Error::Usage(
            "exceedance_prob needs at least one sample".into(),
        ));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Usage(format!("eps must be positive, got {eps}")));
    }
    let n = diffs.len();
    let hits = diffs.iter().filter(|d| d.abs() > eps).count();
    let p = hits as f64 / n as f64;
    Ok(MonteCarloEstimate {
        value: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
        sample_count: n,
    })
}

/// Empirical Ky Fan distance of `diffs` from zero.
///
/// On `[a_(j), a_(j+1))` between sorted magnitudes the exceedance
/// probability is constant at `q_j`, so the smallest admissible eps there is
/// `max(a_(j), q_j)`. The infimum is the minimum of these candidates, which
/// is exact with no bisection tolerance.
pub fn ky_fan(diffs: &[f64]) -> Result<f64> {
    if diffs.is_empty() {
        return Err(Error::Usage("ky_fan needs at least one sample".into()));
    }
    let mut mags: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let n = mags.len();
    let nf = n as f64;
    // candidate for eps in [0, a_(1))
    let mut best = (n - mags.partition_point(|&a| a <= 0.0)) as f64 / nf;
    let mut j = 0;
    while j < n {
        let a = mags[j];
        // skip ties; `above` counts magnitudes strictly greater than a
        while j < n && mags[j] == a {
            j += 1;
        }
        let above = (n - j) as f64 / nf;
        best = best.min(a.max(above));
        if a >= best {
            break;
        }
    }
    Ok(best)
}

/// Conservative standard error for an empirical Ky Fan value `k` from `n`
/// samples: the binomial error of the exceedance probability at `k`. The
/// fixed point moves by at most that much.
pub fn ky_fan_std_error(k: f64, n: usize) -> f64 {
    let p = k.clamp(0.0, 1.0);
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Largest increase between consecutive estimates beyond
/// `TREND_SLACK_SE` combined standard errors. Non-positive when the
/// sequence is non-increasing within slack.
pub fn trend_violation(estimates: &[MonteCarloEstimate]) -> f64 {
    estimates
        .windows(2)
        .map(|w| {
            let slack = TREND_SLACK_SE * w[0].std_error.hypot(w[1].std_error);
            w[1].value - w[0].value - slack
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub level: u32,
    pub exceedance: Vec<(f64, MonteCarloEstimate)>,
    pub ky_fan: f64,
    pub ky_fan_se: f64,
}

impl ConvergenceRow {
    pub fn from_diffs(level: u32, diffs: &[f64], eps_grid: &[f64]) -> Result<Self> {
        let exceedance = eps_grid
            .iter()
            .map(|&eps| Ok((eps, exceedance_prob(diffs, eps)?)))
            .collect::<Result<Vec<_>>>()?;
        let k = ky_fan(diffs)?;
        Ok(Self {
            level,
            exceedance,
            ky_fan: k,
            ky_fan_se: ky_fan_std_error(k, diffs.len()),
        })
    }

    fn ky_fan_estimate(&self) -> MonteCarloEstimate {
        MonteCarloEstimate {
            value: self.ky_fan,
            std_error: self.ky_fan_se,
            sample_count: self.exceedance.first().map_or(0, |e| e.1.sample_count),
        }
    }
}

/// Passes iff Ky Fan values are non-increasing across levels within
/// `TREND_SLACK_SE` combined standard errors and the last one is at most
/// `threshold`.
pub fn assess(rows: &[ConvergenceRow], threshold: f64) -> Result<bool> {
    if rows.len() < 2 {
        return Err(Error::Usage("assess needs at least two levels".into()));
    }
    let (violation, last) = ky_fan_trend(rows);
    Ok(violation <= 0.0 && last <= threshold)
}

fn ky_fan_trend(rows: &[ConvergenceRow]) -> (f64, f64) {
    let est: Vec<_> = rows.iter().map(ConvergenceRow::ky_fan_estimate).collect();
    (
        trend_violation(&est),
        rows.last().map_or(f64::NAN, |r| r.ky_fan),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub threshold: f64,
    pub passed: bool,
}

impl ConvergenceReport {
    /// One row per `(level, diffs)` pair, in the given order.
    pub fn from_levels(
        levels: &[(u32, Vec<f64>)],
        eps_grid: &[f64],
        threshold: f64,
    ) -> Result<Self> {
        let rows = levels
            .iter()
            .map(|(level, d)| ConvergenceRow::from_diffs(*level, d, eps_grid))
            .collect::<Result<Vec<_>>>()?;
        let passed = assess(&rows, threshold)?;
        Ok(Self {
            rows,
            threshold,
            passed,
        })
    }

    pub fn final_ky_fan(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.ky_fan)
    }

    /// Positive when the Ky Fan sequence increases beyond slack somewhere.
    pub fn trend_violation(&self) -> f64 {
        ky_fan_trend(&self.rows).0
    }

    /// CSV with header `level,eps,p_hat,se,ky_fan`, one line per level and eps.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,eps,p_hat,se,ky_fan\n");
        for row in &self.rows {
            for (eps, est) in &row.exceedance {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    row.level, eps, est.value, est.std_error, row.ky_fan
                );
            }
        }
        out
    }
}
