//! Ensemble-scale examples for the integrator, approximation and
//! verification modules.

use stochint::approximation::{approximate, l2_error, ApproximationScheme, GridFamily, Truncation};
use stochint::process::{BuiltinIntegrand, SimpleProcess};
use stochint::verification::{check_continuity, check_isometry, check_l2_decay, check_uniqueness};
use stochint::wiener::{PathEnsemble, TimeGrid};
use stochint::{integrate_general, Error, MonteCarloEstimate};

const SEED: u64 = 0xe8a3;
const EPS: [f64; 4] = [1e-3, 1e-2, 1e-1, 1.0];

#[test]
fn wiener_trace_approaches_closed_form_limit() {
    let n = 10_000;
    let f = BuiltinIntegrand::Wiener.functional();
    let scheme = ApproximationScheme::dyadic(1.0, 4, 12, Truncation::Auto).unwrap();
    let ensemble = PathEnsemble::new(SEED, scheme.finest_grid().clone(), n).unwrap();
    let rows = ensemble.map(|_, w| {
        let trace = integrate_general(&f, 1.0, &scheme, w).unwrap();
        let w1 = w.value_at(1.0).unwrap();
        let qv = w.quadratic_variation();
        // the finest level obeys the discrete identity exactly
        let identity = (w1 * w1 - qv) / 2.0;
        assert!((trace.accepted_value - identity).abs() <= 1e-12 * (w1 * w1 + qv));
        let limit = (w1 * w1 - 1.0) / 2.0;
        let abs: Vec<f64> = trace
            .levels
            .iter()
            .map(|l| (l.value - limit).abs())
            .collect();
        (abs, trace.accepted_value - limit)
    });
    let levels = scheme.level_count();
    let means: Vec<f64> = (0..levels)
        .map(|l| rows.iter().map(|r| r.0[l]).sum::<f64>() / n as f64)
        .collect();
    assert!(means.windows(2).all(|m| m[1] < m[0]), "{means:?}");
    // signed error at the finest level is (1 - QV) / 2, centred at 0
    let signed: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let e = MonteCarloEstimate::mean_of(&signed).unwrap();
    assert!(e.within(0.0, 3.0), "{e:?}");
}

#[test]
fn l2_error_matches_exact_quadrature_expectation() {
    // with left-endpoint quadrature of step d, E l2_error = (h - d) / 2
    let n = 4_000;
    let quad_level = 12;
    let f = BuiltinIntegrand::Wiener.functional();
    let scheme = ApproximationScheme::dyadic(1.0, 4, 10, Truncation::Auto).unwrap();
    let quad = TimeGrid::dyadic(quad_level, 1.0).unwrap();
    let ensemble = PathEnsemble::new(SEED, quad.clone(), n).unwrap();
    let per_path = ensemble.map(|_, w| {
        scheme
            .levels()
            .map(|k| {
                l2_error(
                    &f,
                    &approximate(&f, 1.0, &scheme, k, w).unwrap(),
                    1.0,
                    w,
                    &quad,
                )
                .unwrap()
            })
            .collect::<Vec<f64>>()
    });
    let d = 2f64.powi(-(quad_level as i32));
    for (l, k) in scheme.levels().enumerate() {
        let column: Vec<f64> = per_path.iter().map(|v| v[l]).collect();
        let e = MonteCarloEstimate::mean_of(&column).unwrap();
        let h = 2f64.powi(-(k as i32));
        assert!(e.within((h - d) / 2.0, 3.0), "level {k}: {e:?}");
    }
}

#[test]
fn l2_error_decays_for_continuous_builtins() {
    let n = 10_000;
    for (b, t) in [
        (BuiltinIntegrand::Wiener, 1.0),
        (BuiltinIntegrand::SinOfW, 1.0),
        (BuiltinIntegrand::ExpWSquared, 0.5),
    ] {
        let scheme = ApproximationScheme::dyadic(t, 4, 12, Truncation::Auto).unwrap();
        let ensemble = PathEnsemble::new(SEED, scheme.finest_grid().clone(), n).unwrap();
        let r = check_l2_decay(&b.functional(), t, &scheme, &ensemble).unwrap();
        assert!(r.passed, "{}: {}", b.name(), r.summary_line());
        let means: Vec<f64> = r.estimates.iter().map(|e| e.1.value).collect();
        assert!(
            means.windows(2).all(|m| m[1] < m[0]),
            "{}: {means:?}",
            b.name()
        );
        if b == BuiltinIntegrand::Wiener {
            assert!(means[means.len() - 1] < 1e-2 * means[0]);
        }
    }
}

#[test]
fn truncated_coefficients_stay_bounded() {
    let f = BuiltinIntegrand::ExpWSquared.functional();
    let scheme = ApproximationScheme::dyadic(1.0, 4, 10, Truncation::Auto).unwrap();
    let ensemble = PathEnsemble::new(SEED, scheme.finest_grid().clone(), 500).unwrap();
    ensemble.map(|_, w| {
        for k in scheme.levels() {
            let sp = approximate(&f, 1.0, &scheme, k, w).unwrap();
            assert!(sp
                .coefficients(w)
                .unwrap()
                .iter()
                .all(|c| c.abs() <= f64::from(k)));
        }
    });
}

#[test]
fn simple_integrand_gives_zero_cross_scheme_diffs() {
    let coarse = TimeGrid::dyadic(4, 1.0).unwrap();
    let sp = SimpleProcess::new(coarse, 0.0, |_, p| Ok(p.current().cos()));
    let f = sp.as_integrand("cos-left");
    let a = ApproximationScheme::new(GridFamily::Dyadic, 1.0, 4, 8, Truncation::Auto).unwrap();
    let b = ApproximationScheme::new(GridFamily::Scaled(3), 1.0, 4, 8, Truncation::Auto).unwrap();
    let ensemble = PathEnsemble::new(SEED, a.finest_grid().union(b.finest_grid()), 300)
        .unwrap()
        .with_base(a.finest_grid().clone())
        .unwrap();
    let (r, report) = check_uniqueness(&f, 1.0, &a, &b, &ensemble, &EPS, 0.05).unwrap();
    assert!(r.passed);
    assert!(report.rows.iter().all(|row| row.ky_fan == 0.0));
}

#[test]
fn truncation_schedules_agree_for_wiener() {
    let f = BuiltinIntegrand::Wiener.functional();
    let none = ApproximationScheme::dyadic(1.0, 4, 12, Truncation::Unbounded).unwrap();
    let level = ApproximationScheme::dyadic(1.0, 4, 12, Truncation::LevelIndex).unwrap();
    let ensemble = PathEnsemble::new(SEED, none.finest_grid().clone(), 10_000).unwrap();
    let (r, report) = check_uniqueness(&f, 1.0, &none, &level, &ensemble, &EPS, 0.02).unwrap();
    assert!(r.passed, "{}", r.summary_line());
    assert!(report.final_ky_fan() < 0.02);
}

#[test]
fn isometry_refuses_non_h2_integrands() {
    let ensemble = PathEnsemble::new(SEED, TimeGrid::dyadic(6, 1.0).unwrap(), 10).unwrap();
    let err = check_isometry(
        &BuiltinIntegrand::ExpWSquared.functional(),
        1.0,
        6,
        &ensemble,
    );
    assert!(matches!(err, Err(Error::InapplicableCheck { .. })));
}

#[test]
fn unit_continuity_statistic_is_the_wiener_path_statistic() {
    let n = 2_000;
    let scheme = ApproximationScheme::dyadic(1.0, 4, 10, Truncation::Auto).unwrap();
    let ensemble = PathEnsemble::new(SEED, scheme.finest_grid().clone(), n).unwrap();
    let r = check_continuity(
        &BuiltinIntegrand::Const(1.0).functional(),
        1.0,
        &scheme,
        &ensemble,
    )
    .unwrap();
    assert!(r.passed);
    for (l, k) in scheme.levels().enumerate() {
        let grid = scheme.grid(k).unwrap();
        let direct: Vec<f64> = ensemble.map(|_, w| {
            let v = w.restrict(grid).unwrap();
            v.values()
                .windows(2)
                .map(|p| (p[1] - p[0]).abs())
                .fold(0.0, f64::max)
        });
        let direct = MonteCarloEstimate::mean_of(&direct).unwrap();
        assert_eq!(r.estimates[l].1, direct, "level {k}");
        // order of magnitude of the expected maximum of 2^k half-normal steps
        let dt = grid.horizon() / grid.steps() as f64;
        let scale = (2.0 * dt * (1.0 / dt).ln()).sqrt();
        assert!((0.5..2.0).contains(&(direct.value / scale)), "level {k}");
    }
}
