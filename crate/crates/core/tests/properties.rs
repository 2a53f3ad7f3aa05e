use proptest::prelude::*;
use stochint::approximation::{approximate, ApproximationScheme, Truncation};
use stochint::convergence::{exceedance_prob, ky_fan};
use stochint::process::{probe_coefficients, BuiltinIntegrand, SimpleProcess};
use stochint::rng::{derive_seed, Purpose};
use stochint::wiener::{sample_path, TimeGrid, WienerPath};
use stochint::{eval_simple, integral_path, integrate_simple};

fn path(level: u32, horizon: f64, seed: u64) -> WienerPath {
    let grid = TimeGrid::dyadic(level, horizon).unwrap();
    sample_path(&grid, derive_seed(seed, 0, Purpose::PathIncrements))
}

fn coefficients(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integral_is_linear(
        seed in any::<u64>(),
        a in coefficients(16),
        b in coefficients(16),
        alpha in -5.0f64..5.0,
        beta in -5.0f64..5.0,
    ) {
        let w = path(6, 1.0, seed);
        let grid = TimeGrid::dyadic(4, 1.0).unwrap();
        let sa = SimpleProcess::from_values(grid.clone(), 0.0, a.clone()).unwrap();
        let sb = SimpleProcess::from_values(grid.clone(), 0.0, b.clone()).unwrap();
        let combo = SimpleProcess::linear_combination(alpha, &sa, beta, &sb).unwrap();
        let lhs = integrate_simple(&combo, 1.0, &w).unwrap();
        let rhs = alpha * integrate_simple(&sa, 1.0, &w).unwrap()
            + beta * integrate_simple(&sb, 1.0, &w).unwrap();
        // rounding scale: the sum of absolute terms
        let knots = grid.knots();
        let scale: f64 = (0..16)
            .map(|i| {
                let dw = (w.value_at(knots[i + 1]).unwrap() - w.value_at(knots[i]).unwrap()).abs();
                (alpha * a[i]).abs() * dw + (beta * b[i]).abs() * dw
            })
            .sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn simple_processes_are_left_open_right_closed_constant(
        seed in any::<u64>(),
        a in coefficients(8),
        cell in 0usize..8,
        u in 0.0f64..1.0,
        v in 0.0f64..1.0,
    ) {
        let w = path(5, 2.0, seed);
        let sp = SimpleProcess::from_values(TimeGrid::dyadic(3, 2.0).unwrap(), 1.5, a.clone()).unwrap();
        let (lo, hi) = (cell as f64 * 0.25, (cell + 1) as f64 * 0.25);
        // points in (lo, hi]
        let t1 = hi - u * (hi - lo) * 0.999;
        let t2 = hi - v * (hi - lo) * 0.999;
        let e1 = eval_simple(&sp, t1, &w).unwrap();
        prop_assert_eq!(e1.to_bits(), eval_simple(&sp, t2, &w).unwrap().to_bits());
        prop_assert_eq!(e1, a[cell]);
        prop_assert_eq!(eval_simple(&sp, 2.0 + u + 1e-9, &w).unwrap(), 0.0);
        prop_assert_eq!(eval_simple(&sp, 0.0, &w).unwrap(), 1.5);
    }

    #[test]
    fn integral_path_agrees_with_restricted_integrals(seed in any::<u64>(), level in 1u32..7) {
        let w = path(7, 1.0, seed);
        let f = BuiltinIntegrand::SinOfW.functional();
        let scheme = ApproximationScheme::dyadic(1.0, level, level, Truncation::Auto).unwrap();
        let sp = approximate(&f, 1.0, &scheme, level, &w).unwrap();
        let ip = integral_path(&sp, &w).unwrap();
        prop_assert_eq!(ip[0], (0.0, 0.0));
        for &(s, v) in &ip {
            prop_assert_eq!(integrate_simple(&sp, s, &w).unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn approximations_vanish_after_horizon_and_respect_bounds(
        seed in any::<u64>(),
        level in 1u32..6,
        u in 0.0f64..1.0,
    ) {
        // the path runs on [0, 2]; the approximation lives on [0, 1]
        let w = path(7, 2.0, seed);
        let f = BuiltinIntegrand::ExpWSquared.functional();
        let scheme = ApproximationScheme::dyadic(1.0, level, level, Truncation::Auto).unwrap();
        let sp = approximate(&f, 1.0, &scheme, level, &w).unwrap();
        prop_assert_eq!(eval_simple(&sp, 1.0 + 1e-9 + u, &w).unwrap(), 0.0);
        let bound = f64::from(level);
        prop_assert!(sp.coefficients(&w).unwrap().iter().all(|c| c.abs() <= bound));
        prop_assert!(sp.initial().abs() <= bound);
    }

    #[test]
    fn constructed_coefficients_pass_the_adaptedness_probe(seed in any::<u64>()) {
        let w = path(6, 1.0, seed);
        let f = BuiltinIntegrand::Wiener.functional();
        let scheme = ApproximationScheme::dyadic(1.0, 3, 3, Truncation::Auto).unwrap();
        let sp = approximate(&f, 1.0, &scheme, 3, &w).unwrap();
        prop_assert!(probe_coefficients(&sp, &w, 4).passed);
    }

    #[test]
    fn exceedance_is_monotone_in_eps(
        d in prop::collection::vec(-3.0f64..3.0, 1..200),
        e1 in 1e-6f64..4.0,
        e2 in 1e-6f64..4.0,
    ) {
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let p_lo = exceedance_prob(&d, lo).unwrap().value;
        let p_hi = exceedance_prob(&d, hi).unwrap().value;
        prop_assert!(p_hi <= p_lo);
        prop_assert!((0.0..=1.0).contains(&p_lo));
    }

    #[test]
    fn ky_fan_is_bounded(d in prop::collection::vec(-3.0f64..3.0, 1..200)) {
        let k = ky_fan(&d).unwrap();
        let max = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(k >= 0.0);
        prop_assert!(k <= max);
        prop_assert!(k <= 1.0);
        // the defining inequality holds at the returned value
        let frac = d.iter().filter(|x| x.abs() > k).count() as f64 / d.len() as f64;
        prop_assert!(frac <= k);
    }

    #[test]
    fn ky_fan_of_zeros(n in 1usize..100, c in -5.0f64..5.0) {
        let zeros = vec![0.0; n];
        let scaled: Vec<f64> = zeros.iter().map(|z| c * z).collect();
        prop_assert_eq!(ky_fan(&scaled).unwrap(), 0.0);
    }
}
