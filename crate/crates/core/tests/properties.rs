//! Randomized invariants: transform exactness, propagator unitarity and
//! group structure, Whitney pairing laws, separation bounds.

use num_complex::Complex64;
use proptest::prelude::*;
use strichartz_core::bubbles::{scale_freq_separation, ScaleFreq};
use strichartz_core::grid::{dual_grid, make_grid};
use strichartz_core::presets::random_band_limited;
use strichartz_core::quadrature::spatial_norm;
use strichartz_core::refined::refined_functional;
use strichartz_core::spectral::{
    forward_transform, inverse_transform, propagate_fourth, DispersionParams,
};
use strichartz_core::whitney::{whitney_pair, DyadicInterval};

fn field_strategy() -> impl Strategy<Value = (usize, f64, f64, u64)> {
    (
        prop_oneof![Just(64usize), Just(128), Just(256)],
        20.0..200.0f64,
        -5.0..5.0f64,
        any::<u64>(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trip_is_identity((n, length, center, seed) in field_strategy()) {
        let grid = make_grid(center, length, n).unwrap();
        let f = random_band_limited(&grid, 0.0, 0.25 * dual_grid(&grid).nyquist(), seed);
        let back = inverse_transform(&forward_transform(&f));
        let err = f.sub(&back).unwrap().l2_norm();
        prop_assert!(err < 1e-12 * f.l2_norm(), "round-trip error {err}");
    }

    #[test]
    fn parseval_holds((n, length, center, seed) in field_strategy()) {
        let grid = make_grid(center, length, n).unwrap();
        let f = random_band_limited(&grid, 0.0, 0.25 * dual_grid(&grid).nyquist(), seed);
        let spec = forward_transform(&f);
        let lhs = f.l2_norm();
        let rhs = spec.l2_norm();
        prop_assert!((lhs - rhs).abs() < 1e-12 * lhs, "parseval gap {}", (lhs - rhs).abs());
    }

    #[test]
    fn propagator_is_unitary_and_invertible(
        (n, length, center, seed) in field_strategy(),
        t in -10.0..10.0f64,
        mu in 0.0..5.0f64,
    ) {
        let grid = make_grid(center, length, n).unwrap();
        let f = random_band_limited(&grid, 0.0, 0.25 * dual_grid(&grid).nyquist(), seed);
        let disp = DispersionParams::new(mu).unwrap();
        let u = propagate_fourth(&f, t, &disp);
        prop_assert!((u.l2_norm() - f.l2_norm()).abs() < 1e-12 * f.l2_norm());
        let back = propagate_fourth(&u, -t, &disp);
        prop_assert!(back.sub(&f).unwrap().l2_norm() < 1e-11 * f.l2_norm());
        prop_assert!((spatial_norm(&u, 2.0).unwrap() - u.l2_norm()).abs() < 1e-13);
    }

    #[test]
    fn whitney_pair_laws(
        xi in -500.0..500.0f64,
        xi2 in -500.0..500.0f64,
    ) {
        prop_assume!(xi != xi2);
        let p = whitney_pair(xi, xi2).unwrap();
        prop_assert!(p.first.contains(xi));
        prop_assert!(p.second.contains(xi2));
        prop_assert_eq!(p.first.level, p.second.level);
        let len = p.first.length();
        prop_assert!(p.distance() >= 4.0 * len);
        prop_assert!(p.distance() <= 10.0 * len);

        // Maximality: the parent pair violates admissibility.
        let (pa, pb) = (p.first.parent(), p.second.parent());
        let parent_dist = parent_distance(&pa, &pb);
        prop_assert!(parent_dist < 4.0 * pa.length());

        // Mirror symmetry and dyadic scale covariance.
        let q = whitney_pair(xi2, xi).unwrap();
        prop_assert_eq!(q.first, p.second);
        let r = whitney_pair(2.0 * xi, 2.0 * xi2).unwrap();
        prop_assert_eq!(r.first.level, p.first.level + 1);
        prop_assert_eq!(r.first.index, p.first.index);
    }

    #[test]
    fn refined_functional_dominates_every_window(
        (n, length, center, seed) in field_strategy(),
        p in 1.1..1.9f64,
    ) {
        let grid = make_grid(center, length, n).unwrap();
        let f = random_band_limited(&grid, 0.0, 0.3 * dual_grid(&grid).nyquist(), seed);
        let spec = forward_transform(&f);
        let r = refined_functional(&spec, p).unwrap();
        let dxi = spec.fgrid().spacing();
        let mut w = 1usize;
        while w <= n {
            for a in (0..=(n - w)).step_by(7) {
                let mass: f64 = (a..a + w).map(|s| spec.values()[s].norm().powf(p)).sum();
                if mass > 0.0 {
                    let obj = (w as f64 * dxi).powf(0.5 - 1.0 / p) * (mass * dxi).powf(1.0 / p);
                    prop_assert!(obj <= r.value * (1.0 + 1e-12));
                }
            }
            w *= 2;
        }
        // 1-homogeneity.
        let scaled = forward_transform(&f.scale(Complex64::new(3.0, 0.0)));
        let r3 = refined_functional(&scaled, p).unwrap();
        prop_assert!((r3.value - 3.0 * r.value).abs() < 1e-11 * r3.value);
    }

    #[test]
    fn scale_freq_separation_floor(
        rho_a in 0.01..100.0f64,
        rho_b in 0.01..100.0f64,
        xi_a in -100.0..100.0f64,
        xi_b in -100.0..100.0f64,
    ) {
        let a = ScaleFreq::new(rho_a, xi_a).unwrap();
        let b = ScaleFreq::new(rho_b, xi_b).unwrap();
        let s = scale_freq_separation(&a, &b);
        prop_assert!(s >= 2.0 - 1e-12);
        if s <= 2.0 + 1e-12 {
            prop_assert!((rho_a - rho_b).abs() < 1e-9 * rho_a);
            prop_assert!((xi_a - xi_b).abs() < 1e-9 * rho_a);
        }
    }
}

fn parent_distance(a: &DyadicInterval, b: &DyadicInterval) -> f64 {
    let gap = (a.index - b.index).abs() - 1;
    gap.max(0) as f64 * a.length()
}
