//! Property tests for the algebraic invariants of the integrand family
//! and the BV data model.

use bv1d_core::bv_model::{relaxed_energy, Atom, BVFunction1D, Grid1D, Interval};
use bv1d_core::integrand::{MuEllipticProfile, NonAutonomousIntegrand};
use bv1d_core::probe::{nikolskii_seminorm, v_kappa_scalar, SampledField};
use proptest::prelude::*;

fn mu_strategy() -> impl Strategy<Value = f64> {
    // stay a hair inside (1, 2); the closed forms degenerate at the ends
    1.02..1.98f64
}

proptest! {
    #[test]
    fn f_is_even_and_nonnegative(mu in mu_strategy(), z in -1e4..1e4f64) {
        let p = MuEllipticProfile::new(mu).unwrap();
        prop_assert_eq!(p.f(z), p.f(-z));
        prop_assert!(p.f(z) >= 0.0);
        prop_assert_eq!(p.f(0.0), 0.0);
    }

    #[test]
    fn fprime_is_odd_and_inside_unit_band(mu in mu_strategy(), z in -1e6..1e6f64) {
        let p = MuEllipticProfile::new(mu).unwrap();
        prop_assert_eq!(p.fprime(z), -p.fprime(-z));
        prop_assert!(p.fprime(z).abs() < 1.0);
    }

    #[test]
    fn g_round_trips_fprime(mu in mu_strategy(), z in -1e3..1e3f64) {
        let p = MuEllipticProfile::new(mu).unwrap();
        let back = p.g(p.fprime(z)).unwrap();
        prop_assert!((back - z).abs() <= 1e-9 * (1.0 + z.abs()), "{} vs {}", back, z);
    }

    #[test]
    fn ellipticity_floor_everywhere(mu in mu_strategy(), z in -1e5..1e5f64) {
        let p = MuEllipticProfile::new(mu).unwrap();
        let floor = (mu - 1.0) / mu;
        let v = p.fsecond(z) * (1.0 + z * z).powf(0.5 * mu);
        prop_assert!(v >= floor - 1e-12);
    }

    #[test]
    fn v_kappa_is_dominated_by_identity(kappa in 1.01..1.99f64, xi in -1e6..1e6f64) {
        let v = v_kappa_scalar(xi, kappa);
        prop_assert!(v.abs() <= xi.abs() + 1e-300);
        prop_assert_eq!(v.signum(), xi.signum());
    }

    #[test]
    fn total_variation_dominates_end_to_end_increment(
        values in proptest::collection::vec(-50.0..50.0f64, 17),
        jump in -10.0..10.0f64,
    ) {
        let g = Grid1D::new(-1.0, 1.0, 16).unwrap();
        let u = BVFunction1D::new(g, values, vec![Atom { location: 0.25, jump }]).unwrap();
        prop_assert!(u.total_variation() + 1e-12 >= (u.trace_b() - u.trace_a()).abs());
    }

    #[test]
    fn energy_parts_are_nonnegative_and_sum(
        values in proptest::collection::vec(-20.0..20.0f64, 33),
        y2 in -30.0..30.0f64,
    ) {
        let g = Grid1D::new(-1.0, 1.0, 32).unwrap();
        let f = NonAutonomousIntegrand::example(1.4, 0.25, -1.0, 1.0).unwrap();
        let u = BVFunction1D::new(g, values, vec![]).unwrap();
        let e = relaxed_energy(&u, &f, (0.0, y2));
        prop_assert!(e.ac_part >= 0.0 && e.jump_part >= 0.0 && e.boundary_part >= 0.0);
        prop_assert!((e.total - (e.ac_part + e.jump_part + e.boundary_part)).abs() <= 1e-12);
    }

    #[test]
    fn nikolskii_scales_linearly(scale in 0.1..20.0f64, seed in 0u64..1000) {
        let n = 256usize;
        let dx = 2.0 / n as f64;
        let mut rng = bv1d_core::rng::SplitMix64::new(seed);
        let vals: Vec<f64> = (0..n).map(|_| rng.uniform(-3.0, 3.0)).collect();
        let scaled: Vec<f64> = vals.iter().map(|v| scale * v).collect();
        let f1 = SampledField { values: &vals, x0: -1.0 + 0.5 * dx, dx };
        let f2 = SampledField { values: &scaled, x0: -1.0 + 0.5 * dx, dx };
        let k = Interval::new(-0.5, 0.5);
        let r1 = nikolskii_seminorm(&f1, 0.5, k, &[4, 8, 16]);
        let r2 = nikolskii_seminorm(&f2, 0.5, k, &[4, 8, 16]);
        prop_assert!((r2.sup - scale * r1.sup).abs() <= 1e-9 * (1.0 + r2.sup));
    }
}
