mod common;

use std::f64::consts::{PI, TAU};

use cognet_core::access::*;
use cognet_core::antenna::*;
use cognet_core::coverage_primary::*;
use cognet_core::coverage_secondary::*;
use cognet_core::geometry::*;
use cognet_core::montecarlo::EstimateWithCI;
use cognet_core::numerics::*;
use common::ula_scenario;
use proptest::prelude::*;

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(256)
}

fn costly() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

fn m_choice() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![1u32, 2, 4, 8])
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn normalize_is_idempotent(a in -1e4..1e4f64, k in -50i32..50) {
        let n = normalize(a);
        prop_assert!((-PI..PI).contains(&n));
        prop_assert_eq!(normalize(n), n);
        let shifted = normalize(a + TAU * k as f64);
        let d = (shifted - n).abs();
        prop_assert!(d < 1e-9 || (TAU - d) < 1e-9);
    }

    #[test]
    fn cross_distance_obeys_triangle_inequality(
        x in 0.1..2000.0f64, t in -PI..PI, xp in 0.0..2000.0f64, d in -PI..PI, w in -PI..PI, rp in 1.0..200.0f64,
    ) {
        let tx = PolarPoint::new(x, Angle::new(t)).unwrap();
        let pp = PrimaryPlacement::new(xp, Angle::new(d), Angle::new(w)).unwrap();
        let z = cross_distance_z(tx, pp, rp);
        let y = pp.rx(rp).norm();
        prop_assert!(z <= x + y + 1e-9);
        prop_assert!(z >= (x - y).abs() - 1e-9);
        let v = (tx.to_cartesian() - pp.rx(rp)).norm();
        prop_assert!((z - v).abs() <= 1e-10 * v.max(1.0));
    }

    #[test]
    fn map_is_monotone(rho in 1e-14..1e-3f64, x in 1.0..1000.0f64, f in 1.01..10.0f64, g in 0.01..10.0f64) {
        let m = |r: f64, d: f64| map_from_gain(r, 0.05, d, 3.3, g);
        prop_assert!((0.0..=1.0).contains(&m(rho, x)));
        prop_assert!(m(rho, x * f) >= m(rho, x));
        prop_assert!(m(rho * f, x) >= m(rho, x));
    }

    #[test]
    fn ula_patterns_are_normalized(m in 2u32..=1024) {
        let p = BeamPattern::from_ula(UlaSpec::new(m)).unwrap();
        prop_assert!(p.normalization_defect().unwrap().abs() < 1e-12);
        prop_assert_eq!(p.boresight_gain(), m as f64);
    }

    #[test]
    fn gains_are_even(m in 1u32..64, t in 0.0..PI) {
        let p = BeamPattern::ula_or_omni(m, common::kappa()).unwrap();
        prop_assert_eq!(p.gain_at(t), p.gain_at(-t));
    }

    #[test]
    fn incomplete_gammas_partition(a in 0.05..8.0f64, x in 0.0..60.0f64) {
        let lo = lower_incomplete_gamma(a, x).unwrap();
        let hi = upper_incomplete_gamma(a, x).unwrap();
        let g = gamma(a);
        prop_assert!(((lo + hi) - g).abs() <= 1e-12 * g.max(1.0), "{} + {} vs {}", lo, hi, g);
    }

    #[test]
    fn n2_decreases(nu in 0.0..50.0f64, step in 0.01..5.0f64) {
        prop_assert!(n2(3.3, nu + step).unwrap() < n2(3.3, nu).unwrap());
    }

    #[test]
    fn interval_contains_mean(values in prop::collection::vec(0.0..1.0f64, 1..200)) {
        let e = EstimateWithCI::from_samples(&values);
        prop_assert!(e.lower <= e.mean && e.mean <= e.upper);
    }

    #[test]
    fn arc_weights_sum_to_one(py in -PI..PI, po in -PI..PI, phi in 0.0..TAU) {
        let q = arc_weights(py, po, phi);
        prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(q.iter().all(|&w| w >= -1e-15));
    }
}

proptest! {
    #![proptest_config(costly())]

    #[test]
    fn activity_factor_is_a_monotone_fraction(m in m_choice(), e in -14.0..-4.0f64, f in 1.1..10.0f64) {
        let mut sc = ula_scenario(m);
        sc.radius = 500.0;
        let a = activity_factor_sectorized(&sc.with_rho(10f64.powf(e))).unwrap();
        let b = activity_factor_sectorized(&sc.with_rho(10f64.powf(e) * f)).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }

    #[test]
    fn laplace_transform_is_a_decreasing_fraction(m in m_choice(), s in 1.0..1e8f64, f in 1.1..10.0f64) {
        let sc = ula_scenario(m).with_rho(1e-9);
        let a = laplace_secondary_interference(s, &sc).unwrap();
        let b = laplace_secondary_interference(s * f, &sc).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(b <= a);
    }

    #[test]
    fn primary_coverage_is_monotone(
        m in m_choice(), tau_db in -15.0..15.0f64, rho_e in -13.0..-6.0f64, lam in 1e-6..1e-3f64, f in 1.1..4.0f64,
    ) {
        let mut sc = ula_scenario(m).with_rho(10f64.powf(rho_e));
        sc.lambda_s = lam;
        let tau = 10f64.powf(tau_db / 10.0);
        let p = coverage_primary_simplified(tau, &sc).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(coverage_primary_simplified(tau * f, &sc).unwrap() <= p);
        prop_assert!(coverage_primary_simplified(tau, &sc.with_rho(sc.rho * f)).unwrap() <= p + 1e-15);
        let mut denser = sc.clone();
        denser.lambda_s = lam * f;
        prop_assert!(coverage_primary_simplified(tau, &denser).unwrap() <= p + 1e-15);
    }

    #[test]
    fn secondary_coverage_is_monotone_in_tau(
        m in m_choice(), setup in 1u8..=3, tau_db in -15.0..15.0f64, rho_e in -12.0..-6.0f64, f in 1.1..4.0f64,
    ) {
        let pp = cognet_core::scenario::preset_type(setup).unwrap();
        let sc = ula_scenario(m).with_placement(pp).with_rho(10f64.powf(rho_e));
        let tau = 10f64.powf(tau_db / 10.0);
        let p = coverage_secondary(tau, &sc).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(coverage_secondary(tau * f, &sc).unwrap() <= p + 1e-9);
    }
}
