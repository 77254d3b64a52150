mod common;

use cognet_core::access::{activity_factor, activity_factor_sectorized};
use cognet_core::coverage_primary::coverage_primary_exact;
use cognet_core::coverage_secondary::coverage_secondary;
use cognet_core::montecarlo::*;
use common::ula_scenario;

#[test]
fn no_links_without_density() {
    let mut sc = ula_scenario(4);
    sc.lambda_s = 0.0;
    let mut rng = RngStream::new(3, 0).rng();
    let net = sample_realization(&sc, &SensingTarget::primary_frame(), &mut rng);
    assert!(net.links.is_empty());
    assert!(estimate_af(&sc, 10, 0).is_err());
}

#[test]
fn link_count_is_poisson() {
    let sc = ula_scenario(1);
    let n = 400;
    let counts: Vec<f64> = (0..n)
        .map(|i| {
            let mut rng = RngStream::new(5, i).rng();
            sample_realization(&sc, &SensingTarget::primary_frame(), &mut rng).links.len() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let want = sc.expected_links();
    assert!((want - 4021.0).abs() < 1.0);
    assert!((mean - want).abs() < 4.0 * (want / n as f64).sqrt(), "{mean}");
    assert!((var / want - 1.0).abs() < 0.25, "{var}");
}

#[test]
fn fades_are_unit_exponential() {
    let mut sc = ula_scenario(1);
    sc.radius = 300.0;
    let mut fades = Vec::new();
    for i in 0..40 {
        let mut rng = RngStream::new(9, i).rng();
        let net = sample_realization(&sc, &SensingTarget::primary_frame(), &mut rng);
        fades.extend(net.links.iter().map(|l| l.sense_fade));
    }
    let n = fades.len() as f64;
    let mean = fades.iter().sum::<f64>() / n;
    assert!((mean - 1.0).abs() < 4.0 / n.sqrt());
    // Kolmogorov–Smirnov against 1 − e^{−x}.
    fades.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = fades
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-x).exp();
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 1.63 / n.sqrt(), "D = {d}");
}

#[test]
fn positions_fill_the_disk_uniformly() {
    let mut sc = ula_scenario(1);
    sc.radius = 500.0;
    let mut inner = 0usize;
    let mut total = 0usize;
    for i in 0..50 {
        let mut rng = RngStream::new(1, i).rng();
        for l in sample_realization(&sc, &SensingTarget::primary_frame(), &mut rng).links {
            let r = l.position.norm();
            assert!(r <= 500.0);
            total += 1;
            if r < 250.0 {
                inner += 1;
            }
        }
    }
    let p = inner as f64 / total as f64;
    assert!((p - 0.25).abs() < 4.0 * (0.25 * 0.75 / total as f64).sqrt(), "{p}");
}

#[test]
fn estimates_are_deterministic() {
    let mut sc = ula_scenario(2);
    sc.radius = 300.0;
    let a = estimate_coverage_primary(1.0, &sc, 200, 17).unwrap();
    let b = estimate_coverage_primary(1.0, &sc, 200, 17).unwrap();
    assert_eq!(a, b);
    // Any realization can be recomputed on its own.
    let i = 123;
    let lone = primary_outcome(1.0, &sc, 17, i);
    let again = primary_outcome(1.0, &sc, 17, i);
    assert_eq!(lone, again);
    let c = estimate_coverage_primary(1.0, &sc, 200, 18).unwrap();
    assert_ne!(a, c);
}

#[test]
fn interval_rules() {
    let v: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
    let e = EstimateWithCI::from_samples(&v);
    assert!((e.mean - 0.5).abs() < 1e-15);
    assert!((e.upper - e.lower - 2.0 * 1.959_963_984_540_054 * e.std_error).abs() < 1e-12);
    // All zeros: the Wilson interval keeps a positive width.
    let e = EstimateWithCI::from_samples(&vec![0.0; 100]);
    assert_eq!(e.lower, 0.0);
    assert!(e.upper > 0.0 && e.upper < 0.05);
}

#[test]
fn activity_factor_against_simulation() {
    for m in [1, 4] {
        let mut sc = ula_scenario(m).with_rho(1e-10);
        sc.radius = 500.0;
        let mc = estimate_af(&sc, 1500, 2).unwrap();
        let exact = activity_factor(&sc).unwrap();
        let sect = activity_factor_sectorized(&sc).unwrap();
        assert!(mc.z_score(exact).abs() < 4.0, "M={m}: {mc:?} vs {exact}");
        assert!(mc.z_score(sect).abs() < 4.0, "M={m}: {mc:?} vs {sect}");
    }
}

#[test]
fn primary_coverage_against_simulation() {
    let mut sc = ula_scenario(4).with_rho(1e-8);
    sc.radius = 1000.0;
    for tau in [0.3, 1.0, 3.0] {
        let mc = estimate_coverage_primary(tau, &sc, 3000, 4).unwrap();
        let exact = coverage_primary_exact(tau, &sc).unwrap();
        // The disk truncation only raises coverage, by less than 1e-3 here.
        assert!(mc.z_score(exact).abs() < 4.0, "τ={tau}: {mc:?} vs {exact}");
    }
}

#[test]
fn secondary_coverage_against_simulation() {
    let mut sc = ula_scenario(4).with_rho(2e-8);
    sc.radius = 1000.0;
    for tau in [0.3, 3.0] {
        let mc = estimate_coverage_secondary(tau, &sc, 3000, 6).unwrap();
        let exact = coverage_secondary(tau, &sc).unwrap();
        assert!(mc.z_score(exact).abs() < 4.0, "τ={tau}: {mc:?} vs {exact}");
    }
}
