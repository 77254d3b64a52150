use cognet_core::coverage_secondary::sample_placement;
use cognet_core::geometry::{Placement, PlacementLaw, RandomPlacement};
use cognet_core::scenario::*;

#[test]
fn reference_parameters() {
    let sc = default_scenario();
    assert!((sc.p_p - 0.50119).abs() < 1e-5);
    assert!((sc.p_s - 0.050119).abs() < 1e-6);
    assert!((sc.noise / 7.962e-7 - 1.0).abs() < 1e-3);
    assert!((sc.expected_links() - 4021.24).abs() < 0.01);
    assert_eq!(sc.rho, 40e-9);
}

fn law(n: u8) -> RandomPlacement {
    match preset_type(n).unwrap() {
        Placement::Random(r) => r,
        Placement::Fixed(_) => panic!("expected a random placement"),
    }
}

#[test]
fn uniform_disk_radial_law() {
    let r = law(4);
    assert_eq!(r.law, PlacementLaw::UniformDisk);
    let n = 100_000;
    let mean_sq = (0..n).map(|i| sample_placement(&r, 0, i).x_p.powi(2)).sum::<f64>() / n as f64;
    let want = r.radius * r.radius / 2.0;
    assert!((mean_sq / want - 1.0).abs() < 0.02, "{mean_sq} vs {want}");
}

#[test]
fn tabulated_radial_law() {
    let r = RandomPlacement::new(4000.0, PlacementLaw::Tabulated).unwrap();
    let n = 100_000;
    let mut mean_sq = 0.0;
    for i in 0..n {
        let p = sample_placement(&r, 0, i);
        assert!(p.x_p <= 2000.0);
        // Angles drawn from U(0, π).
        assert!(p.delta_p.radians() >= 0.0 && p.omega_p.radians() >= 0.0);
        mean_sq += p.x_p * p.x_p;
    }
    mean_sq /= n as f64;
    // (R/2)² E[U] = R²/8.
    assert!((mean_sq / 2.0e6 - 1.0).abs() < 0.02, "{mean_sq}");
}
