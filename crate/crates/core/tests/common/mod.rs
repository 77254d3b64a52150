//! Reference integrators for the oracle tests. Deliberately plain: fixed
//! composite rules with no adaptivity, so they share no code with the crate.
#![allow(dead_code)]

use std::f64::consts::PI;

use cognet_core::antenna::{BeamPattern, DevicePatterns};
use cognet_core::scenario::{default_scenario, Scenario};

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Simpson on consecutive breakpoints, `n` intervals per piece.
pub fn simpson_pieces<F: Fn(f64) -> f64>(f: F, pts: &[f64], n: usize) -> f64 {
    pts.windows(2).filter(|w| w[1] > w[0]).map(|w| simpson(&f, w[0], w[1], n)).sum()
}

/// `∫₀^∞ f` through `x = c·t/(1−t)`, Simpson in `t` on `[0, 1 − 1e-9]`.
pub fn simpson_half_line<F: Fn(f64) -> f64>(f: F, c: f64, n: usize) -> f64 {
    simpson(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let x = c * t / (1.0 - t);
            f(x) * c / ((1.0 - t) * (1.0 - t))
        },
        0.0,
        1.0 - 1e-9,
        n,
    )
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

pub fn kappa() -> f64 {
    121f64.to_radians()
}

/// Reference scenario with ULA patterns of `m` elements everywhere
/// (`m = 1` is omni).
pub fn ula_scenario(m: u32) -> Scenario {
    let sc = default_scenario();
    if m == 1 {
        sc
    } else {
        sc.with_patterns(DevicePatterns::ula(m, m, kappa()).unwrap())
    }
}

/// Lobe edges of a two-level pattern rotated by `shift`, inside `(−π, π)`.
pub fn lobe_edges(p: &BeamPattern, shift: f64) -> Vec<f64> {
    let mut v = Vec::new();
    if let Some((a, b, phi)) = p.two_level() {
        if a != b && phi < 2.0 * PI {
            for e in [-0.5 * phi, 0.5 * phi] {
                v.push(wrap(e + shift));
            }
        }
    }
    v
}

pub fn wrap(a: f64) -> f64 {
    let mut r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r >= PI {
        r -= 2.0 * PI;
    }
    r
}

/// Sorted breakpoints on `[−π, π]` including the ends.
pub fn with_ends(mut v: Vec<f64>) -> Vec<f64> {
    v.push(-PI);
    v.push(PI);
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}
