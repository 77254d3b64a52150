//! Simulation oracle for every analytic quantity.
//!
//! Realization `i` of an estimate seeded with `seed` draws from
//! `RngStream::new(seed, i)`, so estimates are identical however the index
//! range is partitioned across workers.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::access::{secondary_frame_gain, SecondaryLink};
use crate::error::{Error, Result};
use crate::geometry::{cross_bearing_beta, cross_distance_z, Point, PrimaryPlacement};
use crate::scenario::Scenario;

/// `(seed, stream)` identifies a reproducible draw sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> RngStream {
        RngStream { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }
}

/// Mean, standard error and 95% interval of an estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub mean: f64,
    pub std_error: f64,
    pub lower: f64,
    pub upper: f64,
    pub samples: usize,
}

const Z95: f64 = 1.959_963_984_540_054;

impl EstimateWithCI {
    /// Normal-approximation interval; for `[0, 1]`-valued samples whose mean
    /// is within `5/n` of either end, the Wilson interval.
    pub fn from_samples(values: &[f64]) -> EstimateWithCI {
        let n = values.len();
        if n == 0 {
            return EstimateWithCI { mean: f64::NAN, std_error: f64::NAN, lower: f64::NAN, upper: f64::NAN, samples: 0 };
        }
        let nf = n as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let var = if n > 1 { values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0) } else { 0.0 };
        let se = (var / nf).sqrt();
        let unit = values.iter().all(|v| (0.0..=1.0).contains(v));
        if unit && (mean <= 5.0 / nf || mean >= 1.0 - 5.0 / nf) {
            let (lower, upper) = wilson(mean, nf);
            return EstimateWithCI { mean, std_error: se, lower: lower.min(mean), upper: upper.max(mean), samples: n };
        }
        EstimateWithCI { mean, std_error: se, lower: mean - Z95 * se, upper: mean + Z95 * se, samples: n }
    }

    /// `(estimate − value) / SE`; an exact match with zero SE gives 0.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = self.mean - value;
        if d == 0.0 {
            0.0
        } else if self.std_error == 0.0 {
            f64::INFINITY.copysign(d)
        } else {
            d / self.std_error
        }
    }

    pub fn overlaps(&self, other: &EstimateWithCI) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

fn wilson(p: f64, n: f64) -> (f64, f64) {
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// One sampled secondary transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledLink {
    pub position: Point,
    /// Orientation `ω` towards its own receiver.
    pub orientation: f64,
    /// Fade of the channel to the primary receiver; sets both the sensed
    /// power and the interference caused there.
    pub sense_fade: f64,
    /// Fade of the channel to the typical secondary receiver.
    pub interference_fade: f64,
    /// Transmission indicator.
    pub active: bool,
}

/// Primary receiver as seen by the sensing rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingTarget {
    pub position: Point,
    pub boresight: f64,
}

impl SensingTarget {
    /// The primary receiver at the origin of the primary frame.
    pub fn primary_frame() -> SensingTarget {
        SensingTarget { position: Point::new(0.0, 0.0), boresight: 0.0 }
    }

    /// `Y_p` in the typical-secondary frame, facing the primary transmitter.
    pub fn secondary_frame(sc: &Scenario, pp: &PrimaryPlacement) -> SensingTarget {
        SensingTarget { position: pp.rx(sc.r_p), boresight: pp.omega_p.radians() + PI }
    }

    /// Received power at the target from a transmitter at `x` facing `ω`,
    /// before fading.
    pub fn mean_power(&self, sc: &Scenario, x: Point, omega: f64) -> f64 {
        let d = x - self.position;
        let dist = d.norm();
        let beta = d.y.atan2(d.x);
        let g = sc.patterns.st.gain_at(beta + PI - omega) * sc.patterns.pr.gain_at(beta - self.boresight);
        if g == 0.0 {
            return 0.0;
        }
        sc.p_s * g * dist.powf(-sc.alpha)
    }
}

/// One sampled network around a receiver at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub links: Vec<SampledLink>,
    /// Fade of the primary link.
    pub h_p: f64,
    /// Fade of the typical secondary link.
    pub f_s0: f64,
    /// Fade from the primary transmitter to the typical receiver.
    pub h_cross: f64,
    /// Sensing fade of the typical secondary transmitter.
    pub g0_sense: f64,
}

impl NetworkRealization {
    pub fn active_count(&self) -> usize {
        self.links.iter().filter(|l| l.active).count()
    }
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Samples `Poisson(λ_s π R²)` transmitters uniformly in the disk of radius
/// `R` around the origin, with uniform orientations, unit-mean exponential
/// fades and the sensing indicators for `target`.
pub fn sample_realization<R: Rng + ?Sized>(sc: &Scenario, target: &SensingTarget, rng: &mut R) -> NetworkRealization {
    let h_p = exp1(rng);
    let f_s0 = exp1(rng);
    let h_cross = exp1(rng);
    let g0_sense = exp1(rng);
    let mean = sc.expected_links();
    let count = if mean > 0.0 {
        Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0)
    } else {
        0
    };
    let mut links = Vec::with_capacity(count);
    for _ in 0..count {
        let r = sc.radius * rng.random::<f64>().sqrt();
        let th = TAU * rng.random::<f64>();
        let position = Point::new(r * th.cos(), r * th.sin());
        let orientation = TAU * rng.random::<f64>();
        let sense_fade = exp1(rng);
        let interference_fade = exp1(rng);
        let active = sc.rho > 0.0 && sense_fade * target.mean_power(sc, position, orientation) < sc.rho;
        links.push(SampledLink { position, orientation, sense_fade, interference_fade, active });
    }
    NetworkRealization { links, h_p, f_s0, h_cross, g0_sense }
}

/// Empirical MAP of a link given in the typical-secondary frame.
pub fn estimate_map(link: &SecondaryLink, pp: &PrimaryPlacement, sc: &Scenario, n: usize, seed: u64) -> Result<EstimateWithCI> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "draws", reason: "must be at least 1" });
    }
    let z = cross_distance_z(link.tx, *pp, sc.r_p);
    let beta = cross_bearing_beta(link.tx, *pp, sc.r_p)?;
    let g = secondary_frame_gain(sc, pp, beta.radians(), link.orientation.radians());
    let power = if g == 0.0 { 0.0 } else { sc.p_s * g * z.powf(-sc.alpha) };
    let mut rng = RngStream::new(seed, 0).rng();
    let values: Vec<f64> = (0..n)
        .map(|_| {
            let fade = exp1(&mut rng);
            if sc.rho > 0.0 && fade * power < sc.rho { 1.0 } else { 0.0 }
        })
        .collect();
    Ok(EstimateWithCI::from_samples(&values))
}

/// Active fraction `ΣU_i / (λ_s π R²)` of realization `index`.
pub fn af_outcome(sc: &Scenario, seed: u64, index: u64) -> f64 {
    let mut rng = RngStream::new(seed, index).rng();
    let net = sample_realization(sc, &SensingTarget::primary_frame(), &mut rng);
    net.active_count() as f64 / sc.expected_links()
}

pub fn estimate_af(sc: &Scenario, n_realizations: usize, seed: u64) -> Result<EstimateWithCI> {
    sc.validate()?;
    if sc.lambda_s == 0.0 {
        return Err(Error::Undefined("undefined ratio: no secondary links expected"));
    }
    let values: Vec<f64> = (0..n_realizations as u64).map(|i| af_outcome(sc, seed, i)).collect();
    Ok(EstimateWithCI::from_samples(&values))
}

/// Whether the primary SINR of realization `index` exceeds `τ`.
pub fn primary_outcome(tau: f64, sc: &Scenario, seed: u64, index: u64) -> bool {
    let mut rng = RngStream::new(seed, index).rng();
    let target = SensingTarget::primary_frame();
    let net = sample_realization(sc, &target, &mut rng);
    let signal = sc.p_p * sc.primary_link_gain() * net.h_p * sc.r_p.powf(-sc.alpha);
    let interference: f64 = net
        .links
        .iter()
        .filter(|l| l.active)
        .map(|l| l.sense_fade * target.mean_power(sc, l.position, l.orientation))
        .sum();
    signal > tau * (sc.noise + interference)
}

pub fn estimate_coverage_primary(tau: f64, sc: &Scenario, n: usize, seed: u64) -> Result<EstimateWithCI> {
    sc.validate()?;
    let values: Vec<f64> = (0..n as u64).map(|i| if primary_outcome(tau, sc, seed, i) { 1.0 } else { 0.0 }).collect();
    Ok(EstimateWithCI::from_samples(&values))
}

/// Whether the typical secondary link of realization `index` is active and
/// its SINR exceeds `τ`.
pub fn secondary_outcome(tau: f64, sc: &Scenario, pp: &PrimaryPlacement, seed: u64, index: u64) -> bool {
    let mut rng = RngStream::new(seed, index).rng();
    let target = SensingTarget::secondary_frame(sc, pp);
    let net = sample_realization(sc, &target, &mut rng);
    let own = Point::new(sc.r_s, 0.0);
    if !(sc.rho > 0.0 && net.g0_sense * target.mean_power(sc, own, PI) < sc.rho) {
        return false;
    }
    let alpha = sc.alpha;
    let signal = sc.p_s * sc.secondary_link_gain() * net.f_s0 * sc.r_s.powf(-alpha);
    let (d, w) = (pp.delta_p.radians(), pp.omega_p.radians());
    let g_cross = sc.patterns.pt.gain_at(d + PI - w) * sc.patterns.sr.gain_at(d);
    let primary = if g_cross == 0.0 { 0.0 } else { sc.p_p * g_cross * net.h_cross * pp.x_p.powf(-alpha) };
    let secondary: f64 = net
        .links
        .iter()
        .filter(|l| l.active)
        .map(|l| {
            let x = l.position.norm();
            let theta = l.position.y.atan2(l.position.x);
            let g = sc.patterns.st.gain_at(theta + PI - l.orientation) * sc.patterns.sr.gain_at(theta);
            if g == 0.0 { 0.0 } else { sc.p_s * g * l.interference_fade * x.powf(-alpha) }
        })
        .sum();
    signal > tau * (sc.noise + primary + secondary)
}

pub fn estimate_coverage_secondary(tau: f64, sc: &Scenario, n: usize, seed: u64) -> Result<EstimateWithCI> {
    sc.validate()?;
    let pp = sc.fixed_placement()?;
    let values: Vec<f64> =
        (0..n as u64).map(|i| if secondary_outcome(tau, sc, &pp, seed, i) { 1.0 } else { 0.0 }).collect();
    Ok(EstimateWithCI::from_samples(&values))
}
