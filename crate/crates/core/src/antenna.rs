//! Beam patterns `g(θ)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::Angle;

/// Default beamwidth constant of a uniform linear array, 121°.
pub const DEFAULT_KAPPA_DEG: f64 = 121.0;

/// Number of samples held by a tabulated pattern.
pub const TABULATED_SAMPLES: usize = 4096;

/// Node count of the periodic rule used for tabulated patterns.
pub const PERIODIC_NODES: usize = 512;

/// Gain versus angle off boresight.
#[derive(Debug, Clone, PartialEq)]
pub enum BeamPattern {
    Omni,
    Sectorized { main_gain: f64, side_gain: f64, beamwidth: f64 },
    Ideal { main_gain: f64, beamwidth: f64 },
    Tabulated(TabulatedPattern),
}

/// 4096 uniform samples over `[-π, π)` with nearest-sample lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPattern {
    gains: Vec<f64>,
}

impl TabulatedPattern {
    /// Samples `f` at the 4096 uniform angles `-π + 2πk/4096`.
    pub fn from_fn<F: FnMut(f64) -> f64>(mut f: F) -> Result<TabulatedPattern> {
        let n = TABULATED_SAMPLES;
        let gains: Vec<f64> = (0..n).map(|k| f(-PI + TAU * k as f64 / n as f64)).collect();
        TabulatedPattern::from_samples(gains)
    }

    pub fn from_samples(gains: Vec<f64>) -> Result<TabulatedPattern> {
        if gains.len() != TABULATED_SAMPLES {
            return Err(Error::InvalidParameter { name: "tabulated pattern", reason: "needs exactly 4096 samples" });
        }
        if gains.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(Error::InvalidParameter { name: "tabulated pattern", reason: "gains must be finite and nonnegative" });
        }
        Ok(TabulatedPattern { gains })
    }

    pub fn samples(&self) -> &[f64] {
        &self.gains
    }

    fn lookup(&self, theta: f64) -> f64 {
        let n = self.gains.len();
        let pos = (theta + PI) / TAU * n as f64;
        let idx = (pos.round() as i64).rem_euclid(n as i64) as usize;
        self.gains[idx]
    }
}

/// Uniform linear array description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlaSpec {
    pub elements: u32,
    /// Beamwidth constant `κ` in radians.
    pub kappa: f64,
}

impl UlaSpec {
    pub fn new(elements: u32) -> UlaSpec {
        UlaSpec { elements, kappa: DEFAULT_KAPPA_DEG.to_radians() }
    }

    /// `κ' = κ / 2π`.
    pub fn kappa_prime(&self) -> f64 {
        self.kappa / TAU
    }
}

/// Discrete law of the gain seen at a uniformly random bearing.
#[derive(Debug, Clone, PartialEq)]
pub struct GainLaw {
    /// `(gain, probability)` atoms; probabilities sum to one.
    pub atoms: Vec<(f64, f64)>,
}

impl GainLaw {
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.atoms.iter().map(|&(g, w)| w * f(g)).sum()
    }
}

impl BeamPattern {
    pub fn sectorized(main_gain: f64, side_gain: f64, beamwidth: f64) -> Result<BeamPattern> {
        check_lobe(main_gain, beamwidth)?;
        if !(side_gain >= 0.0) || !side_gain.is_finite() {
            return Err(Error::InvalidParameter { name: "side_gain", reason: "must be finite and nonnegative" });
        }
        Ok(BeamPattern::Sectorized { main_gain, side_gain, beamwidth })
    }

    pub fn ideal(main_gain: f64, beamwidth: f64) -> Result<BeamPattern> {
        check_lobe(main_gain, beamwidth)?;
        Ok(BeamPattern::Ideal { main_gain, beamwidth })
    }

    /// Sectorized pattern of a ULA: `φ = κ/M`, `a = M`, `b = (1−κ')/(1−κ'/M)`.
    pub fn from_ula(u: UlaSpec) -> Result<BeamPattern> {
        if u.elements <= 1 {
            return Err(Error::InvalidParameter { name: "ULA element count", reason: "must exceed 1" });
        }
        let m = u.elements as f64;
        let kp = u.kappa_prime();
        if !(kp > 0.0) || kp / m >= 1.0 || kp >= 1.0 {
            return Err(Error::InvalidParameter { name: "kappa", reason: "must lie in (0, 2π)" });
        }
        Ok(BeamPattern::Sectorized { main_gain: m, side_gain: (1.0 - kp) / (1.0 - kp / m), beamwidth: u.kappa / m })
    }

    /// ULA pattern for `M > 1`, omni for `M = 1`.
    pub fn ula_or_omni(elements: u32, kappa: f64) -> Result<BeamPattern> {
        if elements == 1 {
            Ok(BeamPattern::Omni)
        } else {
            BeamPattern::from_ula(UlaSpec { elements, kappa })
        }
    }

    pub fn gain(&self, theta: Angle) -> f64 {
        self.gain_at(theta.radians())
    }

    /// Gain at an arbitrary (unnormalized) angle in radians.
    pub fn gain_at(&self, theta: f64) -> f64 {
        match self {
            BeamPattern::Omni => 1.0,
            BeamPattern::Sectorized { main_gain, side_gain, beamwidth } => {
                if in_main_lobe(theta, *beamwidth) {
                    *main_gain
                } else {
                    *side_gain
                }
            }
            BeamPattern::Ideal { main_gain, beamwidth } => {
                if in_main_lobe(theta, *beamwidth) {
                    *main_gain
                } else {
                    0.0
                }
            }
            BeamPattern::Tabulated(t) => t.lookup(crate::geometry::normalize(theta)),
        }
    }

    /// Boresight gain `g(0)`.
    pub fn boresight_gain(&self) -> f64 {
        self.gain_at(0.0)
    }

    /// `(main gain, side gain, beamwidth)` for piecewise-constant two-level
    /// patterns; omni counts as a full-width lobe of gain 1.
    pub fn two_level(&self) -> Option<(f64, f64, f64)> {
        match self {
            BeamPattern::Omni => Some((1.0, 1.0, TAU)),
            BeamPattern::Sectorized { main_gain, side_gain, beamwidth } => Some((*main_gain, *side_gain, *beamwidth)),
            BeamPattern::Ideal { main_gain, beamwidth } => Some((*main_gain, 0.0, *beamwidth)),
            BeamPattern::Tabulated(_) => None,
        }
    }

    /// `q = φ / 2π`.
    pub fn main_lobe_probability(&self) -> Result<f64> {
        match self {
            BeamPattern::Sectorized { beamwidth, .. } | BeamPattern::Ideal { beamwidth, .. } => Ok(beamwidth / TAU),
            BeamPattern::Omni => Err(Error::Undefined("main-lobe probability of an omni pattern")),
            BeamPattern::Tabulated(_) => Err(Error::Undefined("main-lobe probability of a tabulated pattern")),
        }
    }

    /// `E[g(Θ)^e]` for `Θ ~ U[-π, π)`.
    pub fn expected_gain_power(&self, exponent: f64) -> f64 {
        self.gain_law().expect(|g| pow_gain(g, exponent))
    }

    /// `a q + b (1 − q) − 1` for two-level patterns.
    pub fn normalization_defect(&self) -> Option<f64> {
        let (a, b, phi) = self.two_level()?;
        let q = phi / TAU;
        Some(a * q + b * (1.0 - q) - 1.0)
    }

    /// Angles in `(-π, π)` where the gain jumps; `None` for tabulated
    /// patterns, which are integrated with a periodic rule instead.
    pub fn discontinuities(&self) -> Option<Vec<f64>> {
        match self {
            BeamPattern::Omni => Some(Vec::new()),
            BeamPattern::Sectorized { beamwidth, main_gain, side_gain } if main_gain == side_gain || *beamwidth >= TAU => {
                Some(Vec::new())
            }
            BeamPattern::Sectorized { beamwidth, .. } | BeamPattern::Ideal { beamwidth, .. } => {
                if *beamwidth >= TAU {
                    Some(Vec::new())
                } else {
                    Some(vec![-0.5 * beamwidth, 0.5 * beamwidth])
                }
            }
            BeamPattern::Tabulated(_) => None,
        }
    }

    /// Law of the gain at a uniform bearing: exact for two-level patterns, a
    /// 512-node periodic sample for tabulated ones.
    pub fn gain_law(&self) -> GainLaw {
        match self.two_level() {
            Some((a, b, phi)) => {
                let q = (phi / TAU).min(1.0);
                let mut atoms = Vec::with_capacity(2);
                if q > 0.0 {
                    atoms.push((a, q));
                }
                if q < 1.0 {
                    atoms.push((b, 1.0 - q));
                }
                GainLaw { atoms }
            }
            None => {
                let n = PERIODIC_NODES;
                let w = 1.0 / n as f64;
                GainLaw { atoms: (0..n).map(|k| (self.gain_at(-PI + TAU * k as f64 / n as f64), w)).collect() }
            }
        }
    }
}

fn check_lobe(main_gain: f64, beamwidth: f64) -> Result<()> {
    if !(main_gain > 0.0) || !main_gain.is_finite() {
        return Err(Error::InvalidParameter { name: "main_gain", reason: "must be finite and positive" });
    }
    if !(beamwidth > 0.0) || beamwidth > TAU {
        return Err(Error::InvalidParameter { name: "beamwidth", reason: "must lie in (0, 2π]" });
    }
    Ok(())
}

fn in_main_lobe(theta: f64, beamwidth: f64) -> bool {
    beamwidth >= TAU || crate::geometry::normalize(theta).abs() <= 0.5 * beamwidth
}

/// `g^e` with `0^e = 0` for `e > 0`.
pub(crate) fn pow_gain(g: f64, e: f64) -> f64 {
    if g == 0.0 {
        0.0
    } else {
        g.powf(e)
    }
}

/// Beam patterns of the four device ends.
#[derive(Debug, Clone, PartialEq)]
pub struct DevicePatterns {
    /// Primary transmitter.
    pub pt: BeamPattern,
    /// Primary receiver.
    pub pr: BeamPattern,
    /// Secondary transmitters.
    pub st: BeamPattern,
    /// Secondary receivers.
    pub sr: BeamPattern,
}

impl DevicePatterns {
    pub fn omni() -> DevicePatterns {
        DevicePatterns { pt: BeamPattern::Omni, pr: BeamPattern::Omni, st: BeamPattern::Omni, sr: BeamPattern::Omni }
    }

    /// ULA patterns with `m_p` elements at both primary ends and `m_s` at
    /// both secondary ends; one element means omni.
    pub fn ula(m_p: u32, m_s: u32, kappa: f64) -> Result<DevicePatterns> {
        let p = BeamPattern::ula_or_omni(m_p, kappa)?;
        let s = BeamPattern::ula_or_omni(m_s, kappa)?;
        Ok(DevicePatterns { pt: p.clone(), pr: p, st: s.clone(), sr: s })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ula_four() {
        let p = BeamPattern::from_ula(UlaSpec::new(4)).unwrap();
        let (a, b, phi) = p.two_level().unwrap();
        assert_eq!(a, 4.0);
        assert!((phi.to_degrees() - 30.25).abs() < 1e-12);
        assert!((b - 0.724_79).abs() < 1e-5);
        assert!((p.main_lobe_probability().unwrap() - 0.084_028).abs() < 1e-6);
        assert!(p.normalization_defect().unwrap().abs() < 1e-15);
        assert_eq!(p.gain(Angle::ZERO), 4.0);
        assert_eq!(p.gain(Angle::new(PI)), b);
    }

    #[test]
    fn ula_beamwidths() {
        let bw = |m| BeamPattern::from_ula(UlaSpec::new(m)).unwrap().two_level().unwrap().2.to_degrees();
        assert!((bw(2) - 60.5).abs() < 1e-12);
        assert!((bw(8) - 15.125).abs() < 1e-12);
        assert!(BeamPattern::from_ula(UlaSpec::new(1)).is_err());
    }

    #[test]
    fn lobe_edges_and_probability() {
        let p = BeamPattern::sectorized(2.0, 0.5, 1.0).unwrap();
        assert_eq!(p.gain_at(0.5), 2.0);
        assert_eq!(p.gain_at(0.5 + 1e-12), 0.5);
        assert_eq!(BeamPattern::ideal(1.0, TAU).unwrap().main_lobe_probability().unwrap(), 1.0);
        assert!(BeamPattern::Omni.main_lobe_probability().is_err());
    }

    #[test]
    fn tabulated_nearest_lookup() {
        let t = TabulatedPattern::from_fn(|th| 1.0 + th.cos()).unwrap();
        let p = BeamPattern::Tabulated(t);
        assert!((p.gain_at(0.0) - 2.0).abs() < 1e-12);
        assert!((p.gain_at(PI) - 0.0).abs() < 1e-12);
        assert!((p.expected_gain_power(1.0) - 1.0).abs() < 1e-12);
    }
}
