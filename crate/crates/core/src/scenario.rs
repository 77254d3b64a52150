//! Physical parameters and the reference presets.

use core::f64::consts::PI;
use num_traits::Float;

use crate::antenna::DevicePatterns;
use crate::error::{Error, Result};
use crate::geometry::{Angle, Placement, PlacementLaw, PrimaryPlacement, RandomPlacement};

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Noise power normalized by the near-field path gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseDerivation {
    pub bandwidth_hz: f64,
    /// Near-field gain `C_L` (linear).
    pub near_field_gain: f64,
    pub thermal_dbm_per_hz: f64,
}

impl Default for NoiseDerivation {
    /// 200 MHz at 60 GHz with `C_L = 10⁻⁶` and a −174 dBm/Hz floor.
    fn default() -> Self {
        NoiseDerivation { bandwidth_hz: 200e6, near_field_gain: 1e-6, thermal_dbm_per_hz: -174.0 }
    }
}

impl NoiseDerivation {
    /// `N₀` in watts.
    pub fn thermal_noise(&self) -> f64 {
        dbm_to_watts(self.thermal_dbm_per_hz + 10.0 * self.bandwidth_hz.log10())
    }

    /// `σ² = N₀ / C_L`.
    pub fn normalized_noise(&self) -> f64 {
        self.thermal_noise() / self.near_field_gain
    }
}

/// All parameters of one network configuration. Powers in watts, distances
/// in meters, density per m².
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub alpha: f64,
    /// Transmit-restriction threshold `ρ`.
    pub rho: f64,
    pub p_p: f64,
    pub p_s: f64,
    pub lambda_s: f64,
    pub r_p: f64,
    pub r_s: f64,
    /// Normalized noise `σ²`.
    pub noise: f64,
    /// Region radius `R`.
    pub radius: f64,
    pub patterns: DevicePatterns,
    pub placement: Placement,
}

/// Reference configuration: α = 3.3, R = 4 km, λ_s = 8·10⁻⁵ /m², 27/17 dBm,
/// r_p = 50 m, r_s = 20 m, ρ = 40 nW, omni antennas and the first set-up.
pub fn default_scenario() -> Scenario {
    Scenario {
        alpha: 3.3,
        rho: 40e-9,
        p_p: dbm_to_watts(27.0),
        p_s: dbm_to_watts(17.0),
        lambda_s: 8e-5,
        r_p: 50.0,
        r_s: 20.0,
        noise: NoiseDerivation::default().normalized_noise(),
        radius: 4000.0,
        patterns: DevicePatterns::omni(),
        placement: preset_type(1).expect("preset 1 exists"),
    }
}

/// Placements of the reference set-ups: 1–3 fixed, 4 uniformly random in the
/// disk of radius 4 km.
pub fn preset_type(n: u8) -> Result<Placement> {
    let fixed = |d: f64, x: f64, w: f64| {
        PrimaryPlacement::new(x, Angle::new(d), Angle::new(w)).map(Placement::Fixed)
    };
    match n {
        1 => fixed(PI / 2.0, 50.0, PI / 12.0),
        2 => fixed(PI / 2.0, 80.0, -PI / 2.0),
        3 => fixed(PI / 2.0, 10.0, PI / 2.0),
        4 => Ok(Placement::Random(RandomPlacement::new(4000.0, PlacementLaw::UniformDisk)?)),
        _ => Err(Error::InvalidParameter { name: "preset type", reason: "must be 1, 2, 3 or 4" }),
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return bad("alpha", "path-loss exponent must exceed 2");
        }
        for (name, v) in [("rho", self.rho), ("p_p", self.p_p), ("p_s", self.p_s), ("noise", self.noise), ("lambda_s", self.lambda_s)] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(name, "must be finite and nonnegative");
            }
        }
        for (name, v) in [("r_p", self.r_p), ("r_s", self.r_s), ("radius", self.radius)] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(name, "must be finite and positive");
            }
        }
        if let Placement::Random(r) = self.placement {
            if !(r.radius > 0.0) {
                return bad("placement radius", "must be positive");
            }
        }
        Ok(())
    }

    pub fn with_rho(&self, rho: f64) -> Scenario {
        Scenario { rho, ..self.clone() }
    }

    pub fn with_patterns(&self, patterns: DevicePatterns) -> Scenario {
        Scenario { patterns, ..self.clone() }
    }

    pub fn with_placement(&self, placement: Placement) -> Scenario {
        Scenario { placement, ..self.clone() }
    }

    /// Expected number of secondary links in the region, `λ_s π R²`.
    pub fn expected_links(&self) -> f64 {
        self.lambda_s * PI * self.radius * self.radius
    }

    /// The fixed placement, or an error for randomized set-ups.
    pub fn fixed_placement(&self) -> Result<PrimaryPlacement> {
        self.placement.fixed().ok_or(Error::Undefined("operation needs a fixed primary placement"))
    }

    /// Boresight product of the primary link, `g_pt(0) g_pr(0)`.
    pub fn primary_link_gain(&self) -> f64 {
        self.patterns.pt.boresight_gain() * self.patterns.pr.boresight_gain()
    }

    /// Boresight product of the secondary link, `g_st(0) g_sr(0)`.
    pub fn secondary_link_gain(&self) -> f64 {
        self.patterns.st.boresight_gain() * self.patterns.sr.boresight_gain()
    }
}
