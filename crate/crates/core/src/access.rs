//! Medium-access probability, protection zones and the activity factor.

use core::f64::consts::{PI, TAU};
use num_traits::Float;

use crate::antenna::{BeamPattern, GainLaw, PERIODIC_NODES};
use crate::error::{Error, Result};
use crate::geometry::{cross_bearing_beta, cross_distance_z, Angle, PolarPoint, PrimaryPlacement};
use crate::numerics::{lower_incomplete_gamma, psi};
use crate::scenario::Scenario;

/// A secondary link: transmitter position, orientation `ω` (transmitter to
/// receiver) and length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondaryLink {
    pub tx: PolarPoint,
    pub orientation: Angle,
    pub length: f64,
}

impl SecondaryLink {
    pub fn new(tx: PolarPoint, orientation: Angle, length: f64) -> Result<SecondaryLink> {
        if !(length > 0.0) {
            return Err(Error::InvalidParameter { name: "link length", reason: "must be positive" });
        }
        Ok(SecondaryLink { tx, orientation, length })
    }
}

/// `P(p_s G D d^{-α} < ρ)` for `G ~ Exp(1)`, i.e. `1 − exp(−ρ d^α / (p_s D))`.
///
/// A zero gain product always permits transmission; `ρ = 0` never does.
pub fn map_from_gain(rho: f64, p_s: f64, distance: f64, alpha: f64, gain: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    let d = p_s * gain;
    if d == 0.0 {
        return 1.0;
    }
    -(-rho * distance.powf(alpha) / d).exp_m1()
}

/// Gain product towards the primary receiver for an interferer in the
/// primary frame: `g_pr(θ) g_st(θ − π − ω)`.
pub fn primary_frame_gain(sc: &Scenario, theta: f64, omega: f64) -> f64 {
    sc.patterns.pr.gain_at(theta) * sc.patterns.st.gain_at(theta - PI - omega)
}

/// MAP of a secondary transmitter given in the primary frame.
pub fn map_primary_frame(link: &SecondaryLink, sc: &Scenario) -> f64 {
    let g = primary_frame_gain(sc, link.tx.angle.radians(), link.orientation.radians());
    map_from_gain(sc.rho, sc.p_s, link.tx.radius, sc.alpha, g)
}

/// Gain product towards the primary receiver for a transmitter whose bearing
/// seen from `Y_p` is `beta`: `g_st(β + π − ω) g_pr(β − ω_p − π)`.
pub fn secondary_frame_gain(sc: &Scenario, pp: &PrimaryPlacement, beta: f64, omega: f64) -> f64 {
    sc.patterns.st.gain_at(beta + PI - omega) * sc.patterns.pr.gain_at(beta - pp.omega_p.radians() - PI)
}

/// MAP of a secondary transmitter given in the typical-secondary frame.
pub fn map_secondary_frame(link: &SecondaryLink, pp: &PrimaryPlacement, sc: &Scenario) -> Result<f64> {
    let z = cross_distance_z(link.tx, *pp, sc.r_p);
    let beta = cross_bearing_beta(link.tx, *pp, sc.r_p)?;
    let g = secondary_frame_gain(sc, pp, beta.radians(), link.orientation.radians());
    Ok(map_from_gain(sc.rho, sc.p_s, z, sc.alpha, g))
}

/// Radius `(p_s h g_pr(θ) g_st(θ−π−ω) / ρ)^{1/α}` inside which a secondary
/// transmitter with fade `h` is barred.
pub fn protection_zone_radius(theta: Angle, omega: Angle, fade: f64, sc: &Scenario) -> Result<f64> {
    if !(sc.rho > 0.0) {
        return Err(Error::Domain { what: "protection zone needs rho > 0", value: sc.rho });
    }
    let g = primary_frame_gain(sc, theta.radians(), omega.radians());
    if g == 0.0 || sc.rho.is_infinite() {
        return Ok(0.0);
    }
    Ok((sc.p_s * fade * g / sc.rho).powf(1.0 / sc.alpha))
}

/// Area of the main-lobe segment of the protection zone, `(φ_pr/2) r*²` with
/// `r*` taken at main-lobe gains of the primary receiver and of the
/// secondary transmitter (facing the primary receiver).
pub fn protection_zone_area_mainlobe(sc: &Scenario, fade: f64) -> Result<f64> {
    let (a_pr, phi_pr) = match sc.patterns.pr {
        BeamPattern::Sectorized { main_gain, beamwidth, .. } | BeamPattern::Ideal { main_gain, beamwidth } => {
            (main_gain, beamwidth)
        }
        _ => return Err(Error::PatternMismatch("main-lobe zone needs a sectorized primary receiver")),
    };
    if !(sc.rho > 0.0) {
        return Err(Error::Domain { what: "protection zone needs rho > 0", value: sc.rho });
    }
    let a_st = sc.patterns.st.boresight_gain();
    let r = (sc.p_s * fade * a_pr * a_st / sc.rho).powf(1.0 / sc.alpha);
    Ok(0.5 * phi_pr * r * r)
}

/// Mean of `f(g)` over the gain law of `pattern` at a uniform bearing,
/// integrated over `θ ∈ [−π, π)`: `∫ f(g(θ)) dθ`.
///
/// Two-level patterns are summed exactly panel by panel between their
/// discontinuities; tabulated patterns use the periodic rule.
pub(crate) fn angular_integral<F: FnMut(f64) -> f64>(pattern: &BeamPattern, mut f: F) -> f64 {
    // Piecewise-constant patterns revisit the same gain many times.
    let mut last: Option<(f64, f64)> = None;
    let mut g = |gain: f64| match last {
        Some((lg, lv)) if lg == gain => lv,
        _ => {
            let v = f(gain);
            last = Some((gain, v));
            v
        }
    };
    match pattern.discontinuities() {
        Some(mut breaks) => {
            breaks.insert(0, -PI);
            breaks.push(PI);
            // The gain is constant between breaks, so each panel is exact.
            breaks.windows(2).map(|w| (w[1] - w[0]) * g(pattern.gain_at(0.5 * (w[0] + w[1])))).sum()
        }
        None => TAU * crate::numerics::periodic_mean(|t| g(pattern.gain_at(t)), PERIODIC_NODES),
    }
}

fn afactor_kernel(sc: &Scenario, st_law: &GainLaw, g_pr: f64) -> Result<f64> {
    let mut acc = 0.0;
    for &(g_st, w) in &st_law.atoms {
        let d = sc.p_s * g_pr * g_st;
        let u = if d == 0.0 { f64::INFINITY } else { sc.rho / d };
        acc += w * psi(u, sc.alpha, sc.radius)?;
    }
    Ok(acc)
}

/// Activity factor `η_s`: the θ integral over the primary receiver's pattern
/// with the ω expectation over the secondary transmitter's gain law, the
/// radial part in lower-incomplete-gamma form.
pub fn activity_factor(sc: &Scenario) -> Result<f64> {
    sc.validate()?;
    let st_law = sc.patterns.st.gain_law();
    let mut err = None;
    let integral = angular_integral(
        &sc.patterns.pr,
        |g_pr| match afactor_kernel(sc, &st_law, g_pr) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
    );
    if let Some(e) = err {
        return Err(e);
    }
    let eta = 1.0 - integral / (sc.alpha * PI * sc.radius * sc.radius);
    Ok(eta.clamp(0.0, 1.0))
}

/// Four-term mixture form of `η_s` for two-level patterns.
pub fn activity_factor_sectorized(sc: &Scenario) -> Result<f64> {
    sc.validate()?;
    let (a_pr, b_pr, phi_pr) = sc.patterns.pr.two_level().ok_or(Error::PatternMismatch("primary receiver must be sectorized"))?;
    let (a_st, b_st, phi_st) = sc.patterns.st.two_level().ok_or(Error::PatternMismatch("secondary transmitter must be sectorized"))?;
    let (q_pr, q_st) = ((phi_pr / TAU).min(1.0), (phi_st / TAU).min(1.0));
    let psi_of = |g: f64| -> Result<f64> {
        let d = sc.p_s * g;
        psi(if d == 0.0 { f64::INFINITY } else { sc.rho / d }, sc.alpha, sc.radius)
    };
    let mix = q_pr * q_st * psi_of(a_pr * a_st)?
        + q_pr * (1.0 - q_st) * psi_of(a_pr * b_st)?
        + (1.0 - q_pr) * q_st * psi_of(b_pr * a_st)?
        + (1.0 - q_pr) * (1.0 - q_st) * psi_of(b_pr * b_st)?;
    Ok((1.0 - 2.0 / (sc.alpha * sc.radius * sc.radius) * mix).clamp(0.0, 1.0))
}

/// Ideal-beam versus omni comparison of the activity-factor ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessDiagnostics {
    /// `η̄ = 1 − η_s` under ideal beams.
    pub eta_bar_ideal: f64,
    pub eta_bar_omni: f64,
    pub psi_ideal: f64,
    pub psi_omni: f64,
    /// `γ(2/α, u R^α)` under ideal beams.
    pub gamma_ideal: f64,
    pub gamma_omni: f64,
}

impl AccessDiagnostics {
    pub fn eta_bar_ratio(&self) -> f64 {
        self.eta_bar_ideal / self.eta_bar_omni
    }

    pub fn psi_ratio(&self) -> f64 {
        self.psi_ideal / self.psi_omni
    }

    pub fn gamma_ratio(&self) -> f64 {
        self.gamma_ideal / self.gamma_omni
    }
}

/// Compares the ideal-beam counterparts of the scenario's primary-receiver
/// and secondary-transmitter patterns with omni antennas.
pub fn tradeoff_diagnostics(sc: &Scenario) -> Result<AccessDiagnostics> {
    sc.validate()?;
    let (a_pr, _, phi_pr) = sc.patterns.pr.two_level().ok_or(Error::PatternMismatch("primary receiver must be sectorized"))?;
    let (a_st, _, phi_st) = sc.patterns.st.two_level().ok_or(Error::PatternMismatch("secondary transmitter must be sectorized"))?;
    let (q_pr, q_st) = ((phi_pr / TAU).min(1.0), (phi_st / TAU).min(1.0));
    let s = 2.0 / sc.alpha;
    let r_a = sc.radius.powf(sc.alpha);
    let u_omni = sc.rho / sc.p_s;
    let u_ideal = u_omni / (a_pr * a_st);
    let psi_omni = psi(u_omni, sc.alpha, sc.radius)?;
    let psi_ideal = psi(u_ideal, sc.alpha, sc.radius)?;
    let scale = 2.0 / (sc.alpha * sc.radius * sc.radius);
    Ok(AccessDiagnostics {
        eta_bar_ideal: scale * q_pr * q_st * psi_ideal,
        eta_bar_omni: scale * psi_omni,
        psi_ideal,
        psi_omni,
        gamma_ideal: lower_incomplete_gamma(s, u_ideal * r_a)?,
        gamma_omni: lower_incomplete_gamma(s, u_omni * r_a)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antenna::DevicePatterns;
    use crate::scenario::default_scenario;

    #[test]
    fn map_zero_distance_and_zero_gain() {
        let sc = default_scenario();
        assert_eq!(map_from_gain(sc.rho, sc.p_s, 0.0, sc.alpha, 1.0), 0.0);
        assert_eq!(map_from_gain(sc.rho, sc.p_s, 10.0, sc.alpha, 0.0), 1.0);
        assert_eq!(map_from_gain(0.0, sc.p_s, 10.0, sc.alpha, 0.0), 0.0);
    }

    #[test]
    fn ideal_outside_lobe_is_free() {
        let sc = default_scenario().with_patterns(DevicePatterns {
            pt: BeamPattern::Omni,
            pr: BeamPattern::ideal(4.0, 0.5).unwrap(),
            st: BeamPattern::ideal(4.0, 0.5).unwrap(),
            sr: BeamPattern::Omni,
        });
        let link = SecondaryLink::new(PolarPoint::new(30.0, Angle::new(1.0)).unwrap(), Angle::new(1.0 + PI), 20.0).unwrap();
        assert_eq!(map_primary_frame(&link, &sc), 1.0);
    }

    #[test]
    fn af_limits() {
        let sc = default_scenario();
        assert_eq!(activity_factor(&sc.with_rho(0.0)).unwrap(), 0.0);
        assert!(activity_factor(&sc.with_rho(1.0)).unwrap() > 0.999);
        let omni = 1.0 - 2.0 / (sc.alpha * sc.radius * sc.radius) * psi(sc.rho / sc.p_s, sc.alpha, sc.radius).unwrap();
        assert!((activity_factor(&sc).unwrap() - omni).abs() < 1e-12);
    }

    #[test]
    fn af_ideal_collapse() {
        let sc = default_scenario().with_patterns(DevicePatterns {
            pt: BeamPattern::Omni,
            pr: BeamPattern::sectorized(4.0, 0.0, 0.6).unwrap(),
            st: BeamPattern::sectorized(8.0, 0.0, 0.3).unwrap(),
            sr: BeamPattern::Omni,
        });
        let q = (0.6 / TAU) * (0.3 / TAU);
        let want = 1.0 - 2.0 / (sc.alpha * sc.radius * sc.radius) * q * psi(sc.rho / sc.p_s / 32.0, sc.alpha, sc.radius).unwrap();
        assert!((activity_factor_sectorized(&sc).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn zone_radius_main_lobe() {
        let sc = default_scenario().with_patterns(DevicePatterns::ula(4, 4, crate::antenna::DEFAULT_KAPPA_DEG.to_radians()).unwrap());
        let r = protection_zone_radius(Angle::ZERO, Angle::new(PI), 1.0, &sc).unwrap();
        assert!((r - (sc.p_s * 16.0 / sc.rho).powf(1.0 / sc.alpha)).abs() < 1e-9 * r);
        assert!(protection_zone_area_mainlobe(&default_scenario(), 1.0).is_err());
    }
}
