//! SINR coverage of the primary link.

use core::f64::consts::TAU;
use num_traits::Float;

use crate::access::angular_integral;
use crate::antenna::{pow_gain, DevicePatterns};
use crate::error::{Error, Result};
use crate::numerics::{gamma, integrate_radial, n1, n2, QuadratureSpec};
use crate::scenario::Scenario;

/// Kernel parameters of the simplified coverage form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimaryKernelParams {
    /// Noise-to-signal ratio `κ_p = ρ r_p^α / (p_p g_pt(0) g_pr(0))`.
    pub kappa_p: f64,
    /// Average secondary directivity `n₃`.
    pub n3: f64,
    pub alpha: f64,
}

pub fn kernel_params(sc: &Scenario) -> Result<PrimaryKernelParams> {
    sc.validate()?;
    Ok(PrimaryKernelParams {
        kappa_p: sc.rho * sc.r_p.powf(sc.alpha) / (sc.p_p * sc.primary_link_gain()),
        n3: n3_general(&sc.patterns, sc.alpha)?,
        alpha: sc.alpha,
    })
}

/// `∫ E_ω[(g_pr(θ) g_st(θ−π−ω))^{2/α}] dθ`.
pub fn n3_general(patterns: &DevicePatterns, alpha: f64) -> Result<f64> {
    let s = 2.0 / alpha;
    let law = patterns.st.gain_law();
    Ok(angular_integral(&patterns.pr, |g_pr| law.expect(|g_st| pow_gain(g_pr * g_st, s))))
}

/// Product form of `n₃` for ULA patterns at both ends.
pub fn n3_ula(m_p: u32, m_s: u32, kappa_prime: f64, alpha: f64) -> Result<f64> {
    if m_p <= 1 || m_s <= 1 {
        return Err(Error::InvalidParameter { name: "ULA element count", reason: "must exceed 1" });
    }
    if !(kappa_prime > 0.0 && kappa_prime < 1.0) {
        return Err(Error::Domain { what: "kappa'", value: kappa_prime });
    }
    let s = 2.0 / alpha;
    let k = kappa_prime;
    let factor = |m: f64| 1.0 + (1.0 - k) / k * ((1.0 - k) / (m - k)).powf(s - 1.0);
    let (mp, ms) = (m_p as f64, m_s as f64);
    Ok(TAU * k * k * (mp * ms).powf(s - 1.0) * factor(mp) * factor(ms))
}

/// Noise-only coverage `exp(−τ σ² r_p^α / (p_p g_pt(0) g_pr(0)))`.
pub fn primary_noise_factor(tau: f64, sc: &Scenario) -> f64 {
    let g0 = sc.primary_link_gain();
    if g0 == 0.0 {
        return 0.0;
    }
    if sc.noise == 0.0 {
        return 1.0;
    }
    (-tau * sc.noise * sc.r_p.powf(sc.alpha) / (sc.p_p * g0)).exp()
}

/// `1 − E[e^{−s G χ U}]` for one interferer of mean received power `χ`
/// whose activity requires `G χ < ρ`.
fn laplace_kernel(rho: f64, s: f64, chi: f64) -> f64 {
    if chi == 0.0 || rho == 0.0 {
        return 0.0;
    }
    let a = rho / chi;
    let b = s * chi;
    let num = b * -(-a).exp_m1() - (-a).exp() * -(-a * b).exp_m1();
    (num / (1.0 + b)).max(0.0)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain { what: "SINR threshold", value: tau });
    }
    Ok(())
}

/// Laplace transform of the aggregate secondary interference at the primary
/// receiver, evaluated by the probability generating functional with the
/// activity-restricted fading expectation.
pub fn laplace_secondary_interference(s: f64, sc: &Scenario) -> Result<f64> {
    sc.validate()?;
    if !(s >= 0.0) {
        return Err(Error::Domain { what: "Laplace argument", value: s });
    }
    if s == 0.0 || sc.lambda_s == 0.0 || sc.rho == 0.0 || sc.p_s == 0.0 {
        return Ok(1.0);
    }
    let law = sc.patterns.st.gain_law();
    let radial_spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-300, max_subdivisions: 400 };
    let alpha = sc.alpha;
    let mut failure = None;
    let mut radial = |d: f64| -> f64 {
        if d == 0.0 {
            return 0.0;
        }
        let pd = sc.p_s * d;
        // Distances where the restriction and the interference saturate.
        let x_rho = (pd / sc.rho).powf(1.0 / alpha);
        let x_s = (s * pd).powf(1.0 / alpha);
        let r = integrate_radial(
            |x| laplace_kernel(sc.rho, s, pd * x.powf(-alpha)),
            x_rho,
            &[x_rho, x_s],
            &radial_spec,
        );
        match r {
            Ok(v) => v.value,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let integral = angular_integral(&sc.patterns.pr, |g_pr| law.expect(|g_st| radial(g_pr * g_st)));
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((-sc.lambda_s * integral).exp())
}

/// Primary coverage from the triple integral: the noise factor times the
/// Laplace transform at `s = τ r_p^α / (p_p g_pt(0) g_pr(0))`.
pub fn coverage_primary_exact(tau: f64, sc: &Scenario) -> Result<f64> {
    check_tau(tau)?;
    sc.validate()?;
    let g0 = sc.primary_link_gain();
    if g0 == 0.0 {
        return Ok(0.0);
    }
    let s = tau * sc.r_p.powf(sc.alpha) / (sc.p_p * g0);
    Ok(primary_noise_factor(tau, sc) * laplace_secondary_interference(s, sc)?)
}

/// Primary coverage from the `n₁, n₂, n₃` kernel form,
/// `exp(−σ²κ_pτ/ρ − (λ/α)(p_s/ρ)^{2/α}[(κ_pτ)^{2/α} n₁ − Γ(2/α) + n₂(α, κ_pτ)] n₃)`.
pub fn coverage_primary_simplified(tau: f64, sc: &Scenario) -> Result<f64> {
    check_tau(tau)?;
    sc.validate()?;
    let noise = primary_noise_factor(tau, sc);
    if noise == 0.0 || sc.lambda_s == 0.0 || sc.rho == 0.0 || sc.p_s == 0.0 {
        return Ok(noise);
    }
    let k = kernel_params(sc)?;
    let s = 2.0 / sc.alpha;
    let nu = k.kappa_p * tau;
    let bracket = nu.powf(s) * n1(sc.alpha)? - gamma(s) + n2(sc.alpha, nu)?;
    let exponent = sc.lambda_s / sc.alpha * (sc.p_s / sc.rho).powf(s) * bracket * k.n3;
    Ok(noise * (-exponent).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antenna::{BeamPattern, DEFAULT_KAPPA_DEG};
    use crate::scenario::default_scenario;

    #[test]
    fn kernel_small_and_large_distance() {
        assert_eq!(laplace_kernel(1.0, 1.0, 0.0), 0.0);
        // Strong interferer with no restriction: kernel → 1.
        assert!((laplace_kernel(1e300, 1.0, 1e9) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn noise_only() {
        let mut sc = default_scenario();
        sc.lambda_s = 0.0;
        let want = (-sc.noise * sc.r_p.powf(sc.alpha) / sc.p_p).exp();
        assert!((coverage_primary_exact(1.0, &sc).unwrap() - want).abs() < 1e-15);
        assert!((coverage_primary_simplified(1.0, &sc).unwrap() - want).abs() < 1e-15);
        sc.noise = 0.0;
        assert_eq!(coverage_primary_simplified(1.0, &sc).unwrap(), 1.0);
    }

    #[test]
    fn n3_omni_and_ideal() {
        assert_eq!(n3_general(&DevicePatterns::omni(), 3.3).unwrap(), TAU);
        let ideal = DevicePatterns {
            pt: BeamPattern::Omni,
            pr: BeamPattern::ideal(4.0, 0.5).unwrap(),
            st: BeamPattern::ideal(2.0, 1.0).unwrap(),
            sr: BeamPattern::Omni,
        };
        let s = 2.0 / 3.3;
        let want = TAU * (0.5 / TAU) * (1.0 / TAU) * 8f64.powf(s);
        assert!((n3_general(&ideal, 3.3).unwrap() / want - 1.0).abs() < 1e-13);
    }

    #[test]
    fn n3_ula_matches_general() {
        let kappa = DEFAULT_KAPPA_DEG.to_radians();
        let n = n3_ula(4, 8, kappa / TAU, 3.3).unwrap();
        let g = n3_general(&DevicePatterns::ula(4, 8, kappa).unwrap(), 3.3).unwrap();
        assert!((n / g - 1.0).abs() < 1e-12);
        assert!(n3_ula(1, 4, 0.3, 3.3).is_err());
    }
}
