//! SINR coverage of the typical secondary link.
//!
//! Everything is expressed in the typical-secondary frame: the typical
//! receiver sits at the origin with boresight `0`, its transmitter at
//! `r_s∠0` with boresight `π`. An interferer at `x∠θ` with orientation `ω`
//! sees the typical receiver along `θ + π` and the primary receiver `Y_p`
//! along `β + π`, where `β = ∠(X − Y_p)`.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use num_traits::Float;
use rand_chacha::ChaCha8Rng;

use crate::access::map_from_gain;
use crate::antenna::{pow_gain, BeamPattern, PERIODIC_NODES};
use crate::error::{Error, Result};
use crate::geometry::{normalize, Placement, RandomPlacement, Point, PrimaryPlacement};
use crate::montecarlo::{EstimateWithCI, RngStream};
use crate::numerics::{gamma, integrate_panels, integrate_radial, periodic_mean, upper_incomplete_gamma_scaled, QuadratureSpec};
use crate::scenario::Scenario;

/// Factors of the secondary coverage probability,
/// `p_cs = term1 · term2 · term3 · exp(−λ_s · term4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondaryCoverageTerms {
    /// Noise factor `exp(−τσ²/A₀)`.
    pub term1: f64,
    /// MAP of the typical link.
    pub term2: f64,
    /// Primary-interference factor `1 / (1 + τA₂/A₀)`.
    pub term3: f64,
    /// Secondary-interference integral `I`.
    pub term4: f64,
}

impl SecondaryCoverageTerms {
    pub fn coverage(&self, lambda_s: f64) -> f64 {
        let t4 = if self.term4 == 0.0 { 1.0 } else { (-lambda_s * self.term4).exp() };
        (self.term1 * self.term2 * self.term3 * t4).clamp(0.0, 1.0)
    }

    /// Upper bound on the coverage ignoring secondary interference.
    pub fn interference_free(&self) -> f64 {
        self.term1 * self.term2 * self.term3
    }
}

/// Transmit gains of an interferer towards the primary receiver (`A`) and
/// towards the typical receiver (`B`), the receive gains `C` (primary
/// receiver) and `D` (typical receiver), and the probability over `ω` of the
/// transmit-gain pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainCombination {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub weight: f64,
}

/// How the secondary-interference integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Term4Method {
    /// Nested adaptive quadrature over `θ`, `x` and `ω`.
    Exact(QuadratureSpec),
    /// Nested quadrature over `θ` and `x` with the closed-form `ω` mixture
    /// of two-level patterns.
    Sectorized(QuadratureSpec),
    /// Gamma-kernel form valid when `Y_p` is close to the typical receiver.
    NearPrimary,
    /// Saturated-restriction form valid when `Y_p` is far away.
    FarPrimary,
    /// `FarPrimary` when `y_p` is at least `far_distance`, otherwise `Exact`.
    Hybrid { far_distance: f64, spec: QuadratureSpec },
}

impl Term4Method {
    pub fn exact() -> Term4Method {
        Term4Method::Exact(QuadratureSpec { rel_tol: 1e-7, abs_tol: 1e-300, max_subdivisions: 400 })
    }

    pub fn sectorized() -> Term4Method {
        Term4Method::Sectorized(QuadratureSpec { rel_tol: 1e-7, abs_tol: 1e-300, max_subdivisions: 400 })
    }

    /// Hybrid rule for placement averaging: the far form beyond four mean
    /// contact distances `1/(2√λ_s)`, loose nested quadrature inside.
    ///
    /// At the reference parameters the far form moves `exp(−λ_s I)` by less
    /// than 0.5% from 200 m outwards, for `ρ` from 0.1 pW to 100 nW.
    pub fn averaging(sc: &Scenario) -> Term4Method {
        let far_distance = if sc.lambda_s > 0.0 { 2.0 / sc.lambda_s.sqrt() } else { f64::INFINITY };
        Term4Method::Hybrid { far_distance, spec: QuadratureSpec { rel_tol: 1e-3, abs_tol: 1e-300, max_subdivisions: 400 } }
    }
}

/// Geometry of the primary link in the typical-secondary frame.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Frame {
    pub pp: PrimaryPlacement,
    pub y: Point,
}

impl Frame {
    pub fn new(sc: &Scenario, pp: PrimaryPlacement) -> Frame {
        Frame { pp, y: pp.rx(sc.r_p) }
    }

    /// `(z, β)` for a point; `β` defaults to `0` at `Y_p` itself.
    pub fn relative(&self, x: Point) -> (f64, f64) {
        let d = x - self.y;
        let beta = if d.x == 0.0 && d.y == 0.0 { 0.0 } else { d.y.atan2(d.x) };
        (d.norm(), beta)
    }

    /// Receive gain of the primary receiver for a source at bearing `β`.
    pub fn pr_gain(&self, sc: &Scenario, beta: f64) -> f64 {
        sc.patterns.pr.gain_at(beta - self.pp.omega_p.radians() - PI)
    }
}

/// `A₀ = p_s g_sr(0) g_st(0) r_s^{−α}`.
pub fn serving_power(sc: &Scenario) -> f64 {
    sc.p_s * sc.secondary_link_gain() * sc.r_s.powf(-sc.alpha)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain { what: "SINR threshold", value: tau });
    }
    Ok(())
}

/// MAP of the typical secondary transmitter (term 2).
pub fn typical_map(sc: &Scenario, pp: &PrimaryPlacement) -> f64 {
    let f = Frame::new(sc, *pp);
    let (z, beta) = f.relative(Point::new(sc.r_s, 0.0));
    // Boresight π: the offset towards Y_p is (β + π) − π.
    let g = sc.patterns.st.gain_at(beta) * f.pr_gain(sc, beta);
    map_from_gain(sc.rho, sc.p_s, z, sc.alpha, g)
}

/// `A₂ = p_p g_pt(δ_p + π − ω_p) g_sr(δ_p) x_p^{−α}`.
pub fn primary_interference_power(sc: &Scenario, pp: &PrimaryPlacement) -> f64 {
    let (d, w) = (pp.delta_p.radians(), pp.omega_p.radians());
    let g = sc.patterns.pt.gain_at(d + PI - w) * sc.patterns.sr.gain_at(d);
    if g == 0.0 {
        return 0.0;
    }
    sc.p_p * g * pp.x_p.powf(-sc.alpha)
}

/// All four factors at a fixed placement.
pub fn secondary_terms(tau: f64, sc: &Scenario, pp: &PrimaryPlacement, method: Term4Method) -> Result<SecondaryCoverageTerms> {
    check_tau(tau)?;
    sc.validate()?;
    let a0 = serving_power(sc);
    if a0 == 0.0 {
        return Ok(SecondaryCoverageTerms { term1: 0.0, term2: 0.0, term3: 0.0, term4: 0.0 });
    }
    let term1 = if sc.noise == 0.0 { 1.0 } else { (-tau * sc.noise / a0).exp() };
    let term2 = typical_map(sc, pp);
    let a2 = primary_interference_power(sc, pp);
    let term3 = if a2.is_infinite() { 0.0 } else { 1.0 / (1.0 + tau * a2 / a0) };
    let term4 = if sc.lambda_s == 0.0 { 0.0 } else { term4_at(tau, sc, pp, method)? };
    Ok(SecondaryCoverageTerms { term1, term2, term3, term4 })
}

/// Secondary coverage at the scenario's fixed placement, with the
/// interference integral from nested quadrature.
pub fn coverage_secondary(tau: f64, sc: &Scenario) -> Result<f64> {
    let pp = sc.fixed_placement()?;
    Ok(secondary_terms(tau, sc, &pp, Term4Method::exact())?.coverage(sc.lambda_s))
}

/// Secondary-interference integral by the selected method.
pub fn term4_at(tau: f64, sc: &Scenario, pp: &PrimaryPlacement, method: Term4Method) -> Result<f64> {
    check_tau(tau)?;
    match method {
        Term4Method::Exact(spec) => term4_quadrature(tau, sc, pp, &spec, false),
        Term4Method::Sectorized(spec) => term4_quadrature(tau, sc, pp, &spec, true),
        Term4Method::NearPrimary => term4_near_at(tau, sc, pp),
        Term4Method::FarPrimary => term4_far_at(tau, sc, pp),
        Term4Method::Hybrid { far_distance, spec } => {
            if pp.rx(sc.r_p).norm() >= far_distance {
                term4_far_at(tau, sc, pp)
            } else {
                term4_quadrature(tau, sc, pp, &spec, false)
            }
        }
    }
}

pub fn term4_exact(tau: f64, sc: &Scenario) -> Result<f64> {
    term4_at(tau, sc, &sc.fixed_placement()?, Term4Method::exact())
}

pub fn term4_sectorized(tau: f64, sc: &Scenario) -> Result<f64> {
    term4_at(tau, sc, &sc.fixed_placement()?, Term4Method::sectorized())
}

pub fn term4_near_primary(tau: f64, sc: &Scenario) -> Result<f64> {
    term4_at(tau, sc, &sc.fixed_placement()?, Term4Method::NearPrimary)
}

pub fn term4_far_primary(tau: f64, sc: &Scenario) -> Result<f64> {
    term4_at(tau, sc, &sc.fixed_placement()?, Term4Method::FarPrimary)
}

/// `E_ω[h(g_st(ψ_Y − ω), g_st(ψ_O − ω))]` for `ω ~ U[0, 2π)`.
///
/// Two-level patterns are split at the lobe edges and each constant piece is
/// evaluated once; tabulated patterns use the periodic rule.
fn omega_expectation<H: FnMut(f64, f64) -> f64>(st: &BeamPattern, psi_y: f64, psi_o: f64, mut h: H) -> f64 {
    match st.two_level() {
        Some((a, b, phi)) if a == b || phi >= TAU => h(a, a),
        Some((_, _, phi)) => {
            let half = 0.5 * phi;
            let mut pts = [
                normalize(psi_y - half),
                normalize(psi_y + half),
                normalize(psi_o - half),
                normalize(psi_o + half),
            ];
            pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
            let mut acc = 0.0;
            for i in 0..4 {
                let lo = pts[i];
                let hi = if i == 3 { pts[0] + TAU } else { pts[i + 1] };
                let width = hi - lo;
                if width <= 0.0 {
                    continue;
                }
                let mid = 0.5 * (lo + hi);
                acc += width * h(st.gain_at(psi_y - mid), st.gain_at(psi_o - mid));
            }
            acc / TAU
        }
        None => periodic_mean(|w| h(st.gain_at(psi_y - w), st.gain_at(psi_o - w)), PERIODIC_NODES),
    }
}

/// Probabilities over `ω` of the transmit-gain pairs (main, main),
/// (main, side), (side, main), (side, side), towards `Y_p` and the typical
/// receiver respectively, for lobe centers `ψ_Y`, `ψ_O` and beamwidth `φ`.
pub fn arc_weights(psi_y: f64, psi_o: f64, phi: f64) -> [f64; 4] {
    if phi >= TAU {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let d = normalize(psi_y - psi_o).abs();
    let overlap = ((phi - d).max(0.0) + (phi - (TAU - d)).max(0.0)).clamp(0.0, phi);
    let q1 = overlap / TAU;
    let q2 = (phi - overlap) / TAU;
    [q1, q2, q2, (1.0 - q1 - 2.0 * q2).max(0.0)]
}

/// Gain combinations of the sectorized mixture at one interferer position.
pub fn gain_combinations(sc: &Scenario, pp: &PrimaryPlacement, x: f64, theta: f64) -> Result<[GainCombination; 4]> {
    let (a_st, b_st, phi_st) = sc.patterns.st.two_level().ok_or(Error::PatternMismatch("secondary transmitter must be sectorized"))?;
    let f = Frame::new(sc, *pp);
    let (_, beta) = f.relative(Point::new(x * theta.cos(), x * theta.sin()));
    let q = arc_weights(beta + PI, theta + PI, phi_st);
    let c = f.pr_gain(sc, beta);
    let d = sc.patterns.sr.gain_at(theta);
    let pairs = [(a_st, a_st), (a_st, b_st), (b_st, a_st), (b_st, b_st)];
    let mut out = [GainCombination { a: 0.0, b: 0.0, c, d, weight: 0.0 }; 4];
    for i in 0..4 {
        out[i] = GainCombination { a: pairs[i].0, b: pairs[i].1, c, d, weight: q[i] };
    }
    Ok(out)
}

/// Points on the ray `x∠θ` where it crosses the edges of the primary
/// receiver's main lobe, and where it passes closest to `Y_p`.
fn ray_breaks(sc: &Scenario, f: &Frame, theta: f64, out: &mut Vec<f64>) {
    out.clear();
    let (s, c) = theta.sin_cos();
    let along = f.y.x * c + f.y.y * s;
    if along > 0.0 {
        out.push(along);
    }
    if let Some((a, b, phi)) = sc.patterns.pr.two_level() {
        if a != b && phi < TAU {
            let axis = f.pp.omega_p.radians() + PI;
            for edge in [axis - 0.5 * phi, axis + 0.5 * phi] {
                let (se, ce) = edge.sin_cos();
                let det = (theta - edge).sin();
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = (-f.y.x * se + f.y.y * ce) / det;
                let t = (c * f.y.y - s * f.y.x) / det;
                if x > 0.0 && t > 0.0 && x.is_finite() {
                    out.push(x);
                }
            }
        }
    }
}

/// Integral over `θ ∈ [−π, π)` split at the typical receiver's lobe edges.
fn theta_integral<F: FnMut(f64) -> f64>(sr: &BeamPattern, mut f: F, spec: &QuadratureSpec) -> Result<f64> {
    match sr.discontinuities() {
        Some(mut b) => {
            b.insert(0, -PI);
            b.push(PI);
            Ok(integrate_panels(&mut f, &b, spec)?.value)
        }
        None => Ok(TAU * periodic_mean(f, PERIODIC_NODES)),
    }
}

fn term4_quadrature(tau: f64, sc: &Scenario, pp: &PrimaryPlacement, spec: &QuadratureSpec, mixture: bool) -> Result<f64> {
    sc.validate()?;
    if sc.rho == 0.0 {
        return Ok(0.0);
    }
    let st = &sc.patterns.st;
    let st_two = st.two_level();
    if mixture && (st_two.is_none() || sc.patterns.sr.two_level().is_none() || sc.patterns.pr.two_level().is_none()) {
        return Err(Error::PatternMismatch("sectorized mixture needs two-level pr, st and sr patterns"));
    }
    let link = sc.secondary_link_gain();
    if link == 0.0 {
        return Err(Error::Undefined("secondary link has zero boresight gain"));
    }
    let alpha = sc.alpha;
    let k_scale = tau * sc.r_s.powf(alpha) / link;
    let st_max = match st_two {
        Some((a, b, _)) => a.max(b),
        None => st.gain_law().atoms.iter().fold(0.0f64, |m, &(g, _)| m.max(g)),
    };
    let f = Frame::new(sc, *pp);
    let inner_spec = QuadratureSpec { rel_tol: spec.rel_tol * 0.1, ..*spec };
    let mut failure: Option<Error> = None;
    let mut breaks = Vec::with_capacity(4);
    let value = theta_integral(
        &sc.patterns.sr,
        |theta| {
            let g_sr = sc.patterns.sr.gain_at(theta);
            if g_sr == 0.0 || st_max == 0.0 {
                return 0.0;
            }
            let (s, c) = theta.sin_cos();
            ray_breaks(sc, &f, theta, &mut breaks);
            let scale = (k_scale * g_sr * st_max).powf(1.0 / alpha);
            breaks.push(scale);
            let kernel = |x: f64| -> f64 {
                let (z, beta) = f.relative(Point::new(x * c, x * s));
                let g_pr = f.pr_gain(sc, beta);
                let xa = x.powf(alpha);
                let term = |g_to_y: f64, g_to_o: f64| {
                    let k = k_scale * g_to_o * g_sr;
                    if k == 0.0 {
                        return 0.0;
                    }
                    map_from_gain(sc.rho, sc.p_s, z, alpha, g_to_y * g_pr) * k / (k + xa)
                };
                if mixture {
                    let (a, b, phi) = st_two.unwrap();
                    let q = arc_weights(beta + PI, theta + PI, phi);
                    q[0] * term(a, a) + q[1] * term(a, b) + q[2] * term(b, a) + q[3] * term(b, b)
                } else {
                    omega_expectation(st, beta + PI, theta + PI, term)
                }
            };
            match integrate_radial(kernel, scale, &breaks, &inner_spec) {
                Ok(r) => r.value,
                Err(e) => {
                    let v = e.best_estimate().unwrap_or(0.0);
                    failure = Some(e);
                    v
                }
            }
        },
        spec,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(value)
}

/// Near-primary form: with `z ≈ x` and equal transmit gains towards both
/// receivers,
/// `I ≈ (1/α) Γ(s) ∫ [Γ(1−s) − e^{k} Γ(1−s, k)] E_ω[C_s^{−s}] dθ`,
/// `s = 2/α`, `k = A_s/C_s = ρτ g_sr(θ) / (A₀ g_pr(θ − ω_p − π))`.
fn term4_near_at(tau: f64, sc: &Scenario, pp: &PrimaryPlacement) -> Result<f64> {
    sc.validate()?;
    if sc.rho == 0.0 {
        return Ok(0.0);
    }
    let a0 = serving_power(sc);
    if a0 == 0.0 {
        return Err(Error::Undefined("secondary link has zero boresight gain"));
    }
    let s = 2.0 / sc.alpha;
    let g1 = gamma(1.0 - s);
    let st_moment = sc.patterns.st.expected_gain_power(s);
    let omega_p = pp.omega_p.radians();
    let mut failure = None;
    let spec = QuadratureSpec { rel_tol: 1e-10, abs_tol: 1e-300, max_subdivisions: 400 };
    let mut breaks = sc.patterns.sr.discontinuities().unwrap_or_default();
    if let Some(d) = sc.patterns.pr.discontinuities() {
        breaks.extend(d.iter().map(|e| normalize(e + omega_p + PI)));
    }
    breaks.push(-PI);
    breaks.push(PI);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let integrand = |theta: f64| -> f64 {
        let g_sr = sc.patterns.sr.gain_at(theta);
        if g_sr == 0.0 {
            return 0.0;
        }
        let g_pr = sc.patterns.pr.gain_at(theta - omega_p - PI);
        let bracket = if g_pr == 0.0 {
            g1
        } else {
            let k = sc.rho * tau * g_sr / (a0 * g_pr);
            match upper_incomplete_gamma_scaled(1.0 - s, k) {
                Ok(v) => g1 - v,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        };
        bracket * (tau * sc.p_s * g_sr / a0).powf(s) * st_moment
    };
    let v = if sc.patterns.sr.discontinuities().is_none() || sc.patterns.pr.discontinuities().is_none() {
        TAU * periodic_mean(integrand, PERIODIC_NODES)
    } else {
        integrate_panels(integrand, &breaks, &spec)?.value
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(gamma(s) / sc.alpha * v)
}

/// Far-primary form: with `z ≈ y_p` and `β ≈ ∠(−Y_p)`,
/// `I ≈ (1/α) Γ(s) Γ(1−s) ∫ E_ω[(1 − e^{−A_s y_p^α}) C_s^{−s}] dθ`.
fn term4_far_at(tau: f64, sc: &Scenario, pp: &PrimaryPlacement) -> Result<f64> {
    term4_far_with(tau, sc, pp, true)
}

fn term4_far_with(tau: f64, sc: &Scenario, pp: &PrimaryPlacement, panels: bool) -> Result<f64> {
    sc.validate()?;
    if sc.rho == 0.0 {
        return Ok(0.0);
    }
    let a0 = serving_power(sc);
    if a0 == 0.0 {
        return Err(Error::Undefined("secondary link has zero boresight gain"));
    }
    let s = 2.0 / sc.alpha;
    let f = Frame::new(sc, *pp);
    let y_p = f.y.norm();
    let beta = (-f.y.y).atan2(-f.y.x);
    let g_pr = f.pr_gain(sc, beta);
    let spec = QuadratureSpec { rel_tol: 1e-10, abs_tol: 1e-300, max_subdivisions: 400 };
    let integrand = |theta: f64| -> f64 {
        let g_sr = sc.patterns.sr.gain_at(theta);
        if g_sr == 0.0 {
            return 0.0;
        }
        omega_expectation(&sc.patterns.st, beta + PI, theta + PI, |g_to_y, g_to_o| {
            let c_inv_s = pow_gain(tau * sc.p_s * g_to_o * g_sr / a0, s);
            if c_inv_s == 0.0 {
                return 0.0;
            }
            map_from_gain(sc.rho, sc.p_s, y_p, sc.alpha, g_to_y * g_pr) * c_inv_s
        })
    };
    let v = match (sc.patterns.st.two_level(), sc.patterns.sr.discontinuities()) {
        (Some((_, _, phi)), Some(sr_breaks)) if panels => piecewise_linear_integral(integrand, beta, phi, &sr_breaks),
        _ => theta_integral(&sc.patterns.sr, integrand, &spec)?,
    };
    Ok(gamma(s) * gamma(1.0 - s) / sc.alpha * v)
}

// With two-level st and sr the far integrand is linear in θ between the
// sr lobe edges and the points where the ω-arcs towards Y_p and the origin
// start or stop overlapping, so the midpoint rule is exact on each panel.
fn piecewise_linear_integral<F: FnMut(f64) -> f64>(mut f: F, beta: f64, phi: f64, sr_breaks: &[f64]) -> f64 {
    let mut pts: Vec<f64> = sr_breaks.to_vec();
    for off in [0.0, PI, phi, -phi] {
        pts.push(normalize(beta + off));
    }
    pts.push(-PI);
    pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    pts.push(PI);
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let width = w[1] - w[0];
        if width > 0.0 {
            acc += width * f(0.5 * (w[0] + w[1]));
        }
    }
    acc
}

/// Placement-averaged secondary coverage for a randomized primary link.
///
/// Placement `i` is drawn from stream `i` of `seed`, so the result does not
/// depend on evaluation order.
pub fn coverage_secondary_averaged(
    tau: f64,
    sc: &Scenario,
    n_placements: usize,
    seed: u64,
    method: Term4Method,
) -> Result<EstimateWithCI> {
    let law = match sc.placement {
        Placement::Random(r) => r,
        Placement::Fixed(_) => return Err(Error::Undefined("averaging needs a random placement")),
    };
    if n_placements == 0 {
        return Err(Error::InvalidParameter { name: "n_placements", reason: "must be at least 1" });
    }
    let mut values = Vec::with_capacity(n_placements);
    for i in 0..n_placements {
        values.push(averaged_sample(tau, sc, &law, seed, i as u64, method)?);
    }
    Ok(EstimateWithCI::from_samples(&values))
}

/// Placements whose interference-free bound is below this contribute zero.
pub const NEGLIGIBLE_COVERAGE: f64 = 1e-9;

/// Coverage at placement `index` of the averaging sequence.
pub fn averaged_sample(
    tau: f64,
    sc: &Scenario,
    law: &RandomPlacement,
    seed: u64,
    index: u64,
    method: Term4Method,
) -> Result<f64> {
    let pp = sample_placement(law, seed, index);
    let bound = interference_free_bound(tau, sc, &pp)?;
    if bound < NEGLIGIBLE_COVERAGE {
        return Ok(0.0);
    }
    Ok(secondary_terms(tau, sc, &pp, method)?.coverage(sc.lambda_s))
}

/// Whether the placement average reaches `target`, evaluating as few
/// placements as needed.
///
/// Each placement's coverage lies between 0 and its interference-free bound,
/// so cheap placements are resolved first and the expensive ones only while
/// the decision is still open. Agrees with comparing
/// [`coverage_secondary_averaged`] against `target`.
pub fn averaged_meets(
    tau: f64,
    sc: &Scenario,
    n_placements: usize,
    seed: u64,
    method: Term4Method,
    target: f64,
) -> Result<bool> {
    let law = match sc.placement {
        Placement::Random(r) => r,
        Placement::Fixed(_) => return Err(Error::Undefined("averaging needs a random placement")),
    };
    if n_placements == 0 {
        return Err(Error::InvalidParameter { name: "n_placements", reason: "must be at least 1" });
    }
    let n = n_placements as f64;
    let mut bounds = Vec::with_capacity(n_placements);
    let mut slow = Vec::new();
    let mut fast = Vec::new();
    for i in 0..n_placements {
        let pp = sample_placement(&law, seed, i as u64);
        let b = interference_free_bound(tau, sc, &pp)?;
        bounds.push(b);
        if b < NEGLIGIBLE_COVERAGE {
            continue;
        }
        let is_slow = match method {
            Term4Method::Exact(_) | Term4Method::Sectorized(_) => true,
            Term4Method::Hybrid { far_distance, .. } => pp.rx(sc.r_p).norm() < far_distance,
            _ => false,
        };
        if is_slow { slow.push(i) } else { fast.push(i) }
    }
    let mut values: Vec<Option<f64>> = alloc::vec![None; n_placements];
    let mut done = 0.0;
    let mut open: f64 = bounds.iter().filter(|&&b| b >= NEGLIGIBLE_COVERAGE).sum();
    // Margin for summation order against the full evaluation.
    let slack = 1e-12;
    for &i in fast.iter().chain(slow.iter()) {
        if done / n >= target + slack || (done + open) / n < target - slack {
            return Ok(done / n >= target);
        }
        let pp = sample_placement(&law, seed, i as u64);
        let v = if sc.lambda_s == 0.0 {
            bounds[i]
        } else {
            secondary_terms(tau, sc, &pp, method)?.coverage(sc.lambda_s)
        };
        values[i] = Some(v);
        done += v;
        open -= bounds[i];
    }
    let all: Vec<f64> = values.into_iter().map(|v| v.unwrap_or(0.0)).collect();
    Ok(EstimateWithCI::from_samples(&all).mean >= target)
}

/// `term1 · term2 · term3`, an upper bound on the coverage.
pub fn interference_free_bound(tau: f64, sc: &Scenario, pp: &PrimaryPlacement) -> Result<f64> {
    let lean = Scenario { lambda_s: 0.0, ..sc.clone() };
    Ok(secondary_terms(tau, &lean, pp, Term4Method::FarPrimary)?.interference_free())
}

/// Mean of the interference-free bound over the averaging sequence.
pub fn averaged_bound(tau: f64, sc: &Scenario, n_placements: usize, seed: u64) -> Result<f64> {
    let law = match sc.placement {
        Placement::Random(r) => r,
        Placement::Fixed(pp) => return interference_free_bound(tau, sc, &pp),
    };
    let mut acc = 0.0;
    for i in 0..n_placements {
        acc += interference_free_bound(tau, sc, &sample_placement(&law, seed, i as u64))?;
    }
    Ok(acc / n_placements.max(1) as f64)
}

/// Placement number `index` of the averaging sequence for `seed`.
pub fn sample_placement(law: &RandomPlacement, seed: u64, index: u64) -> PrimaryPlacement {
    let mut rng: ChaCha8Rng = RngStream::new(seed, index).rng();
    law.sample(&mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antenna::DevicePatterns;
    use crate::geometry::Angle;
    use crate::scenario::default_scenario;

    #[test]
    fn far_panels_match_adaptive_quadrature() {
        for (m_p, m_s) in [(1, 1), (1, 4), (4, 2), (8, 8)] {
            let sc = default_scenario()
                .with_patterns(DevicePatterns::ula(m_p, m_s, 121f64.to_radians()).unwrap())
                .with_rho(3e-12);
            for (x, d, w) in [(900.0, 0.3, -2.0), (1500.0, 2.9, 0.1), (400.0, -1.2, 3.0)] {
                let pp = PrimaryPlacement::new(x, Angle::new(d), Angle::new(w)).unwrap();
                let a = term4_far_with(1.0, &sc, &pp, true).unwrap();
                let b = term4_far_with(1.0, &sc, &pp, false).unwrap();
                assert!((a - b).abs() <= 1e-8 * b.abs(), "{m_p} {m_s} {a} {b}");
            }
        }
    }

    #[test]
    fn early_decision_agrees_with_full_average() {
        use crate::geometry::PlacementLaw;
        let law = RandomPlacement::new(1500.0, PlacementLaw::UniformDisk).unwrap();
        let sc = default_scenario()
            .with_patterns(DevicePatterns::ula(4, 4, 121f64.to_radians()).unwrap())
            .with_placement(Placement::Random(law))
            .with_rho(5e-12);
        let m = Term4Method::averaging(&sc);
        let full = coverage_secondary_averaged(1.0, &sc, 300, 3, m).unwrap().mean;
        for target in [0.0, full * 0.5, full - 1e-6, full + 1e-6, full * 1.5, 1.0] {
            assert_eq!(averaged_meets(1.0, &sc, 300, 3, m, target).unwrap(), full >= target, "{target} {full}");
        }
    }
}
