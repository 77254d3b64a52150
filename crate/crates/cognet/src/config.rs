//! TOML configuration files.
//!
//! Units at this boundary are dBm, dB and degrees where the key says so;
//! everything is converted to SI before it reaches the core crate. Schema
//! problems are collected rather than reported one at a time.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use cognet_core::antenna::{BeamPattern, DevicePatterns, UlaSpec, DEFAULT_KAPPA_DEG};
use cognet_core::geometry::{Angle, Placement, PlacementLaw, PrimaryPlacement, RandomPlacement};
use cognet_core::planner::QoSConstraint;
use cognet_core::scenario::{db_to_linear, dbm_to_watts, default_scenario, preset_type, NoiseDerivation, Scenario};
use toml::Value;

/// Every schema violation found in one file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub realizations: usize,
    /// Region radius for simulation runs; the analytic side keeps `R`.
    pub radius: Option<f64>,
    pub map_draws: usize,
    pub placements: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { realizations: 10_000, radius: Some(1000.0), map_draws: 1_000_000, placements: 10_000, seed: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Rho,
    Tau,
    Mp,
    Ms,
    Radius,
    LambdaS,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Rho => "rho",
            SweepVariable::Tau => "tau",
            SweepVariable::Mp => "M_p",
            SweepVariable::Ms => "M_s",
            SweepVariable::Radius => "R",
            SweepVariable::LambdaS => "lambda_s",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub scale: GridScale,
    /// Bounds in SI units, except `tau`, which is in dB.
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub outputs: Vec<String>,
    /// SINR threshold used when `τ` is not the swept variable.
    pub tau_db: f64,
    /// Element counts for the per-`M` commands.
    pub m_values: Vec<u32>,
    pub kappa_deg: f64,
    /// Map-field grid: points per axis, half-width in meters, orientations.
    pub resolution: usize,
    pub extent: f64,
    pub omega_deg: Vec<f64>,
    pub qos: QoSConstraint,
}

impl SweepSpec {
    /// Grid values; `τ` values stay in dB.
    pub fn values(&self) -> Vec<f64> {
        let n = self.count.max(2);
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.scale {
                    GridScale::Linear => self.min + (self.max - self.min) * t,
                    GridScale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            variable: SweepVariable::Rho,
            scale: GridScale::Log,
            min: 1e-15,
            max: 1e-3,
            count: 49,
            outputs: vec!["p_cp".into(), "p_cs".into(), "p_c".into()],
            tau_db: 0.0,
            m_values: vec![1, 2, 4, 8],
            kappa_deg: DEFAULT_KAPPA_DEG,
            resolution: 64,
            extent: 200.0,
            omega_deg: vec![0.0],
            qos: QoSConstraint { p_star: 0.7, s_star: 0.5, tau_star: 1.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub scenario: Scenario,
    pub mc: McConfig,
    pub sweep: SweepSpec,
    /// Non-fatal remarks, such as sectorized patterns that do not conserve
    /// transmit power.
    pub warnings: Vec<String>,
}

impl Default for Config {
    fn default() -> Self {
        Config { scenario: default_scenario(), mc: McConfig::default(), sweep: SweepSpec::default(), warnings: Vec::new() }
    }
}

/// Reads and validates a configuration file.
pub fn load(path: &Path) -> Result<Config, ConfigErrors> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigErrors(vec![format!("{}: {e}", path.display())]))?;
    parse(&text)
}

/// A table being read, with the keys consumed so far.
struct Section<'a> {
    path: String,
    table: Option<&'a toml::Table>,
    seen: BTreeSet<&'static str>,
}

impl<'a> Section<'a> {
    fn new(path: &str, v: Option<&'a Value>, errors: &mut Vec<String>) -> Section<'a> {
        let table = match v {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                errors.push(format!("[{path}] must be a table"));
                None
            }
        };
        Section { path: path.into(), table, seen: BTreeSet::new() }
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.seen.insert(key);
        self.table.and_then(|t| t.get(key))
    }

    fn has(&self, key: &str) -> bool {
        self.table.is_some_and(|t| t.contains_key(key))
    }

    fn f64(&mut self, key: &'static str, errors: &mut Vec<String>) -> Option<f64> {
        match self.raw(key)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                errors.push(format!("{}.{key}: expected a number", self.path));
                None
            }
        }
    }

    fn uint(&mut self, key: &'static str, errors: &mut Vec<String>) -> Option<u64> {
        match self.raw(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            _ => {
                errors.push(format!("{}.{key}: expected a nonnegative integer", self.path));
                None
            }
        }
    }

    fn string(&mut self, key: &'static str, errors: &mut Vec<String>) -> Option<&'a str> {
        match self.raw(key)? {
            Value::String(s) => Some(s.as_str()),
            _ => {
                errors.push(format!("{}.{key}: expected a string", self.path));
                None
            }
        }
    }

    fn f64_list(&mut self, key: &'static str, errors: &mut Vec<String>) -> Option<Vec<f64>> {
        let v = self.raw(key)?;
        let list = v.as_array().and_then(|a| {
            a.iter()
                .map(|x| match x {
                    Value::Float(f) => Some(*f),
                    Value::Integer(i) => Some(*i as f64),
                    _ => None,
                })
                .collect::<Option<Vec<f64>>>()
        });
        if list.is_none() {
            errors.push(format!("{}.{key}: expected an array of numbers", self.path));
        }
        list
    }

    fn finish(self, errors: &mut Vec<String>) {
        if let Some(t) = self.table {
            for k in t.keys() {
                if !self.seen.contains(k.as_str()) {
                    errors.push(format!("{}.{k}: unknown key", self.path));
                }
            }
        }
    }
}

fn positive(path: &str, key: &str, v: f64, errors: &mut Vec<String>) -> bool {
    if v > 0.0 && v.is_finite() {
        true
    } else {
        errors.push(format!("{path}.{key}: must be positive, got {v}"));
        false
    }
}

/// Parses configuration text.
pub fn parse(text: &str) -> Result<Config, ConfigErrors> {
    let root: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigErrors(vec![e.to_string()]))?;
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let mut cfg = Config::default();

    for k in root.keys() {
        if !["scenario", "antenna", "placement", "mc", "sweep"].contains(&k.as_str()) {
            errors.push(format!("[{k}]: unknown section"));
        }
    }

    read_scenario(root.get("scenario"), &mut cfg.scenario, &mut errors);
    read_antennas(root.get("antenna"), &mut cfg.scenario.patterns, &mut errors, &mut warnings);
    read_placement(root.get("placement"), &mut cfg.scenario.placement, &mut errors);
    read_mc(root.get("mc"), &mut cfg.mc, &mut errors);
    read_sweep(root.get("sweep"), &mut cfg.sweep, &mut errors);

    if errors.is_empty() {
        if let Err(e) = cfg.scenario.validate() {
            errors.push(format!("scenario: {e}"));
        }
    }
    if errors.is_empty() {
        cfg.warnings = warnings;
        Ok(cfg)
    } else {
        Err(ConfigErrors(errors))
    }
}

fn read_scenario(v: Option<&Value>, sc: &mut Scenario, errors: &mut Vec<String>) {
    let mut s = Section::new("scenario", v, errors);
    let p = "scenario";
    if let Some(a) = s.f64("alpha", errors) {
        if a > 2.0 {
            sc.alpha = a;
        } else {
            errors.push(format!("{p}.alpha: must exceed 2, got {a}"));
        }
    }
    if s.has("rho_w") && s.has("rho_dbm") {
        errors.push(format!("{p}: give rho_w or rho_dbm, not both"));
    }
    if let Some(r) = s.f64("rho_w", errors) {
        if r >= 0.0 {
            sc.rho = r;
        } else {
            errors.push(format!("{p}.rho_w: must be nonnegative, got {r}"));
        }
    }
    if let Some(r) = s.f64("rho_dbm", errors) {
        sc.rho = dbm_to_watts(r);
    }
    if let Some(x) = s.f64("p_p_dbm", errors) {
        sc.p_p = dbm_to_watts(x);
    }
    if let Some(x) = s.f64("p_s_dbm", errors) {
        sc.p_s = dbm_to_watts(x);
    }
    if let Some(x) = s.f64("lambda_s", errors) {
        if x >= 0.0 {
            sc.lambda_s = x;
        } else {
            errors.push(format!("{p}.lambda_s: must be nonnegative, got {x}"));
        }
    }
    for (key, slot) in [("r_p", &mut sc.r_p), ("r_s", &mut sc.r_s), ("radius", &mut sc.radius)] {
        if let Some(x) = s.f64(key, errors) {
            if positive(p, key, x, errors) {
                *slot = x;
            }
        }
    }
    let mut nd = NoiseDerivation::default();
    let mut derived = false;
    if let Some(x) = s.f64("bandwidth_hz", errors) {
        derived |= positive(p, "bandwidth_hz", x, errors);
        nd.bandwidth_hz = x;
    }
    if let Some(x) = s.f64("near_field_gain", errors) {
        derived |= positive(p, "near_field_gain", x, errors);
        nd.near_field_gain = x;
    }
    if let Some(x) = s.f64("thermal_dbm_per_hz", errors) {
        derived = true;
        nd.thermal_dbm_per_hz = x;
    }
    if derived {
        sc.noise = nd.normalized_noise();
    }
    if let Some(x) = s.f64("noise", errors) {
        if derived {
            errors.push(format!("{p}.noise: conflicts with the noise derivation keys"));
        } else if x >= 0.0 {
            sc.noise = x;
        } else {
            errors.push(format!("{p}.noise: must be nonnegative, got {x}"));
        }
    }
    s.finish(errors);
}

fn read_pattern(path: &str, v: &Value, errors: &mut Vec<String>, warnings: &mut Vec<String>) -> Option<BeamPattern> {
    let mut s = Section::new(path, Some(v), errors);
    let kind = s.string("type", errors);
    let m = s.uint("M", errors);
    let kappa = s.f64("kappa_deg", errors);
    let a = s.f64("a", errors);
    let b = s.f64("b", errors);
    let phi = s.f64("phi_deg", errors);
    let unused = |s: &Section, keys: &[&str], errors: &mut Vec<String>| {
        for k in keys {
            if s.has(k) {
                errors.push(format!("{path}.{k}: not used by this antenna type"));
            }
        }
    };
    let out = match kind {
        None => {
            errors.push(format!("{path}.type: missing (omni, sectorized, ideal or ula)"));
            None
        }
        Some("omni") => {
            unused(&s, &["M", "kappa_deg", "a", "b", "phi_deg"], errors);
            Some(BeamPattern::Omni)
        }
        Some("ula") => {
            unused(&s, &["a", "b", "phi_deg"], errors);
            match m {
                None => {
                    errors.push(format!("{path}.M: required for ula"));
                    None
                }
                Some(m) => {
                    let spec = UlaSpec { elements: m as u32, kappa: kappa.unwrap_or(DEFAULT_KAPPA_DEG).to_radians() };
                    match BeamPattern::ula_or_omni(spec.elements, spec.kappa) {
                        Ok(p) => Some(p),
                        Err(e) => {
                            errors.push(format!("{path}: {e}"));
                            None
                        }
                    }
                }
            }
        }
        Some(k @ ("sectorized" | "ideal")) => {
            unused(&s, &["M", "kappa_deg"], errors);
            if k == "ideal" {
                unused(&s, &["b"], errors);
            }
            let main = a.or_else(|| {
                errors.push(format!("{path}.a: required for {k}"));
                None
            });
            let width = phi.or_else(|| {
                errors.push(format!("{path}.phi_deg: required for {k}"));
                None
            });
            let side = if k == "sectorized" {
                b.or_else(|| {
                    errors.push(format!("{path}.b: required for sectorized"));
                    None
                })
            } else {
                Some(0.0)
            };
            match (main, side, width) {
                (Some(a), Some(b), Some(w)) => {
                    let made = if k == "ideal" {
                        BeamPattern::ideal(a, w.to_radians())
                    } else {
                        BeamPattern::sectorized(a, b, w.to_radians())
                    };
                    match made {
                        Ok(p) => {
                            if let Some(d) = p.normalization_defect() {
                                if d.abs() > 1e-9 {
                                    warnings.push(format!("{path}: a·q + b·(1−q) = {:.6}, transmit power is not conserved", 1.0 + d));
                                }
                            }
                            Some(p)
                        }
                        Err(e) => {
                            errors.push(format!("{path}: {e}"));
                            None
                        }
                    }
                }
                _ => None,
            }
        }
        Some(other) => {
            errors.push(format!("{path}.type: unknown antenna type `{other}`"));
            None
        }
    };
    s.finish(errors);
    out
}

fn read_antennas(v: Option<&Value>, patterns: &mut DevicePatterns, errors: &mut Vec<String>, warnings: &mut Vec<String>) {
    let Some(v) = v else { return };
    let Some(t) = v.as_table() else {
        errors.push("[antenna] must be a table".into());
        return;
    };
    for (k, dev) in t {
        let slot = match k.as_str() {
            "pt" => &mut patterns.pt,
            "pr" => &mut patterns.pr,
            "st" => &mut patterns.st,
            "sr" => &mut patterns.sr,
            _ => {
                errors.push(format!("antenna.{k}: unknown device (pt, pr, st or sr)"));
                continue;
            }
        };
        if let Some(p) = read_pattern(&format!("antenna.{k}"), dev, errors, warnings) {
            *slot = p;
        }
    }
}

fn read_placement(v: Option<&Value>, placement: &mut Placement, errors: &mut Vec<String>) {
    let mut s = Section::new("placement", v, errors);
    let p = "placement";
    let preset = s.uint("type", errors);
    let x_p = s.f64("x_p", errors);
    let delta = s.f64("delta_p_deg", errors);
    let omega = s.f64("omega_p_deg", errors);
    let radius = s.f64("radius", errors);
    let law = s.string("law", errors);
    let fixed_keys = x_p.is_some() || delta.is_some() || omega.is_some();
    match preset {
        Some(n) => {
            if fixed_keys {
                errors.push(format!("{p}: give a preset type or x_p/delta_p_deg/omega_p_deg, not both"));
            }
            match preset_type(n.min(255) as u8) {
                Ok(pl) => *placement = pl,
                Err(_) => errors.push(format!("{p}.type: must be 1, 2, 3 or 4, got {n}")),
            }
        }
        None if fixed_keys => match (x_p, delta, omega) {
            (Some(x), Some(d), Some(w)) => {
                match PrimaryPlacement::new(x, Angle::from_degrees(d), Angle::from_degrees(w)) {
                    Ok(pp) => *placement = Placement::Fixed(pp),
                    Err(e) => errors.push(format!("{p}: {e}")),
                }
            }
            _ => errors.push(format!("{p}: x_p, delta_p_deg and omega_p_deg go together")),
        },
        None => {}
    }
    if radius.is_some() || law.is_some() {
        let Placement::Random(mut r) = *placement else {
            errors.push(format!("{p}: radius and law apply to the random placement (type = 4) only"));
            s.finish(errors);
            return;
        };
        if let Some(x) = radius {
            if positive(p, "radius", x, errors) {
                r.radius = x;
            }
        }
        match law {
            None => {}
            Some("disk") => r.law = PlacementLaw::UniformDisk,
            Some("table") => r.law = PlacementLaw::Tabulated,
            Some(other) => errors.push(format!("{p}.law: expected `disk` or `table`, got `{other}`")),
        }
        if let Ok(r) = RandomPlacement::new(r.radius, r.law) {
            *placement = Placement::Random(r);
        }
    }
    s.finish(errors);
}

fn read_mc(v: Option<&Value>, mc: &mut McConfig, errors: &mut Vec<String>) {
    let mut s = Section::new("mc", v, errors);
    for (key, slot) in [
        ("realizations", &mut mc.realizations),
        ("map_draws", &mut mc.map_draws),
        ("placements", &mut mc.placements),
    ] {
        if let Some(n) = s.uint(key, errors) {
            if n == 0 {
                errors.push(format!("mc.{key}: must be at least 1"));
            } else {
                *slot = n as usize;
            }
        }
    }
    if let Some(x) = s.f64("radius", errors) {
        if positive("mc", "radius", x, errors) {
            mc.radius = Some(x);
        }
    }
    if let Some(n) = s.uint("seed", errors) {
        mc.seed = n;
    }
    s.finish(errors);
}

fn read_sweep(v: Option<&Value>, sw: &mut SweepSpec, errors: &mut Vec<String>) {
    let mut s = Section::new("sweep", v, errors);
    let p = "sweep";
    if let Some(name) = s.string("variable", errors) {
        let var = match name {
            "rho" => Some(SweepVariable::Rho),
            "tau" => Some(SweepVariable::Tau),
            "M_p" => Some(SweepVariable::Mp),
            "M_s" => Some(SweepVariable::Ms),
            "R" => Some(SweepVariable::Radius),
            "lambda_s" => Some(SweepVariable::LambdaS),
            other => {
                errors.push(format!("{p}.variable: unknown variable `{other}`"));
                None
            }
        };
        if let Some(v) = var {
            sw.variable = v;
            // Defaults that suit the chosen variable.
            let (scale, min, max, count) = match v {
                SweepVariable::Rho => (GridScale::Log, 1e-15, 1e-3, 49),
                SweepVariable::Tau => (GridScale::Linear, -20.0, 20.0, 41),
                SweepVariable::Mp | SweepVariable::Ms => (GridScale::Log, 1.0, 64.0, 7),
                SweepVariable::Radius => (GridScale::Log, 100.0, 4000.0, 17),
                SweepVariable::LambdaS => (GridScale::Log, 1e-6, 1e-3, 13),
            };
            (sw.scale, sw.min, sw.max, sw.count) = (scale, min, max, count);
        }
    }
    match s.string("scale", errors) {
        None => {}
        Some("log") => sw.scale = GridScale::Log,
        Some("linear") => sw.scale = GridScale::Linear,
        Some(other) => errors.push(format!("{p}.scale: expected `log` or `linear`, got `{other}`")),
    }
    if let Some(x) = s.f64("min", errors) {
        sw.min = x;
    }
    if let Some(x) = s.f64("max", errors) {
        sw.max = x;
    }
    if let Some(n) = s.uint("count", errors) {
        sw.count = n as usize;
    }
    if sw.count < 2 {
        errors.push(format!("{p}.count: grid needs at least 2 points, got {}", sw.count));
    }
    if !(sw.min.is_finite() && sw.max.is_finite()) || sw.max < sw.min {
        errors.push(format!("{p}: need finite min ≤ max, got [{}, {}]", sw.min, sw.max));
    }
    if sw.scale == GridScale::Log && !(sw.min > 0.0) {
        errors.push(format!("{p}.min: log grids need positive bounds, got {}", sw.min));
    }
    if matches!(sw.variable, SweepVariable::Mp | SweepVariable::Ms) && !(sw.min >= 1.0) {
        errors.push(format!("{p}.min: element counts start at 1, got {}", sw.min));
    }
    if let Some(v) = s.raw("outputs") {
        const KNOWN: [&str; 6] = ["map-field", "af", "p_cp", "p_cs", "p_c", "rho-dagger"];
        match v.as_array() {
            Some(a) => {
                let mut out = Vec::new();
                for x in a {
                    match x.as_str() {
                        Some(name) if KNOWN.contains(&name) => out.push(name.to_string()),
                        Some(name) => errors.push(format!("{p}.outputs: unknown output `{name}`")),
                        None => errors.push(format!("{p}.outputs: expected strings")),
                    }
                }
                sw.outputs = out;
            }
            None => errors.push(format!("{p}.outputs: expected an array of strings")),
        }
    }
    if let Some(x) = s.f64("tau_db", errors) {
        sw.tau_db = x;
    }
    if let Some(list) = s.f64_list("m_values", errors) {
        if list.is_empty() || list.iter().any(|m| !(*m >= 1.0) || m.fract() != 0.0) {
            errors.push(format!("{p}.m_values: expected positive integers"));
        } else {
            sw.m_values = list.iter().map(|m| *m as u32).collect();
        }
    }
    if let Some(x) = s.f64("kappa_deg", errors) {
        if positive(p, "kappa_deg", x, errors) {
            sw.kappa_deg = x;
        }
    }
    if let Some(n) = s.uint("resolution", errors) {
        if n < 16 {
            errors.push(format!("{p}.resolution: must be at least 16, got {n}"));
        } else {
            sw.resolution = n as usize;
        }
    }
    if let Some(x) = s.f64("extent", errors) {
        if positive(p, "extent", x, errors) {
            sw.extent = x;
        }
    }
    if let Some(list) = s.f64_list("omega_deg", errors) {
        if list.is_empty() {
            errors.push(format!("{p}.omega_deg: needs at least one orientation"));
        } else {
            sw.omega_deg = list;
        }
    }
    let mut q = Section::new("sweep.qos", s.raw("qos"), errors);
    let p_star = q.f64("p_star", errors).unwrap_or(sw.qos.p_star);
    let s_star = q.f64("s_star", errors).unwrap_or(sw.qos.s_star);
    let tau = q.f64("tau_db", errors).map(db_to_linear).unwrap_or(sw.qos.tau_star);
    q.finish(errors);
    match QoSConstraint::new(p_star, s_star, tau) {
        Ok(c) => sw.qos = c,
        Err(e) => errors.push(format!("sweep.qos: {e}")),
    }
    s.finish(errors);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse("").unwrap();
        assert_eq!(c.scenario, default_scenario());
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn errors_are_collected() {
        let e = parse(
            "[scenario]\nalpha = 1.5\nbogus = 1\n[antenna.st]\ntype = \"laser\"\n[sweep]\ncount = 1\n[extra]\n",
        )
        .unwrap_err();
        assert_eq!(e.0.len(), 5, "{e}");
    }

    #[test]
    fn units_are_converted() {
        let c = parse("[scenario]\nrho_dbm = -30\n[placement]\nx_p = 10\ndelta_p_deg = 90\nomega_p_deg = 90\n").unwrap();
        assert!((c.scenario.rho - 1e-6).abs() < 1e-18);
        let pp = c.scenario.fixed_placement().unwrap();
        assert!((pp.delta_p.radians() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn unnormalized_sector_warns() {
        let c = parse("[antenna.st]\ntype = \"sectorized\"\na = 5\nb = 0.5\nphi_deg = 30\n").unwrap();
        assert_eq!(c.warnings.len(), 1);
    }
}
