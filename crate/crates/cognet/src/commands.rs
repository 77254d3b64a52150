//! The batch commands behind the CLI.

use std::io::Write;

use cognet_core::access::{activity_factor, map_primary_frame, map_secondary_frame, SecondaryLink};
use cognet_core::antenna::{BeamPattern, DevicePatterns};
use cognet_core::coverage_primary::coverage_primary_simplified;
use cognet_core::coverage_secondary::{sample_placement, secondary_terms, Term4Method};
use cognet_core::geometry::{Angle, Placement, Point, PolarPoint, PrimaryPlacement};
use cognet_core::montecarlo::{af_outcome, estimate_map, primary_outcome, secondary_outcome, EstimateWithCI};
use cognet_core::planner::{find_rho_dagger_with, Analytic, CoverageEvaluator, PlacementAveraged, RhoGrid, RhoStatus};
use cognet_core::scenario::{db_to_linear, linear_to_db, Scenario};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Config, SweepVariable};
use crate::output::{fmt_f64, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    MapField,
    AfSweep,
    CoverageSweep,
    FindRho,
    Validate,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] crate::config::ConfigErrors),
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] cognet_core::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// `validate` found an analytic value more than four standard errors
    /// from its simulation estimate.
    ValidationFailed,
}

pub const Z_LIMIT: f64 = 4.0;

pub fn run(cmd: Command, cfg: &Config, seed: u64, out: &mut dyn Write) -> Result<Outcome, CliError> {
    match cmd {
        Command::MapField => map_field(cfg, out),
        Command::AfSweep => af_sweep(cfg, out),
        Command::CoverageSweep => coverage_sweep(cfg, seed, out),
        Command::FindRho => find_rho(cfg, seed, out),
        Command::Validate => validate(cfg, seed, out),
    }
}

fn patterns_for(m_p: u32, m_s: u32, kappa_deg: f64) -> Result<DevicePatterns, CliError> {
    let make = |m: u32| {
        if m == 0 {
            return Err(CliError::Usage("element counts start at 1".into()));
        }
        Ok(BeamPattern::ula_or_omni(m, kappa_deg.to_radians())?)
    };
    let (p, s) = (make(m_p)?, make(m_s)?);
    Ok(DevicePatterns { pt: p.clone(), pr: p, st: s.clone(), sr: s })
}

fn collect<T: Send>(items: Vec<Result<T, CliError>>) -> Result<Vec<T>, CliError> {
    items.into_iter().collect()
}

/// MAP on a square grid in the primary frame, one block per orientation.
pub fn map_field(cfg: &Config, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let sw = &cfg.sweep;
    let n = sw.resolution;
    if n < 16 {
        return Err(CliError::Usage(format!("map-field needs a resolution of at least 16, got {n}")));
    }
    let sc = &cfg.scenario;
    let coord = |i: usize| -sw.extent + 2.0 * sw.extent * i as f64 / (n - 1) as f64;
    let rows: Vec<[f64; 4]> = sw
        .omega_deg
        .iter()
        .flat_map(|&w| (0..n * n).map(move |k| (w, k)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(w, k)| {
            let (x, y) = (coord(k % n), coord(k / n));
            let link = SecondaryLink { tx: PolarPoint::from_cartesian(Point::new(x, y)), orientation: Angle::from_degrees(w), length: sc.r_s };
            [x, y, w, map_primary_frame(&link, sc)]
        })
        .collect();
    let mut t = Table::new(out, &["x", "y", "omega_deg", "map"])?;
    for r in rows {
        t.row(&r.map(fmt_f64))?;
    }
    t.finish()?;
    Ok(Outcome::Success)
}

fn rho_values(cfg: &Config) -> Vec<f64> {
    if cfg.sweep.variable == SweepVariable::Rho {
        cfg.sweep.values()
    } else {
        let g = RhoGrid { min: 1e-15, max: 1e-3, per_decade: 4 };
        g.points()
    }
}

/// Activity factor against `ρ` for every `(M_p, M_s)` pair.
pub fn af_sweep(cfg: &Config, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let ms = &cfg.sweep.m_values;
    let rhos = rho_values(cfg);
    let jobs: Vec<(u32, u32, f64)> =
        ms.iter().flat_map(|&p| ms.iter().map(move |&s| (p, s))).flat_map(|(p, s)| rhos.iter().map(move |&r| (p, s, r))).collect();
    let rows = collect(
        jobs.par_iter()
            .map(|&(m_p, m_s, rho)| {
                let sc = cfg.scenario.with_patterns(patterns_for(m_p, m_s, cfg.sweep.kappa_deg)?).with_rho(rho);
                Ok((m_p, m_s, rho, activity_factor(&sc)?))
            })
            .collect(),
    )?;
    let mut t = Table::new(out, &["m_p", "m_s", "rho_w", "eta"])?;
    for (m_p, m_s, rho, eta) in rows {
        t.row(&[m_p.to_string(), m_s.to_string(), fmt_f64(rho), fmt_f64(eta)])?;
    }
    t.finish()?;
    Ok(Outcome::Success)
}

fn evaluator(cfg: &Config, seed: u64) -> Box<dyn CoverageEvaluator + Sync> {
    match cfg.scenario.placement {
        Placement::Fixed(_) => Box::new(Analytic::default()),
        Placement::Random(_) => Box::new(PlacementAveraged { n_placements: cfg.mc.placements, seed, method: None }),
    }
}

/// Coverage probabilities along the sweep variable.
pub fn coverage_sweep(cfg: &Config, seed: u64, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let sw = &cfg.sweep;
    let want = |k: &str| sw.outputs.iter().any(|o| o == k || o == "p_c");
    let eval = evaluator(cfg, seed);
    let rows = collect(
        sw.values()
            .par_iter()
            .map(|&v| {
                let mut sc = cfg.scenario.clone();
                let mut tau_db = sw.tau_db;
                match sw.variable {
                    SweepVariable::Rho => sc.rho = v,
                    SweepVariable::Tau => tau_db = v,
                    SweepVariable::Radius => sc.radius = v,
                    SweepVariable::LambdaS => sc.lambda_s = v,
                    SweepVariable::Mp => {
                        let p = BeamPattern::ula_or_omni(v.round() as u32, sw.kappa_deg.to_radians())?;
                        sc.patterns.pt = p.clone();
                        sc.patterns.pr = p;
                    }
                    SweepVariable::Ms => {
                        let p = BeamPattern::ula_or_omni(v.round() as u32, sw.kappa_deg.to_radians())?;
                        sc.patterns.st = p.clone();
                        sc.patterns.sr = p;
                    }
                }
                let tau = db_to_linear(tau_db);
                let p_cp = if want("p_cp") { eval.primary(tau, &sc)? } else { f64::NAN };
                let p_cs = if want("p_cs") { eval.secondary(tau, &sc)? } else { f64::NAN };
                let p_c = if sw.outputs.iter().any(|o| o == "p_c") { p_cp + p_cs } else { f64::NAN };
                Ok([v, tau_db, sc.rho, p_cp, p_cs, p_c])
            })
            .collect(),
    )?;
    let mut t = Table::new(out, &["variable", "value", "tau_db", "rho_w", "p_cp", "p_cs", "p_c"])?;
    for r in rows {
        let mut cells = vec![sw.variable.name().to_string()];
        cells.extend(r.iter().map(|x| fmt_f64(*x)));
        t.row(&cells)?;
    }
    t.finish()?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct RhoReport {
    p_star: f64,
    s_star: f64,
    tau_star_db: f64,
    placement: &'static str,
    results: Vec<RhoRow>,
}

#[derive(Serialize)]
struct RhoRow {
    m: u32,
    beamwidth_deg: f64,
    status: &'static str,
    rho_dagger_w: Option<f64>,
    p_cp: f64,
    p_cs: f64,
    evaluations: usize,
}

/// `ρ†` for each element count of the sweep, as JSON.
pub fn find_rho(cfg: &Config, seed: u64, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let q = cfg.sweep.qos;
    let eval = evaluator(cfg, seed);
    let results = collect(
        cfg.sweep
            .m_values
            .par_iter()
            .map(|&m| {
                let sc = cfg.scenario.with_patterns(patterns_for(m, m, cfg.sweep.kappa_deg)?);
                let r = find_rho_dagger_with(&q, &sc, &RhoGrid::default(), eval.as_ref())?;
                let beamwidth_deg = if m == 1 { 360.0 } else { cfg.sweep.kappa_deg / m as f64 };
                let finite = |x: f64| if x.is_finite() { x } else { -1.0 };
                Ok(RhoRow {
                    m,
                    beamwidth_deg,
                    status: match r.status {
                        RhoStatus::Feasible { .. } => "feasible",
                        RhoStatus::Infeasible => "infeasible",
                    },
                    rho_dagger_w: r.rho_dagger(),
                    p_cp: finite(r.p_cp),
                    p_cs: finite(r.p_cs),
                    evaluations: r.trace.len(),
                })
            })
            .collect(),
    )?;
    let report = RhoReport {
        p_star: q.p_star,
        s_star: q.s_star,
        tau_star_db: linear_to_db(q.tau_star),
        placement: match cfg.scenario.placement {
            Placement::Fixed(_) => "fixed",
            Placement::Random(_) => "random",
        },
        results,
    };
    serde_json::to_writer_pretty(&mut *out, &report).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(Outcome::Success)
}

/// Simulation estimate over realizations `0..n`, evaluated in parallel and
/// reduced in index order.
pub fn par_estimate<F: Fn(u64) -> f64 + Sync + Send>(n: usize, f: F) -> EstimateWithCI {
    let values: Vec<f64> = (0..n as u64).into_par_iter().map(f).collect();
    EstimateWithCI::from_samples(&values)
}

fn indicator(b: bool) -> f64 {
    if b { 1.0 } else { 0.0 }
}

/// Analytic values against simulation on a reduced region.
pub fn validate(cfg: &Config, seed: u64, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let mut sc: Scenario = cfg.scenario.clone();
    if let Some(r) = cfg.mc.radius {
        sc.radius = r;
    }
    let n = cfg.mc.realizations;
    let tau = db_to_linear(cfg.sweep.tau_db);
    let pp: PrimaryPlacement = match sc.placement {
        Placement::Fixed(pp) => pp,
        Placement::Random(law) => sample_placement(&law, seed, 0),
    };
    let mut rows: Vec<(String, f64, EstimateWithCI)> = Vec::new();

    let link = SecondaryLink { tx: PolarPoint::from_cartesian(Point::new(sc.r_s, 0.0)), orientation: Angle::new(std::f64::consts::PI), length: sc.r_s };
    rows.push((
        "map_typical".into(),
        map_secondary_frame(&link, &pp, &sc)?,
        estimate_map(&link, &pp, &sc, cfg.mc.map_draws, seed)?,
    ));
    if sc.lambda_s > 0.0 {
        rows.push(("activity_factor".into(), activity_factor(&sc)?, par_estimate(n, |i| af_outcome(&sc, seed, i))));
    }
    rows.push((
        format!("p_cp@{}dB", cfg.sweep.tau_db),
        coverage_primary_simplified(tau, &sc)?,
        par_estimate(n, |i| indicator(primary_outcome(tau, &sc, seed, i))),
    ));
    let fixed = sc.with_placement(Placement::Fixed(pp));
    rows.push((
        format!("p_cs@{}dB", cfg.sweep.tau_db),
        secondary_terms(tau, &fixed, &pp, Term4Method::exact())?.coverage(fixed.lambda_s),
        par_estimate(n, |i| indicator(secondary_outcome(tau, &fixed, &pp, seed, i))),
    ));

    let mut t = Table::new(out, &["quantity", "analytic", "mc_mean", "mc_se", "z"])?;
    let mut worst: f64 = 0.0;
    for (name, analytic, est) in &rows {
        let z = est.z_score(*analytic);
        worst = worst.max(z.abs());
        t.row(&[name.clone(), fmt_f64(*analytic), fmt_f64(est.mean), fmt_f64(est.std_error), fmt_f64(z)])?;
    }
    t.finish()?;
    Ok(if worst > Z_LIMIT { Outcome::ValidationFailed } else { Outcome::Success })
}
