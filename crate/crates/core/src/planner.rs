//! Choice of the transmit-restriction threshold under joint QoS targets.

use alloc::vec::Vec;
use num_traits::Float;

use crate::coverage_primary::coverage_primary_simplified;
use crate::coverage_secondary::{averaged_bound, averaged_meets, coverage_secondary_averaged, interference_free_bound, secondary_terms, Term4Method};
use crate::error::{Error, Result};
use crate::geometry::Placement;
use crate::scenario::Scenario;

/// `p_cp ≥ p★` and `p_cs ≥ s★` at SINR threshold `τ★` (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QoSConstraint {
    pub p_star: f64,
    pub s_star: f64,
    pub tau_star: f64,
}

impl QoSConstraint {
    pub fn new(p_star: f64, s_star: f64, tau_star: f64) -> Result<QoSConstraint> {
        for (name, v) in [("p_star", p_star), ("s_star", s_star)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter { name, reason: "must lie in [0, 1]" });
            }
        }
        if !(tau_star > 0.0) || !tau_star.is_finite() {
            return Err(Error::Domain { what: "SINR threshold", value: tau_star });
        }
        Ok(QoSConstraint { p_star, s_star, tau_star })
    }
}

/// Coverage probabilities used by the planner.
pub trait CoverageEvaluator {
    fn primary(&self, tau: f64, sc: &Scenario) -> Result<f64>;
    fn secondary(&self, tau: f64, sc: &Scenario) -> Result<f64>;

    /// A cheap upper bound on the secondary coverage; the planner skips the
    /// full evaluation when the bound already violates the target.
    fn secondary_upper_bound(&self, _tau: f64, _sc: &Scenario) -> Result<f64> {
        Ok(1.0)
    }

    /// `secondary(tau, sc) >= target`, possibly without computing the value.
    fn secondary_meets(&self, tau: f64, sc: &Scenario, target: f64) -> Result<bool> {
        Ok(self.secondary(tau, sc)? >= target)
    }
}

/// Analytic coverages at a fixed placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analytic {
    pub method: Term4Method,
}

impl Default for Analytic {
    fn default() -> Self {
        Analytic { method: Term4Method::exact() }
    }
}

impl CoverageEvaluator for Analytic {
    fn primary(&self, tau: f64, sc: &Scenario) -> Result<f64> {
        coverage_primary_simplified(tau, sc)
    }

    fn secondary(&self, tau: f64, sc: &Scenario) -> Result<f64> {
        let pp = sc.fixed_placement()?;
        Ok(secondary_terms(tau, sc, &pp, self.method)?.coverage(sc.lambda_s))
    }

    fn secondary_upper_bound(&self, tau: f64, sc: &Scenario) -> Result<f64> {
        interference_free_bound(tau, sc, &sc.fixed_placement()?)
    }
}

/// Secondary coverage averaged over a seeded sequence of random placements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementAveraged {
    pub n_placements: usize,
    pub seed: u64,
    /// `None` selects [`Term4Method::averaging`].
    pub method: Option<Term4Method>,
}

impl Default for PlacementAveraged {
    fn default() -> Self {
        PlacementAveraged { n_placements: 10_000, seed: 0, method: None }
    }
}

impl CoverageEvaluator for PlacementAveraged {
    fn primary(&self, tau: f64, sc: &Scenario) -> Result<f64> {
        coverage_primary_simplified(tau, sc)
    }

    fn secondary(&self, tau: f64, sc: &Scenario) -> Result<f64> {
        let method = self.method.unwrap_or_else(|| Term4Method::averaging(sc));
        Ok(coverage_secondary_averaged(tau, sc, self.n_placements, self.seed, method)?.mean)
    }

    fn secondary_upper_bound(&self, tau: f64, sc: &Scenario) -> Result<f64> {
        averaged_bound(tau, sc, self.n_placements, self.seed)
    }

    fn secondary_meets(&self, tau: f64, sc: &Scenario, target: f64) -> Result<bool> {
        let method = self.method.unwrap_or_else(|| Term4Method::averaging(sc));
        averaged_meets(tau, sc, self.n_placements, self.seed, method, target)
    }
}

/// `p_c = p_cp + p_cs` with the analytic evaluator.
pub fn cumulative_performance(tau: f64, rho: f64, sc: &Scenario) -> Result<f64> {
    cumulative_performance_with(tau, rho, sc, default_evaluator(sc).as_dyn())
}

pub fn cumulative_performance_with(tau: f64, rho: f64, sc: &Scenario, eval: &dyn CoverageEvaluator) -> Result<f64> {
    let s = sc.with_rho(rho);
    Ok(eval.primary(tau, &s)? + eval.secondary(tau, &s)?)
}

/// Evaluator matching the scenario's placement mode.
pub enum DefaultEvaluator {
    Analytic(Analytic),
    Averaged(PlacementAveraged),
}

impl DefaultEvaluator {
    pub fn as_dyn(&self) -> &dyn CoverageEvaluator {
        match self {
            DefaultEvaluator::Analytic(a) => a,
            DefaultEvaluator::Averaged(a) => a,
        }
    }
}

pub fn default_evaluator(sc: &Scenario) -> DefaultEvaluator {
    match sc.placement {
        Placement::Fixed(_) => DefaultEvaluator::Analytic(Analytic::default()),
        Placement::Random(_) => DefaultEvaluator::Averaged(PlacementAveraged::default()),
    }
}

/// Logarithmic grid of `ρ` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoGrid {
    pub min: f64,
    pub max: f64,
    pub per_decade: usize,
}

impl Default for RhoGrid {
    /// 1 fW to 1 mW, 25 points per decade.
    fn default() -> Self {
        RhoGrid { min: 1e-15, max: 1e-3, per_decade: 25 }
    }
}

impl RhoGrid {
    pub fn points(&self) -> Vec<f64> {
        let (lo, hi) = (self.min.log10(), self.max.log10());
        let n = ((hi - lo) * self.per_decade as f64).round().max(1.0) as usize;
        (0..=n).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / n as f64)).collect()
    }
}

/// One evaluated point of the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub rho: f64,
    pub p_cp: f64,
    /// `None` unless the secondary coverage was evaluated in full; the
    /// search only does so at the returned `ρ†`.
    pub p_cs: Option<f64>,
    /// Interference-free bound on `p_cs`, when computed.
    pub p_cs_bound: Option<f64>,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoStatus {
    Feasible { rho_dagger: f64 },
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoSearchResult {
    pub status: RhoStatus,
    /// Coverages at `ρ†`. When infeasible, `p_cp` is taken at the last grid
    /// point and `p_cs` is NaN.
    pub p_cp: f64,
    pub p_cs: f64,
    pub trace: Vec<TracePoint>,
}

impl RhoSearchResult {
    pub fn rho_dagger(&self) -> Option<f64> {
        match self.status {
            RhoStatus::Feasible { rho_dagger } => Some(rho_dagger),
            RhoStatus::Infeasible => None,
        }
    }
}

fn probe(q: &QoSConstraint, sc: &Scenario, rho: f64, eval: &dyn CoverageEvaluator) -> Result<TracePoint> {
    let s = sc.with_rho(rho);
    let p_cp = eval.primary(q.tau_star, &s)?;
    let mut t = TracePoint { rho, p_cp, p_cs: None, p_cs_bound: None, feasible: false };
    if p_cp < q.p_star {
        return Ok(t);
    }
    if q.s_star > 0.0 {
        let bound = eval.secondary_upper_bound(q.tau_star, &s)?;
        t.p_cs_bound = Some(bound);
        if bound < q.s_star {
            return Ok(t);
        }
    }
    t.feasible = eval.secondary_meets(q.tau_star, &s, q.s_star)?;
    Ok(t)
}

/// `ρ† = min ρ` subject to both coverage targets, with the default grid and
/// the evaluator matching the placement mode.
pub fn find_rho_dagger(q: &QoSConstraint, sc: &Scenario) -> Result<RhoSearchResult> {
    find_rho_dagger_with(q, sc, &RhoGrid::default(), default_evaluator(sc).as_dyn())
}

/// Scans the grid upwards for the first feasible point, then bisects
/// towards the infeasible neighbour below until the bracket is within 1%.
pub fn find_rho_dagger_with(
    q: &QoSConstraint,
    sc: &Scenario,
    grid: &RhoGrid,
    eval: &dyn CoverageEvaluator,
) -> Result<RhoSearchResult> {
    sc.validate()?;
    let points = grid.points();
    let mut trace = Vec::new();
    let mut first = None;
    for (i, &rho) in points.iter().enumerate() {
        let t = probe(q, sc, rho, eval)?;
        trace.push(t);
        if t.feasible {
            first = Some(i);
            break;
        }
    }
    let Some(i) = first else {
        let last = trace.last().copied();
        return Ok(RhoSearchResult {
            status: RhoStatus::Infeasible,
            p_cp: last.map_or(f64::NAN, |t| t.p_cp),
            p_cs: last.and_then(|t| t.p_cs).unwrap_or(f64::NAN),
            trace,
        });
    };
    let mut best = trace[trace.len() - 1];
    let mut best_at = trace.len() - 1;
    if i > 0 {
        let (mut lo, mut hi) = (points[i - 1], points[i]);
        while hi / lo > 1.01 {
            let mid = (lo * hi).sqrt();
            let t = probe(q, sc, mid, eval)?;
            trace.push(t);
            if t.feasible {
                hi = mid;
                best = t;
                best_at = trace.len() - 1;
            } else {
                lo = mid;
            }
        }
    }
    let p_cs = eval.secondary(q.tau_star, &sc.with_rho(best.rho))?;
    trace[best_at].p_cs = Some(p_cs);
    Ok(RhoSearchResult { status: RhoStatus::Feasible { rho_dagger: best.rho }, p_cp: best.p_cp, p_cs, trace })
}

/// Grid of SINR thresholds in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauGrid {
    pub min_db: f64,
    pub max_db: f64,
    pub step_db: f64,
}

impl Default for TauGrid {
    fn default() -> Self {
        TauGrid { min_db: -30.0, max_db: 30.0, step_db: 0.1 }
    }
}

impl TauGrid {
    pub fn points_db(&self) -> Vec<f64> {
        let n = ((self.max_db - self.min_db) / self.step_db).round().max(0.0) as usize;
        (0..=n).map(|i| self.min_db + i as f64 * self.step_db).collect()
    }
}

/// Largest `τ` (linear) on the grid meeting both targets at fixed `ρ`.
///
/// Both coverages are nonincreasing in `τ`, so the feasible grid points form
/// a prefix and binary search finds its end.
pub fn feasible_tau_ceiling(p_star: f64, s_star: f64, sc: &Scenario, rho: f64, grid: &TauGrid) -> Result<Option<f64>> {
    feasible_tau_ceiling_with(p_star, s_star, sc, rho, grid, default_evaluator(sc).as_dyn())
}

pub fn feasible_tau_ceiling_with(
    p_star: f64,
    s_star: f64,
    sc: &Scenario,
    rho: f64,
    grid: &TauGrid,
    eval: &dyn CoverageEvaluator,
) -> Result<Option<f64>> {
    let s = sc.with_rho(rho);
    let taus: Vec<f64> = grid.points_db().iter().map(|d| 10f64.powf(d / 10.0)).collect();
    let ok = |tau: f64| -> Result<bool> {
        let q = QoSConstraint::new(p_star, s_star, tau)?;
        Ok(probe(&q, &s, rho, eval)?.feasible)
    };
    if taus.is_empty() || !ok(taus[0])? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0usize, taus.len());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(taus[mid])? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(taus[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = RhoGrid::default().points();
        assert_eq!(g.len(), 301);
        assert!((g[0] - 1e-15).abs() < 1e-27);
        assert!((g[300] / 1e-3 - 1.0).abs() < 1e-12);
        assert_eq!(TauGrid { min_db: -1.0, max_db: 1.0, step_db: 0.5 }.points_db().len(), 5);
    }

    #[test]
    fn constraint_validation() {
        assert!(QoSConstraint::new(1.2, 0.5, 1.0).is_err());
        assert!(QoSConstraint::new(0.5, 0.5, 0.0).is_err());
    }
}
