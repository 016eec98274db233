//! Brute-force verification.
//!
//! [`grid_best_fixed_n`] searches every sorted dose tuple over a grid on
//! `[d_min, d_max]`; sorting is enough because both effects are symmetric
//! sums. Nothing from the solvers is used here, only the per-fraction effect
//! functions and their monotonicity in the dose.
//!
//! With `pruning` on, prefixes that cannot be completed feasibly or cannot beat
//! the incumbent are skipped and the last coordinate comes from a binary
//! search. The result is identical to the plain enumeration: ties keep the
//! lexicographically first tuple.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, FraxionError, Result};
use crate::protocol::{DoseGroup, Protocol};
use crate::radiobiology::{oar_effect, phi, tumor_effect, ProblemParams, Radiosensitivity};
use crate::report::SolutionReport;
use crate::scalar::{unit_scale, Scalar};

/// Grid and enumeration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig<T> {
    pub grid_step: T,
    pub max_exhaustive_n: u64,
    pub n_range: RangeInclusive<u64>,
    pub pruning: bool,
}

impl<T: Scalar> OracleConfig<T> {
    pub fn new(grid_step: T, max_exhaustive_n: u64, n_range: RangeInclusive<u64>) -> Result<Self> {
        if !grid_step.is_finite() || grid_step <= T::zero() {
            return Err(invalid(format!("grid step must be > 0, got {grid_step}")));
        }
        if max_exhaustive_n == 0 {
            return Err(invalid("max_exhaustive_n must be >= 1"));
        }
        if *n_range.start() == 0 || n_range.start() > n_range.end() {
            return Err(invalid(format!(
                "n range {}..={} must be non-empty and start at >= 1",
                n_range.start(),
                n_range.end()
            )));
        }
        Ok(Self {
            grid_step,
            max_exhaustive_n,
            n_range,
            pruning: true,
        })
    }

    pub fn without_pruning(mut self) -> Self {
        self.pruning = false;
        self
    }
}

/// A problem the oracle can search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleProblem<T> {
    /// Maximize E_T subject to E_OAR ≤ gamma.
    P1 { params: ProblemParams<T>, gamma: T },
    /// Minimize E_OAR subject to E_T ≥ gamma.
    P2 { params: ProblemParams<T>, gamma: T },
}

impl<T: Scalar> OracleProblem<T> {
    pub fn params(&self) -> &ProblemParams<T> {
        match self {
            OracleProblem::P1 { params, .. } | OracleProblem::P2 { params, .. } => params,
        }
    }

    pub fn gamma(&self) -> T {
        match self {
            OracleProblem::P1 { gamma, .. } | OracleProblem::P2 { gamma, .. } => *gamma,
        }
    }

    fn maximize(&self) -> bool {
        matches!(self, OracleProblem::P1 { .. })
    }

    /// `(sensitivity, scale)` of the optimized tissue.
    fn objective_tissue(&self) -> (Radiosensitivity<T>, T) {
        let p = self.params();
        match self {
            OracleProblem::P1 { .. } => (p.tumor, T::one()),
            OracleProblem::P2 { .. } => (p.oar, p.delta()),
        }
    }

    /// `(sensitivity, scale)` of the constrained tissue.
    fn constraint_tissue(&self) -> (Radiosensitivity<T>, T) {
        let p = self.params();
        match self {
            OracleProblem::P1 { .. } => (p.oar, p.delta()),
            OracleProblem::P2 { .. } => (p.tumor, T::one()),
        }
    }

    pub fn objective(&self, p: &Protocol<T>) -> T {
        match self {
            OracleProblem::P1 { params, .. } => tumor_effect(&params.tumor, p),
            OracleProblem::P2 { params, .. } => oar_effect(params, p),
        }
    }

    pub fn constraint(&self, p: &Protocol<T>) -> T {
        match self {
            OracleProblem::P1 { params, .. } => oar_effect(params, p),
            OracleProblem::P2 { params, .. } => tumor_effect(&params.tumor, p),
        }
    }

    /// Signed slack: `γ − E_OAR` for P1, `E_T − γ` for P2. Negative means violated.
    pub fn slack(&self, p: &Protocol<T>) -> T {
        match self {
            OracleProblem::P1 { .. } => self.gamma() - self.constraint(p),
            OracleProblem::P2 { .. } => self.constraint(p) - self.gamma(),
        }
    }

    /// Lipschitz constant `2n(α + 2β·d_max)` of the objective on the box,
    /// with the δ-scaled coefficients for the OAR.
    pub fn lipschitz(&self, n: u64) -> T {
        let (sens, scale) = self.objective_tissue();
        let a = sens.alpha() * scale;
        let b = sens.beta() * scale * scale;
        T::lit(2.0) * T::from_count(n) * (a + T::lit(2.0) * b * self.params().bounds.d_max())
    }
}

/// Best grid protocol found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct OracleResult<T> {
    pub best_n: u64,
    pub best_protocol: Protocol<T>,
    pub best_objective: T,
    /// Analytic minus oracle objective for P1, oracle minus analytic for P2;
    /// non-negative when the analytic answer is optimal.
    pub gap_vs_analytic: Option<T>,
    /// Complete tuples whose objective was evaluated.
    pub evaluations: u64,
}

impl<T: Scalar> OracleResult<T> {
    /// Fills `gap_vs_analytic` from an analytic objective value.
    pub fn with_analytic(mut self, problem: &OracleProblem<T>, analytic_objective: T) -> Self {
        self.gap_vs_analytic = Some(if problem.maximize() {
            analytic_objective - self.best_objective
        } else {
            self.best_objective - analytic_objective
        });
        self
    }
}

/// `d_min, d_min + h, …` up to `d_max`, which is always the last point.
pub fn dose_grid<T: Scalar>(d_min: T, d_max: T, step: T) -> Vec<T> {
    let span = (d_max - d_min) / step;
    let last = (span + T::lit(1e-9)).floor().to_u64().unwrap_or(0);
    let mut grid: Vec<T> = (0..=last)
        .map(|i| (d_min + T::from_count(i) * step).min(d_max))
        .collect();
    let end = *grid.last().expect("grid has d_min");
    if (d_max - end).abs() <= T::lit(1e-12) * unit_scale(d_max) {
        *grid.last_mut().expect("non-empty") = d_max;
    } else {
        grid.push(d_max);
    }
    grid
}

struct Search<'a, T> {
    obj: &'a [T],
    con: &'a [T],
    /// Per-point objective-to-constraint ratio, extremal over the suffix.
    ratio_bound: Vec<T>,
    gamma: T,
    maximize: bool,
    pruning: bool,
    path: Vec<usize>,
    best: Option<(T, Vec<usize>)>,
    evaluations: u64,
}

impl<'a, T: Scalar> Search<'a, T> {
    fn new(obj: &'a [T], con: &'a [T], gamma: T, maximize: bool, pruning: bool) -> Self {
        let mut ratio_bound: Vec<T> = obj.iter().zip(con).map(|(&o, &c)| o / c).collect();
        for i in (0..ratio_bound.len().saturating_sub(1)).rev() {
            ratio_bound[i] = if maximize {
                ratio_bound[i].max(ratio_bound[i + 1])
            } else {
                ratio_bound[i].min(ratio_bound[i + 1])
            };
        }
        Self {
            obj,
            con,
            ratio_bound,
            gamma,
            maximize,
            pruning,
            path: Vec::new(),
            best: None,
            evaluations: 0,
        }
    }

    fn feasible(&self, c: T) -> bool {
        if self.maximize {
            c <= self.gamma
        } else {
            c >= self.gamma
        }
    }

    fn better(&self, value: T) -> bool {
        match &self.best {
            None => true,
            Some((b, _)) => {
                if self.maximize {
                    value > *b
                } else {
                    value < *b
                }
            }
        }
    }

    /// True when a subtree whose objective bound is `bound` cannot strictly improve.
    fn hopeless(&self, bound: T) -> bool {
        let margin = T::lit(1e-12) * unit_scale(bound);
        match &self.best {
            None => false,
            Some((b, _)) => {
                if self.maximize {
                    bound + margin <= *b
                } else {
                    bound - margin >= *b
                }
            }
        }
    }

    fn offer(&mut self, value: T, tail: &[usize]) {
        self.evaluations += 1;
        if self.better(value) {
            let mut idx = self.path.clone();
            idx.extend_from_slice(tail);
            self.best = Some((value, idx));
        }
    }

    fn run(&mut self, n: usize) {
        self.descend(0, n, T::zero(), T::zero());
    }

    fn descend(&mut self, start: usize, r: usize, s_con: T, s_obj: T) {
        if self.pruning {
            self.descend_pruned(start, r, s_con, s_obj);
        } else {
            self.descend_all(start, r, s_con, s_obj);
        }
    }

    fn descend_all(&mut self, start: usize, r: usize, s_con: T, s_obj: T) {
        for j in start..self.obj.len() {
            let c = s_con + self.con[j];
            let o = s_obj + self.obj[j];
            if r == 1 {
                self.evaluations += 1;
                if self.feasible(c) && self.better(o) {
                    let mut idx = self.path.clone();
                    idx.push(j);
                    self.best = Some((o, idx));
                }
            } else {
                self.path.push(j);
                self.descend_all(j, r - 1, c, o);
                self.path.pop();
            }
        }
    }

    fn descend_pruned(&mut self, start: usize, r: usize, s_con: T, s_obj: T) {
        let g = self.obj.len();
        let residual = self.gamma - s_con;
        let rt = T::from_count(r as u64);
        let loose = T::lit(1e-12) * unit_scale(self.gamma);
        if self.maximize {
            if r == 1 {
                // Largest admissible index: the objective grows with the dose.
                let end = start + self.con[start..].partition_point(|&c| s_con + c <= self.gamma);
                if end > start {
                    self.offer(s_obj + self.obj[end - 1], &[end - 1]);
                }
                return;
            }
            let top = g - 1;
            if s_con + rt * self.con[top] <= self.gamma - loose {
                // Every completion is feasible; all-maximum is the unique best.
                self.offer(s_obj + rt * self.obj[top], &vec![top; r]);
                return;
            }
            for j in start..g {
                if s_con + rt * self.con[j] > self.gamma + loose {
                    break;
                }
                let bound = s_obj + (rt * self.obj[top]).min(self.ratio_bound[j] * residual);
                if self.hopeless(bound) {
                    break;
                }
                self.path.push(j);
                self.descend_pruned(j, r - 1, s_con + self.con[j], s_obj + self.obj[j]);
                self.path.pop();
            }
        } else {
            if r == 1 {
                // Smallest admissible index: the objective grows with the dose.
                let j = start + self.con[start..].partition_point(|&c| s_con + c < self.gamma);
                if j < g {
                    self.offer(s_obj + self.obj[j], &[j]);
                }
                return;
            }
            let top_con = self.con[g - 1];
            let rest = T::from_count(r as u64 - 1);
            let first = start
                + self.con[start..]
                    .partition_point(|&c| s_con + c + rest * top_con < self.gamma - loose);
            for j in first..g {
                if s_con + rt * self.con[j] >= self.gamma + loose {
                    // All-j completion is feasible and cheapest from here on.
                    self.offer(s_obj + rt * self.obj[j], &vec![j; r]);
                    break;
                }
                let bound = s_obj + (rt * self.obj[j]).max(self.ratio_bound[j] * residual);
                if self.hopeless(bound) {
                    break;
                }
                self.path.push(j);
                self.descend_pruned(j, r - 1, s_con + self.con[j], s_obj + self.obj[j]);
                self.path.pop();
            }
        }
    }
}

/// Best protocol with exactly `n` fractions over the dose grid.
pub fn grid_best_fixed_n<T: Scalar>(
    problem: &OracleProblem<T>,
    n: u64,
    cfg: &OracleConfig<T>,
) -> Result<OracleResult<T>> {
    if n == 0 {
        return Err(invalid("fraction count must be >= 1"));
    }
    if n > cfg.max_exhaustive_n {
        return Err(FraxionError::TooLarge {
            n,
            max: cfg.max_exhaustive_n,
        });
    }
    let bounds = problem.params().bounds;
    let grid = dose_grid(bounds.d_min(), bounds.d_max(), cfg.grid_step);
    let (os, oscale) = problem.objective_tissue();
    let (cs, cscale) = problem.constraint_tissue();
    let obj: Vec<T> = grid.iter().map(|&d| phi(&os, oscale, d)).collect();
    let con: Vec<T> = grid.iter().map(|&d| phi(&cs, cscale, d)).collect();

    let mut search = Search::new(&obj, &con, problem.gamma(), problem.maximize(), cfg.pruning);
    search.run(n as usize);
    let evaluations = search.evaluations;
    let (_, idx) = search.best.ok_or(FraxionError::NoFeasibleGridPoint { n })?;
    let best_protocol = Protocol::new(idx.iter().map(|&i| DoseGroup::new(1, grid[i])))?;
    Ok(OracleResult {
        best_n: n,
        best_objective: problem.objective(&best_protocol),
        best_protocol,
        gap_vs_analytic: None,
        evaluations,
    })
}

/// Best grid protocol over every N in `cfg.n_range`; ties keep the smaller N.
pub fn oracle_solve<T: Scalar>(
    problem: &OracleProblem<T>,
    cfg: &OracleConfig<T>,
) -> Result<OracleResult<T>> {
    let (lo, hi) = (*cfg.n_range.start(), *cfg.n_range.end());
    if hi > cfg.max_exhaustive_n {
        return Err(FraxionError::TooLarge {
            n: hi,
            max: cfg.max_exhaustive_n,
        });
    }
    let mut best: Option<OracleResult<T>> = None;
    let mut evaluations = 0;
    for n in lo..=hi {
        let r = match grid_best_fixed_n(problem, n, cfg) {
            Ok(r) => r,
            Err(FraxionError::NoFeasibleGridPoint { .. }) => continue,
            Err(e) => return Err(e),
        };
        evaluations += r.evaluations;
        let improves = match &best {
            None => true,
            Some(b) if problem.maximize() => r.best_objective > b.best_objective,
            Some(b) => r.best_objective < b.best_objective,
        };
        if improves {
            best = Some(r);
        }
    }
    let mut best = best.ok_or(FraxionError::NoFeasibleGridPoint { n: hi })?;
    best.evaluations = evaluations;
    Ok(best)
}

/// A single-fraction move that improved the objective while staying feasible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImprovingMove<T> {
    pub from: T,
    pub to: T,
    pub gain: T,
}

/// Checks run by [`verify`] on a reported solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics<T> {
    pub bounds_ok: bool,
    pub slack: T,
    pub feasible: bool,
    /// Whether the constraint must be active at the reported N.
    pub expected_active: bool,
    pub observed_active: bool,
    pub reported_active: bool,
    pub activity_ok: bool,
    /// The reported objective equals the recomputed one.
    pub objective_consistent: bool,
    pub improving_move: Option<ImprovingMove<T>>,
}

impl<T> Diagnostics<T> {
    pub fn local_ok(&self) -> bool {
        self.improving_move.is_none()
    }

    pub fn passed(&self) -> bool {
        self.bounds_ok
            && self.feasible
            && self.activity_ok
            && self.objective_consistent
            && self.local_ok()
    }
}

/// Feasibility and first-order checks of `report` against `problem`.
///
/// The activity expectation is a property of N alone: for P1 the budget binds
/// once N·φ₀(d_max) reaches γ, for P2 the floor binds while N·φ_T(d_min) is
/// at most γ. Local optimality tries moving each distinct dose by `±tol`.
pub fn verify<T: Scalar>(report: &SolutionReport<T>, problem: &OracleProblem<T>, tol: T) -> Diagnostics<T> {
    let params = problem.params();
    let bounds = params.bounds;
    let p = &report.protocol;
    let gamma = problem.gamma();
    let rel = T::feasibility_tol() * unit_scale(gamma);

    let bounds_ok = p.check_bounds(&bounds).is_ok();
    let slack = problem.slack(p);
    let feasible = slack >= -rel;
    let observed_active = slack.abs() <= rel;
    let count = T::from_count(p.fractions());
    let expected_active = match problem {
        OracleProblem::P1 { .. } => count * params.phi_oar(bounds.d_max()) >= gamma - rel,
        OracleProblem::P2 { .. } => count * params.phi_tumor(bounds.d_min()) <= gamma + rel,
    };
    let reported_active = report.constraint_active;
    let activity_ok = expected_active == observed_active && reported_active == observed_active;

    let objective = problem.objective(p);
    let objective_consistent = (objective - report.objective_primary).abs()
        <= T::lit(1e-9) * unit_scale(objective);

    let mut improving_move = None;
    'outer: for g in p.groups() {
        for step in [tol, -tol] {
            let to = g.dose + step;
            if !bounds.contains(to) {
                continue;
            }
            let mut groups: Vec<DoseGroup<T>> = p.groups().to_vec();
            for h in groups.iter_mut() {
                if h.dose == g.dose {
                    h.count -= 1;
                }
            }
            groups.push(DoseGroup::new(1, to));
            let Ok(q) = Protocol::new(groups) else { continue };
            if problem.slack(&q) < -rel {
                continue;
            }
            let value = problem.objective(&q);
            let gain = if problem.maximize() {
                value - objective
            } else {
                objective - value
            };
            if gain > T::lit(1e-12) * unit_scale(objective) {
                improving_move = Some(ImprovingMove { from: g.dose, to, gain });
                break 'outer;
            }
        }
    }

    Diagnostics {
        bounds_ok,
        slack,
        feasible,
        expected_active,
        observed_active,
        reported_active,
        activity_ok,
        objective_consistent,
        improving_move,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    fn p11(delta: f64) -> ProblemParams<f64> {
        ProblemParams::from_values(0.05, 0.005, 0.04, 0.02, delta, 1.0, 6.0).unwrap()
    }

    #[test]
    fn grid_ends_exactly_at_bounds() {
        let g = dose_grid(1.0, 6.0, 0.5);
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 1.0);
        assert_eq!(*g.last().unwrap(), 6.0);
        let g = dose_grid(1.0, 2.0, 0.3);
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 2.0);
    }

    #[test]
    fn pruned_matches_plain_enumeration() {
        for (delta, gamma) in [(0.3, 0.05), (0.1, 0.03), (0.2, 0.04)] {
            let problem = OracleProblem::P1 { params: p11(delta), gamma };
            let cfg = OracleConfig::new(0.05, 3, 1..=3).unwrap();
            for n in 1..=3 {
                let a = grid_best_fixed_n(&problem, n, &cfg);
                let b = grid_best_fixed_n(&problem, n, &cfg.clone().without_pruning());
                match (a, b) {
                    (Ok(a), Ok(b)) => {
                        assert_eq!(a.best_protocol, b.best_protocol);
                        assert_eq!(a.best_objective, b.best_objective);
                    }
                    (Err(a), Err(b)) => assert_eq!(a, b),
                    other => panic!("mismatch {other:?}"),
                }
            }
        }
        for (delta, gamma) in [(0.1, 0.25), (1.0, 0.2), (0.2, 0.3)] {
            let problem = OracleProblem::P2 { params: p11(delta), gamma };
            let cfg = OracleConfig::new(0.05, 4, 1..=4).unwrap();
            for n in 1..=4 {
                let a = grid_best_fixed_n(&problem, n, &cfg).unwrap();
                let b = grid_best_fixed_n(&problem, n, &cfg.clone().without_pruning()).unwrap();
                assert_eq!(a.best_protocol, b.best_protocol);
            }
        }
    }

    #[test]
    fn plain_enumeration_counts_multisets() {
        let problem = OracleProblem::P2 { params: p11(1.0), gamma: 0.01 };
        let cfg = OracleConfig::new(0.25, 3, 1..=3).unwrap().without_pruning();
        for n in 1..=3 {
            let r = grid_best_fixed_n(&problem, n, &cfg).unwrap();
            assert_eq!(r.evaluations, binom(21 + n - 1, n));
        }
    }

    #[test]
    fn p2_above_rho_is_all_min() {
        let problem = OracleProblem::P2 { params: p11(0.1), gamma: 0.1 };
        let cfg = OracleConfig::new(0.01, 3, 1..=3).unwrap();
        let r = grid_best_fixed_n(&problem, 2, &cfg).unwrap();
        assert_eq!(r.best_protocol, Protocol::uniform(2, 1.0).unwrap());
    }

    #[test]
    fn errors() {
        let problem = OracleProblem::P1 { params: p11(0.3), gamma: 0.001 };
        let cfg = OracleConfig::new(0.1, 2, 1..=2).unwrap();
        assert_eq!(
            grid_best_fixed_n(&problem, 3, &cfg),
            Err(FraxionError::TooLarge { n: 3, max: 2 })
        );
        assert_eq!(
            grid_best_fixed_n(&problem, 1, &cfg),
            Err(FraxionError::NoFeasibleGridPoint { n: 1 })
        );
        assert_eq!(
            oracle_solve(&problem, &cfg),
            Err(FraxionError::NoFeasibleGridPoint { n: 2 })
        );
        assert!(OracleConfig::new(0.0, 2, 1..=2).is_err());
        assert!(OracleConfig::new(0.1, 0, 1..=2).is_err());
        assert!(OracleConfig::new(0.1, 2, 0..=2).is_err());
    }

    #[test]
    fn lipschitz_uses_scaled_coefficients() {
        let params = p11(0.5);
        let p1 = OracleProblem::P1 { params, gamma: 1.0 };
        assert!((p1.lipschitz(2) - 4.0 * (0.05 + 2.0 * 0.005 * 6.0)).abs() < 1e-15);
        let p2 = OracleProblem::P2 { params, gamma: 1.0 };
        assert!((p2.lipschitz(2) - 4.0 * (0.02 + 2.0 * 0.005 * 6.0)).abs() < 1e-15);
    }
}
