//! Price of uncorrelation and solver comparison ratios.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{normalize_payoffs, team_value, TeamGame};
use crate::solvers::{
    best_reconstruction, correlated_team_maxmin, global_optimize, grid_oracle, iterated_lp, support_enumeration,
    CorrelatedSolution, GlobalConfig, IteratedLpConfig, SolveReport, SupportEnumConfig,
};

/// Team-value solver used for the lower bound of a PoU estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum TeamSolver {
    /// Best pivot reconstruction of the correlated solution.
    Reconstruct,
    IteratedLp(IteratedLpConfig),
    /// Runs on the normalized game; its value is mapped back.
    SupportEnum(SupportEnumConfig),
    Global(GlobalConfig),
    /// Grid oracle at the given target error; certifies the estimate.
    Oracle { target_error: f64 },
}

impl TeamSolver {
    pub fn name(&self) -> &'static str {
        match self {
            TeamSolver::Reconstruct => "reconstruct",
            TeamSolver::IteratedLp(_) => "iterated-lp",
            TeamSolver::SupportEnum(_) => "support-enum",
            TeamSolver::Global(_) => "global",
            TeamSolver::Oracle { .. } => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PouReport {
    pub v_correlated: f64,
    pub v_team_lower: f64,
    /// `v_correlated / v_team_lower`; infinite when the lower bound is not
    /// positive but the correlated value is.
    pub pou_upper_estimate: f64,
    /// True when `v_team_lower` is certified by the grid oracle.
    pub exact: bool,
    pub solver: String,
}

/// `numerator / denominator` for values of a maximization; `0/0` is 1 and a
/// positive value over a non-positive one is infinite.
fn value_ratio(numerator: f64, denominator: f64) -> f64 {
    if denominator > 0.0 {
        numerator / denominator
    } else if numerator > 0.0 {
        f64::INFINITY
    } else if numerator == denominator {
        1.0
    } else {
        f64::NAN
    }
}

/// Lower bound for `game` from `solver` and whether it is certified.
fn team_lower_bound(
    game: &TeamGame,
    correlated: &CorrelatedSolution,
    solver: &TeamSolver,
) -> Result<(f64, bool)> {
    match solver {
        TeamSolver::Reconstruct => {
            Ok((best_reconstruction(game, correlated)?.lower_bound, false))
        }
        TeamSolver::IteratedLp(cfg) => Ok((iterated_lp(game, cfg)?.lower_bound, false)),
        TeamSolver::SupportEnum(cfg) => {
            let r = support_enumeration(&normalize_payoffs(game), cfg)?;
            Ok((team_value(game, &r.witness)?.value, false))
        }
        TeamSolver::Global(cfg) => Ok((global_optimize(game, cfg)?.lower_bound, false)),
        TeamSolver::Oracle { target_error } => Ok((grid_oracle(game, *target_error)?.value, true)),
    }
}

/// Price of uncorrelation estimate: exact correlated value over the best
/// team-maxmin lower bound from `solver`. Because the denominator never
/// exceeds the true team-maxmin value, the estimate never underestimates.
pub fn compute_pou(game: &TeamGame, solver: &TeamSolver) -> Result<PouReport> {
    let correlated = correlated_team_maxmin(game)?;
    let (lower, exact) = team_lower_bound(game, &correlated, solver)?;
    Ok(PouReport {
        v_correlated: correlated.value,
        v_team_lower: lower,
        pou_upper_estimate: value_ratio(correlated.value, lower),
        exact,
        solver: solver.name().to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproximationRatio {
    pub ratio: f64,
    /// The compared report did better than the baseline.
    pub beats_baseline: bool,
}

/// Ratio of the lower bound of `report` to that of `baseline`.
pub fn approximation_ratio(report: &SolveReport, baseline: &SolveReport) -> ApproximationRatio {
    let ratio = value_ratio(report.lower_bound, baseline.lower_bound);
    ApproximationRatio { ratio, beats_baseline: ratio > 1.0 }
}

/// Solver names accepted by configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Correlated,
    Reconstruct,
    IteratedLp,
    SupportEnum,
    Global,
    Oracle,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::Correlated,
        SolverKind::Reconstruct,
        SolverKind::IteratedLp,
        SolverKind::SupportEnum,
        SolverKind::Global,
        SolverKind::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Correlated => "correlated",
            SolverKind::Reconstruct => "reconstruct",
            SolverKind::IteratedLp => "iterated-lp",
            SolverKind::SupportEnum => "support-enum",
            SolverKind::Global => "global",
            SolverKind::Oracle => "oracle",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown solver '{s}'")))
    }
}

/// Per-solver parameters shared by the CLI and experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub epsilon: f64,
    pub restarts: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub oracle_error: f64,
    pub max_nodes: usize,
    pub budget: Option<u64>,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            restarts: 10,
            seed: 0,
            accuracy: 1e-6,
            oracle_error: 1e-2,
            max_nodes: 100_000,
            budget: None,
        }
    }
}

impl SolverParams {
    /// The parameters `kind` actually uses, as `key=value` pairs joined by
    /// `;`.
    pub fn describe(&self, kind: SolverKind) -> String {
        match kind {
            SolverKind::Correlated | SolverKind::Reconstruct => String::new(),
            SolverKind::IteratedLp => format!("restarts={};seed={}", self.restarts, self.seed),
            SolverKind::SupportEnum => match self.budget {
                Some(b) => format!("epsilon={};budget={b}", self.epsilon),
                None => format!("epsilon={}", self.epsilon),
            },
            SolverKind::Global => format!(
                "accuracy={};max_nodes={};seed={}",
                self.accuracy, self.max_nodes, self.seed
            ),
            SolverKind::Oracle => format!("target_error={}", self.oracle_error),
        }
    }
}

/// Runs one solver and returns its bounds as a [`SolveReport`].
///
/// `correlated` reports the correlated value as the upper bound and a
/// reconstructed profile as the witness; `support-enum` runs on the
/// normalized game and maps its bounds back; `oracle` reports the grid
/// estimate with its certified error as the gap.
pub fn run_solver(
    game: &TeamGame,
    kind: SolverKind,
    params: &SolverParams,
    timeout: std::time::Duration,
) -> Result<SolveReport> {
    let start = Instant::now();
    let mut report = match kind {
        SolverKind::Correlated => {
            let c = correlated_team_maxmin(game)?;
            let mut r = best_reconstruction(game, &c)?;
            r.solver = "correlated".into();
            r
        }
        SolverKind::Reconstruct => crate::solvers::reconstruct_best_pivot(game)?,
        SolverKind::IteratedLp => iterated_lp(
            game,
            &IteratedLpConfig {
                init: crate::solvers::Initialization::Uniform,
                restarts: params.restarts,
                timeout,
                seed: params.seed,
                ..Default::default()
            },
        )?,
        SolverKind::SupportEnum => {
            let (lo, hi) = game.payoff_range();
            let normalized = normalize_payoffs(game);
            let cfg = SupportEnumConfig { epsilon: params.epsilon, budget: params.budget, upper_hint: None };
            let mut r = support_enumeration(&normalized, &cfg)?;
            let scale = hi - lo;
            r.lower_bound = team_value(game, &r.witness)?.value;
            r.upper_bound = (lo + scale * r.upper_bound).max(r.lower_bound);
            r
        }
        SolverKind::Global => global_optimize(
            game,
            &GlobalConfig {
                accuracy: params.accuracy,
                budget: timeout,
                max_nodes: params.max_nodes,
                seed: params.seed,
                ..Default::default()
            },
        )?,
        SolverKind::Oracle => {
            let e = grid_oracle(game, params.oracle_error)?;
            SolveReport {
                solver: "oracle".into(),
                lower_bound: e.value,
                upper_bound: e.value + e.error_bound,
                witness: e.witness,
                iterations: e.points_evaluated.min(u64::MAX as u128) as u64,
                restarts_used: 0,
                wall_time: Default::default(),
                converged: true,
            }
        }
    };
    report.wall_time = start.elapsed();
    Ok(report)
}
