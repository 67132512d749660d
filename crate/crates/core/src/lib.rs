//! Team-maxmin equilibria in adversarial team games.
//!
//! A team of `n - 1` players shares a utility tensor and plays independent
//! mixed strategies against a single adversary (the last player), who gets
//! the negated utility. The crate computes lower and upper bounds on the
//! team-maxmin value, the correlated-team value, and the price of
//! uncorrelation between the two, and runs batch experiments over generated
//! instance families.

pub mod error;
pub mod experiment;
pub mod format;
pub mod game;
pub mod generators;
pub mod lp;
pub mod metrics;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use game::{
    expected_team_utility, member_payoff_matrix, normalize_payoffs, team_value, to_joint_game,
    verify_nash, GameMeta, GeneratorInfo, JointDistribution, MixedStrategy, NashVerdict,
    PayoffMatrix, TeamGame, TeamProfile, ValueReport,
};
pub use lp::{solve_lp, solve_maxmin, LinearProgram, LpSolution, LpStatus, MaxminSolution};

pub use metrics::{
    approximation_ratio, compute_pou, run_solver, ApproximationRatio, PouReport, SolverKind,
    SolverParams, TeamSolver,
};
pub use solvers::SolveReport;
