//! Team-maxmin solvers.
//!
//! Each solver returns a [`SolveReport`]: a witness team profile whose exact
//! team value is the reported lower bound, and an upper bound that is valid
//! for the true team-maxmin value.

mod correlated;
mod global;
mod iterated_lp;
mod oracle;
mod support_enum;

use std::time::Duration;

use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::game::{team_value, TeamGame, TeamProfile};

pub use correlated::{
    correlated_team_maxmin, reconstruct_best_pivot, reconstruct_mixed, CorrelatedSolution,
    SUPPORT_THRESHOLD,
};
pub(crate) use correlated::best_reconstruction;
pub use global::{global_optimize, GlobalConfig};
pub use iterated_lp::{iterated_lp, iterated_lp_traced, Initialization, IteratedLpConfig, RestartTrace};
pub use oracle::{grid_oracle, grid_oracle_at_resolution, OracleEstimate, DEFAULT_MAX_GRID_POINTS};
pub use support_enum::{
    candidate_count, multiset_count, support_enumeration, EnumerationParams, SupportEnumConfig,
};

/// Default per-instance time limit.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60 * 60);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub solver: String,
    /// Exact team value of `witness`.
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub witness: TeamProfile,
    pub iterations: u64,
    pub restarts_used: u32,
    #[serde(rename = "wall_ms", serialize_with = "millis")]
    pub wall_time: Duration,
    pub converged: bool,
}

fn millis<S: Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

impl SolveReport {
    /// Report for a fixed profile: lower bound is its team value, upper bound
    /// the game's trivial bound.
    pub fn from_profile(game: &TeamGame, profile: TeamProfile, solver: &str) -> Result<Self> {
        let value = team_value(game, &profile)?.value;
        Ok(Self {
            solver: solver.to_string(),
            lower_bound: value,
            upper_bound: game.trivial_upper_bound().max(value),
            witness: profile,
            iterations: 0,
            restarts_used: 0,
            wall_time: Duration::ZERO,
            converged: true,
        })
    }

    pub fn gap(&self) -> f64 {
        self.upper_bound - self.lower_bound
    }

    /// `lower / upper`, with `0/0` read as 1.
    pub fn ratio(&self) -> f64 {
        bound_ratio(self.lower_bound, self.upper_bound)
    }
}

pub(crate) fn bound_ratio(lower: f64, upper: f64) -> f64 {
    if upper.abs() <= 1e-12 {
        if lower.abs() <= 1e-12 {
            1.0
        } else {
            0.0
        }
    } else {
        lower / upper
    }
}
