//! Iterated best-response LPs with restarts.
//!
//! Every round solves, for each team member, the maxmin LP of that member
//! against the adversary with teammates frozen, then replaces the strategy
//! of the single member whose LP did best. The team value never decreases;
//! a restart ends when no member improves by more than the tolerance.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{member_payoff_matrix, team_value, MixedStrategy, TeamGame, TeamProfile};
use crate::lp::solve_maxmin;
use crate::rng::{derive_seed, SplitMix64};

use super::{SolveReport, DEFAULT_TIMEOUT};

#[derive(Debug, Clone, PartialEq)]
pub enum Initialization {
    Uniform,
    /// One pure action per team member.
    Pure(Vec<usize>),
    /// Each member drawn from the flat distribution on its simplex.
    Random,
    Profile(TeamProfile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IteratedLpConfig {
    /// Start of the first restart. Later restarts always start from random
    /// profiles.
    pub init: Initialization,
    pub restarts: usize,
    pub timeout: Duration,
    /// Master seed; restart `r` draws from `derive_seed(seed, r)`.
    pub seed: u64,
    /// Minimum improvement that counts as progress.
    pub tolerance: f64,
    pub max_rounds: usize,
}

impl Default for IteratedLpConfig {
    fn default() -> Self {
        Self {
            init: Initialization::Uniform,
            restarts: 1,
            timeout: DEFAULT_TIMEOUT,
            seed: 0,
            tolerance: 1e-9,
            max_rounds: 1000,
        }
    }
}

impl IteratedLpConfig {
    pub fn with_init(init: Initialization) -> Self {
        Self { init, ..Self::default() }
    }
}

/// What happened during one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    /// Team value at the start and after every accepted update.
    pub values: Vec<f64>,
    /// LP rounds performed, including the final non-improving one.
    pub rounds: usize,
    pub converged: bool,
    pub profile: TeamProfile,
}

impl RestartTrace {
    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("trace holds the initial value")
    }
}

fn random_profile(game: &TeamGame, seed: u64) -> TeamProfile {
    let mut rng = SplitMix64::new(seed);
    let strategies = game
        .team_actions()
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            MixedStrategy::from_weights(i, &rng.simplex_point(m)).expect("simplex point is valid")
        })
        .collect();
    TeamProfile::new(strategies).expect("owners are in order")
}

fn initial_profile(game: &TeamGame, config: &IteratedLpConfig, restart: usize) -> Result<TeamProfile> {
    let seed = derive_seed(config.seed, restart as u64);
    if restart > 0 {
        return Ok(random_profile(game, seed));
    }
    match &config.init {
        Initialization::Uniform => Ok(TeamProfile::uniform(game)),
        Initialization::Pure(actions) => TeamProfile::pure(game, actions),
        Initialization::Random => Ok(random_profile(game, seed)),
        Initialization::Profile(p) => {
            game.check_profile(p)?;
            Ok(p.clone())
        }
    }
}

fn run_restart(
    game: &TeamGame,
    mut profile: TeamProfile,
    config: &IteratedLpConfig,
    deadline: Instant,
) -> Result<RestartTrace> {
    let mut current = team_value(game, &profile)?.value;
    let mut values = vec![current];
    let mut rounds = 0;
    let mut converged = false;
    while rounds < config.max_rounds {
        if Instant::now() >= deadline {
            break;
        }
        rounds += 1;
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for member in 0..game.team_size() {
            let matrix = member_payoff_matrix(game, &profile, member)?;
            let solution = solve_maxmin(&matrix)?;
            if best.as_ref().is_none_or(|(_, v, _)| solution.value > *v) {
                best = Some((member, solution.value, solution.strategy));
            }
        }
        let (member, lp_value, strategy) = best.expect("team is non-empty");
        if lp_value <= current + config.tolerance {
            converged = true;
            break;
        }
        let candidate = profile.with_member(MixedStrategy::from_weights(member, &strategy)?)?;
        let value = team_value(game, &candidate)?.value;
        if value <= current {
            // LP round-off hid a non-improvement
            converged = true;
            break;
        }
        profile = candidate;
        current = value;
        values.push(current);
    }
    Ok(RestartTrace { values, rounds, converged, profile })
}

/// Runs the restarts (in parallel; results do not depend on scheduling) and
/// returns the best profile found together with every restart's trace.
pub fn iterated_lp_traced(
    game: &TeamGame,
    config: &IteratedLpConfig,
) -> Result<(SolveReport, Vec<RestartTrace>)> {
    if config.restarts == 0 {
        return Err(Error::param("iterated LP needs at least one restart"));
    }
    let start = Instant::now();
    let deadline = start.checked_add(config.timeout).unwrap_or(start + DEFAULT_TIMEOUT * 1000);

    let traces: Vec<RestartTrace> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let init = initial_profile(game, config, r)?;
            run_restart(game, init, config, deadline)
        })
        .collect::<Result<Vec<_>>>()?;

    let best = traces
        .iter()
        .enumerate()
        .fold(0, |b, (i, t)| if t.final_value() > traces[b].final_value() { i } else { b });
    let lower = traces[best].final_value();
    let report = SolveReport {
        solver: "iterated-lp".into(),
        lower_bound: lower,
        upper_bound: game.trivial_upper_bound().max(lower),
        witness: traces[best].profile.clone(),
        iterations: traces.iter().map(|t| t.rounds as u64).sum(),
        restarts_used: traces.len() as u32,
        wall_time: start.elapsed(),
        converged: traces.iter().all(|t| t.converged),
    };
    Ok((report, traces))
}

pub fn iterated_lp(game: &TeamGame, config: &IteratedLpConfig) -> Result<SolveReport> {
    iterated_lp_traced(game, config).map(|(report, _)| report)
}
