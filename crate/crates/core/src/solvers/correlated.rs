use std::time::Instant;

use crate::error::{Error, Result};
use crate::game::{to_joint_game, team_value, JointDistribution, MixedStrategy, TeamGame, TeamProfile};
use crate::lp::solve_maxmin;

use super::SolveReport;

/// Marginal mass at or below this counts as outside the support when
/// reconstructing; it only filters LP round-off.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatedSolution {
    pub distribution: JointDistribution,
    /// Worst-case value of `distribution`, the correlated-team maxmin value.
    pub value: f64,
}

/// Maxmin of the joint-action matrix game: the team value when members can
/// correlate through a shared device.
pub fn correlated_team_maxmin(game: &TeamGame) -> Result<CorrelatedSolution> {
    let matrix = to_joint_game(game)?;
    let solution = solve_maxmin(&matrix)?;
    let distribution = JointDistribution::new(game.team_actions().to_vec(), solution.strategy)?;
    Ok(CorrelatedSolution { distribution, value: solution.value })
}

/// Independent strategies from a correlated one: `pivot` keeps its marginal
/// under `p`, every other member plays uniformly over the actions it uses
/// with positive probability.
///
/// The result guarantees at least `worst_case(p) / prod_{i != pivot} |supp_i|`
/// for non-negative payoffs.
pub fn reconstruct_mixed(
    p: &JointDistribution,
    game: &TeamGame,
    pivot: usize,
) -> Result<TeamProfile> {
    if p.dims() != game.team_actions() {
        return Err(Error::Dimension(format!(
            "joint distribution over {:?} does not match team actions {:?}",
            p.dims(),
            game.team_actions()
        )));
    }
    if pivot >= game.team_size() {
        return Err(Error::InvalidParameter(format!(
            "pivot {pivot} is not a team member (team size {})",
            game.team_size()
        )));
    }
    let strategies = (0..game.team_size())
        .map(|member| {
            let m = game.action_count(member);
            if member == pivot {
                MixedStrategy::from_weights(member, &p.marginal(member))
            } else {
                let support = p.support(member, SUPPORT_THRESHOLD);
                if support.is_empty() {
                    return Err(Error::InvalidStrategy(format!(
                        "member {member} has empty support under the joint distribution"
                    )));
                }
                MixedStrategy::uniform_over(member, m, &support)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    TeamProfile::new(strategies)
}

/// Solves the correlated LP once, reconstructs with every member as pivot and
/// keeps the best profile. Lower bound: its team value; upper bound: the
/// correlated value.
pub fn reconstruct_best_pivot(game: &TeamGame) -> Result<SolveReport> {
    let start = Instant::now();
    let correlated = correlated_team_maxmin(game)?;
    let mut report = best_reconstruction(game, &correlated)?;
    report.wall_time = start.elapsed();
    Ok(report)
}

pub(crate) fn best_reconstruction(
    game: &TeamGame,
    correlated: &CorrelatedSolution,
) -> Result<SolveReport> {
    let mut best: Option<(TeamProfile, f64)> = None;
    for pivot in 0..game.team_size() {
        let profile = reconstruct_mixed(&correlated.distribution, game, pivot)?;
        let value = team_value(game, &profile)?.value;
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((profile, value));
        }
    }
    let (witness, lower) = best.expect("team has at least one member");
    Ok(SolveReport {
        solver: "reconstruct".into(),
        lower_bound: lower,
        upper_bound: correlated.value.max(lower),
        witness,
        iterations: game.team_size() as u64,
        restarts_used: 0,
        wall_time: Default::default(),
        converged: true,
    })
}
