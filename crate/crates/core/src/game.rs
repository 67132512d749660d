//! Adversarial team games in normal form.
//!
//! Players are indexed from zero. Players `0..n-1` form the team and share the
//! utility tensor `U_T`; the last player is the adversary and receives `-U_T`,
//! which is never stored. The tensor is dense and row-major with player 0
//! outermost and the adversary innermost.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on probability sums and signs at construction.
pub const PROB_TOL: f64 = 1e-9;

/// Largest payoff tensor (number of outcomes) a game may hold.
pub const MAX_OUTCOMES: usize = 1 << 26;

/// Largest joint team action space that [`to_joint_game`] will materialize.
pub const MAX_JOINT_ACTIONS: usize = 1 << 22;

/// Descriptive data carried alongside a game; never affects payoffs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorInfo>,
}

/// Which constructor produced a game and with what parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorInfo {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeamGame {
    actions: Vec<usize>,
    utility: Vec<f64>,
    meta: GameMeta,
}

impl TeamGame {
    /// Builds a game from per-player action counts (adversary last) and the
    /// flat team utility tensor.
    pub fn new(actions: Vec<usize>, utility: Vec<f64>) -> Result<Self> {
        if actions.len() < 2 {
            return Err(Error::InvalidGame(format!(
                "need at least 2 players, got {}",
                actions.len()
            )));
        }
        if let Some(p) = actions.iter().position(|&m| m == 0) {
            return Err(Error::InvalidGame(format!("player {p} has no actions")));
        }
        let outcomes = checked_product(&actions).filter(|&n| n <= MAX_OUTCOMES).ok_or_else(|| {
            Error::Capacity(format!(
                "payoff tensor for action counts {actions:?} exceeds {MAX_OUTCOMES} outcomes"
            ))
        })?;
        if utility.len() != outcomes {
            return Err(Error::dim(format!(
                "team utility has {} entries, expected {outcomes} for action counts {actions:?}",
                utility.len()
            )));
        }
        if let Some(i) = utility.iter().position(|u| !u.is_finite()) {
            return Err(Error::InvalidGame(format!("utility entry {i} is not finite")));
        }
        Ok(Self { actions, utility, meta: GameMeta::default() })
    }

    pub fn with_meta(mut self, meta: GameMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn meta(&self) -> &GameMeta {
        &self.meta
    }

    pub fn num_players(&self) -> usize {
        self.actions.len()
    }

    pub fn team_size(&self) -> usize {
        self.actions.len() - 1
    }

    /// Index of the adversary, always the last player.
    pub fn adversary(&self) -> usize {
        self.actions.len() - 1
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn action_count(&self, player: usize) -> usize {
        self.actions[player]
    }

    pub fn adversary_actions(&self) -> usize {
        self.actions[self.adversary()]
    }

    pub fn team_actions(&self) -> &[usize] {
        &self.actions[..self.team_size()]
    }

    /// Largest action count among team members; the `m` used in the
    /// approximation bounds.
    pub fn max_team_actions(&self) -> usize {
        self.team_actions().iter().copied().max().unwrap_or(1)
    }

    pub fn utility(&self) -> &[f64] {
        &self.utility
    }

    pub fn num_outcomes(&self) -> usize {
        self.utility.len()
    }

    /// Number of joint team actions `|A_1 x ... x A_{n-1}|`.
    pub fn joint_team_actions(&self) -> usize {
        self.utility.len() / self.adversary_actions()
    }

    pub fn flat_index(&self, outcome: &[usize]) -> Result<usize> {
        if outcome.len() != self.actions.len() {
            return Err(Error::dim(format!(
                "outcome has {} actions, game has {} players",
                outcome.len(),
                self.actions.len()
            )));
        }
        let mut idx = 0;
        for (p, (&a, &m)) in outcome.iter().zip(&self.actions).enumerate() {
            if a >= m {
                return Err(Error::dim(format!("action {a} out of range for player {p} ({m} actions)")));
            }
            idx = idx * m + a;
        }
        Ok(idx)
    }

    pub fn payoff(&self, outcome: &[usize]) -> Result<f64> {
        Ok(self.utility[self.flat_index(outcome)?])
    }

    /// `(min, max)` over all team payoffs.
    pub fn payoff_range(&self) -> (f64, f64) {
        self.utility
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| (lo.min(u), hi.max(u)))
    }

    /// True when every payoff lies in `[0, 1]`.
    pub fn is_normalized(&self) -> bool {
        self.utility.iter().all(|&u| (0.0..=1.0).contains(&u))
    }

    /// `min_{a_n} max_{a_T} U_T(a_T, a_n)`: a cheap upper bound on every
    /// team value, correlated or not.
    pub fn trivial_upper_bound(&self) -> f64 {
        let cols = self.adversary_actions();
        (0..cols)
            .map(|c| {
                self.utility
                    .iter()
                    .skip(c)
                    .step_by(cols)
                    .fold(f64::NEG_INFINITY, |acc, &u| acc.max(u))
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn check_profile(&self, profile: &TeamProfile) -> Result<()> {
        if profile.len() != self.team_size() {
            return Err(Error::dim(format!(
                "profile has {} strategies, team has {} members",
                profile.len(),
                self.team_size()
            )));
        }
        for s in profile.strategies() {
            let m = self.actions[s.owner()];
            if s.len() != m {
                return Err(Error::dim(format!(
                    "strategy of player {} has {} entries, player has {m} actions",
                    s.owner(),
                    s.len()
                )));
            }
        }
        Ok(())
    }
}

fn checked_product(values: &[usize]) -> Option<usize> {
    values.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m))
}

/// Contracts one axis of a dense row-major tensor with a weight vector.
pub(crate) fn contract_axis(data: &[f64], dims: &[usize], axis: usize, weights: &[f64]) -> Vec<f64> {
    debug_assert_eq!(weights.len(), dims[axis]);
    let outer: usize = dims[..axis].iter().product();
    let m = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * inner];
    for o in 0..outer {
        let dst = &mut out[o * inner..(o + 1) * inner];
        for (a, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let src = &data[(o * m + a) * inner..(o * m + a + 1) * inner];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }
    out
}

/// Contracts every axis that has weights; axes mapped to `None` are kept.
/// Returns the remaining tensor, row-major over the kept axes.
pub(crate) fn contract_all_but(
    data: &[f64],
    dims: &[usize],
    weights: &[Option<&[f64]>],
) -> Vec<f64> {
    let mut current = data.to_vec();
    let mut cur_dims = dims.to_vec();
    for axis in (0..dims.len()).rev() {
        if let Some(w) = weights[axis] {
            current = contract_axis(&current, &cur_dims, axis, w);
            cur_dims.remove(axis);
        }
    }
    current
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    owner: usize,
    probs: Vec<f64>,
}

impl MixedStrategy {
    /// Validates a probability vector. Entries must be non-negative and sum to
    /// one within [`PROB_TOL`]; negatives inside the tolerance are clamped to
    /// zero, nothing is renormalized.
    pub fn new(owner: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidStrategy(format!("strategy of player {owner} is empty")));
        }
        let mut probs = probs;
        for (a, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -PROB_TOL {
                return Err(Error::InvalidStrategy(format!(
                    "player {owner}: probability of action {a} is {p}"
                )));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidStrategy(format!(
                "player {owner}: probabilities sum to {total}"
            )));
        }
        Ok(Self { owner, probs })
    }

    /// Normalizes non-negative weights into a strategy. Tiny negative noise
    /// (as left by an LP solve) is dropped first.
    pub fn from_weights(owner: usize, weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < -1e-7) {
            return Err(Error::InvalidStrategy(format!(
                "player {owner}: weights {weights:?} are not non-negative"
            )));
        }
        let cleaned: Vec<f64> = weights.iter().map(|&w| w.max(0.0)).collect();
        let total: f64 = cleaned.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidStrategy(format!("player {owner}: weights sum to zero")));
        }
        Ok(Self { owner, probs: cleaned.into_iter().map(|w| w / total).collect() })
    }

    pub fn pure(owner: usize, num_actions: usize, action: usize) -> Result<Self> {
        if action >= num_actions {
            return Err(Error::dim(format!(
                "action {action} out of range for player {owner} ({num_actions} actions)"
            )));
        }
        let mut probs = vec![0.0; num_actions];
        probs[action] = 1.0;
        Ok(Self { owner, probs })
    }

    pub fn uniform(owner: usize, num_actions: usize) -> Self {
        assert!(num_actions > 0, "uniform strategy over zero actions");
        Self { owner, probs: vec![1.0 / num_actions as f64; num_actions] }
    }

    /// Uniform over `support`, zero elsewhere.
    pub fn uniform_over(owner: usize, num_actions: usize, support: &[usize]) -> Result<Self> {
        if support.is_empty() || support.iter().any(|&a| a >= num_actions) {
            return Err(Error::InvalidStrategy(format!(
                "player {owner}: bad support {support:?} for {num_actions} actions"
            )));
        }
        let mut probs = vec![0.0; num_actions];
        let w = 1.0 / support.len() as f64;
        for &a in support {
            probs[a] = w;
        }
        Ok(Self { owner, probs })
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Actions played with positive probability.
    pub fn support(&self) -> Vec<usize> {
        self.probs.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(a, _)| a).collect()
    }
}

/// One mixed strategy per team member, in member order.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamProfile {
    strategies: Vec<MixedStrategy>,
}

impl TeamProfile {
    pub fn new(strategies: Vec<MixedStrategy>) -> Result<Self> {
        if strategies.is_empty() {
            return Err(Error::InvalidStrategy("team profile is empty".into()));
        }
        for (i, s) in strategies.iter().enumerate() {
            if s.owner() != i {
                return Err(Error::InvalidStrategy(format!(
                    "strategy at position {i} belongs to player {}",
                    s.owner()
                )));
            }
        }
        Ok(Self { strategies })
    }

    pub fn from_probs(probs: Vec<Vec<f64>>) -> Result<Self> {
        let strategies = probs
            .into_iter()
            .enumerate()
            .map(|(i, p)| MixedStrategy::new(i, p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(strategies)
    }

    pub fn uniform(game: &TeamGame) -> Self {
        Self {
            strategies: game
                .team_actions()
                .iter()
                .enumerate()
                .map(|(i, &m)| MixedStrategy::uniform(i, m))
                .collect(),
        }
    }

    /// Pure profile playing `actions[i]` for member `i`.
    pub fn pure(game: &TeamGame, actions: &[usize]) -> Result<Self> {
        if actions.len() != game.team_size() {
            return Err(Error::dim(format!(
                "{} pure actions given for {} team members",
                actions.len(),
                game.team_size()
            )));
        }
        let strategies = actions
            .iter()
            .enumerate()
            .map(|(i, &a)| MixedStrategy::pure(i, game.action_count(i), a))
            .collect::<Result<Vec<_>>>()?;
        Self::new(strategies)
    }

    pub fn strategies(&self) -> &[MixedStrategy] {
        &self.strategies
    }

    pub fn strategy(&self, member: usize) -> &MixedStrategy {
        &self.strategies[member]
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    /// Copy of this profile with one member's strategy replaced.
    pub fn with_member(&self, strategy: MixedStrategy) -> Result<Self> {
        let member = strategy.owner();
        if member >= self.strategies.len() {
            return Err(Error::param(format!("player {member} is not a team member")));
        }
        let mut strategies = self.strategies.clone();
        strategies[member] = strategy;
        Ok(Self { strategies })
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.strategies.iter().map(|s| s.probs.clone()).collect()
    }

    fn prob_slices(&self) -> Vec<&[f64]> {
        self.strategies.iter().map(|s| s.probs()).collect()
    }
}

impl Serialize for TeamProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vecs().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TeamProfile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let probs = Vec::<Vec<f64>>::deserialize(deserializer)?;
        TeamProfile::from_probs(probs).map_err(de::Error::custom)
    }
}

/// A correlated team strategy: a distribution over joint team actions, flat
/// and row-major with member 0 outermost (the same order as the rows of
/// [`to_joint_game`]).
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let size = checked_product(&dims)
            .ok_or_else(|| Error::Capacity(format!("joint action space {dims:?} overflows")))?;
        if dims.is_empty() || dims.contains(&0) || probs.len() != size {
            return Err(Error::dim(format!(
                "joint distribution has {} entries for action counts {dims:?}",
                probs.len()
            )));
        }
        let mut probs = probs;
        for (j, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -PROB_TOL {
                return Err(Error::InvalidStrategy(format!("joint action {j} has probability {p}")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidStrategy(format!("joint probabilities sum to {total}")));
        }
        Ok(Self { dims, probs })
    }

    /// All mass on one joint action.
    pub fn point_mass(dims: Vec<usize>, joint_action: &[usize]) -> Result<Self> {
        let size = checked_product(&dims).unwrap_or(0);
        let mut probs = vec![0.0; size];
        let idx = joint_index(&dims, joint_action)?;
        probs[idx] = 1.0;
        Self::new(dims, probs)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn index_of(&self, joint_action: &[usize]) -> Result<usize> {
        joint_index(&self.dims, joint_action)
    }

    pub fn actions_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &m) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % m;
            index /= m;
        }
        out
    }

    /// Probability that `member` plays each of its actions.
    pub fn marginal(&self, member: usize) -> Vec<f64> {
        let weights: Vec<Option<Vec<f64>>> = self
            .dims
            .iter()
            .enumerate()
            .map(|(i, &m)| (i != member).then(|| vec![1.0; m]))
            .collect();
        let refs: Vec<Option<&[f64]>> = weights.iter().map(|w| w.as_deref()).collect();
        contract_all_but(&self.probs, &self.dims, &refs)
    }

    /// Actions of `member` whose marginal mass exceeds `threshold`.
    pub fn support(&self, member: usize, threshold: f64) -> Vec<usize> {
        self.marginal(member)
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > threshold)
            .map(|(a, _)| a)
            .collect()
    }

    /// Team payoff of the correlated strategy against a best-responding
    /// adversary.
    pub fn worst_case_value(&self, game: &TeamGame) -> Result<ValueReport> {
        if self.dims != game.team_actions() {
            return Err(Error::dim(format!(
                "joint distribution over {:?} does not match team actions {:?}",
                self.dims,
                game.team_actions()
            )));
        }
        let cols = game.adversary_actions();
        let mut per_action = vec![0.0; cols];
        for (j, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (c, v) in per_action.iter_mut().enumerate() {
                *v += p * game.utility[j * cols + c];
            }
        }
        Ok(ValueReport::from_per_action(per_action))
    }
}

fn joint_index(dims: &[usize], joint_action: &[usize]) -> Result<usize> {
    if joint_action.len() != dims.len() {
        return Err(Error::dim(format!(
            "joint action {joint_action:?} does not match action counts {dims:?}"
        )));
    }
    let mut idx = 0;
    for (&a, &m) in joint_action.iter().zip(dims) {
        if a >= m {
            return Err(Error::dim(format!("action {a} out of range ({m} actions)")));
        }
        idx = idx * m + a;
    }
    Ok(idx)
}

/// Team payoff against each adversary pure action, and the minimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueReport {
    pub value: f64,
    pub minimizing_adversary_action: usize,
    pub expected_utilities_per_adversary_action: Vec<f64>,
}

impl ValueReport {
    fn from_per_action(per_action: Vec<f64>) -> Self {
        let (minimizing_adversary_action, value) = per_action
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (a, v)| if v < best.1 { (a, v) } else { best });
        Self {
            value,
            minimizing_adversary_action,
            expected_utilities_per_adversary_action: per_action,
        }
    }
}

/// Dense payoff matrix for a two-player zero-sum game, entries are the
/// maximizer's payoffs. Row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PayoffMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::dim(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows.saturating_mul(cols),
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGame("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dim("ragged matrix rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    /// Row player's payoff of a row strategy against each column.
    pub fn column_payoffs(&self, row_strategy: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, &x) in row_strategy.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (o, &u) in out.iter_mut().zip(self.row(r)) {
                *o += x * u;
            }
        }
        out
    }
}

impl fmt::Display for PayoffMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| format!("{x}")).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Team payoff of `profile` against every adversary pure action and the
/// adversary's best response. Pure responses suffice because the payoff is
/// linear in the adversary's strategy.
pub fn team_value(game: &TeamGame, profile: &TeamProfile) -> Result<ValueReport> {
    game.check_profile(profile)?;
    let mut current = game.utility.clone();
    let mut dims = game.actions.clone();
    for s in profile.strategies() {
        current = contract_axis(&current, &dims, 0, s.probs());
        dims.remove(0);
    }
    Ok(ValueReport::from_per_action(current))
}

/// Full multilinear expectation of `U_T` when the adversary mixes too.
pub fn expected_team_utility(
    game: &TeamGame,
    profile: &TeamProfile,
    adversary: &MixedStrategy,
) -> Result<f64> {
    if adversary.len() != game.adversary_actions() {
        return Err(Error::dim(format!(
            "adversary strategy has {} entries, adversary has {} actions",
            adversary.len(),
            game.adversary_actions()
        )));
    }
    let report = team_value(game, profile)?;
    Ok(report
        .expected_utilities_per_adversary_action
        .iter()
        .zip(adversary.probs())
        .map(|(u, p)| u * p)
        .sum())
}

/// Payoff to `member` (in team utility) of each of its pure actions while
/// the other team members follow `profile`: an `m_member x m_adversary`
/// matrix.
pub fn member_payoff_matrix(
    game: &TeamGame,
    profile: &TeamProfile,
    member: usize,
) -> Result<PayoffMatrix> {
    game.check_profile(profile)?;
    if member >= game.team_size() {
        return Err(Error::param(format!(
            "player {member} is not a team member (team size {})",
            game.team_size()
        )));
    }
    let mut weights: Vec<Option<&[f64]>> =
        profile.strategies().iter().map(|s| Some(s.probs())).collect();
    weights[member] = None;
    weights.push(None);
    let data = contract_all_but(&game.utility, &game.actions, &weights);
    PayoffMatrix::new(game.action_count(member), game.adversary_actions(), data)
}

/// Outcome of checking a full strategy profile for profitable deviations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashVerdict {
    pub is_equilibrium: bool,
    /// Largest gain any pure unilateral deviation yields, per player
    /// (adversary last, measured in its own utility `-U_T`). Never negative.
    pub max_gain: Vec<f64>,
    /// The deviation achieving `max_gain` for each player.
    pub best_deviation: Vec<usize>,
    pub team_utility: f64,
}

pub fn verify_nash(
    game: &TeamGame,
    profile: &TeamProfile,
    adversary: &MixedStrategy,
    tol: f64,
) -> Result<NashVerdict> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::param(format!("tolerance must be non-negative, got {tol}")));
    }
    let team_utility = expected_team_utility(game, profile, adversary)?;
    let mut all: Vec<&[f64]> = profile.prob_slices();
    all.push(adversary.probs());

    let mut max_gain = Vec::with_capacity(game.num_players());
    let mut best_deviation = Vec::with_capacity(game.num_players());
    for player in 0..game.num_players() {
        let weights: Vec<Option<&[f64]>> =
            all.iter().enumerate().map(|(p, s)| (p != player).then_some(*s)).collect();
        let deviations = contract_all_but(&game.utility, &game.actions, &weights);
        // the adversary maximizes -U_T
        let sign = if player == game.adversary() { -1.0 } else { 1.0 };
        let current = sign * team_utility;
        let (arg, best) = deviations
            .iter()
            .map(|u| sign * u)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (a, v)| if v > b.1 { (a, v) } else { b });
        max_gain.push((best - current).max(0.0));
        best_deviation.push(arg);
    }
    let is_equilibrium = max_gain.iter().all(|&g| g <= tol);
    Ok(NashVerdict { is_equilibrium, max_gain, best_deviation, team_utility })
}

/// Affine rescaling of the team utility into `[0, 1]`. A constant tensor maps
/// to all zeros.
pub fn normalize_payoffs(game: &TeamGame) -> TeamGame {
    let (lo, hi) = game.payoff_range();
    let utility = if hi > lo {
        let span = hi - lo;
        game.utility.iter().map(|&u| ((u - lo) / span).clamp(0.0, 1.0)).collect()
    } else {
        vec![0.0; game.utility.len()]
    };
    TeamGame { actions: game.actions.clone(), utility, meta: game.meta.clone() }
}

/// The correlated-team reduction: rows are joint team actions (member 0
/// outermost), columns are adversary actions.
pub fn to_joint_game(game: &TeamGame) -> Result<PayoffMatrix> {
    let rows = game.joint_team_actions();
    if rows > MAX_JOINT_ACTIONS {
        return Err(Error::Capacity(format!(
            "{rows} joint team actions exceed the cap of {MAX_JOINT_ACTIONS}"
        )));
    }
    PayoffMatrix::new(rows, game.adversary_actions(), game.utility.clone())
}
