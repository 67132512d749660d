//! Enumeration of simple strategies: uniform distributions over action
//! multisets of a fixed cardinality. With cardinality
//! `ceil(ln m / (2 eps^2))` the best such profile is within `eps` (additive)
//! of the team-maxmin value for payoffs in `[0, 1]`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::game::{contract_axis, MixedStrategy, TeamGame, TeamProfile};

use super::SolveReport;

/// Cap on the simple strategies materialized for a single member.
const MAX_MULTISETS_PER_MEMBER: u128 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationParams {
    epsilon: f64,
    gamma: usize,
}

impl EnumerationParams {
    /// `max_actions` is the largest action count among team members.
    pub fn new(epsilon: f64, max_actions: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::param(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        if max_actions == 0 {
            return Err(Error::param("action count must be positive"));
        }
        let raw = (max_actions as f64).ln() / (2.0 * epsilon * epsilon);
        let gamma = (raw.ceil() as usize).max(1);
        Ok(Self { epsilon, gamma })
    }

    pub fn for_game(epsilon: f64, game: &TeamGame) -> Result<Self> {
        Self::new(epsilon, game.max_team_actions())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Multiset cardinality.
    pub fn gamma(&self) -> usize {
        self.gamma
    }
}

/// `C(m + gamma - 1, gamma)`, the number of multisets of size `gamma` over
/// `m` actions. `None` on overflow.
pub fn multiset_count(m: usize, gamma: usize) -> Option<u128> {
    if m == 0 {
        return Some(u128::from(gamma == 0));
    }
    let n = (m + gamma - 1) as u128;
    let k = gamma.min(m - 1) as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        // exact: c * (n - i) is divisible by (i + 1)
        c = c.checked_mul(n - i)? / (i + 1);
    }
    Some(c)
}

/// Number of joint candidates the enumeration visits without a budget.
pub fn candidate_count(game: &TeamGame, gamma: usize) -> Option<u128> {
    game.team_actions()
        .iter()
        .try_fold(1u128, |acc, &m| acc.checked_mul(multiset_count(m, gamma)?))
}

/// Count vectors of multisets of size `total` over `parts` actions, in
/// ascending lexicographic order: `[0, .., 0, total]` first,
/// `[total, 0, .., 0]` last.
#[derive(Debug, Clone)]
struct Multisets {
    counts: Vec<usize>,
    total: usize,
    started: bool,
    done: bool,
}

impl Multisets {
    fn new(parts: usize, total: usize) -> Self {
        let mut counts = vec![0; parts];
        counts[parts - 1] = total;
        Self { counts, total, started: false, done: false }
    }
}

impl Iterator for Multisets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.counts.clone());
        }
        let parts = self.counts.len();
        let mut prefix: usize = self.counts[..parts - 1].iter().sum();
        for i in (0..parts - 1).rev() {
            prefix -= self.counts[i];
            let right = self.total - prefix - self.counts[i];
            if right > 0 {
                self.counts[i] += 1;
                for c in &mut self.counts[i + 1..] {
                    *c = 0;
                }
                self.counts[parts - 1] = right - 1;
                return Some(self.counts.clone());
            }
        }
        self.done = true;
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportEnumConfig {
    pub epsilon: f64,
    /// Stop after this many joint candidates (report flagged not converged).
    pub budget: Option<u64>,
    /// Upper bound known from elsewhere, e.g. the correlated value.
    pub upper_hint: Option<f64>,
}

impl SupportEnumConfig {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon, budget: None, upper_hint: None }
    }
}

struct Search<'a> {
    candidates: Vec<Vec<Vec<f64>>>,
    budget: Option<u64>,
    visited: u64,
    best_value: f64,
    best_choice: Vec<usize>,
    current: Vec<usize>,
    dims: &'a [usize],
}

impl Search<'_> {
    /// Returns false once the budget is exhausted.
    fn descend(&mut self, level: usize, tensor: &[f64]) -> bool {
        let team = self.candidates.len();
        let dims = &self.dims[level..];
        for idx in 0..self.candidates[level].len() {
            if self.budget.is_some_and(|b| self.visited >= b) {
                return false;
            }
            let reduced = contract_axis(tensor, dims, 0, &self.candidates[level][idx]);
            self.current[level] = idx;
            if level + 1 == team {
                self.visited += 1;
                let value = reduced.iter().copied().fold(f64::INFINITY, f64::min);
                if value > self.best_value {
                    self.best_value = value;
                    self.best_choice.clone_from(&self.current);
                }
            } else if !self.descend(level + 1, &reduced) {
                return false;
            }
        }
        true
    }
}

/// Enumerates every profile of simple strategies with multiset cardinality
/// derived from `config.epsilon` and returns the best one against a
/// best-responding adversary. Requires payoffs in `[0, 1]`.
pub fn support_enumeration(game: &TeamGame, config: &SupportEnumConfig) -> Result<SolveReport> {
    let start = Instant::now();
    if !game.is_normalized() {
        return Err(Error::param(
            "support enumeration needs payoffs in [0, 1]; normalize the game first",
        ));
    }
    let params = EnumerationParams::for_game(config.epsilon, game)?;
    let gamma = params.gamma();

    let mut candidates = Vec::with_capacity(game.team_size());
    for (member, &m) in game.team_actions().iter().enumerate() {
        let count = multiset_count(m, gamma).unwrap_or(u128::MAX);
        if count > MAX_MULTISETS_PER_MEMBER {
            return Err(Error::Capacity(format!(
                "member {member} has {count} multisets of size {gamma}; cap is {MAX_MULTISETS_PER_MEMBER}"
            )));
        }
        let strategies: Vec<Vec<f64>> = Multisets::new(m, gamma)
            .map(|counts| counts.iter().map(|&c| c as f64 / gamma as f64).collect())
            .collect();
        candidates.push(strategies);
    }

    let mut search = Search {
        budget: config.budget,
        visited: 0,
        best_value: f64::NEG_INFINITY,
        best_choice: vec![0; game.team_size()],
        current: vec![0; game.team_size()],
        dims: game.actions(),
        candidates,
    };
    let finished = search.descend(0, game.utility());

    let witness = if search.visited == 0 {
        TeamProfile::uniform(game)
    } else {
        let strategies = search
            .best_choice
            .iter()
            .enumerate()
            .map(|(member, &idx)| MixedStrategy::new(member, search.candidates[member][idx].clone()))
            .collect::<Result<Vec<_>>>()?;
        TeamProfile::new(strategies)?
    };
    let lower = crate::game::team_value(game, &witness)?.value;
    let upper = [1.0, config.upper_hint.unwrap_or(1.0), game.trivial_upper_bound()]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
        .max(lower);

    Ok(SolveReport {
        solver: "support-enum".into(),
        lower_bound: lower,
        upper_bound: upper,
        witness,
        iterations: search.visited,
        restarts_used: 0,
        wall_time: start.elapsed(),
        converged: finished,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_formula() {
        assert_eq!(EnumerationParams::new(0.5, 5).unwrap().gamma(), 4);
        assert_eq!(EnumerationParams::new(0.9, 5).unwrap().gamma(), 1);
        assert_eq!(EnumerationParams::new(0.5, 2).unwrap().gamma(), 2);
        // eps = 1: ln m <= 2 exactly when m <= 7
        for m in 1..=7 {
            assert_eq!(EnumerationParams::new(1.0, m).unwrap().gamma(), 1, "m={m}");
        }
        assert_eq!(EnumerationParams::new(1.0, 8).unwrap().gamma(), 2);
        assert!(EnumerationParams::new(0.0, 5).is_err());
        assert!(EnumerationParams::new(1.5, 5).is_err());
    }

    #[test]
    fn multiset_counts() {
        assert_eq!(multiset_count(5, 4), Some(70));
        assert_eq!(multiset_count(5, 1), Some(5));
        assert_eq!(multiset_count(2, 2), Some(3));
        assert_eq!(multiset_count(1, 9), Some(1));
        assert_eq!(multiset_count(10, 3), Some(220));
    }

    #[test]
    fn multisets_iterate_in_lexicographic_order() {
        let all: Vec<_> = Multisets::new(3, 2).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 0, 2],
                vec![0, 1, 1],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![1, 1, 0],
                vec![2, 0, 0]
            ]
        );
        for (m, g) in [(4, 3), (5, 4), (1, 3), (3, 1)] {
            let listed: Vec<_> = Multisets::new(m, g).collect();
            assert_eq!(listed.len() as u128, multiset_count(m, g).unwrap());
            assert!(listed.windows(2).all(|w| w[0] < w[1]));
            assert!(listed.iter().all(|c| c.iter().sum::<usize>() == g));
        }
    }

    #[test]
    fn budget_stops_early() {
        let game = TeamGame::new(vec![3, 3, 2], vec![0.5; 18]).unwrap();
        let mut cfg = SupportEnumConfig::new(0.5);
        cfg.budget = Some(7);
        let r = support_enumeration(&game, &cfg).unwrap();
        assert_eq!(r.iterations, 7);
        assert!(!r.converged);
        assert!(r.lower_bound <= r.upper_bound);
    }

    #[test]
    fn requires_normalized_payoffs() {
        let game = TeamGame::new(vec![2, 2], vec![0.0, 2.0, 1.0, 0.0]).unwrap();
        assert!(support_enumeration(&game, &SupportEnumConfig::new(0.5)).is_err());
    }
}
