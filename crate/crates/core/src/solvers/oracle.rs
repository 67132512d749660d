//! Brute-force reference for small games.
//!
//! Every team member's simplex is discretized to the grid of probability
//! vectors with denominator `K`, and the team value of every grid profile is
//! evaluated exactly. Any strategy rounds to a grid point within total
//! variation `floor(m/2)/K`, and the team value moves by at most
//! `range * TV` per member, so
//!
//! ```text
//! estimate <= v_M <= estimate + range * sum_i floor(m_i/2) / K
//! ```
//!
//! This module deliberately shares no enumeration or evaluation code with
//! the solvers it is used to check.

use crate::error::{Error, Result};
use crate::game::{MixedStrategy, TeamGame, TeamProfile};

/// Default cap on the number of grid profiles evaluated.
pub const DEFAULT_MAX_GRID_POINTS: u128 = 2_000_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate {
    /// Best team value found on the grid; a lower bound on the team-maxmin
    /// value.
    pub value: f64,
    /// Certified: `value <= v_M <= value + error_bound`.
    pub error_bound: f64,
    pub resolution: usize,
    pub points_evaluated: u128,
    pub witness: TeamProfile,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Error bound at resolution `k`.
fn error_at(game: &TeamGame, k: usize) -> f64 {
    let (lo, hi) = game.payoff_range();
    let halves: usize = game.team_actions().iter().map(|m| m / 2).sum();
    (hi - lo) * halves as f64 / k as f64
}

/// Picks the smallest resolution meeting `target_error`, rounded up to a
/// multiple of the lcm of team action counts (when that stays within a
/// factor of two) so uniform strategies lie on the grid.
fn resolution_for(game: &TeamGame, target_error: f64) -> usize {
    let (lo, hi) = game.payoff_range();
    let halves: usize = game.team_actions().iter().map(|m| m / 2).sum();
    let needed = ((hi - lo) * halves as f64 / target_error).ceil().max(1.0) as usize;
    let lcm = game.team_actions().iter().fold(1usize, |l, &m| l / gcd(l, m) * m);
    let rounded = needed.div_ceil(lcm) * lcm;
    if rounded <= 2 * needed {
        rounded
    } else {
        needed
    }
}

fn grid_size(m: usize, k: usize) -> u128 {
    // C(k + m - 1, m - 1)
    let mut c: u128 = 1;
    for i in 0..(m - 1) as u128 {
        c = c.saturating_mul(k as u128 + m as u128 - 1 - i) / (i + 1);
    }
    c
}

fn grid_points(m: usize, k: usize) -> Vec<Vec<f64>> {
    fn fill(slot: usize, left: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if slot + 1 == cur.len() {
            cur[slot] = left;
            out.push(cur.iter().map(|&c| c as f64 / k as f64).collect());
            return;
        }
        for c in 0..=left {
            cur[slot] = c;
            fill(slot + 1, left - c, k, cur, out);
        }
    }
    let mut out = Vec::new();
    fill(0, k, k, &mut vec![0; m], &mut out);
    out
}

/// Grid search with error at most `target_error`.
pub fn grid_oracle(game: &TeamGame, target_error: f64) -> Result<OracleEstimate> {
    if target_error.is_nan() || target_error <= 0.0 {
        return Err(Error::param(format!("target error must be positive, got {target_error}")));
    }
    grid_oracle_at_resolution(game, resolution_for(game, target_error), DEFAULT_MAX_GRID_POINTS)
}

/// Grid search at a fixed resolution `k`.
pub fn grid_oracle_at_resolution(game: &TeamGame, k: usize, max_points: u128) -> Result<OracleEstimate> {
    if k == 0 {
        return Err(Error::param("grid resolution must be positive"));
    }
    let team = game.team_size();
    let total = game
        .team_actions()
        .iter()
        .fold(1u128, |acc, &m| acc.saturating_mul(grid_size(m, k)));
    if total > max_points {
        return Err(Error::Capacity(format!(
            "grid at resolution {k} has {total} profiles, cap is {max_points}"
        )));
    }
    let grids: Vec<Vec<Vec<f64>>> = game.team_actions().iter().map(|&m| grid_points(m, k)).collect();

    // Walk the grid depth-first, folding one member into the tensor per level.
    struct Walk<'a> {
        grids: &'a [Vec<Vec<f64>>],
        actions: &'a [usize],
        best: f64,
        best_idx: Vec<usize>,
        idx: Vec<usize>,
        count: u128,
    }
    impl Walk<'_> {
        fn go(&mut self, level: usize, tensor: &[f64]) {
            let m = self.actions[level];
            let rest = tensor.len() / m;
            let last = level + 1 == self.grids.len();
            let mut folded = vec![0.0; rest];
            for (gi, point) in self.grids[level].iter().enumerate() {
                folded.iter_mut().for_each(|x| *x = 0.0);
                for (a, &p) in point.iter().enumerate() {
                    if p != 0.0 {
                        let block = &tensor[a * rest..(a + 1) * rest];
                        for (f, &t) in folded.iter_mut().zip(block) {
                            *f += p * t;
                        }
                    }
                }
                self.idx[level] = gi;
                if last {
                    self.count += 1;
                    let v = folded.iter().copied().fold(f64::INFINITY, f64::min);
                    if v > self.best {
                        self.best = v;
                        self.best_idx.clone_from(&self.idx);
                    }
                } else {
                    let snapshot = folded.clone();
                    self.go(level + 1, &snapshot);
                }
            }
        }
    }
    let mut walk = Walk {
        grids: &grids,
        actions: game.actions(),
        best: f64::NEG_INFINITY,
        best_idx: vec![0; team],
        idx: vec![0; team],
        count: 0,
    };
    walk.go(0, game.utility());

    let strategies = walk
        .best_idx
        .iter()
        .enumerate()
        .map(|(i, &gi)| MixedStrategy::from_weights(i, &grids[i][gi]))
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleEstimate {
        value: walk.best,
        error_bound: error_at(game, k),
        resolution: k,
        points_evaluated: walk.count,
        witness: TeamProfile::new(strategies)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(grid_size(2, 10), 11);
        assert_eq!(grid_size(3, 2), 6);
        assert_eq!(grid_points(3, 2).len(), 6);
        assert_eq!(grid_size(1, 50), 1);
    }

    #[test]
    fn single_outcome_is_exact() {
        let game = TeamGame::new(vec![1, 1, 1], vec![0.8]).unwrap();
        let e = grid_oracle(&game, 1e-3).unwrap();
        assert_eq!(e.value, 0.8);
        assert_eq!(e.error_bound, 0.0);
    }

    #[test]
    fn resolution_includes_uniform_points() {
        let mut u = vec![0.5; 18];
        u[0] = 1.0;
        let game = TeamGame::new(vec![3, 3, 2], u).unwrap();
        let k = resolution_for(&game, 0.02);
        assert_eq!(k % 3, 0);
        assert!(error_at(&game, k) <= 0.02);
    }

    #[test]
    fn capacity_enforced() {
        let mut u = vec![0.0; 32];
        u[3] = 1.0;
        let game = TeamGame::new(vec![4, 4, 2], u).unwrap();
        assert!(matches!(
            grid_oracle_at_resolution(&game, 1000, 1_000_000),
            Err(Error::Capacity(_))
        ));
    }
}
