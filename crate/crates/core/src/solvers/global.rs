//! Anytime global optimization of the team-maxmin program.
//!
//! Lower bounds come from feasible profiles (best-pivot reconstruction, then
//! iterated LP with escalating restarts). Upper bounds start at the
//! correlated value and are refined by best-first branch and bound over
//! boxes of team strategies. Each box is bounded by an LP over joint
//! distributions `p` that every product distribution in the box satisfies:
//!
//! * marginals of `p` stay inside the box;
//! * `lo_i(a_i) * P_{-i}(a_{-i}) <= p(a) <= hi_i(a_i) * P_{-i}(a_{-i})` for
//!   every member `i`, where `P_{-i}` is `p` summed over member `i`;
//! * `prod_i lo_i(a_i) <= p(a) <= prod_i hi_i(a_i)`.
//!
//! As boxes shrink to points these force `p` to the product of its
//! marginals, so the bound converges to the true value.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::game::{team_value, to_joint_game, MixedStrategy, PayoffMatrix, TeamGame, TeamProfile};
use crate::lp::{solve_lp, LinearProgram, LpStatus};
use crate::rng::derive_seed;

use super::correlated::{best_reconstruction, correlated_team_maxmin};
use super::iterated_lp::{iterated_lp, Initialization, IteratedLpConfig};
use super::{SolveReport, DEFAULT_TIMEOUT};

/// Box refinement is skipped when `joint actions * team size` exceeds this.
const MAX_REFINEMENT_SIZE: usize = 4096;

/// Slack added to every LP bound to absorb simplex round-off.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalConfig {
    /// Stop once `upper - lower <= accuracy`.
    pub accuracy: f64,
    pub budget: Duration,
    pub max_nodes: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self {
            accuracy: 1e-6,
            budget: DEFAULT_TIMEOUT,
            max_nodes: 100_000,
            max_depth: 60,
            seed: 0,
        }
    }
}

struct Incumbent {
    value: f64,
    profile: TeamProfile,
}

impl Incumbent {
    fn offer(&mut self, value: f64, profile: &TeamProfile) {
        if value > self.value {
            self.value = value;
            self.profile = profile.clone();
        }
    }
}

pub fn global_optimize(game: &TeamGame, config: &GlobalConfig) -> Result<SolveReport> {
    let start = Instant::now();
    let deadline = start.checked_add(config.budget).unwrap_or(start + DEFAULT_TIMEOUT * 1000);
    let out_of_time = || Instant::now() >= deadline;

    let correlated = correlated_team_maxmin(game)?;
    let first = best_reconstruction(game, &correlated)?;
    let mut best = Incumbent { value: first.lower_bound, profile: first.witness };
    let mut upper = correlated.value.max(best.value);
    let mut iterations = first.iterations;
    let mut restarts = 0u32;
    let close = |lower: f64, upper: f64| upper - lower <= config.accuracy;

    // Escalating iterated-LP restarts: polish the reconstruction, then
    // uniform, then growing batches of random starts.
    let stages = [
        (Initialization::Profile(best.profile.clone()), 1),
        (Initialization::Uniform, 2),
        (Initialization::Random, 4),
        (Initialization::Random, 8),
    ];
    for (stage, (init, count)) in stages.into_iter().enumerate() {
        if close(best.value, upper) || out_of_time() {
            break;
        }
        let cfg = IteratedLpConfig {
            init,
            restarts: count,
            timeout: deadline.saturating_duration_since(Instant::now()),
            seed: derive_seed(config.seed, stage as u64),
            ..Default::default()
        };
        let r = iterated_lp(game, &cfg)?;
        iterations += r.iterations;
        restarts += r.restarts_used;
        best.offer(r.lower_bound, &r.witness);
    }

    if !close(best.value, upper)
        && !out_of_time()
        && game.joint_team_actions() * game.team_size() <= MAX_REFINEMENT_SIZE
    {
        let refined = BoxSearch::new(game)?.run(config, deadline, &mut best)?;
        iterations += refined.nodes;
        upper = upper.min(refined.upper);
    }

    let lower = best.value;
    let upper = upper.max(lower);
    Ok(SolveReport {
        solver: "global".into(),
        lower_bound: lower,
        upper_bound: upper,
        witness: best.profile,
        iterations,
        restarts_used: restarts,
        wall_time: start.elapsed(),
        converged: close(lower, upper),
    })
}

#[derive(Debug, Clone)]
struct Node {
    lo: Vec<Vec<f64>>,
    hi: Vec<Vec<f64>>,
    bound: f64,
    depth: usize,
    id: u64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: largest bound first, older node first on ties
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then_with(|| other.id.cmp(&self.id))
    }
}

struct Refinement {
    upper: f64,
    nodes: u64,
}

struct BoxSearch<'a> {
    game: &'a TeamGame,
    matrix: PayoffMatrix,
    dims: Vec<usize>,
    strides: Vec<usize>,
    /// Joint actions, one tuple per row of `matrix`.
    tuples: Vec<Vec<usize>>,
}

impl<'a> BoxSearch<'a> {
    fn new(game: &'a TeamGame) -> Result<Self> {
        let matrix = to_joint_game(game)?;
        let dims = game.team_actions().to_vec();
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let tuples = (0..matrix.rows())
            .map(|j| dims.iter().zip(&strides).map(|(&m, &s)| (j / s) % m).collect())
            .collect();
        Ok(Self { game, matrix, dims, strides, tuples })
    }

    /// Shrinks bounds implied by the simplex; false if the box is empty.
    fn tighten(lo: &mut [Vec<f64>], hi: &mut [Vec<f64>]) -> bool {
        for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
            for _ in 0..2 {
                let sum_lo: f64 = l.iter().sum();
                let sum_hi: f64 = h.iter().sum();
                if sum_lo > 1.0 + 1e-12 || sum_hi < 1.0 - 1e-12 {
                    return false;
                }
                for a in 0..l.len() {
                    h[a] = h[a].min(1.0 - (sum_lo - l[a])).max(l[a]);
                    l[a] = l[a].max(1.0 - (sum_hi - h[a])).min(h[a]);
                }
            }
        }
        true
    }

    /// Upper bound on the team value over the box, with the LP's marginals.
    fn bound(&self, lo: &[Vec<f64>], hi: &[Vec<f64>]) -> Result<Option<(f64, Vec<Vec<f64>>)>> {
        let joint = self.matrix.rows();
        let v = joint;
        let mut lp = LinearProgram::new(joint + 1);
        let mut objective = vec![0.0; joint + 1];
        objective[v] = 1.0;
        lp.set_objective(objective).set_free(v);

        for c in 0..self.matrix.cols() {
            let mut row: Vec<f64> = (0..joint).map(|j| -self.matrix.get(j, c)).collect();
            row.push(1.0);
            lp.add_le(row, 0.0);
        }
        let mut simplex = vec![1.0; joint];
        simplex.push(0.0);
        lp.add_eq(simplex, 1.0);

        for (i, (l, h)) in lo.iter().zip(hi).enumerate() {
            for a in 0..self.dims[i] {
                let mut row = vec![0.0; joint + 1];
                for (j, t) in self.tuples.iter().enumerate() {
                    if t[i] == a {
                        row[j] = 1.0;
                    }
                }
                if h[a] < 1.0 {
                    lp.add_le(row.clone(), h[a]);
                }
                if l[a] > 0.0 {
                    lp.add_le(row.iter().map(|x| -x).collect(), -l[a]);
                }
            }
        }

        if self.dims.len() > 1 {
            for (j, t) in self.tuples.iter().enumerate() {
                for i in 0..self.dims.len() {
                    let (l, h) = (lo[i][t[i]], hi[i][t[i]]);
                    let base = j - t[i] * self.strides[i];
                    let siblings = (0..self.dims[i]).map(|b| base + b * self.strides[i]);
                    if h < 1.0 {
                        let mut row = vec![0.0; joint + 1];
                        siblings.clone().for_each(|s| row[s] -= h);
                        row[j] += 1.0;
                        lp.add_le(row, 0.0);
                    }
                    if l > 0.0 {
                        let mut row = vec![0.0; joint + 1];
                        siblings.for_each(|s| row[s] += l);
                        row[j] -= 1.0;
                        lp.add_le(row, 0.0);
                    }
                }
            }
        }

        for (j, t) in self.tuples.iter().enumerate() {
            let lo_prod: f64 = t.iter().enumerate().map(|(i, &a)| lo[i][a]).product();
            let hi_prod: f64 = t.iter().enumerate().map(|(i, &a)| hi[i][a]).product();
            if lo_prod > 0.0 {
                lp.set_lower(j, Some(lo_prod));
            }
            if hi_prod < 1.0 {
                let mut row = vec![0.0; joint + 1];
                row[j] = 1.0;
                lp.add_le(row, hi_prod);
            }
        }

        let solution = solve_lp(&lp)?;
        if solution.status != LpStatus::Optimal {
            return Ok(None);
        }
        let p = &solution.variable_values[..joint];
        let marginals = self
            .dims
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let mut out = vec![0.0; m];
                for (j, t) in self.tuples.iter().enumerate() {
                    out[t[i]] += p[j].max(0.0);
                }
                out
            })
            .collect();
        Ok(Some((solution.objective_value + BOUND_SLACK, marginals)))
    }

    fn offer_marginals(&self, marginals: &[Vec<f64>], best: &mut Incumbent) -> Result<()> {
        let strategies = marginals
            .iter()
            .enumerate()
            .map(|(i, w)| MixedStrategy::from_weights(i, w))
            .collect::<Result<Vec<_>>>();
        if let Ok(strategies) = strategies {
            let profile = TeamProfile::new(strategies)?;
            let value = team_value(self.game, &profile)?.value;
            best.offer(value, &profile);
        }
        Ok(())
    }

    fn run(&self, config: &GlobalConfig, deadline: Instant, best: &mut Incumbent) -> Result<Refinement> {
        let mut lo: Vec<Vec<f64>> = self.dims.iter().map(|&m| vec![0.0; m]).collect();
        let mut hi: Vec<Vec<f64>> = self.dims.iter().map(|&m| vec![1.0; m]).collect();
        Self::tighten(&mut lo, &mut hi);
        let mut nodes = 1u64;
        let (root_bound, marginals) = match self.bound(&lo, &hi) {
            Ok(Some(root)) => root,
            // numerical failure; the caller keeps the correlated bound
            Ok(None) | Err(Error::Solver(_)) => return Ok(Refinement { upper: f64::INFINITY, nodes }),
            Err(e) => return Err(e),
        };
        self.offer_marginals(&marginals, best)?;

        let mut heap = BinaryHeap::new();
        heap.push(Node { lo, hi, bound: root_bound, depth: 0, id: 0 });
        let mut next_id = 1u64;
        // bounds of boxes set aside without splitting
        let mut retired = f64::NEG_INFINITY;

        let upper_now = |heap: &BinaryHeap<Node>, retired: f64, best: &Incumbent| {
            heap.peek().map_or(f64::NEG_INFINITY, |n| n.bound).max(retired).max(best.value)
        };

        while let Some(node) = heap.pop() {
            let current_upper = node.bound.max(retired).max(best.value);
            if current_upper - best.value <= config.accuracy
                || nodes as usize >= config.max_nodes
                || Instant::now() >= deadline
            {
                heap.push(node);
                break;
            }
            if node.bound <= best.value + config.accuracy / 2.0 {
                retired = retired.max(node.bound);
                continue;
            }
            // split the widest coordinate
            let (mut member, mut action, mut width) = (0, 0, 0.0);
            for (i, (l, h)) in node.lo.iter().zip(&node.hi).enumerate() {
                for a in 0..l.len() {
                    if h[a] - l[a] > width {
                        (member, action, width) = (i, a, h[a] - l[a]);
                    }
                }
            }
            if node.depth >= config.max_depth || width < 1e-12 {
                retired = retired.max(node.bound);
                continue;
            }
            let mid = 0.5 * (node.lo[member][action] + node.hi[member][action]);
            for side in 0..2 {
                let (mut lo, mut hi) = (node.lo.clone(), node.hi.clone());
                if side == 0 {
                    hi[member][action] = mid;
                } else {
                    lo[member][action] = mid;
                }
                if !Self::tighten(&mut lo, &mut hi) {
                    continue;
                }
                nodes += 1;
                // a non-empty box always has a feasible LP, so a failed solve
                // is numerical; the parent's bound still holds for the child
                let bound = match self.bound(&lo, &hi) {
                    Ok(Some((bound, marginals))) => {
                        self.offer_marginals(&marginals, best)?;
                        bound.min(node.bound)
                    }
                    Ok(None) | Err(Error::Solver(_)) => node.bound,
                    Err(e) => return Err(e),
                };
                heap.push(Node { lo, hi, bound, depth: node.depth + 1, id: next_id });
                next_id += 1;
            }
        }
        Ok(Refinement { upper: upper_now(&heap, retired, best), nodes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_budget_gives_reconstruction_and_correlated_bounds() {
        let mut u = vec![0.0; 8];
        u[0] = 1.0;
        u[7] = 1.0;
        let game = TeamGame::new(vec![2, 2, 2], u).unwrap();
        let cfg = GlobalConfig { budget: Duration::ZERO, ..Default::default() };
        let r = global_optimize(&game, &cfg).unwrap();
        assert!((r.lower_bound - 0.25).abs() < 1e-12);
        assert!((r.upper_bound - 0.5).abs() < 1e-12);
        assert!(!r.converged);
    }

    #[test]
    fn root_box_bound_equals_correlated_value() {
        let u: Vec<f64> = (0..18).map(|i| ((i * 37) % 17) as f64 / 16.0).collect();
        let game = TeamGame::new(vec![3, 3, 2], u).unwrap();
        let search = BoxSearch::new(&game).unwrap();
        let lo = vec![vec![0.0; 3]; 2];
        let hi = vec![vec![1.0; 3]; 2];
        let (bound, _) = search.bound(&lo, &hi).unwrap().unwrap();
        let vc = correlated_team_maxmin(&game).unwrap().value;
        assert!((bound - vc).abs() < 1e-8);
    }

    #[test]
    fn point_box_bound_is_exact() {
        let u: Vec<f64> = (0..8).map(|i| ((i * 5) % 7) as f64 / 6.0).collect();
        let game = TeamGame::new(vec![2, 2, 2], u).unwrap();
        let search = BoxSearch::new(&game).unwrap();
        let s = [vec![0.3, 0.7], vec![0.6, 0.4]];
        let (bound, _) = search.bound(&s, &s).unwrap().unwrap();
        let profile = TeamProfile::from_probs(s.to_vec()).unwrap();
        let v = team_value(&game, &profile).unwrap().value;
        assert!((bound - v).abs() < 1e-8, "{bound} vs {v}");
    }
}
