//! Dense linear programming.
//!
//! [`solve_lp`] is a two-phase tableau simplex using Bland's rule for both
//! the entering and the leaving variable, so it always terminates and, on
//! degenerate problems, returns the first optimal basis it reaches. Problems
//! here are small (a payoff matrix plus a simplex constraint) and
//! reproducibility matters more than speed.

use std::fmt;

use crate::error::{Error, Result};
use crate::game::{member_payoff_matrix, PayoffMatrix, TeamGame, TeamProfile};

/// Feasibility and optimality tolerance of the simplex.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Residual bound checked on every optimal solution.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Consecutive degenerate pivots before pricing falls back to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

/// `maximize c.x` subject to `A_le x <= b_le`, `A_eq x = b_eq` and
/// per-variable lower bounds (`None` means free).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    le: Vec<(Vec<f64>, f64)>,
    eq: Vec<(Vec<f64>, f64)>,
    lower: Vec<Option<f64>>,
}

impl LinearProgram {
    /// An LP over `num_vars` non-negative variables with a zero objective.
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            le: Vec::new(),
            eq: Vec::new(),
            lower: vec![Some(0.0); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) -> &mut Self {
        assert_eq!(objective.len(), self.num_vars(), "objective length");
        self.objective = objective;
        self
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint length");
        self.le.push((coeffs, rhs));
        self
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint length");
        self.eq.push((coeffs, rhs));
        self
    }

    pub fn set_lower(&mut self, var: usize, lower: Option<f64>) -> &mut Self {
        self.lower[var] = lower;
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.set_lower(var, None)
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn le_constraints(&self) -> &[(Vec<f64>, f64)] {
        &self.le
    }

    pub fn eq_constraints(&self) -> &[(Vec<f64>, f64)] {
        &self.eq
    }

    pub fn lower_bounds(&self) -> &[Option<f64>] {
        &self.lower
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.objective)
            || self.le.iter().chain(&self.eq).any(|(a, b)| !finite(a) || !b.is_finite())
            || self.lower.iter().flatten().any(|l| !l.is_finite())
        {
            return Err(Error::InvalidParameter("LP has non-finite coefficients".into()));
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`, each scaled by
    /// `1 + |rhs|`.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let dot = |a: &[f64]| a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>();
        let le = self.le.iter().map(|(a, b)| (dot(a) - b).max(0.0) / (1.0 + b.abs()));
        let eq = self.eq.iter().map(|(a, b)| (dot(a) - b).abs() / (1.0 + b.abs()));
        let bounds = self
            .lower
            .iter()
            .zip(x)
            .filter_map(|(l, x)| l.map(|l| (l - x).max(0.0) / (1.0 + l.abs())));
        le.chain(eq).chain(bounds).fold(0.0, f64::max)
    }
}

/// Writes the LP in CPLEX LP text format for cross-checking with external
/// solvers.
impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn expr(coeffs: &[f64]) -> String {
            let terms: Vec<String> = coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, c)| if *c < 0.0 { format!("- {} x{j}", -c) } else { format!("+ {c} x{j}") })
                .collect();
            if terms.is_empty() {
                "0 x0".to_string()
            } else {
                terms.join(" ")
            }
        }
        writeln!(f, "Maximize")?;
        writeln!(f, " obj: {}", expr(&self.objective))?;
        writeln!(f, "Subject To")?;
        for (i, (a, b)) in self.le.iter().enumerate() {
            writeln!(f, " le{i}: {} <= {b}", expr(a))?;
        }
        for (i, (a, b)) in self.eq.iter().enumerate() {
            writeln!(f, " eq{i}: {} = {b}", expr(a))?;
        }
        writeln!(f, "Bounds")?;
        for (j, l) in self.lower.iter().enumerate() {
            match l {
                Some(l) => writeln!(f, " x{j} >= {l}")?,
                None => writeln!(f, " x{j} free")?,
            }
        }
        writeln!(f, "End")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// `c.x` at the returned point; NaN unless optimal.
    pub objective_value: f64,
    /// Empty unless optimal.
    pub variable_values: Vec<f64>,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        Self { status, objective_value: f64::NAN, variable_values: Vec::new() }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// How an original variable maps onto non-negative tableau columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lower + y`
    Shifted { col: usize, lower: f64 },
    /// `x = y_plus - y_minus`
    Split { plus: usize, minus: usize },
}

struct Tableau {
    /// `rows[i]` holds the constraint coefficients followed by the rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Reduced costs for the current phase objective (last entry: -value).
    reduced: Vec<f64>,
    /// Columns allowed to enter the basis.
    allowed: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
}

enum Pivoting {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.allowed.len()
    }

    fn set_objective(&mut self, cost: &[f64]) {
        let n = self.ncols();
        let mut reduced = vec![0.0; n + 1];
        reduced[..n].copy_from_slice(cost);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (r, &t) in reduced.iter_mut().zip(row) {
                    *r -= cb * t;
                }
            }
        }
        self.reduced = reduced;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for t in self.rows[r].iter_mut() {
            *t /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (t, &pr) in row.iter_mut().zip(&pivot_row) {
                    *t -= f * pr;
                }
                row[c] = 0.0;
            }
        }
        let f = self.reduced[c];
        if f != 0.0 {
            for (t, &pr) in self.reduced.iter_mut().zip(&pivot_row) {
                *t -= f * pr;
            }
            self.reduced[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Dantzig pricing; after a run of degenerate pivots switches to Bland's
    /// rule (lowest-index entering column, lowest-index leaving variable on
    /// ties) until the objective moves again, which rules out cycling.
    fn run(&mut self) -> Result<Pivoting> {
        let rhs = self.ncols();
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_LIMIT;
            let improving = (0..self.ncols()).filter(|&j| self.allowed[j] && self.reduced[j] > SIMPLEX_TOL);
            let entering = if bland {
                improving.min()
            } else {
                improving.max_by(|&a, &b| self.reduced[a].total_cmp(&self.reduced[b]).then(b.cmp(&a)))
            };
            let Some(c) = entering else {
                return Ok(Pivoting::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a <= SIMPLEX_TOL {
                    continue;
                }
                let ratio = row[rhs].max(0.0) / a;
                let better = match leave {
                    None => true,
                    Some((bi, br)) => {
                        if ratio < br - 1e-12 {
                            true
                        } else if ratio > br + 1e-12 {
                            false
                        } else if bland {
                            self.basis[i] < self.basis[bi]
                        } else {
                            a > self.rows[bi][c]
                        }
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(Pivoting::Unbounded);
            };
            if ratio * self.reduced[c] <= SIMPLEX_TOL * 1e-3 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::Solver(format!(
                    "simplex exceeded {} pivots on a {}x{} tableau",
                    self.max_iterations,
                    self.rows.len(),
                    self.ncols()
                )));
            }
            self.pivot(r, c);
        }
    }
}

/// Solves `B z = rhs` by Gaussian elimination with partial pivoting; `None`
/// if `B` is numerically singular.
fn solve_dense(mut b: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| b[i][k].abs().total_cmp(&b[j][k].abs()))?;
        if b[p][k].abs() < 1e-13 {
            return None;
        }
        b.swap(k, p);
        rhs.swap(k, p);
        for i in k + 1..n {
            let f = b[i][k] / b[k][k];
            if f != 0.0 {
                let (top, bottom) = b.split_at_mut(i);
                for (x, &y) in bottom[0][k..].iter_mut().zip(&top[k][k..]) {
                    *x -= f * y;
                }
                rhs[i] -= f * rhs[k];
            }
        }
    }
    let mut z = vec![0.0; n];
    for k in (0..n).rev() {
        let tail: f64 = (k + 1..n).map(|j| b[k][j] * z[j]).sum();
        z[k] = (rhs[k] - tail) / b[k][k];
    }
    Some(z)
}

/// Solves `lp` to optimality or reports infeasibility/unboundedness.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;

    let mut maps = Vec::with_capacity(lp.num_vars());
    let mut ncols = 0;
    for l in &lp.lower {
        match l {
            Some(lower) => {
                maps.push(VarMap::Shifted { col: ncols, lower: *lower });
                ncols += 1;
            }
            None => {
                maps.push(VarMap::Split { plus: ncols, minus: ncols + 1 });
                ncols += 2;
            }
        }
    }
    let structural = ncols;

    // Rewrite a constraint over tableau columns; returns (coeffs, rhs).
    let transform = |a: &[f64], b: f64| -> (Vec<f64>, f64) {
        let mut row = vec![0.0; structural];
        let mut rhs = b;
        for (&aj, map) in a.iter().zip(&maps) {
            match *map {
                VarMap::Shifted { col, lower } => {
                    row[col] = aj;
                    rhs -= aj * lower;
                }
                VarMap::Split { plus, minus } => {
                    row[plus] = aj;
                    row[minus] = -aj;
                }
            }
        }
        (row, rhs)
    };

    struct Pending {
        coeffs: Vec<f64>,
        rhs: f64,
        slack: Option<f64>,
    }
    let mut pending = Vec::with_capacity(lp.le.len() + lp.eq.len());
    for (a, b) in &lp.le {
        let (coeffs, rhs) = transform(a, *b);
        pending.push(Pending { coeffs, rhs, slack: Some(1.0) });
    }
    for (a, b) in &lp.eq {
        let (coeffs, rhs) = transform(a, *b);
        pending.push(Pending { coeffs, rhs, slack: None });
    }

    let num_slack = lp.le.len();
    let needs_artificial: Vec<bool> = pending.iter().map(|p| p.slack.is_none() || p.rhs < 0.0).collect();
    let num_art = needs_artificial.iter().filter(|&&x| x).count();
    let total = structural + num_slack + num_art;

    let mut rows = Vec::with_capacity(pending.len());
    let mut basis = Vec::with_capacity(pending.len());
    let mut slack_col = structural;
    let mut art_col = structural + num_slack;
    for (p, &art) in pending.iter().zip(&needs_artificial) {
        let mut row = vec![0.0; total + 1];
        let sign = if p.rhs < 0.0 { -1.0 } else { 1.0 };
        for (dst, &c) in row.iter_mut().zip(&p.coeffs) {
            *dst = sign * c;
        }
        row[total] = sign * p.rhs;
        if p.slack.is_some() {
            row[slack_col] = sign;
            if !art {
                basis.push(slack_col);
            }
            slack_col += 1;
        }
        if art {
            row[art_col] = 1.0;
            basis.push(art_col);
            art_col += 1;
        }
        rows.push(row);
    }

    let original = rows.clone();
    let mut row_ids: Vec<usize> = (0..rows.len()).collect();
    let mut tableau = Tableau {
        max_iterations: 50 * (rows.len() + total) + 10_000,
        rows,
        basis,
        reduced: Vec::new(),
        allowed: vec![true; total],
        iterations: 0,
    };
    let is_artificial = |c: usize| c >= structural + num_slack;

    if num_art > 0 {
        let cost: Vec<f64> = (0..total).map(|c| if is_artificial(c) { -1.0 } else { 0.0 }).collect();
        tableau.set_objective(&cost);
        tableau.run()?;
        let infeasibility: f64 = tableau
            .rows
            .iter()
            .zip(&tableau.basis)
            .filter(|(_, &b)| is_artificial(b))
            .map(|(row, _)| row[total])
            .sum();
        let scale = 1.0 + pending.iter().map(|p| p.rhs.abs()).fold(0.0, f64::max);
        if infeasibility > SIMPLEX_TOL * scale {
            return Ok(LpSolution::without_point(LpStatus::Infeasible));
        }
        // Drive zero-level artificials out; rows where that is impossible are
        // redundant and dropped.
        let mut r = 0;
        while r < tableau.rows.len() {
            if is_artificial(tableau.basis[r]) {
                let col = (0..structural + num_slack)
                    .filter(|&c| tableau.rows[r][c].abs() > SIMPLEX_TOL)
                    .max_by(|&a, &b| tableau.rows[r][a].abs().total_cmp(&tableau.rows[r][b].abs()));
                match col {
                    Some(c) => tableau.pivot(r, c),
                    None => {
                        tableau.rows.remove(r);
                        tableau.basis.remove(r);
                        row_ids.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for c in structural + num_slack..total {
            tableau.allowed[c] = false;
        }
    }

    let mut cost = vec![0.0; total];
    for (&cj, map) in lp.objective.iter().zip(&maps) {
        match *map {
            VarMap::Shifted { col, .. } => cost[col] = cj,
            VarMap::Split { plus, minus } => {
                cost[plus] = cj;
                cost[minus] = -cj;
            }
        }
    }
    tableau.set_objective(&cost);
    if let Pivoting::Unbounded = tableau.run()? {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }

    let to_original = |y: &[f64]| -> Vec<f64> {
        maps.iter()
            .map(|m| match *m {
                VarMap::Shifted { col, lower } => lower + y[col],
                VarMap::Split { plus, minus } => y[plus] - y[minus],
            })
            .collect()
    };
    let mut y = vec![0.0; total];
    for (row, &b) in tableau.rows.iter().zip(&tableau.basis) {
        y[b] = row[total].max(0.0);
    }
    let mut x = to_original(&y);
    let mut residual = lp.max_residual(&x);

    // Recompute the basic solution from the original rows; pivoting
    // accumulates round-off that a fresh factorization removes.
    if residual > 0.0 {
        let b: Vec<Vec<f64>> = row_ids
            .iter()
            .map(|&i| tableau.basis.iter().map(|&c| original[i][c]).collect())
            .collect();
        let rhs: Vec<f64> = row_ids.iter().map(|&i| original[i][total]).collect();
        if let Some(z) = solve_dense(b, rhs) {
            let mut y = vec![0.0; total];
            for (&c, &v) in tableau.basis.iter().zip(&z) {
                y[c] = v.max(0.0);
            }
            let refined = to_original(&y);
            let refined_residual = lp.max_residual(&refined);
            if refined_residual < residual {
                x = refined;
                residual = refined_residual;
            }
        }
    }
    if residual > RESIDUAL_TOL {
        return Err(Error::Solver(format!(
            "optimal basis violates constraints by {residual:e} (numerically singular basis?)"
        )));
    }
    let objective_value = lp.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
    Ok(LpSolution { status: LpStatus::Optimal, objective_value, variable_values: x })
}

/// Maxmin LP of a zero-sum matrix game for the row player. Variables are the
/// row probabilities followed by the free game value `v`.
pub fn build_maxmin_lp(matrix: &PayoffMatrix) -> LinearProgram {
    let rows = matrix.rows();
    let v = rows;
    let mut lp = LinearProgram::new(rows + 1);
    let mut objective = vec![0.0; rows + 1];
    objective[v] = 1.0;
    lp.set_objective(objective).set_free(v);
    for c in 0..matrix.cols() {
        let mut coeffs: Vec<f64> = (0..rows).map(|r| -matrix.get(r, c)).collect();
        coeffs.push(1.0);
        lp.add_le(coeffs, 0.0);
    }
    let mut simplex = vec![1.0; rows];
    simplex.push(0.0);
    lp.add_eq(simplex, 1.0);
    lp
}

/// The row player's optimal strategy and the value it guarantees.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxminSolution {
    pub value: f64,
    pub strategy: Vec<f64>,
}

/// Solves the maxmin LP of `matrix`. The returned strategy is cleaned of
/// round-off (clamped at zero, renormalized) and `value` is recomputed from
/// it exactly.
pub fn solve_maxmin(matrix: &PayoffMatrix) -> Result<MaxminSolution> {
    let solution = solve_lp(&build_maxmin_lp(matrix))?;
    match solution.status {
        LpStatus::Optimal => {}
        status => {
            return Err(Error::Solver(format!("maxmin LP reported {status:?}")));
        }
    }
    let mut strategy: Vec<f64> =
        solution.variable_values[..matrix.rows()].iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = strategy.iter().sum();
    strategy.iter_mut().for_each(|x| *x /= total);
    let value = matrix.column_payoffs(&strategy).into_iter().fold(f64::INFINITY, f64::min);
    Ok(MaxminSolution { value, strategy })
}

/// LP re-optimizing one team member while the others keep their strategies
/// in `profile`: the maxmin LP over that member's payoff matrix.
pub fn build_best_response_lp(
    game: &TeamGame,
    profile: &TeamProfile,
    optimizing_member: usize,
) -> Result<LinearProgram> {
    Ok(build_maxmin_lp(&member_payoff_matrix(game, profile, optimizing_member)?))
}
