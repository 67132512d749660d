//! Batch experiments: generate instances, run solvers, write CSV tables.
//!
//! A config is a JSON object:
//!
//! ```json
//! {
//!   "master_seed": 0,
//!   "timeout_secs": 3600,
//!   "workers": 0,
//!   "record_timing": true,
//!   "instances": [
//!     { "generator": "random", "n": [3], "m": [2, 3], "count": 5 },
//!     { "generator": "diagonal", "n": [3], "m": [2], "seeds": [1, 2] },
//!     { "generator": "irrational", "fixed_sign": true, "normalize": true }
//!   ],
//!   "solvers": [
//!     { "name": "reconstruct" },
//!     { "name": "iterated-lp", "params": { "restarts": 10, "seed": 3 } }
//!   ]
//! }
//! ```
//!
//! Each instance spec expands to every `(n, m)` pair times every seed.
//! Seeds come from `seeds` or, with `count`, from
//! `derive_seed(master_seed, k)`. Families with a fixed shape (`poa`,
//! `pou-one`, `irrational`) ignore `n` and `m`. `workers = 0` uses all cores;
//! with `record_timing = false` the `wall_ms` column is written as 0 so that
//! replays are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{normalize_payoffs, TeamGame};
use crate::generators::{
    coordination_game, diagonal_game, irrational_game, poa_game, pou_one_game, random_team_game,
};
use crate::metrics::{run_solver, SolverKind, SolverParams};
use crate::rng::derive_seed;
use crate::solvers::bound_ratio;

/// Column order of the results table.
pub const RESULT_HEADER: [&str; 14] = [
    "instance_id",
    "generator",
    "n",
    "m",
    "seed",
    "solver",
    "params",
    "lower",
    "upper",
    "ratio",
    "iterations",
    "restarts",
    "wall_ms",
    "converged",
];

pub const FAILURE_HEADER: [&str; 3] = ["instance_id", "solver", "error"];

pub const AGGREGATE_HEADER: [&str; 13] = [
    "generator",
    "n",
    "m",
    "solver",
    "count",
    "failures",
    "ratio_mean",
    "ratio_q1",
    "ratio_median",
    "ratio_q3",
    "lower_mean",
    "upper_mean",
    "wall_ms_mean",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Random,
    Diagonal,
    Coordination,
    Poa,
    PouOne,
    Irrational,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Random => "random",
            Family::Diagonal => "diagonal",
            Family::Coordination => "coordination",
            Family::Poa => "poa",
            Family::PouOne => "pou-one",
            Family::Irrational => "irrational",
        }
    }

    fn is_sized(self) -> bool {
        matches!(self, Family::Random | Family::Diagonal | Family::Coordination)
    }
}

/// Builds one instance of `family`.
pub fn generate(family: Family, n: usize, m: usize, seed: u64, fixed_sign: bool) -> Result<TeamGame> {
    Ok(match family {
        Family::Random => random_team_game(n, m, seed)?,
        Family::Diagonal => diagonal_game(n, m)?.0,
        Family::Coordination => coordination_game(n, m)?.0,
        Family::Poa => poa_game().0,
        Family::PouOne => pou_one_game().0,
        Family::Irrational => irrational_game(fixed_sign).0,
    })
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub generator: Family,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub m: Vec<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub count: Option<usize>,
    /// Rescale payoffs to `[0, 1]` before solving.
    #[serde(default)]
    pub normalize: bool,
    #[serde(default = "default_true")]
    pub fixed_sign: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub name: SolverKind,
    #[serde(default)]
    pub params: SolverParams,
}

fn default_timeout() -> u64 {
    crate::solvers::DEFAULT_TIMEOUT.as_secs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_true")]
    pub record_timing: bool,
    #[serde(default)]
    pub instances: Vec<InstanceSpec>,
    #[serde(default)]
    pub solvers: Vec<SolverSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// One generated instance of an experiment.
#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub family: Family,
    pub seed: u64,
    pub game: TeamGame,
}

/// Expands the instance specs of `config` in order.
pub fn expand_instances(config: &ExperimentConfig) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for (spec_idx, spec) in config.instances.iter().enumerate() {
        let seeds: Vec<u64> = match (spec.count, spec.seeds.is_empty()) {
            (Some(_), false) => {
                return Err(Error::param(format!("instance spec {spec_idx}: give either seeds or count")))
            }
            (Some(count), true) => (0..count as u64).map(|k| derive_seed(config.master_seed, k)).collect(),
            (None, false) => spec.seeds.clone(),
            (None, true) => vec![config.master_seed],
        };
        let shapes: Vec<(usize, usize)> = if spec.generator.is_sized() {
            if spec.n.is_empty() || spec.m.is_empty() {
                return Err(Error::param(format!(
                    "instance spec {spec_idx}: family {} needs n and m",
                    spec.generator.as_str()
                )));
            }
            spec.n.iter().flat_map(|&n| spec.m.iter().map(move |&m| (n, m))).collect()
        } else {
            vec![(0, 0)]
        };
        for &(n, m) in &shapes {
            for (k, &seed) in seeds.iter().enumerate() {
                let mut game = generate(spec.generator, n, m, seed, spec.fixed_sign)?;
                if spec.normalize {
                    let meta = game.meta().clone();
                    game = normalize_payoffs(&game).with_meta(meta);
                }
                let id = format!(
                    "s{spec_idx:02}-{}-n{}-m{}-k{k:04}",
                    spec.generator.as_str(),
                    game.num_players(),
                    game.max_team_actions()
                );
                out.push(Instance { id, family: spec.generator, seed, game });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance_id: String,
    pub generator: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub solver: String,
    pub params: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub ratio: Option<f64>,
    pub iterations: u64,
    pub restarts: u32,
    pub wall_ms: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRow {
    pub instance_id: String,
    pub solver: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub generator: String,
    pub n: usize,
    pub m: usize,
    pub solver: String,
    pub count: usize,
    pub failures: usize,
    pub ratio_mean: Option<f64>,
    pub ratio_q1: Option<f64>,
    pub ratio_median: Option<f64>,
    pub ratio_q3: Option<f64>,
    pub lower_mean: Option<f64>,
    pub upper_mean: Option<f64>,
    pub wall_ms_mean: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResults {
    /// Sorted by instance id, then solver name.
    pub rows: Vec<ResultRow>,
    pub failures: Vec<FailureRow>,
}

fn run_one(instance: &Instance, spec: &SolverSpec, timeout: Duration, record_timing: bool) -> (ResultRow, Option<FailureRow>) {
    let game = &instance.game;
    let mut row = ResultRow {
        instance_id: instance.id.clone(),
        generator: instance.family.as_str().to_string(),
        n: game.num_players(),
        m: game.max_team_actions(),
        seed: instance.seed,
        solver: spec.name.to_string(),
        params: spec.params.describe(spec.name),
        lower: None,
        upper: None,
        ratio: None,
        iterations: 0,
        restarts: 0,
        wall_ms: 0.0,
        converged: false,
    };
    match run_solver(game, spec.name, &spec.params, timeout) {
        Ok(report) => {
            row.lower = Some(report.lower_bound);
            row.upper = Some(report.upper_bound);
            row.ratio = Some(bound_ratio(report.lower_bound, report.upper_bound));
            row.iterations = report.iterations;
            row.restarts = report.restarts_used;
            row.converged = report.converged;
            if record_timing {
                row.wall_ms = report.wall_time.as_secs_f64() * 1e3;
            }
            (row, None)
        }
        Err(e) => {
            let failure =
                FailureRow { instance_id: instance.id.clone(), solver: spec.name.to_string(), error: e.to_string() };
            (row, Some(failure))
        }
    }
}

/// Runs every solver on every instance. Solver errors are recorded as
/// failure rows and never abort the batch; errors in the config itself do.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults> {
    let instances = expand_instances(config)?;
    let timeout = Duration::from_secs(config.timeout_secs);
    let jobs: Vec<(&Instance, &SolverSpec)> = instances
        .iter()
        .flat_map(|inst| config.solvers.iter().map(move |s| (inst, s)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<(ResultRow, Option<FailureRow>)> = pool.install(|| {
        jobs.par_iter()
            .map(|(inst, spec)| run_one(inst, spec, timeout, config.record_timing))
            .collect()
    });

    let mut results = ExperimentResults::default();
    for (row, failure) in outcomes {
        results.rows.push(row);
        results.failures.extend(failure);
    }
    results.rows.sort_by(|a, b| (&a.instance_id, &a.solver).cmp(&(&b.instance_id, &b.solver)));
    results.failures.sort_by(|a, b| (&a.instance_id, &a.solver).cmp(&(&b.instance_id, &b.solver)));
    Ok(results)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

/// Mean and quartiles per `(generator, n, m, solver)` cell.
pub fn aggregate(rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<(String, usize, usize, String), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        cells.entry((r.generator.clone(), r.n, r.m, r.solver.clone())).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((generator, n, m, solver), rs)| {
            let ok: Vec<&&ResultRow> = rs.iter().filter(|r| r.ratio.is_some()).collect();
            let mut ratios: Vec<f64> = ok.iter().filter_map(|r| r.ratio).collect();
            ratios.sort_by(f64::total_cmp);
            let lowers: Vec<f64> = ok.iter().filter_map(|r| r.lower).collect();
            let uppers: Vec<f64> = ok.iter().filter_map(|r| r.upper).collect();
            let times: Vec<f64> = ok.iter().map(|r| r.wall_ms).collect();
            AggregateRow {
                generator,
                n,
                m,
                solver,
                count: ok.len(),
                failures: rs.len() - ok.len(),
                ratio_mean: mean(&ratios),
                ratio_q1: quantile(&ratios, 0.25),
                ratio_median: quantile(&ratios, 0.5),
                ratio_q3: quantile(&ratios, 0.75),
                lower_mean: mean(&lowers),
                upper_mean: mean(&uppers),
                wall_ms_mean: mean(&times),
            }
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `results.csv`, `failures.csv` and `aggregate.csv` into `dir`.
pub fn write_results(results: &ExperimentResults, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_csv(&dir.join("results.csv"), &RESULT_HEADER, &results.rows)?;
    write_csv(&dir.join("failures.csv"), &FAILURE_HEADER, &results.failures)?;
    write_csv(&dir.join("aggregate.csv"), &AGGREGATE_HEADER, &aggregate(&results.rows))?;
    Ok(())
}
