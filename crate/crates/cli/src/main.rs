//! `teammaxmin` command-line tool.
//!
//! The resolved configuration is printed to stderr as a single `config:`
//! line before any output; results go to stdout. Exit codes: 0 success,
//! 1 verification failed (or a solver failed numerically), 2 usage error,
//! 3 unreadable or invalid input, 4 capacity exceeded.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use teammaxmin::experiment::{generate, run_experiment, write_results, ExperimentConfig, Family};
use teammaxmin::format::{game_to_json, read_full_profile, read_game, read_profile, write_game};
use teammaxmin::solvers::{GlobalConfig, Initialization, IteratedLpConfig, SupportEnumConfig};
use teammaxmin::{
    compute_pou, normalize_payoffs, run_solver, team_value, verify_nash, Error, SolverKind,
    SolverParams, TeamSolver,
};

#[derive(Parser, Debug)]
#[command(name = "teammaxmin", version, about = "Team-maxmin equilibria in adversarial team games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a game from one of the built-in families.
    Generate(GenerateArgs),
    /// Bound the team-maxmin value of a game with one solver.
    Solve(SolveArgs),
    /// Team value of a team profile against a best-responding adversary.
    Evaluate {
        game: PathBuf,
        /// JSON array with one probability array per team member.
        profile: PathBuf,
    },
    /// Check a full profile (team members then adversary) for profitable
    /// pure deviations. Exits 0 when verified, 1 otherwise.
    VerifyNash {
        game: PathBuf,
        profile: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Price of uncorrelation estimate: correlated value over a team lower bound.
    Pou(PouArgs),
    /// Run a batch experiment and write results, failures and aggregate CSVs.
    Experiment {
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Override the worker count of the config (0 = all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FamilyArg {
    Random,
    Diagonal,
    Coordination,
    Poa,
    PouOne,
    Irrational,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Random => Family::Random,
            FamilyArg::Diagonal => Family::Diagonal,
            FamilyArg::Coordination => Family::Coordination,
            FamilyArg::Poa => Family::Poa,
            FamilyArg::PouOne => Family::PouOne,
            FamilyArg::Irrational => Family::Irrational,
        }
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    family: FamilyArg,
    /// Number of players, adversary included (random, diagonal, coordination).
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Actions per player (random, diagonal, coordination).
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Irrational family: use the corrected payoffs (1 and 2) instead of the
    /// negated ones.
    #[arg(long)]
    fixed: bool,
    /// Rescale payoffs to [0, 1].
    #[arg(long)]
    normalize: bool,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SolverArg {
    Correlated,
    Reconstruct,
    IteratedLp,
    SupportEnum,
    Global,
    Oracle,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Correlated => SolverKind::Correlated,
            SolverArg::Reconstruct => SolverKind::Reconstruct,
            SolverArg::IteratedLp => SolverKind::IteratedLp,
            SolverArg::SupportEnum => SolverKind::SupportEnum,
            SolverArg::Global => SolverKind::Global,
            SolverArg::Oracle => SolverKind::Oracle,
        }
    }
}

#[derive(Args, Debug)]
struct SolverOptions {
    /// Additive accuracy of support enumeration.
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Cap on support-enumeration candidates.
    #[arg(long)]
    budget: Option<u64>,
    /// Iterated-LP restarts (the first from uniform, the rest random).
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target gap of the global optimizer.
    #[arg(long, default_value_t = 1e-6)]
    accuracy: f64,
    /// Box limit of the global optimizer.
    #[arg(long, default_value_t = 100_000)]
    max_nodes: usize,
    /// Certified error of the grid oracle.
    #[arg(long, default_value_t = 1e-2)]
    oracle_error: f64,
    /// Per-solve time limit in seconds.
    #[arg(long, default_value_t = 3600)]
    timeout_secs: u64,
}

impl SolverOptions {
    fn params(&self) -> SolverParams {
        SolverParams {
            epsilon: self.epsilon,
            restarts: self.restarts,
            seed: self.seed,
            accuracy: self.accuracy,
            oracle_error: self.oracle_error,
            max_nodes: self.max_nodes,
            budget: self.budget,
        }
    }

    fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    game: PathBuf,
    #[arg(long, value_enum, default_value_t = SolverArg::IteratedLp)]
    solver: SolverArg,
    #[command(flatten)]
    options: SolverOptions,
    /// Also write the JSON report to this file.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PouArgs {
    game: PathBuf,
    /// Solver for the team lower bound (`correlated` is not accepted).
    #[arg(long, value_enum, default_value_t = SolverArg::Reconstruct)]
    solver: SolverArg,
    #[command(flatten)]
    options: SolverOptions,
}

/// Failure kinds that map to distinct exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Verification,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => f.write_str(msg),
            Failure::Verification => f.write_str("verification failed"),
        }
    }
}

impl std::error::Error for Failure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(f) = err.downcast_ref::<Failure>() {
        return match f {
            Failure::Usage(_) => 2,
            Failure::Verification => 1,
        };
    }
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidParameter(_)) => 2,
        Some(Error::Capacity(_)) => 4,
        Some(Error::Solver(_)) => 1,
        Some(_) => 3,
        None => 1,
    }
}

fn load_game(path: &Path) -> Result<teammaxmin::TeamGame> {
    read_game(path).with_context(|| format!("reading game {}", path.display()))
}

fn cmd_generate(args: &GenerateArgs, out: &mut String) -> Result<()> {
    let family = Family::from(args.family);
    eprintln!(
        "config: family={} n={} m={} seed={} fixed={} normalize={}",
        family.as_str(),
        args.n,
        args.m,
        args.seed,
        args.fixed,
        args.normalize
    );
    if matches!(family, Family::Random | Family::Diagonal | Family::Coordination)
        && (args.n < 2 || args.m < 1)
    {
        return Err(Failure::Usage(format!("invalid shape n={} m={}", args.n, args.m)).into());
    }
    let mut game = generate(family, args.n, args.m, args.seed, args.fixed)?;
    if args.normalize {
        let meta = game.meta().clone();
        game = normalize_payoffs(&game).with_meta(meta);
    }
    match &args.out {
        Some(path) => {
            write_game(&game, path).with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "wrote {} ({} outcomes)", path.display(), game.num_outcomes())?;
        }
        None => writeln!(out, "{}", game_to_json(&game)?)?,
    }
    Ok(())
}

fn cmd_solve(args: &SolveArgs, out: &mut String) -> Result<()> {
    let kind = SolverKind::from(args.solver);
    let params = args.options.params();
    eprintln!(
        "config: solver={kind} params=[{}] timeout_secs={} lp_tolerance={:e}",
        params.describe(kind),
        args.options.timeout_secs,
        teammaxmin::lp::SIMPLEX_TOL
    );
    let game = load_game(&args.game)?;
    let report = run_solver(&game, kind, &params, args.options.timeout())?;
    writeln!(out, "solver      {}", report.solver)?;
    writeln!(out, "lower       {:.9}", report.lower_bound)?;
    writeln!(out, "upper       {:.9}", report.upper_bound)?;
    writeln!(out, "ratio       {:.9}", report.ratio())?;
    writeln!(out, "iterations  {}", report.iterations)?;
    writeln!(out, "restarts    {}", report.restarts_used)?;
    writeln!(out, "converged   {}", report.converged)?;
    for (i, s) in report.witness.strategies().iter().enumerate() {
        let probs: Vec<String> = s.probs().iter().map(|p| format!("{p:.6}")).collect();
        writeln!(out, "member {i}    [{}]", probs.join(", "))?;
    }
    eprintln!("wall time: {:.3} ms", report.wall_time.as_secs_f64() * 1e3);
    if let Some(path) = &args.out {
        let text = serde_json::to_string_pretty(&report)? + "\n";
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_evaluate(game: &Path, profile: &Path, out: &mut String) -> Result<()> {
    eprintln!("config: game={} profile={}", game.display(), profile.display());
    let game = load_game(game)?;
    let profile = read_profile(profile).with_context(|| format!("reading profile {}", profile.display()))?;
    let report = team_value(&game, &profile)?;
    writeln!(out, "team value          {:.9}", report.value)?;
    writeln!(out, "adversary response  {}", report.minimizing_adversary_action)?;
    for (a, u) in report.expected_utilities_per_adversary_action.iter().enumerate() {
        writeln!(out, "vs action {a:<9} {u:.9}")?;
    }
    Ok(())
}

fn cmd_verify(game: &Path, profile: &Path, tol: f64, out: &mut String) -> Result<()> {
    eprintln!("config: game={} profile={} tol={tol:e}", game.display(), profile.display());
    if tol.is_nan() || tol < 0.0 {
        return Err(Failure::Usage(format!("tolerance must be non-negative, got {tol}")).into());
    }
    let game = load_game(game)?;
    let (team, adversary) =
        read_full_profile(&game, profile).with_context(|| format!("reading profile {}", profile.display()))?;
    let verdict = verify_nash(&game, &team, &adversary, tol)?;
    writeln!(out, "team utility  {:.9}", verdict.team_utility)?;
    for (player, (gain, dev)) in verdict.max_gain.iter().zip(&verdict.best_deviation).enumerate() {
        let role = if player == game.adversary() { "adversary" } else { "member" };
        writeln!(out, "{role} {player}: max gain {gain:.3e} (action {dev})")?;
    }
    let gap = verdict.max_gain.iter().copied().fold(0.0, f64::max);
    if verdict.is_equilibrium {
        writeln!(out, "verified: no deviation gains more than {tol:e}")?;
        Ok(())
    } else {
        writeln!(out, "rejected: max gap {gap:.9}")?;
        Err(Failure::Verification.into())
    }
}

fn cmd_pou(args: &PouArgs, out: &mut String) -> Result<()> {
    let o = &args.options;
    let solver = match args.solver {
        SolverArg::Correlated => {
            return Err(Failure::Usage("pou needs a team solver, not the correlated one".into()).into())
        }
        SolverArg::Reconstruct => TeamSolver::Reconstruct,
        SolverArg::IteratedLp => TeamSolver::IteratedLp(IteratedLpConfig {
            init: Initialization::Uniform,
            restarts: o.restarts,
            seed: o.seed,
            timeout: o.timeout(),
            ..Default::default()
        }),
        SolverArg::SupportEnum => TeamSolver::SupportEnum(SupportEnumConfig {
            epsilon: o.epsilon,
            budget: o.budget,
            upper_hint: None,
        }),
        SolverArg::Global => TeamSolver::Global(GlobalConfig {
            accuracy: o.accuracy,
            budget: o.timeout(),
            max_nodes: o.max_nodes,
            seed: o.seed,
            ..Default::default()
        }),
        SolverArg::Oracle => TeamSolver::Oracle { target_error: o.oracle_error },
    };
    let kind = SolverKind::from(args.solver);
    eprintln!(
        "config: solver={kind} params=[{}] timeout_secs={}",
        o.params().describe(kind),
        o.timeout_secs
    );
    let game = load_game(&args.game)?;
    let r = compute_pou(&game, &solver)?;
    writeln!(out, "v_correlated  {:.9}", r.v_correlated)?;
    writeln!(out, "v_team_lower  {:.9}", r.v_team_lower)?;
    writeln!(out, "pou_estimate  {:.9}", r.pou_upper_estimate)?;
    writeln!(out, "exact         {}", r.exact)?;
    Ok(())
}

fn cmd_experiment(config: &Path, out_dir: &Path, workers: Option<usize>, out: &mut String) -> Result<()> {
    let mut cfg = ExperimentConfig::read(config).with_context(|| format!("reading config {}", config.display()))?;
    if let Some(w) = workers {
        cfg.workers = w;
    }
    eprintln!(
        "config: file={} master_seed={} timeout_secs={} workers={} record_timing={} instances={} solvers={}",
        config.display(),
        cfg.master_seed,
        cfg.timeout_secs,
        cfg.workers,
        cfg.record_timing,
        cfg.instances.len(),
        cfg.solvers.len()
    );
    let results = run_experiment(&cfg)?;
    write_results(&results, out_dir).with_context(|| format!("writing to {}", out_dir.display()))?;
    writeln!(out, 
        "{} rows, {} failures written to {}",
        results.rows.len(),
        results.failures.len(),
        out_dir.display()
    )?;
    Ok(())
}

/// Writes `text` to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut out = String::new();
    let result = match &cli.command {
        Command::Generate(args) => cmd_generate(args, &mut out),
        Command::Solve(args) => cmd_solve(args, &mut out),
        Command::Evaluate { game, profile } => cmd_evaluate(game, profile, &mut out),
        Command::VerifyNash { game, profile, tol } => cmd_verify(game, profile, *tol, &mut out),
        Command::Pou(args) => cmd_pou(args, &mut out),
        Command::Experiment { config, out_dir, workers } => cmd_experiment(config, out_dir, *workers, &mut out),
    };
    emit(&out)?;
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit_code(&err);
            if !matches!(err.downcast_ref::<Failure>(), Some(Failure::Verification)) {
                eprintln!("error: {err:#}");
            }
            ExitCode::from(code)
        }
    }
}
