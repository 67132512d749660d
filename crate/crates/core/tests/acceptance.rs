//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a hard criterion fails unexpectedly. Criterion 8 is soft:
//! exceeding its upper limit prints WARN. A criterion listed with a known
//! failure reason still prints FAIL, followed by the reason.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use teammaxmin::experiment::{run_experiment, write_results, ExperimentConfig};
use teammaxmin::generators::{
    coordination_game, diagonal_game, irrational_game, poa_game, random_team_game,
};
use teammaxmin::rng::{derive_seed, SplitMix64};
use teammaxmin::solvers::{
    candidate_count, correlated_team_maxmin, global_optimize, grid_oracle, iterated_lp_traced,
    reconstruct_best_pivot, support_enumeration, EnumerationParams, GlobalConfig, Initialization,
    IteratedLpConfig, SupportEnumConfig,
};
use teammaxmin::{
    approximation_ratio, compute_pou, normalize_payoffs, solve_maxmin, verify_nash, MixedStrategy,
    PayoffMatrix, SolveReport, TeamProfile, TeamSolver,
};

enum Verdict {
    Pass(String),
    Warn(String),
    Fail(String),
}

type Outcome = Result<Verdict, Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn() -> Outcome, Option<&'static str>);

fn check(cond: bool, failures: &mut Vec<String>, msg: impl FnOnce() -> String) {
    if !cond {
        failures.push(msg());
    }
}

fn finish(failures: Vec<String>, summary: String, elapsed: Duration, limit: Duration) -> Verdict {
    let mut failures = failures;
    if elapsed > limit {
        failures.push(format!("took {elapsed:.2?}, limit {limit:?}"));
    }
    if failures.is_empty() {
        Verdict::Pass(format!("{summary} [{elapsed:.2?}]"))
    } else {
        Verdict::Fail(format!("{} | {summary} [{elapsed:.2?}]", failures.join("; ")))
    }
}

fn diagonal_family() -> Outcome {
    let start = Instant::now();
    let mut fails = Vec::new();
    for (n, m) in [(3, 2), (3, 3), (3, 4), (4, 2)] {
        let (game, _) = diagonal_game(n, m)?;
        let mf = m as f64;
        let vc = correlated_team_maxmin(&game)?.value;
        check((vc - 1.0 / mf).abs() <= 1e-9, &mut fails, || format!("n={n} m={m}: v_C = {vc}"));
        let lower = reconstruct_best_pivot(&game)?.lower_bound;
        let expected = mf.powi(-(n as i32 - 1));
        check((lower - expected).abs() <= 1e-9, &mut fails, || {
            format!("n={n} m={m}: reconstruction {lower}, expected {expected}")
        });
        let pou = compute_pou(&game, &TeamSolver::Reconstruct)?.pou_upper_estimate;
        let expected = mf.powi(n as i32 - 2);
        check((pou - expected).abs() <= 1e-7, &mut fails, || {
            format!("n={n} m={m}: PoU {pou}, expected {expected}")
        });
    }
    Ok(finish(fails, "v_C = 1/m, reconstruction 1/m^(n-1), PoU m^(n-2)".into(), start.elapsed(), Duration::from_secs(5)))
}

fn anarchy_instance() -> Outcome {
    let start = Instant::now();
    let mut fails = Vec::new();
    let (game, _) = poa_game();
    let oracle = grid_oracle(&game, 1e-3)?;
    check((oracle.value - 0.25).abs() <= 1e-3, &mut fails, || format!("oracle {}", oracle.value));

    let adv = |a: usize| MixedStrategy::pure(2, 2, a);
    let profiles = [
        ("(1,1,0)", TeamProfile::pure(&game, &[1, 1])?, adv(0)?),
        ("(0,0,1)", TeamProfile::pure(&game, &[0, 0])?, adv(1)?),
        ("uniform", TeamProfile::uniform(&game), MixedStrategy::uniform(2, 2)),
    ];
    for (label, team, adversary) in &profiles {
        let v = verify_nash(&game, team, adversary, 1e-9)?;
        check(v.is_equilibrium, &mut fails, || format!("{label} rejected, gains {:?}", v.max_gain));
    }
    let maxmin = SolveReport::from_profile(&game, TeamProfile::uniform(&game), "team-maxmin")?;
    let worst_ne = SolveReport::from_profile(&game, TeamProfile::pure(&game, &[1, 1])?, "worst-ne")?;
    let poa = approximation_ratio(&maxmin, &worst_ne).ratio;
    check(poa.is_infinite(), &mut fails, || format!("PoA {poa}"));
    Ok(finish(
        fails,
        format!("oracle {:.6} (err {:.1e}), 3 equilibria verified, PoA {poa}", oracle.value, oracle.error_bound),
        start.elapsed(),
        Duration::from_secs(10),
    ))
}

fn irrational_instance() -> Outcome {
    let start = Instant::now();
    let mut fails = Vec::new();
    let (game, _) = irrational_game(true);
    let target = 6.0 - 4.0 * 2f64.sqrt();
    let root = 2.0 - 2f64.sqrt();

    let raw = grid_oracle(&game, 1e-3)?;
    check((raw.value - target).abs() <= 2e-3, &mut fails, || format!("oracle {} vs {target}", raw.value));
    let oracle = grid_oracle(&normalize_payoffs(&game), 1e-3)?;
    check((oracle.value - target / 2.0).abs() <= 1e-3, &mut fails, || {
        format!("normalized oracle {} vs {}", oracle.value, target / 2.0)
    });

    let cfg = IteratedLpConfig { init: Initialization::Random, restarts: 10, seed: 0, ..Default::default() };
    let (report, _) = iterated_lp_traced(&game, &cfg)?;
    check((report.lower_bound - target).abs() <= 1e-3, &mut fails, || {
        format!("iterated LP value {:.6} vs {target:.6}", report.lower_bound)
    });
    let witness = report.witness.to_vecs();
    let off = witness.iter().map(|s| (s[0] - root).abs()).fold(0.0, f64::max);
    check(off <= 1e-2, &mut fails, || format!("witness {witness:?} is {off:.4} from {root:.4}"));
    Ok(finish(
        fails,
        format!(
            "oracle {:.6} (normalized {:.6}), iterated LP {:.6}, witness off by {off:.1e}",
            raw.value, oracle.value, report.lower_bound
        ),
        start.elapsed(),
        Duration::from_secs(60),
    ))
}

fn uniform_fixed_point() -> Outcome {
    let start = Instant::now();
    let mut fails = Vec::new();
    for m in [2usize, 3] {
        let (game, _) = coordination_game(3, m)?;
        let (r, traces) = iterated_lp_traced(&game, &IteratedLpConfig::with_init(Initialization::Uniform))?;
        let expected = 1.0 / m as f64;
        check((r.lower_bound - expected).abs() <= 1e-9, &mut fails, || {
            format!("m={m}: uniform start ends at {}", r.lower_bound)
        });
        check(traces[0].rounds <= 2, &mut fails, || format!("m={m}: {} rounds", traces[0].rounds));
        let pure = IteratedLpConfig::with_init(Initialization::Pure(vec![0, 0]));
        let (r, _) = iterated_lp_traced(&game, &pure)?;
        check(r.lower_bound == 1.0, &mut fails, || format!("m={m}: diagonal start ends at {}", r.lower_bound));
    }
    Ok(finish(fails, "uniform stays at 1/m, diagonal start gives 1".into(), start.elapsed(), Duration::from_secs(5)))
}

fn enumeration_counts() -> Outcome {
    let start = Instant::now();
    let mut fails = Vec::new();
    let game = random_team_game(3, 5, 5)?;
    let mut seen = Vec::new();
    for (eps, expected) in [(0.5, 4900u64), (0.9, 25)] {
        let gamma = EnumerationParams::for_game(eps, &game)?.gamma();
        let r = support_enumeration(&game, &SupportEnumConfig::new(eps))?;
        check(r.iterations == expected, &mut fails, || format!("eps={eps}: visited {}", r.iterations));
        check(candidate_count(&game, gamma) == Some(expected as u128), &mut fails, || {
            format!("eps={eps}: predicted count differs")
        });
        seen.push(r.iterations);
    }
    Ok(finish(fails, format!("visited {seen:?}"), start.elapsed(), Duration::from_secs(30)))
}

fn enumeration_guarantee() -> Outcome {
    let start = Instant::now();
    let mut fails = Vec::new();
    let mut worst_slack = f64::INFINITY;
    for k in 0..20u64 {
        let game = random_team_game(3, 3, derive_seed(6, k))?;
        let oracle = grid_oracle(&game, 0.02)?;
        for eps in [0.5, 1.0] {
            let r = support_enumeration(&game, &SupportEnumConfig::new(eps))?;
            let slack = r.lower_bound - (oracle.value - eps - oracle.error_bound);
            worst_slack = worst_slack.min(slack);
            check(slack >= 0.0, &mut fails, || {
                format!("game {k} eps={eps}: lower {} oracle {}", r.lower_bound, oracle.value)
            });
        }
    }
    Ok(finish(fails, format!("40 checks, smallest slack {worst_slack:.4}"), start.elapsed(), Duration::from_secs(600)))
}

fn property_suite() -> Outcome {
    let start = Instant::now();
    let mut fails = Vec::new();
    let tol = 1e-9;
    for k in 0..100u64 {
        let n = 3 + (k % 2) as usize;
        let m = 2 + ((k / 2) % 3) as usize;
        let game = random_team_game(n, m, derive_seed(7, k))?;
        let vc = correlated_team_maxmin(&game)?.value;

        let recon = reconstruct_best_pivot(&game)?;
        let floor = vc / (m as f64).powi(n as i32 - 2);
        check(recon.lower_bound >= floor - tol, &mut fails, || {
            format!("game {k}: reconstruction {} below {floor}", recon.lower_bound)
        });

        let cfg = IteratedLpConfig { init: Initialization::Random, restarts: 3, seed: k, ..Default::default() };
        let (ilp, traces) = iterated_lp_traced(&game, &cfg)?;
        for t in &traces {
            check(t.values.windows(2).all(|w| w[1] >= w[0]), &mut fails, || format!("game {k}: trace decreases"));
        }
        let se = support_enumeration(&game, &SupportEnumConfig::new(1.0))?;
        let global = global_optimize(
            &game,
            &GlobalConfig { max_nodes: 50, budget: Duration::from_secs(5), ..Default::default() },
        )?;
        for r in [&recon, &ilp, &se, &global] {
            check(r.lower_bound <= vc + tol, &mut fails, || {
                format!("game {k}: {} lower {} above v_C {vc}", r.solver, r.lower_bound)
            });
            check(r.lower_bound <= r.upper_bound + 1e-7, &mut fails, || {
                format!("game {k}: {} lower above upper", r.solver)
            });
        }
    }

    let mut rng = SplitMix64::new(derive_seed(7, 1000));
    let mut worst_gap: f64 = 0.0;
    for _ in 0..50 {
        let data: Vec<f64> = (0..25).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
        let a = PayoffMatrix::new(5, 5, data)?;
        let row = solve_maxmin(&a)?;
        let neg_t = PayoffMatrix::new(5, 5, a.transpose().data().iter().map(|x| -x).collect())?;
        let col = solve_maxmin(&neg_t)?;
        // row guarantees at least v, column holds row to at most -v'
        let guarantee = a.column_payoffs(&row.strategy).into_iter().fold(f64::INFINITY, f64::min);
        let cap = (0..5)
            .map(|i| a.row(i).iter().zip(&col.strategy).map(|(x, y)| x * y).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let gap = (row.value + col.value).abs().max((guarantee - cap).abs());
        worst_gap = worst_gap.max(gap);
    }
    check(worst_gap <= 1e-7, &mut fails, || format!("LP duality gap {worst_gap:.2e}"));
    Ok(finish(
        fails,
        format!("100 games, 50 matrices, duality gap {worst_gap:.1e}"),
        start.elapsed(),
        Duration::from_secs(600),
    ))
}

fn empirical_pou() -> Outcome {
    let start = Instant::now();
    let mut estimates = Vec::new();
    for m in [5usize, 10] {
        for k in 0..20u64 {
            let game = random_team_game(3, m, derive_seed(8 + m as u64, k))?;
            let solver = TeamSolver::Global(GlobalConfig {
                budget: Duration::from_secs(2),
                max_nodes: 200,
                ..Default::default()
            });
            estimates.push(compute_pou(&game, &solver)?.pou_upper_estimate);
        }
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let summary = format!("mean PoU estimate {mean:.4} over {} games [{:.2?}]", estimates.len(), start.elapsed());
    Ok(if mean < 1.0 - 1e-7 {
        Verdict::Fail(summary)
    } else if mean > 1.5 {
        Verdict::Warn(summary)
    } else {
        Verdict::Pass(summary)
    })
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let config = ExperimentConfig::read(root.join("configs/acceptance.json"))?;
    let out = root.join("target/acceptance");
    let mut fails = Vec::new();
    let mut snapshots = Vec::new();
    for run in ["run1", "run2"] {
        let dir = out.join(run);
        write_results(&run_experiment(&config)?, &dir)?;
        let files: Vec<Vec<u8>> = ["results.csv", "failures.csv", "aggregate.csv"]
            .iter()
            .map(|f| fs::read(dir.join(f)))
            .collect::<Result<_, _>>()?;
        snapshots.push(files);
    }
    check(snapshots[0] == snapshots[1], &mut fails, || "CSV outputs differ between runs".into());
    let rows = String::from_utf8_lossy(&snapshots[0][0]).lines().count() - 1;
    Ok(finish(
        fails,
        format!("{rows} rows identical across runs, written to {}", out.display()),
        start.elapsed(),
        Duration::from_secs(600),
    ))
}

fn main() -> ExitCode {
    // On the irrational game each member's best response is an involution of
    // the other's strategy, so a restart stops after one update at a profile
    // whose coordinates straddle the optimum. The value lands within 1e-3 for
    // most starts; the witness is within 1e-2 only for starts that close.
    const STALLED_BEST_RESPONSE: &str =
        "known failure: best-response iteration stalls after one update on this game";
    let criteria: [Criterion; 9] = [
        ("diagonal family values", diagonal_family, None),
        ("anarchy instance", anarchy_instance, None),
        ("irrational instance", irrational_instance, Some(STALLED_BEST_RESPONSE)),
        ("uniform start fixed point", uniform_fixed_point, None),
        ("enumeration counts", enumeration_counts, None),
        ("enumeration guarantee", enumeration_guarantee, None),
        ("property suite", property_suite, None),
        ("empirical PoU (soft)", empirical_pou, None),
        ("determinism", determinism, None),
    ];
    let (mut failed, mut unexpected) = (0, 0);
    for (i, (name, run, known)) in criteria.iter().enumerate() {
        let fail = |msg: String| match known {
            Some(reason) => format!("FAIL {msg} ({reason})"),
            None => format!("FAIL {msg}"),
        };
        let line = match run() {
            Ok(Verdict::Pass(s)) => format!("PASS {s}"),
            Ok(Verdict::Warn(s)) => format!("WARN {s}"),
            Ok(Verdict::Fail(s)) => {
                failed += 1;
                unexpected += usize::from(known.is_none());
                fail(s)
            }
            Err(e) => {
                failed += 1;
                unexpected += usize::from(known.is_none());
                fail(format!("error: {e}"))
            }
        };
        println!("criterion {} ({name}): {line}", i + 1);
    }
    println!(
        "{} of {} criteria passed, {failed} failed ({unexpected} unexpected)",
        criteria.len() - failed,
        criteria.len()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
