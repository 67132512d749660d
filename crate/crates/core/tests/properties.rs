use proptest::prelude::*;

use teammaxmin::generators::random_team_game;
use teammaxmin::rng::SplitMix64;
use teammaxmin::solvers::{
    correlated_team_maxmin, grid_oracle, iterated_lp_traced, reconstruct_best_pivot,
    support_enumeration, Initialization, IteratedLpConfig, SupportEnumConfig,
};
use teammaxmin::{
    normalize_payoffs, solve_maxmin, team_value, verify_nash, JointDistribution, MixedStrategy,
    PayoffMatrix, TeamGame, TeamProfile,
};

const TOL: f64 = 1e-9;

fn small_game() -> impl Strategy<Value = TeamGame> {
    (3usize..=4, 1usize..=3, any::<u64>()).prop_map(|(n, m, seed)| random_team_game(n, m, seed).unwrap())
}

fn random_profile(game: &TeamGame, seed: u64) -> TeamProfile {
    let mut rng = SplitMix64::new(seed);
    let probs = game.team_actions().iter().map(|&m| rng.simplex_point(m)).collect();
    TeamProfile::from_probs(probs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shifted_and_scaled_games_normalize_to_unit_range(
        game in small_game(),
        scale in 0.1f64..10.0,
        shift in -5.0f64..5.0,
    ) {
        let utility = game.utility().iter().map(|u| u * scale + shift).collect();
        let g = TeamGame::new(game.actions().to_vec(), utility).unwrap();
        let norm = normalize_payoffs(&g);
        prop_assert!(norm.is_normalized());
        prop_assert_eq!(norm.num_outcomes(), game.actions().iter().product::<usize>());
        for (a, b) in norm.utility().iter().zip(normalize_payoffs(&game).utility()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn strategies_from_weights_are_distributions(weights in prop::collection::vec(0.0f64..5.0, 1..8)) {
        prop_assume!(weights.iter().sum::<f64>() > 1e-6);
        let s = MixedStrategy::from_weights(0, &weights).unwrap();
        prop_assert!((s.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(s.probs().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn correlated_value_dominates_independent_play(game in small_game(), seed in any::<u64>()) {
        let vc = correlated_team_maxmin(&game).unwrap().value;
        let v = team_value(&game, &random_profile(&game, seed)).unwrap().value;
        prop_assert!(v <= vc + TOL);
        prop_assert!(vc <= game.trivial_upper_bound() + TOL);
    }

    #[test]
    fn reconstruction_keeps_its_guarantee(game in small_game()) {
        let c = correlated_team_maxmin(&game).unwrap();
        let r = reconstruct_best_pivot(&game).unwrap();
        let m = game.max_team_actions() as f64;
        prop_assert!(r.lower_bound >= c.value / m.powi(game.team_size() as i32 - 1) - TOL);
        prop_assert!(r.lower_bound <= r.upper_bound + TOL);
        prop_assert!((r.upper_bound - c.value).abs() < TOL);
        let marg_sum: f64 = c.distribution.marginal(0).iter().sum();
        prop_assert!((marg_sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn iterated_lp_never_loses_value(game in small_game(), seed in any::<u64>()) {
        let cfg = IteratedLpConfig { init: Initialization::Random, restarts: 2, seed, ..Default::default() };
        let (r, traces) = iterated_lp_traced(&game, &cfg).unwrap();
        for t in &traces {
            prop_assert!(t.values.windows(2).all(|w| w[1] > w[0]));
            prop_assert!((team_value(&game, &t.profile).unwrap().value - t.final_value()).abs() < 1e-12);
        }
        let vc = correlated_team_maxmin(&game).unwrap().value;
        prop_assert!(r.lower_bound <= vc + TOL);
    }

    #[test]
    fn support_enumeration_bounds_are_ordered(game in small_game(), eps in 0.3f64..1.0) {
        let r = support_enumeration(&game, &SupportEnumConfig::new(eps)).unwrap();
        prop_assert!(r.lower_bound <= r.upper_bound + TOL);
        prop_assert!((team_value(&game, &r.witness).unwrap().value - r.lower_bound).abs() < 1e-12);
    }

    #[test]
    fn maxmin_lp_satisfies_duality(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let a = PayoffMatrix::new(rows, cols, (0..rows * cols).map(|_| rng.next_f64() - 0.5).collect()).unwrap();
        let row = solve_maxmin(&a).unwrap();
        let neg_t = PayoffMatrix::new(cols, rows, a.transpose().data().iter().map(|x| -x).collect()).unwrap();
        let col = solve_maxmin(&neg_t).unwrap();
        prop_assert!((row.value + col.value).abs() < 1e-7);
        let guarantee = a.column_payoffs(&row.strategy).into_iter().fold(f64::INFINITY, f64::min);
        prop_assert!((guarantee - row.value).abs() < 1e-9);
    }

    #[test]
    fn joint_marginals_sum_to_one(m1 in 1usize..4, m2 in 1usize..4, seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let p = JointDistribution::new(vec![m1, m2], rng.simplex_point(m1 * m2)).unwrap();
        for member in 0..2 {
            prop_assert!((p.marginal(member).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn any_profile_verifies_at_full_tolerance(game in small_game(), seed in any::<u64>()) {
        let team = random_profile(&game, seed);
        let adv = MixedStrategy::uniform(game.adversary(), game.adversary_actions());
        prop_assert!(verify_nash(&game, &team, &adv, 1.0).unwrap().is_equilibrium);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn oracle_brackets_solver_values(seed in any::<u64>(), m in 1usize..=3) {
        let game = random_team_game(3, m, seed).unwrap();
        let oracle = grid_oracle(&game, 0.05).unwrap();
        let ilp = iterated_lp_traced(&game, &IteratedLpConfig { restarts: 3, seed, ..Default::default() })
            .unwrap()
            .0;
        prop_assert!(ilp.lower_bound <= oracle.value + oracle.error_bound + TOL);
        let vc = correlated_team_maxmin(&game).unwrap().value;
        prop_assert!(oracle.value <= vc + TOL);
    }
}
