use teammaxmin::generators::{
    coordination_game, diagonal_game, irrational_game, poa_game, pou_one_game, InstanceFacts,
};
use teammaxmin::solvers::{correlated_team_maxmin, grid_oracle};
use teammaxmin::{team_value, TeamGame};

fn families() -> Vec<(TeamGame, InstanceFacts)> {
    vec![
        poa_game(),
        pou_one_game(),
        irrational_game(true),
        irrational_game(false),
        diagonal_game(3, 2).unwrap(),
        diagonal_game(3, 3).unwrap(),
        diagonal_game(4, 2).unwrap(),
        coordination_game(3, 2).unwrap(),
        coordination_game(3, 3).unwrap(),
    ]
}

#[test]
fn oracle_agrees_with_known_values() {
    for (game, facts) in families() {
        let Some(known) = facts.known_team_maxmin else { continue };
        let est = grid_oracle(&game, 0.02).unwrap();
        let name = game.meta().name.clone().unwrap_or_default();
        assert!(est.value <= known.value + 1e-9, "{name}: {} > {}", est.value, known.value);
        assert!(known.value <= est.value + est.error_bound + 1e-9, "{name}: gap too large");
    }
}

#[test]
fn correlated_values_match_facts() {
    for (game, facts) in families() {
        let Some(known) = facts.known_correlated_value else { continue };
        let vc = correlated_team_maxmin(&game).unwrap().value;
        assert!((vc - known.value).abs() < 1e-9, "{:?}: {vc} vs {}", game.meta().name, known.value);
    }
}

#[test]
fn notable_profiles_have_stated_values() {
    for (game, facts) in families() {
        for p in &facts.notable_profiles {
            let v = match &p.adversary {
                Some(adv) => teammaxmin::expected_team_utility(&game, &p.team, adv).unwrap(),
                None => team_value(&game, &p.team).unwrap().value,
            };
            assert!((v - p.expected_value).abs() < 1e-12, "{}: {v}", p.label);
        }
    }
}
