//! Game constructors: worst-case families with known values, and random
//! instances with i.i.d. uniform payoffs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::game::{GameMeta, GeneratorInfo, MixedStrategy, TeamGame, TeamProfile, MAX_OUTCOMES};
use crate::rng::SplitMix64;

/// Where a known fact comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// A closed-form value from the construction of the instance.
    ClosedForm(&'static str),
    /// Derived by calculation or enumeration.
    Derived(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fact {
    pub value: f64,
    pub provenance: Provenance,
}

impl Fact {
    fn closed(value: f64, why: &'static str) -> Option<Self> {
        Some(Self { value, provenance: Provenance::ClosedForm(why) })
    }

    fn derived(value: f64, why: &'static str) -> Option<Self> {
        Some(Self { value, provenance: Provenance::Derived(why) })
    }
}

/// A named profile with its expected team utility.
#[derive(Debug, Clone, PartialEq)]
pub struct NotableProfile {
    pub label: &'static str,
    pub team: TeamProfile,
    /// `None` means the adversary best-responds (the profile's team value).
    pub adversary: Option<MixedStrategy>,
    pub expected_value: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InstanceFacts {
    pub known_team_maxmin: Option<Fact>,
    pub known_correlated_value: Option<Fact>,
    pub known_pou: Option<Fact>,
    pub notable_profiles: Vec<NotableProfile>,
}

fn meta(family: &str, params: &[(&str, String)], seed: Option<u64>) -> GameMeta {
    let params: BTreeMap<String, String> =
        params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    let name = if params.is_empty() {
        family.to_string()
    } else {
        let inner: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{family}({})", inner.join(","))
    };
    GameMeta {
        name: Some(name),
        seed,
        generator: Some(GeneratorInfo { family: family.to_string(), params }),
    }
}

fn check_size(n: usize, m: usize) -> Result<()> {
    let fits = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(m)).is_some_and(|s| s <= MAX_OUTCOMES);
    if fits {
        Ok(())
    } else {
        Err(Error::Capacity(format!("{m}^{n} outcomes exceed the cap of {MAX_OUTCOMES}")))
    }
}

fn pure_adversary(game: &TeamGame, action: usize) -> MixedStrategy {
    MixedStrategy::pure(game.adversary(), game.adversary_actions(), action).expect("valid action")
}

/// Three players, two actions each, team paid 1 exactly at (0,0,0) and
/// (1,1,1). Uniform play is the team-maxmin equilibrium (value 1/4) while
/// two pure Nash equilibria give the team nothing.
pub fn poa_game() -> (TeamGame, InstanceFacts) {
    let mut utility = vec![0.0; 8];
    utility[0] = 1.0;
    utility[7] = 1.0;
    let game = TeamGame::new(vec![2, 2, 2], utility).expect("fixed shape").with_meta(meta("poa", &[], None));
    let uniform = TeamProfile::uniform(&game);
    let facts = InstanceFacts {
        known_team_maxmin: Fact::closed(0.25, "uniform play by everyone; each member indifferent"),
        known_correlated_value: Fact::derived(0.5, "diagonal joint actions with probability 1/2"),
        known_pou: Fact::derived(2.0, "ratio of correlated and team-maxmin values"),
        notable_profiles: vec![
            NotableProfile {
                label: "all uniform (team-maxmin equilibrium)",
                team: uniform.clone(),
                adversary: Some(MixedStrategy::uniform(2, 2)),
                expected_value: 0.25,
                provenance: Provenance::ClosedForm("each outcome has probability 1/8"),
            },
            NotableProfile {
                label: "pure (1,1,0): worst Nash equilibrium",
                team: TeamProfile::pure(&game, &[1, 1]).expect("valid"),
                adversary: Some(pure_adversary(&game, 0)),
                expected_value: 0.0,
                provenance: Provenance::ClosedForm("no member gains by deviating"),
            },
            NotableProfile {
                label: "pure (0,0,1): worst Nash equilibrium",
                team: TeamProfile::pure(&game, &[0, 0]).expect("valid"),
                adversary: Some(pure_adversary(&game, 1)),
                expected_value: 0.0,
                provenance: Provenance::ClosedForm("no member gains by deviating"),
            },
        ],
    };
    (game, facts)
}

/// `n` players with `m` actions each; the team is paid 1 only when every
/// player, adversary included, picks the same action.
pub fn diagonal_game(n: usize, m: usize) -> Result<(TeamGame, InstanceFacts)> {
    if n < 3 || m < 1 {
        return Err(Error::param(format!("diagonal game needs n >= 3 and m >= 1, got n={n}, m={m}")));
    }
    check_size(n, m)?;
    let total = m.pow(n as u32);
    // all-equal outcomes sit at multiples of (m^n - 1) / (m - 1)
    let step: usize = (0..n).map(|k| m.pow(k as u32)).sum();
    let utility = (0..total).map(|idx| if idx % step == 0 { 1.0 } else { 0.0 }).collect();
    let game = TeamGame::new(vec![m; n], utility)?
        .with_meta(meta("diagonal", &[("n", n.to_string()), ("m", m.to_string())], None));

    let mf = m as f64;
    let team_maxmin = mf.powi(-(n as i32 - 1));
    let facts = InstanceFacts {
        known_team_maxmin: Fact::closed(team_maxmin, "every member uniform: 1/m^(n-1)"),
        known_correlated_value: Fact::closed(1.0 / mf, "uniform over diagonal joint actions: 1/m"),
        known_pou: Fact::closed(mf.powi(n as i32 - 2), "ratio 1/m over 1/m^(n-1)"),
        notable_profiles: vec![NotableProfile {
            label: "all uniform",
            team: TeamProfile::uniform(&game),
            adversary: None,
            expected_value: team_maxmin,
            provenance: Provenance::ClosedForm("1/m^(n-1)"),
        }],
    };
    Ok((game, facts))
}

/// Three players, two actions; the team is paid 1 whenever members play
/// (0,0) or (1,1), regardless of the adversary. Correlation brings nothing.
pub fn pou_one_game() -> (TeamGame, InstanceFacts) {
    let utility = vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0];
    let game = TeamGame::new(vec![2, 2, 2], utility).expect("fixed shape").with_meta(meta("pou-one", &[], None));
    let facts = InstanceFacts {
        known_team_maxmin: Fact::closed(1.0, "pure profile (0,0) pays 1 against every action"),
        known_correlated_value: Fact::closed(1.0, "payoffs never exceed 1"),
        known_pou: Fact::closed(1.0, "equal values"),
        notable_profiles: vec![NotableProfile {
            label: "pure (0,0)",
            team: TeamProfile::pure(&game, &[0, 0]).expect("valid"),
            adversary: None,
            expected_value: 1.0,
            provenance: Provenance::ClosedForm("pays 1 against every adversary action"),
        }],
    };
    (game, facts)
}

/// Team of `n - 1` members with `m` actions against an adversary with a
/// single action; the team is paid 1 when all members coordinate.
pub fn coordination_game(n: usize, m: usize) -> Result<(TeamGame, InstanceFacts)> {
    if n < 2 || m < 1 {
        return Err(Error::param(format!("coordination game needs n >= 2 and m >= 1, got n={n}, m={m}")));
    }
    check_size(n - 1, m)?;
    let team = n - 1;
    let total = m.pow(team as u32);
    let step: usize = (0..team).map(|k| m.pow(k as u32)).sum();
    let utility = (0..total).map(|idx| if idx % step == 0 { 1.0 } else { 0.0 }).collect();
    let mut actions = vec![m; team];
    actions.push(1);
    let game = TeamGame::new(actions, utility)?
        .with_meta(meta("coordination", &[("n", n.to_string()), ("m", m.to_string())], None));
    let uniform_value = (m as f64).powi(-(n as i32 - 2));
    let facts = InstanceFacts {
        known_team_maxmin: Fact::closed(1.0, "any common pure action"),
        known_correlated_value: Fact::closed(1.0, "payoffs never exceed 1"),
        known_pou: Fact::closed(1.0, "equal values"),
        notable_profiles: vec![
            NotableProfile {
                label: "all uniform",
                team: TeamProfile::uniform(&game),
                adversary: None,
                expected_value: uniform_value,
                provenance: Provenance::ClosedForm("m diagonal outcomes of probability 1/m^(n-1)"),
            },
            NotableProfile {
                label: "pure diagonal",
                team: TeamProfile::pure(&game, &vec![0; team]).expect("valid"),
                adversary: None,
                expected_value: 1.0,
                provenance: Provenance::ClosedForm("coordinated pure play"),
            },
        ],
    };
    Ok((game, facts))
}

/// Two-member game whose team-maxmin value is irrational.
///
/// With `fixed_sign` the team is paid 1 at (0,0,0) and 2 at (1,1,1); the
/// optimum has both members play action 0 with probability `2 - sqrt 2`,
/// worth `6 - 4 sqrt 2`. Without it the payoffs are negated, so pure
/// profiles (0,1) or (1,0) secure the best possible value 0.
pub fn irrational_game(fixed_sign: bool) -> (TeamGame, InstanceFacts) {
    let sign = if fixed_sign { 1.0 } else { -1.0 };
    let mut utility = vec![0.0; 8];
    utility[0] = sign;
    utility[7] = 2.0 * sign;
    let game = TeamGame::new(vec![2, 2, 2], utility)
        .expect("fixed shape")
        .with_meta(meta("irrational", &[("fixed_sign", fixed_sign.to_string())], None));
    let facts = if fixed_sign {
        let root = 2.0 - 2f64.sqrt();
        let value = 6.0 - 4.0 * 2f64.sqrt();
        let optimum = TeamProfile::from_probs(vec![vec![root, 1.0 - root]; 2]).expect("valid");
        InstanceFacts {
            known_team_maxmin: Fact::derived(
                value,
                "both constraints tight: s^2 = 2(1-s)^2, s = 2 - sqrt 2, value s^2",
            ),
            known_correlated_value: Fact::derived(2.0 / 3.0, "weights 2/3 on (0,0), 1/3 on (1,1)"),
            known_pou: Fact::derived((2.0 / 3.0) / value, "ratio of the two values"),
            notable_profiles: vec![NotableProfile {
                label: "irrational optimum",
                team: optimum,
                adversary: None,
                expected_value: value,
                provenance: Provenance::Derived("root of s^2 - 4s + 2 in [0, 1]"),
            }],
        }
    } else {
        let mixed = |a: &[usize]| NotableProfile {
            label: "pure miscoordination",
            team: TeamProfile::pure(&game, a).expect("valid"),
            adversary: None,
            expected_value: 0.0,
            provenance: Provenance::ClosedForm("no outcome with non-zero payoff is reachable"),
        };
        InstanceFacts {
            known_team_maxmin: Fact::closed(0.0, "payoffs are non-positive and (0,1) secures 0"),
            known_correlated_value: Fact::closed(0.0, "same profile"),
            known_pou: None,
            notable_profiles: vec![mixed(&[0, 1]), mixed(&[1, 0])],
        }
    };
    (game, facts)
}

/// `n` players with `m` actions each and i.i.d. uniform `[0, 1)` team
/// payoffs drawn from [`SplitMix64`] in tensor order.
pub fn random_team_game(n: usize, m: usize, seed: u64) -> Result<TeamGame> {
    if n < 2 || m < 1 {
        return Err(Error::param(format!("random game needs n >= 2 and m >= 1, got n={n}, m={m}")));
    }
    check_size(n, m)?;
    let mut rng = SplitMix64::new(seed);
    let utility = (0..m.pow(n as u32)).map(|_| rng.next_f64()).collect();
    Ok(TeamGame::new(vec![m; n], utility)?.with_meta(meta(
        "random",
        &[("n", n.to_string()), ("m", m.to_string()), ("payoffs", "uniform[0,1)".to_string())],
        Some(seed),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{team_value, verify_nash};

    #[test]
    fn poa_profiles_hold() {
        let (game, facts) = poa_game();
        for p in &facts.notable_profiles {
            let adv = p.adversary.as_ref().unwrap();
            let v = verify_nash(&game, &p.team, adv, 1e-12).unwrap();
            assert!(v.is_equilibrium, "{}", p.label);
            assert!((v.team_utility - p.expected_value).abs() < 1e-12);
        }
        assert_eq!(facts.known_team_maxmin.unwrap().value, 0.25);
    }

    #[test]
    fn diagonal_layout() {
        let (game, facts) = diagonal_game(3, 2).unwrap();
        assert_eq!(game.utility(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(facts.known_pou.unwrap().value, 2.0);
        let (game, facts) = diagonal_game(4, 3).unwrap();
        assert_eq!(game.utility().iter().filter(|&&u| u == 1.0).count(), 3);
        assert_eq!(game.payoff(&[2, 2, 2, 2]).unwrap(), 1.0);
        assert_eq!(game.payoff(&[2, 2, 1, 2]).unwrap(), 0.0);
        assert_eq!(facts.known_pou.unwrap().value, 9.0);
        let (_, facts) = diagonal_game(4, 2).unwrap();
        assert_eq!(facts.known_pou.unwrap().value, 4.0);
        let (game, facts) = diagonal_game(3, 1).unwrap();
        assert_eq!(game.utility(), &[1.0]);
        assert_eq!(facts.known_pou.unwrap().value, 1.0);
        assert!(diagonal_game(2, 2).is_err());
    }

    #[test]
    fn coordination_values() {
        let (game, facts) = coordination_game(3, 2).unwrap();
        for p in &facts.notable_profiles {
            assert!((team_value(&game, &p.team).unwrap().value - p.expected_value).abs() < 1e-12);
        }
        let (game, _) = coordination_game(3, 1).unwrap();
        assert_eq!(team_value(&game, &TeamProfile::uniform(&game)).unwrap().value, 1.0);
    }

    #[test]
    fn irrational_values() {
        let (game, facts) = irrational_game(true);
        assert!(game.utility().contains(&2.0));
        let p = &facts.notable_profiles[0];
        let v = team_value(&game, &p.team).unwrap().value;
        assert!((v - (6.0 - 4.0 * 2f64.sqrt())).abs() < 1e-12);

        let (game, facts) = irrational_game(false);
        for p in &facts.notable_profiles {
            assert_eq!(team_value(&game, &p.team).unwrap().value, 0.0);
        }
    }

    #[test]
    fn random_games_are_reproducible() {
        let a = random_team_game(3, 5, 7).unwrap();
        let b = random_team_game(3, 5, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.utility().iter().all(|&u| (0.0..1.0).contains(&u)));
        let c = random_team_game(3, 5, 1).unwrap();
        let d = random_team_game(3, 5, 2).unwrap();
        assert_ne!(c.utility(), d.utility());
        assert_eq!(a.meta().seed, Some(7));
        assert_eq!(a.meta().generator.as_ref().unwrap().family, "random");
    }
}
