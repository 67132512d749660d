//! On-disk formats.
//!
//! A game file is one JSON object:
//!
//! ```json
//! {
//!   "num_players": 3,
//!   "actions_per_player": [2, 2, 2],
//!   "team_utility": [1, 0, 0, 0, 0, 0, 0, 1],
//!   "name": "diagonal(m=2,n=3)",
//!   "seed": 7,
//!   "generator": { "family": "diagonal", "params": { "m": "2", "n": "3" } }
//! }
//! ```
//!
//! `team_utility` is the flat tensor in row-major order with player 0
//! outermost and the adversary innermost. `name`, `seed` and `generator` are
//! optional. A profile file is a JSON array holding one probability array
//! per team member; a full profile file adds the adversary's array last.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameMeta, GeneratorInfo, MixedStrategy, TeamGame, TeamProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub num_players: usize,
    pub actions_per_player: Vec<usize>,
    pub team_utility: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorInfo>,
}

impl From<&TeamGame> for GameFile {
    fn from(game: &TeamGame) -> Self {
        let meta = game.meta().clone();
        Self {
            num_players: game.num_players(),
            actions_per_player: game.actions().to_vec(),
            team_utility: game.utility().to_vec(),
            name: meta.name,
            seed: meta.seed,
            generator: meta.generator,
        }
    }
}

impl TryFrom<GameFile> for TeamGame {
    type Error = Error;

    fn try_from(file: GameFile) -> Result<Self> {
        if file.num_players != file.actions_per_player.len() {
            return Err(Error::InvalidGame(format!(
                "num_players is {} but actions_per_player has {} entries",
                file.num_players,
                file.actions_per_player.len()
            )));
        }
        let meta = GameMeta { name: file.name, seed: file.seed, generator: file.generator };
        Ok(TeamGame::new(file.actions_per_player, file.team_utility)?.with_meta(meta))
    }
}

pub fn game_to_json(game: &TeamGame) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GameFile::from(game))?)
}

pub fn game_from_json(text: &str) -> Result<TeamGame> {
    serde_json::from_str::<GameFile>(text)?.try_into()
}

pub fn read_game(path: impl AsRef<Path>) -> Result<TeamGame> {
    game_from_json(&fs::read_to_string(path)?)
}

pub fn write_game(game: &TeamGame, path: impl AsRef<Path>) -> Result<()> {
    let mut text = game_to_json(game)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn profile_from_json(text: &str) -> Result<TeamProfile> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_profile(path: impl AsRef<Path>) -> Result<TeamProfile> {
    profile_from_json(&fs::read_to_string(path)?)
}

pub fn write_profile(profile: &TeamProfile, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string(profile)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Parses a full profile (one array per player, adversary last) for `game`.
pub fn full_profile_from_json(game: &TeamGame, text: &str) -> Result<(TeamProfile, MixedStrategy)> {
    let mut probs: Vec<Vec<f64>> = serde_json::from_str(text)?;
    if probs.len() != game.num_players() {
        return Err(Error::dim(format!(
            "profile has {} strategies, game has {} players",
            probs.len(),
            game.num_players()
        )));
    }
    let adversary = MixedStrategy::new(game.adversary(), probs.pop().expect("non-empty"))?;
    let team = TeamProfile::from_probs(probs)?;
    game.check_profile(&team)?;
    if adversary.len() != game.adversary_actions() {
        return Err(Error::dim(format!(
            "adversary strategy has {} entries, adversary has {} actions",
            adversary.len(),
            game.adversary_actions()
        )));
    }
    Ok((team, adversary))
}

pub fn read_full_profile(game: &TeamGame, path: impl AsRef<Path>) -> Result<(TeamProfile, MixedStrategy)> {
    full_profile_from_json(game, &fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{diagonal_game, random_team_game};

    #[test]
    fn game_round_trip() {
        let game = random_team_game(3, 2, 11).unwrap();
        let back = game_from_json(&game_to_json(&game).unwrap()).unwrap();
        assert_eq!(back, game);
        let (game, _) = diagonal_game(3, 2).unwrap();
        let text = game_to_json(&game).unwrap();
        assert!(text.contains("\"family\": \"diagonal\""));
        assert_eq!(game_from_json(&text).unwrap(), game);
    }

    #[test]
    fn minimal_game_file() {
        let g = game_from_json(
            r#"{"num_players": 2, "actions_per_player": [2, 1], "team_utility": [0.5, 1]}"#,
        )
        .unwrap();
        assert_eq!(g.actions(), &[2, 1]);
        assert!(g.meta().name.is_none());
    }

    #[test]
    fn bad_game_files() {
        let cases = [
            r#"{"num_players": 3, "actions_per_player": [2, 1], "team_utility": [0.5, 1]}"#,
            r#"{"num_players": 2, "actions_per_player": [2, 2], "team_utility": [0.5, 1]}"#,
            r#"{"num_players": 2, "actions_per_player": [2, 1], "team_utility": [0.5, 1], "x": 1}"#,
            r#"{"num_players": 2"#,
        ];
        for c in cases {
            assert!(game_from_json(c).is_err(), "{c}");
        }
    }

    #[test]
    fn full_profiles() {
        let (game, _) = diagonal_game(3, 2).unwrap();
        let (team, adv) = full_profile_from_json(&game, "[[0,1],[0,1],[1,0]]").unwrap();
        assert_eq!(team.len(), 2);
        assert_eq!(adv.probs(), &[1.0, 0.0]);
        assert!(full_profile_from_json(&game, "[[0,1],[0,1]]").is_err());
        assert!(full_profile_from_json(&game, "[[0,1],[0,1],[1,0,0]]").is_err());
        assert!(full_profile_from_json(&game, "[[0,1],[0,0,1],[1,0]]").is_err());
    }

    #[test]
    fn profile_round_trip() {
        let p = profile_from_json("[[0.5, 0.5], [1, 0]]").unwrap();
        assert_eq!(p.strategy(1).probs(), &[1.0, 0.0]);
        assert!(profile_from_json("[[0.5, 0.6]]").is_err());
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(profile_from_json(&text).unwrap(), p);
    }
}
