use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::value::shapley_exact;
use super::Game;
use crate::data::{CoalitionMask, KEY_SEPARATOR};
use crate::error::{Error, Result};
use crate::utility::UtilityTable;

/// Normalized Shapley contribution of one modality, in percentage points:
/// `100 · φ_modality / Z_f`.
pub fn shape_marginal(table: &UtilityTable, modality: &str) -> Result<f64> {
    let z_f = table.z_f();
    if z_f <= 0.0 {
        return Err(Error::ZeroAccuracy);
    }
    let game = Game::from_table(table);
    let i = game
        .index_of(modality)
        .ok_or_else(|| Error::SchemaMismatch(format!("unknown modality {modality:?}")))?;
    Ok(100.0 * shapley_exact(&game, i)? / z_f)
}

/// [`shape_marginal`] for every modality, in schema order.
pub fn shape_marginals(table: &UtilityTable) -> Result<Vec<f64>> {
    table.schema().ids().map(|id| shape_marginal(table, id)).collect()
}

/// Merges the players in `group` into one player appended after the others.
///
/// The merged player is named by its members joined with `+`. A coalition of
/// the reduced game containing it is worth the original coalition with the
/// whole group present.
pub fn reduce_coalition_game(game: &Game, group: CoalitionMask) -> Result<Game> {
    if group.is_empty() {
        return Err(Error::InvalidGame("cannot merge an empty group".into()));
    }
    if !group.is_subset_of(game.grand_coalition()) {
        return Err(Error::InvalidGame("group references unknown players".into()));
    }
    let rest: Vec<usize> = (0..game.n()).filter(|&i| !group.contains(i)).collect();
    let token_name = group
        .indices()
        .map(|i| game.players()[i].as_str())
        .collect::<Vec<_>>()
        .join(&String::from(KEY_SEPARATOR));
    let mut players: Vec<String> = rest.iter().map(|&i| game.players()[i].clone()).collect();
    players.push(token_name);
    let token = rest.len();
    Game::from_fn(players, |sub| {
        let mut original = CoalitionMask::from_indices(sub.indices().filter(|&k| k != token).map(|k| rest[k]));
        if sub.contains(token) {
            original = CoalitionMask(original.0 | group.0);
        }
        game.value(original)
    })
}

/// Cooperation of `group` as a raw utility difference (not scaled).
///
/// Shapley value of the merged group in the reduced game, minus the Shapley
/// value of each member in the game restricted to the non-members plus that
/// member.
pub fn cooperation_value(game: &Game, group: CoalitionMask) -> Result<f64> {
    if group.len() < 2 {
        return Err(Error::CoalitionTooSmall(group.len()));
    }
    let reduced = reduce_coalition_game(game, group)?;
    let joint = shapley_exact(&reduced, reduced.n() - 1)?;
    let outside = CoalitionMask(game.grand_coalition().0 & !group.0);
    let mut separate = 0.0;
    for i in group.indices() {
        let restricted = game.restrict(outside.with(i))?;
        let position = (0..i).filter(|&k| outside.contains(k)).count();
        separate += shapley_exact(&restricted, position)?;
    }
    Ok(joint - separate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cooperation {
    /// Raw utility difference.
    pub raw: f64,
    /// `100 · raw`.
    pub points: f64,
    /// `100 · raw / Z_f`, absent when `Z_f` is zero.
    pub normalized_points: Option<f64>,
}

pub fn cooperation(table: &UtilityTable, group: CoalitionMask) -> Result<Cooperation> {
    if !group.is_subset_of(table.schema().full_mask()) {
        return Err(Error::SchemaMismatch(
            "cooperation set references unknown modalities".into(),
        ));
    }
    let raw = cooperation_value(&Game::from_table(table), group)?;
    let z_f = table.z_f();
    Ok(Cooperation {
        raw,
        points: 100.0 * raw,
        normalized_points: (z_f > 0.0).then(|| 100.0 * raw / z_f),
    })
}

/// Cooperation score in percentage points, optionally divided by `Z_f`.
pub fn cooperation_score(table: &UtilityTable, group: CoalitionMask, normalize: bool) -> Result<f64> {
    let c = cooperation(table, group)?;
    if normalize {
        c.normalized_points.ok_or(Error::ZeroAccuracy)
    } else {
        Ok(c.points)
    }
}
