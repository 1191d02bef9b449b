//! Coalition games, Shapley values and the SHAPE contribution and cooperation scores.

mod axioms;
mod scores;
mod value;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub use axioms::{
    check_additivity, check_axioms, check_axioms_with, AxiomCheck, AxiomKind, AxiomReport, AXIOM_TOLERANCE,
};
pub use scores::{
    cooperation, cooperation_score, cooperation_value, reduce_coalition_game, shape_marginal, shape_marginals,
    Cooperation,
};
pub use value::{
    marginal_contribution, shapley_exact, shapley_exact_with, shapley_montecarlo, shapley_oracle, shapley_values,
    shapley_values_with, shapley_weight, MonteCarloEstimate, Ratio, WeightFn, EXACT_CAP, ORACLE_MAX_PLAYERS,
};

use crate::data::CoalitionMask;
use crate::error::{Error, Result};
use crate::utility::UtilityTable;

/// Largest game that can be stored as an explicit table.
pub const MAX_TABLE_PLAYERS: usize = 30;

/// A cooperative game given by an explicit table over all `2^n` coalitions.
///
/// `values[bits]` is the worth of the coalition whose members are the set bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    players: Vec<String>,
    values: Vec<f64>,
}

impl Game {
    pub fn new(players: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = players.len();
        if n == 0 {
            return Err(Error::InvalidGame("a game needs at least one player".into()));
        }
        if n > MAX_TABLE_PLAYERS {
            return Err(Error::InvalidGame(format!("{n} players is too many for a table")));
        }
        if values.len() != 1usize << n {
            return Err(Error::InvalidGame(format!(
                "{} values for {n} players, expected {}",
                values.len(),
                1usize << n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGame("non-finite coalition value".into()));
        }
        Ok(Self { players, values })
    }

    /// Tabulates `worth` over every coalition.
    pub fn from_fn(players: Vec<String>, mut worth: impl FnMut(CoalitionMask) -> f64) -> Result<Self> {
        let n = players.len();
        if n > MAX_TABLE_PLAYERS {
            return Err(Error::InvalidGame(format!("{n} players is too many for a table")));
        }
        let values = (0..1u64 << n).map(|b| worth(CoalitionMask(b))).collect();
        Self::new(players, values)
    }

    /// Players named `1..=n`.
    pub fn numbered(values: Vec<f64>) -> Result<Self> {
        let n = values.len().trailing_zeros() as usize;
        Self::new((1..=n).map(|i| format!("{i}")).collect(), values)
    }

    pub fn from_table(table: &UtilityTable) -> Self {
        Self {
            players: table.schema().ids().map(String::from).collect(),
            values: table.values().to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.players.iter().position(|p| p == id)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, coalition: CoalitionMask) -> f64 {
        self.values[coalition.0 as usize]
    }

    pub fn grand_coalition(&self) -> CoalitionMask {
        CoalitionMask::full(self.n())
    }

    /// Sub-game on the players in `keep`, in their original order. Coalitions
    /// of the sub-game are the same coalitions of this game.
    pub fn restrict(&self, keep: CoalitionMask) -> Result<Self> {
        if keep.is_empty() || !keep.is_subset_of(self.grand_coalition()) {
            return Err(Error::InvalidGame(
                "restriction must be a non-empty subset of the players".into(),
            ));
        }
        let kept: Vec<usize> = keep.indices().collect();
        let players = kept.iter().map(|&i| self.players[i].clone()).collect();
        Self::from_fn(players, |sub| {
            self.value(CoalitionMask::from_indices(sub.indices().map(|k| kept[k])))
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            players: self.players.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Pointwise sum of two games over the same players.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.players != other.players {
            return Err(Error::InvalidGame("games have different players".into()));
        }
        Ok(Self {
            players: self.players.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }
}

/// Shapley value of every player together with the endpoints of the game.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyResult {
    pub players: Vec<String>,
    pub phi: Vec<f64>,
    pub v_empty: f64,
    pub v_full: f64,
}

impl ShapleyResult {
    pub fn get(&self, player: &str) -> Option<f64> {
        self.players.iter().position(|p| p == player).map(|i| self.phi[i])
    }

    /// `Σφ - (v(N) - v(∅))`; zero for a correct attribution.
    pub fn efficiency_gap(&self) -> f64 {
        self.phi.iter().sum::<f64>() - (self.v_full - self.v_empty)
    }
}
