use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::value::{shapley_values_with, WeightFn};
use super::{Game, ShapleyResult};
use crate::data::CoalitionMask;
use crate::error::Result;

pub const AXIOM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxiomKind {
    Efficiency,
    Symmetry,
    Dummy,
    Additivity,
}

impl fmt::Display for AxiomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Efficiency => "efficiency",
            Self::Symmetry => "symmetry",
            Self::Dummy => "dummy",
            Self::Additivity => "additivity",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomCheck {
    pub kind: AxiomKind,
    /// Players the check is about, e.g. `"1,2"` for a symmetric pair.
    pub subject: String,
    pub deviation: f64,
    pub passed: bool,
}

impl AxiomCheck {
    fn new(kind: AxiomKind, subject: String, deviation: f64) -> Self {
        let deviation = libm::fabs(deviation);
        Self {
            kind,
            subject,
            deviation,
            passed: deviation <= AXIOM_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn count(&self, kind: AxiomKind) -> usize {
        self.checks.iter().filter(|c| c.kind == kind).count()
    }
}

/// Checks `result` against the four axioms on `game`.
///
/// Symmetric pairs and dummy players are detected from the table; each one
/// found adds a check. Additivity is checked on `game` and its complement
/// game `W(S) = v(N \ S)`.
pub fn check_axioms(game: &Game, result: &ShapleyResult) -> Result<AxiomReport> {
    check_axioms_with(game, result, |s, n| {
        super::shapley_weight(s, n).map(super::Ratio::to_f64)
    })
}

/// [`check_axioms`] with additivity evaluated under a substitute weight function.
pub fn check_axioms_with(game: &Game, result: &ShapleyResult, weight: WeightFn) -> Result<AxiomReport> {
    let n = game.n();
    let mut checks = Vec::new();
    checks.push(AxiomCheck::new(
        AxiomKind::Efficiency,
        "all".into(),
        result.efficiency_gap(),
    ));

    for i in 0..n {
        for j in i + 1..n {
            let others = game.grand_coalition().without(i).without(j);
            let symmetric =
                subsets(others).all(|s| libm::fabs(game.value(s.with(i)) - game.value(s.with(j))) <= AXIOM_TOLERANCE);
            if symmetric {
                checks.push(AxiomCheck::new(
                    AxiomKind::Symmetry,
                    format!("{},{}", game.players()[i], game.players()[j]),
                    result.phi[i] - result.phi[j],
                ));
            }
        }
    }

    for i in 0..n {
        // constant marginal contribution: v(S ∪ {i}) = v(S) + v({i}) - v(∅)
        let alone = game.value(CoalitionMask::singleton(i)) - game.value(CoalitionMask::EMPTY);
        let others = game.grand_coalition().without(i);
        let dummy =
            subsets(others).all(|s| libm::fabs(game.value(s.with(i)) - game.value(s) - alone) <= AXIOM_TOLERANCE);
        if dummy {
            checks.push(AxiomCheck::new(
                AxiomKind::Dummy,
                game.players()[i].clone(),
                result.phi[i] - alone,
            ));
        }
    }

    let full = game.grand_coalition();
    let complement = Game::from_fn(game.players().to_vec(), |s| game.value(CoalitionMask(full.0 & !s.0)))?;
    checks.extend(check_additivity_with(game, &complement, weight)?);
    Ok(AxiomReport { checks })
}

/// `φ(v + w) = φ(v) + φ(w)` for every player.
pub fn check_additivity(v: &Game, w: &Game) -> Result<Vec<AxiomCheck>> {
    check_additivity_with(v, w, |s, n| super::shapley_weight(s, n).map(super::Ratio::to_f64))
}

fn check_additivity_with(v: &Game, w: &Game, weight: WeightFn) -> Result<Vec<AxiomCheck>> {
    let u = v.sum(w)?;
    let (pv, pw, pu) = (
        shapley_values_with(v, weight)?,
        shapley_values_with(w, weight)?,
        shapley_values_with(&u, weight)?,
    );
    Ok((0..v.n())
        .map(|i| {
            AxiomCheck::new(
                AxiomKind::Additivity,
                v.players()[i].clone(),
                pu.phi[i] - (pv.phi[i] + pw.phi[i]),
            )
        })
        .collect())
}

/// Every subset of `set`, including the empty one.
fn subsets(set: CoalitionMask) -> impl Iterator<Item = CoalitionMask> {
    let full = set.0;
    let mut next = Some(0u64);
    core::iter::from_fn(move || {
        let cur = next?;
        next = if cur == full {
            None
        } else {
            Some((cur.wrapping_sub(full)) & full)
        };
        Some(CoalitionMask(cur))
    })
}
