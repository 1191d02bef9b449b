//! Built-in consistency checks of the Shapley machinery.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::CoalitionMask;
use crate::shapley::{
    check_axioms_with, cooperation_value, shapley_oracle, shapley_values_with, shapley_weight, AxiomKind, Game, Ratio,
    WeightFn, AXIOM_TOLERANCE,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

const GAMES_PER_SIZE: usize = 20;
const SEED: u64 = 0x5eed;

fn exact_weight(s: usize, n: usize) -> crate::Result<f64> {
    shapley_weight(s, n).map(Ratio::to_f64)
}

/// Random game with values `k / 997`, `k ∈ [0, 1000)`.
pub fn random_game(n: usize, rng: &mut impl Rng) -> Game {
    Game::numbered(
        (0..1usize << n)
            .map(|_| rng.random_range(0..1000) as f64 / 997.0)
            .collect(),
    )
    .expect("valid size")
}

fn check(name: &str, worst: f64) -> Check {
    Check {
        name: name.into(),
        passed: worst <= AXIOM_TOLERANCE,
        detail: format!("max deviation {worst:.3e}"),
    }
}

/// Runs every check with the standard Shapley weights.
pub fn run() -> Vec<Check> {
    run_with(exact_weight)
}

/// Runs every check with Shapley values computed from `weight`.
pub fn run_with(weight: WeightFn) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checks = Vec::new();
    let fail = |name: &str, e: crate::Error| Check {
        name: name.into(),
        passed: false,
        detail: format!("error: {e}"),
    };

    // axioms on random games
    let mut worst = [0.0f64; 2];
    let mut error = None;
    for n in 2..=6 {
        for _ in 0..GAMES_PER_SIZE {
            let g = random_game(n, &mut rng);
            let outcome = shapley_values_with(&g, weight).and_then(|r| check_axioms_with(&g, &r, weight));
            match outcome {
                Ok(report) => {
                    for c in &report.checks {
                        match c.kind {
                            AxiomKind::Efficiency => worst[0] = worst[0].max(c.deviation),
                            AxiomKind::Additivity => worst[1] = worst[1].max(c.deviation),
                            _ => {}
                        }
                    }
                }
                Err(e) => error = Some(e),
            }
        }
    }
    match error {
        Some(e) => checks.push(fail("axioms", e)),
        None => {
            checks.push(check("efficiency", worst[0]));
            checks.push(check("additivity", worst[1]));
        }
    }

    // symmetric pair and dummy player
    let sym = Game::from_fn(vec!["1".into(), "2".into(), "3".into()], |s| {
        let pair = [0.0, 0.2, 0.2, 0.6][(s.0 & 0b11) as usize];
        pair + if s.contains(2) { 0.125 } else { 0.0 } + if s.0 == 0b111 { 0.05 } else { 0.0 }
    })
    .expect("valid game");
    match shapley_values_with(&sym, weight) {
        Ok(r) => checks.push(check("symmetry", libm::fabs(r.phi[0] - r.phi[1]))),
        Err(e) => checks.push(fail("symmetry", e)),
    }
    let dummy = Game::from_fn(vec!["1".into(), "2".into(), "3".into()], |s| {
        let rest = [0.0, 0.1, 0.3, 0.7][(s.0 & 0b11) as usize];
        rest + if s.contains(2) { 0.25 } else { 0.0 }
    })
    .expect("valid game");
    match shapley_values_with(&dummy, weight) {
        Ok(r) => checks.push(check("dummy", libm::fabs(r.phi[2] - 0.25))),
        Err(e) => checks.push(fail("dummy", e)),
    }

    // subset formula against ordering enumeration
    let mut worst = 0.0f64;
    let mut error = None;
    for n in 1..=6 {
        for _ in 0..GAMES_PER_SIZE {
            let g = random_game(n, &mut rng);
            match shapley_values_with(&g, weight) {
                Ok(r) => {
                    for i in 0..n {
                        match shapley_oracle(&g, i) {
                            Ok(o) => worst = worst.max(libm::fabs(o - r.phi[i])),
                            Err(e) => error = Some(e),
                        }
                    }
                }
                Err(e) => error = Some(e),
            }
        }
    }
    checks.push(match error {
        Some(e) => fail("oracle-equivalence", e),
        None => check("oracle-equivalence", worst),
    });

    // closed forms
    let mut worst = [0.0f64; 3];
    let mut error = None;
    for _ in 0..GAMES_PER_SIZE {
        let g2 = random_game(2, &mut rng);
        let v = g2.values();
        let two = (v[3] - v[2] + v[1] - v[0]) / 2.0;
        let four_term = v[3] - v[1] - v[2] + v[0];
        let g3 = random_game(3, &mut rng);
        let w = |b: u64| g3.value(CoalitionMask(b));
        let three = 2.0 / 6.0 * (w(7) - w(6))
            + 1.0 / 6.0 * (w(3) - w(2))
            + 1.0 / 6.0 * (w(5) - w(4))
            + 2.0 / 6.0 * (w(1) - w(0));
        let outcome = shapley_values_with(&g2, weight).and_then(|r2| {
            let r3 = shapley_values_with(&g3, weight)?;
            let c = cooperation_value(&g2, CoalitionMask(0b11))?;
            Ok((r2.phi[0], r3.phi[0], c))
        });
        match outcome {
            Ok((p2, p3, c)) => {
                worst[0] = worst[0].max(libm::fabs(p2 - two));
                worst[1] = worst[1].max(libm::fabs(p3 - three));
                worst[2] = worst[2].max(libm::fabs(c - four_term));
            }
            Err(e) => error = Some(e),
        }
    }
    match error {
        Some(e) => checks.push(fail("closed-forms", e)),
        None => {
            checks.push(check("two-modal-marginal", worst[0]));
            checks.push(check("three-modal-marginal", worst[1]));
            checks.push(check("two-modal-cooperation", worst[2]));
        }
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passes_with_exact_weights() {
        let checks = run();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        assert_eq!(checks.len(), 8);
        assert_eq!(run(), checks);
    }

    #[test]
    fn corrupted_weights_break_efficiency() {
        fn skewed(s: usize, n: usize) -> crate::Result<f64> {
            Ok(exact_weight(s, n)? * if s == 0 { 1.1 } else { 1.0 })
        }
        let checks = run_with(skewed);
        let efficiency = checks.iter().find(|c| c.name == "efficiency").unwrap();
        assert!(!efficiency.passed);
    }
}
