use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Game, ShapleyResult};
use crate::data::CoalitionMask;
use crate::error::{Error, Result};

/// Default limit on players for the subset-weight formula.
pub const EXACT_CAP: usize = 16;

/// Largest game the ordering-enumeration oracle accepts (8! orderings).
pub const ORACLE_MAX_PLAYERS: usize = 8;

/// Weight of a coalition of size `s` in an `n` player game, as a function
/// pointer so checks can run against substituted weights.
pub type WeightFn = fn(usize, usize) -> Result<f64>;

/// Exact non-negative rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub numerator: u128,
    pub denominator: u128,
}

impl Ratio {
    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn factorial(k: usize) -> Option<u128> {
    (1..=k as u128).try_fold(1u128, |acc, i| acc.checked_mul(i))
}

/// `s!(n-s-1)!/n!` in lowest terms.
pub fn shapley_weight(s: usize, n: usize) -> Result<Ratio> {
    if s >= n {
        return Err(Error::InvalidGame(alloc::format!(
            "coalition size {s} must be below the player count {n}"
        )));
    }
    let overflow = || Error::InvalidGame(alloc::format!("{n}! overflows exact arithmetic"));
    let num = factorial(s)
        .zip(factorial(n - s - 1))
        .and_then(|(a, b)| a.checked_mul(b))
        .ok_or_else(overflow)?;
    let den = factorial(n).ok_or_else(overflow)?;
    let g = gcd(num, den);
    Ok(Ratio {
        numerator: num / g,
        denominator: den / g,
    })
}

fn default_weight(s: usize, n: usize) -> Result<f64> {
    shapley_weight(s, n).map(Ratio::to_f64)
}

/// Compensated (Neumaier) running sum.
#[derive(Default)]
struct Sum {
    total: f64,
    compensation: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.total + x;
        if libm::fabs(self.total) >= libm::fabs(x) {
            self.compensation += (self.total - t) + x;
        } else {
            self.compensation += (x - t) + self.total;
        }
        self.total = t;
    }

    fn value(&self) -> f64 {
        self.total + self.compensation
    }
}

fn check_player(game: &Game, player: usize) -> Result<()> {
    if player >= game.n() {
        return Err(Error::UnknownPlayer(player));
    }
    Ok(())
}

/// `v(S ∪ {player}) - v(S)`.
pub fn marginal_contribution(game: &Game, player: usize, coalition: CoalitionMask) -> Result<f64> {
    check_player(game, player)?;
    if coalition.contains(player) {
        return Err(Error::PlayerInCoalition(player));
    }
    if !coalition.is_subset_of(game.grand_coalition()) {
        return Err(Error::InvalidGame("coalition references unknown players".into()));
    }
    Ok(game.value(coalition.with(player)) - game.value(coalition))
}

/// Shapley value by the subset-weight formula.
pub fn shapley_exact(game: &Game, player: usize) -> Result<f64> {
    shapley_exact_with(game, player, default_weight)
}

/// [`shapley_exact`] with a substitute weight function.
pub fn shapley_exact_with(game: &Game, player: usize, weight: WeightFn) -> Result<f64> {
    check_player(game, player)?;
    let n = game.n();
    if n > EXACT_CAP {
        return Err(Error::CapExceeded { n, cap: EXACT_CAP });
    }
    let weights = (0..n).map(|s| weight(s, n)).collect::<Result<Vec<_>>>()?;
    let bit = 1u64 << player;
    let mut sum = Sum::default();
    for s in 0..(1u64 << n) {
        if s & bit != 0 {
            continue;
        }
        let m = game.values[(s | bit) as usize] - game.values[s as usize];
        sum.add(weights[s.count_ones() as usize] * m);
    }
    Ok(sum.value())
}

pub fn shapley_values(game: &Game) -> Result<ShapleyResult> {
    shapley_values_with(game, default_weight)
}

pub fn shapley_values_with(game: &Game, weight: WeightFn) -> Result<ShapleyResult> {
    let phi = (0..game.n())
        .map(|i| shapley_exact_with(game, i, weight))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShapleyResult {
        players: game.players.clone(),
        phi,
        v_empty: game.values[0],
        v_full: game.value(game.grand_coalition()),
    })
}

/// Shapley value as the average marginal contribution over all `n!` orderings.
///
/// Shares nothing with the subset-weight formula except the game table, so it
/// serves as an independent check of [`shapley_exact`].
pub fn shapley_oracle(game: &Game, player: usize) -> Result<f64> {
    check_player(game, player)?;
    let n = game.n();
    if n > ORACLE_MAX_PLAYERS {
        return Err(Error::CapExceeded {
            n,
            cap: ORACLE_MAX_PLAYERS,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut sum = Sum::default();
    let mut count = 0u64;
    let mut visit = |order: &[usize]| {
        let mut before = CoalitionMask::EMPTY;
        for &p in order {
            if p == player {
                break;
            }
            before = before.with(p);
        }
        sum.add(game.value(before.with(player)) - game.value(before));
        count += 1;
    };
    // Heap's algorithm, iterative form
    let mut c = alloc::vec![0usize; n];
    visit(&order);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            visit(&order);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(sum.value() / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub draws: usize,
}

/// Unbiased estimate from uniformly sampled orderings.
///
/// `worth` is only called on the coalitions the sampled orderings visit, so
/// the game never has to be tabulated.
pub fn shapley_montecarlo(
    n: usize,
    mut worth: impl FnMut(CoalitionMask) -> f64,
    player: usize,
    draws: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if draws < 2 {
        return Err(Error::TooFewDraws(draws));
    }
    if player >= n || n > crate::data::MAX_MODALITIES {
        return Err(Error::UnknownPlayer(player));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    // Welford
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for k in 1..=draws {
        order.shuffle(&mut rng);
        let before = CoalitionMask::from_indices(order.iter().copied().take_while(|&p| p != player));
        let x = worth(before.with(player)) - worth(before);
        let delta = x - mean;
        mean += delta / k as f64;
        m2 += delta * (x - mean);
    }
    let variance = m2 / (draws - 1) as f64;
    Ok(MonteCarloEstimate {
        estimate: mean,
        std_error: libm::sqrt(variance / draws as f64),
        draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn hand_game() -> Game {
        Game::numbered(vec![0.25, 0.5, 0.6, 0.9]).unwrap()
    }

    fn random_game(n: usize, seed: u64) -> Game {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Game::numbered(
            (0..1usize << n)
                .map(|_| rng.random_range(0..1000) as f64 / 997.0)
                .collect(),
        )
        .unwrap()
    }

    fn additive(w: &[f64]) -> Game {
        Game::from_fn((1..=w.len()).map(|i| alloc::format!("{i}")).collect(), |s| {
            s.indices().map(|i| w[i]).sum()
        })
        .unwrap()
    }

    #[test]
    fn weights() {
        assert_eq!(
            shapley_weight(0, 2).unwrap(),
            Ratio {
                numerator: 1,
                denominator: 2
            }
        );
        assert_eq!(
            shapley_weight(1, 3).unwrap(),
            Ratio {
                numerator: 1,
                denominator: 6
            }
        );
        assert_eq!(
            shapley_weight(0, 3).unwrap(),
            Ratio {
                numerator: 1,
                denominator: 3
            }
        );
        assert_eq!(shapley_weight(0, 3).unwrap().to_f64(), 2.0 / 6.0);
        assert!(shapley_weight(3, 3).is_err());
        assert!(shapley_weight(0, 40).is_err());
    }

    #[test]
    fn weights_sum_to_one_over_subsets() {
        for n in 1..=20usize {
            // Σ_s C(n-1, s) · s!(n-s-1)!/n! = 1, checked in exact arithmetic
            let mut num = 0u128;
            let den = factorial(n).unwrap();
            for s in 0..n {
                let w = shapley_weight(s, n).unwrap();
                let binom = factorial(n - 1).unwrap() / (factorial(s).unwrap() * factorial(n - 1 - s).unwrap());
                num += binom * w.numerator * (den / w.denominator);
            }
            assert_eq!(num, den, "n = {n}");
        }
    }

    #[test]
    fn marginal_examples() {
        let g = hand_game();
        assert_eq!(marginal_contribution(&g, 0, CoalitionMask::EMPTY).unwrap(), 0.25);
        assert!((marginal_contribution(&g, 0, CoalitionMask(0b10)).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(
            marginal_contribution(&g, 0, CoalitionMask(0b01)),
            Err(Error::PlayerInCoalition(0))
        );
        let w = [0.1, 0.2, 0.3];
        let a = additive(&w);
        for s in [0b000u64, 0b010, 0b100, 0b110] {
            assert!((marginal_contribution(&a, 0, CoalitionMask(s)).unwrap() - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn hand_table_values() {
        // Oracle by hand: orderings (1,2) -> m1 = 0.5 - 0.25; (2,1) -> m1 = 0.9 - 0.6.
        let by_hand_1 = ((0.5 - 0.25) + (0.9 - 0.6)) / 2.0;
        let by_hand_2 = ((0.9 - 0.5) + (0.6 - 0.25)) / 2.0;
        let g = hand_game();
        let r = shapley_values(&g).unwrap();
        assert!((r.phi[0] - 0.275).abs() < 1e-15 && (r.phi[0] - by_hand_1).abs() < 1e-15);
        assert!((r.phi[1] - 0.375).abs() < 1e-15 && (r.phi[1] - by_hand_2).abs() < 1e-15);
        assert!(r.efficiency_gap().abs() < 1e-15);
        assert!((shapley_oracle(&g, 0).unwrap() - 0.275).abs() < 1e-15);
    }

    #[test]
    fn dummy_and_symmetry() {
        let a = additive(&[0.1, 0.2, 0.3]);
        for (i, w) in [0.1, 0.2, 0.3].into_iter().enumerate() {
            assert!((shapley_exact(&a, i).unwrap() - w).abs() < 1e-15);
        }
        let sym = Game::numbered(vec![0.1, 0.4, 0.4, 0.7]).unwrap();
        assert_eq!(shapley_exact(&sym, 0).unwrap(), shapley_exact(&sym, 1).unwrap());
    }

    #[test]
    fn one_player_oracle() {
        let g = Game::numbered(vec![0.3, 0.8]).unwrap();
        assert!((shapley_oracle(&g, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!((shapley_exact(&g, 0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn oracle_matches_exact_random_five() {
        let g = random_game(5, 7);
        for i in 0..5 {
            let (e, o) = (shapley_exact(&g, i).unwrap(), shapley_oracle(&g, i).unwrap());
            assert!((e - o).abs() < 1e-12, "{e} vs {o}");
        }
    }

    #[test]
    fn caps() {
        let g = random_game(9, 1);
        assert_eq!(shapley_oracle(&g, 0), Err(Error::CapExceeded { n: 9, cap: 8 }));
        assert!(shapley_exact(&g, 9).is_err());
    }

    #[test]
    fn montecarlo_additive_is_exact() {
        let w = [0.25, 0.5, 0.125, 0.0625];
        let est = shapley_montecarlo(4, |s| s.indices().map(|i| w[i]).sum(), 2, 50, 3).unwrap();
        assert_eq!(est.estimate, 0.125);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn montecarlo_close_to_exact() {
        let g = random_game(4, 11);
        for i in 0..4 {
            let exact = shapley_exact(&g, i).unwrap();
            let est = shapley_montecarlo(4, |s| g.value(s), i, 20_000, 5).unwrap();
            assert!(
                (est.estimate - exact).abs() <= 3.0 * est.std_error,
                "{est:?} vs {exact}"
            );
        }
    }

    #[test]
    fn montecarlo_needs_two_draws() {
        assert_eq!(shapley_montecarlo(2, |_| 0.0, 0, 1, 0), Err(Error::TooFewDraws(1)));
    }

    proptest! {
        #[test]
        fn exact_equals_oracle(n in 1usize..=6, seed in any::<u64>()) {
            let g = random_game(n, seed);
            let r = shapley_values(&g).unwrap();
            prop_assert!(r.efficiency_gap().abs() < 1e-12);
            for i in 0..n {
                prop_assert!((r.phi[i] - shapley_oracle(&g, i).unwrap()).abs() < 1e-12);
            }
        }
    }
}
