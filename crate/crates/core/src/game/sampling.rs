//! Monte-Carlo estimation of Shapley values by random orderings.
//!
//! Trial `i` draws its ordering from a ChaCha8 stream keyed by `(seed, i)`,
//! so results do not depend on how trials are scheduled across threads.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CoalitionGame, PlayerId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleParams {
    /// Additive tolerance, in (0, 1).
    pub eps: f64,
    /// Failure probability, in (0, 1).
    pub delta: f64,
    pub seed: u64,
}

impl SampleParams {
    pub fn new(eps: f64, delta: f64, seed: u64) -> Result<Self> {
        let p = SampleParams { eps, delta, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps = {} not in (0,1)",
                self.eps
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} not in (0,1)",
                self.delta
            )));
        }
        Ok(())
    }

    pub fn samples(&self) -> u64 {
        hoeffding_samples(self.eps, self.delta)
    }
}

/// A sampled Shapley value with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub successes: u64,
    pub samples: u64,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
}

/// `⌈ln(2/δ) / (2ε²)⌉` trials give `Pr[|estimate − value| > ε] ≤ δ` for a
/// mean of independent {0,1} variables (Hoeffding).
pub fn hoeffding_samples(eps: f64, delta: f64) -> u64 {
    ((2.0 / delta).ln() / (2.0 * eps * eps)).ceil() as u64
}

/// Random stream of trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn ordering(n: usize, seed: u64, trial: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut trial_rng(seed, trial));
    perm
}

fn estimate(successes: u64, samples: u64, params: &SampleParams) -> Estimate {
    Estimate {
        value: if samples == 0 {
            0.0
        } else {
            successes as f64 / samples as f64
        },
        successes,
        samples,
        eps: params.eps,
        delta: params.delta,
        seed: params.seed,
    }
}

/// Estimates the Shapley value of player `a` within additive `eps` with
/// probability at least `1 − delta`.
pub fn shapley_mc(game: &impl CoalitionGame, a: usize, params: &SampleParams) -> Result<Estimate> {
    params.validate()?;
    let n = game.player_count();
    if n == 0 {
        return Err(Error::NoPlayers);
    }
    if a >= n {
        return Err(Error::UnknownPlayer(format!("player #{a}")));
    }
    let samples = params.samples();
    let successes = (0..samples)
        .into_par_iter()
        .filter(|&trial| {
            let perm = ordering(n, params.seed, trial);
            let mut before = game.empty_coalition();
            for &p in perm.iter().take_while(|&&p| p != a) {
                before.insert(p);
            }
            if game.value(&before) {
                return false;
            }
            before.insert(a);
            game.value(&before)
        })
        .count() as u64;
    Ok(estimate(successes, samples, params))
}

/// Estimates every player's value from shared orderings.
///
/// In a monotone 0/1 game with `v(∅) = 0` each ordering has at most one
/// player with marginal 1: the one whose arrival first makes the prefix
/// winning. It is located by binary search over prefixes, and the result
/// for each player equals what [`shapley_mc`] returns with the same
/// parameters.
pub fn shapley_mc_all(
    game: &impl CoalitionGame,
    params: &SampleParams,
) -> Result<Vec<(PlayerId, Estimate)>> {
    params.validate()?;
    let n = game.player_count();
    if n == 0 {
        return Err(Error::NoPlayers);
    }
    let samples = params.samples();
    let degenerate = game.value(&game.empty_coalition()) || !game.value(&game.grand_coalition());
    let counts = if degenerate {
        vec![0u64; n]
    } else {
        (0..samples)
            .into_par_iter()
            .fold(
                || vec![0u64; n],
                |mut counts, trial| {
                    let perm = ordering(n, params.seed, trial);
                    let prefix_wins = |len: usize| {
                        let mut c = game.empty_coalition();
                        for &p in &perm[..len] {
                            c.insert(p);
                        }
                        game.value(&c)
                    };
                    // smallest len in 1..=n with a winning prefix
                    let (mut lo, mut hi) = (1, n);
                    while lo < hi {
                        let mid = (lo + hi) / 2;
                        if prefix_wins(mid) {
                            hi = mid;
                        } else {
                            lo = mid + 1;
                        }
                    }
                    counts[perm[lo - 1]] += 1;
                    counts
                },
            )
            .reduce(
                || vec![0u64; n],
                |mut x, y| {
                    x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
                    x
                },
            )
    };
    Ok(game
        .players()
        .iter()
        .cloned()
        .zip(counts.into_iter().map(|c| estimate(c, samples, params)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Coalition, FnGame};

    #[test]
    fn hoeffding_counts() {
        assert_eq!(hoeffding_samples(0.05, 0.01), 1060);
        assert_eq!(hoeffding_samples(0.1, 0.05), 185);
    }

    #[test]
    fn invalid_parameters() {
        assert!(SampleParams::new(0.0, 0.1, 0).is_err());
        assert!(SampleParams::new(0.1, 1.0, 0).is_err());
        assert!(SampleParams::new(f64::NAN, 0.1, 0).is_err());
    }

    #[test]
    fn constant_zero_game_estimates_zero() {
        let g = FnGame::numbered(4, |_: &Coalition| false);
        let p = SampleParams::new(0.05, 0.01, 7).unwrap();
        let e = shapley_mc(&g, 2, &p).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.samples, 1060);
        assert!(shapley_mc_all(&g, &p)
            .unwrap()
            .iter()
            .all(|(_, e)| e.value == 0.0));
    }

    #[test]
    fn same_seed_same_estimate() {
        let g = FnGame::numbered(6, |c: &Coalition| c.contains(0) && c.count_ones(..) >= 3);
        let p = SampleParams::new(0.1, 0.1, 99).unwrap();
        let a = shapley_mc(&g, 0, &p).unwrap();
        let b = shapley_mc(&g, 0, &p).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn batch_matches_single_player() {
        let g = FnGame::numbered(5, |c: &Coalition| {
            (c.contains(0) && c.contains(1)) || (c.contains(2) && c.contains(3) && c.contains(4))
        });
        let p = SampleParams::new(0.1, 0.2, 3).unwrap();
        let all = shapley_mc_all(&g, &p).unwrap();
        for (a, (_, est)) in all.iter().enumerate() {
            assert_eq!(*est, shapley_mc(&g, a, &p).unwrap(), "player {a}");
        }
        let total: u64 = all.iter().map(|(_, e)| e.successes).sum();
        assert_eq!(total, p.samples());
    }

    #[test]
    fn trial_streams_differ() {
        assert_ne!(ordering(10, 1, 0), ordering(10, 1, 1));
        assert_eq!(ordering(10, 1, 5), ordering(10, 1, 5));
    }
}
