use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{coalition_from_mask, CoalitionGame, PlayerId};
use crate::error::{Error, Result};

/// Largest game handled by subset enumeration unless overridden.
pub const DEFAULT_SUBSET_CAP: usize = 22;
/// Largest game handled by permutation enumeration unless overridden.
pub const DEFAULT_PERMUTATION_CAP: usize = 9;

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// `b! (n-b-1)! / n!`, the probability that the players preceding a fixed
/// player in a uniform ordering of `n` players are exactly a given set of
/// size `b`.
pub fn permutation_weight(b: usize, n: usize) -> BigRational {
    assert!(b < n, "coalition of {b} excludes the player among {n}");
    BigRational::new(
        (factorial(b) * factorial(n - b - 1)).into(),
        factorial(n).into(),
    )
}

fn check_player(game: &impl CoalitionGame, a: usize) -> Result<()> {
    if game.player_count() == 0 {
        return Err(Error::NoPlayers);
    }
    if a >= game.player_count() {
        return Err(Error::UnknownPlayer(format!("player #{a}")));
    }
    Ok(())
}

fn weighted_sum(pivots_by_size: &[u64], n: usize) -> BigRational {
    pivots_by_size
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(b, &c)| permutation_weight(b, n) * BigRational::from_integer(c.into()))
        .fold(BigRational::zero(), |acc, x| acc + x)
}

/// Subset form: `Σ_{B ⊆ A∖{a}} |B|!(|A|-|B|-1)!/|A|! · (v(B∪{a}) − v(B))`.
pub fn shapley_exact_subset(
    game: &impl CoalitionGame,
    a: usize,
    cap: usize,
) -> Result<BigRational> {
    check_player(game, a)?;
    let n = game.player_count();
    if n > cap || n > 63 {
        return Err(Error::EnumerationOverflow { cap });
    }
    let others: Vec<usize> = (0..n).filter(|&i| i != a).collect();
    let counts = (0u64..1 << others.len())
        .into_par_iter()
        .fold(
            || vec![0u64; n],
            |mut counts, sub| {
                let mut mask = 0u64;
                for (j, &p) in others.iter().enumerate() {
                    if sub >> j & 1 == 1 {
                        mask |= 1 << p;
                    }
                }
                let mut coalition = coalition_from_mask(n, mask);
                if !game.value(&coalition) {
                    coalition.insert(a);
                    if game.value(&coalition) {
                        counts[sub.count_ones() as usize] += 1;
                    }
                }
                counts
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
                x
            },
        );
    Ok(weighted_sum(&counts, n))
}

/// Subset form for every player at once, from one tabulation of `v`.
pub fn shapley_exact_subset_all(game: &impl CoalitionGame, cap: usize) -> Result<Vec<BigRational>> {
    let n = game.player_count();
    if n == 0 {
        return Err(Error::NoPlayers);
    }
    if n > cap || n > 63 {
        return Err(Error::EnumerationOverflow { cap });
    }
    let table: Vec<bool> = (0u64..1 << n)
        .into_par_iter()
        .map(|mask| game.value(&coalition_from_mask(n, mask)))
        .collect();
    let counts = (0u64..1 << n)
        .into_par_iter()
        .filter(|&mask| table[mask as usize])
        .fold(
            || vec![vec![0u64; n]; n],
            |mut counts, mask| {
                let size = mask.count_ones() as usize;
                let mut rest = mask;
                while rest != 0 {
                    let p = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    if !table[(mask & !(1 << p)) as usize] {
                        counts[p][size - 1] += 1;
                    }
                }
                counts
            },
        )
        .reduce(
            || vec![vec![0u64; n]; n],
            |mut x, y| {
                for (xr, yr) in x.iter_mut().zip(y) {
                    xr.iter_mut().zip(yr).for_each(|(a, b)| *a += b);
                }
                x
            },
        );
    Ok(counts.iter().map(|c| weighted_sum(c, n)).collect())
}

/// Visits every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Permutation form: average marginal contribution over all `|A|!`
/// orderings.
pub fn shapley_exact_permutation(
    game: &impl CoalitionGame,
    a: usize,
    cap: usize,
) -> Result<BigRational> {
    check_player(game, a)?;
    let n = game.player_count();
    if n > cap || n > 20 {
        return Err(Error::EnumerationOverflow { cap });
    }
    let mut successes = 0u64;
    let mut total = 0u64;
    for_each_permutation(n, |perm| {
        total += 1;
        let mut before = game.empty_coalition();
        for &p in perm.iter().take_while(|&&p| p != a) {
            before.insert(p);
        }
        let without = game.value(&before);
        before.insert(a);
        if game.value(&before) && !without {
            successes += 1;
        }
    });
    Ok(BigRational::new(successes.into(), total.into()))
}

/// Permutation form for every player; each ordering is walked once and the
/// marginal of every position recorded.
pub fn shapley_exact_permutation_all(
    game: &impl CoalitionGame,
    cap: usize,
) -> Result<Vec<(PlayerId, BigRational)>> {
    let n = game.player_count();
    if n == 0 {
        return Err(Error::NoPlayers);
    }
    if n > cap || n > 20 {
        return Err(Error::EnumerationOverflow { cap });
    }
    let mut successes = vec![0u64; n];
    let mut total = 0u64;
    for_each_permutation(n, |perm| {
        total += 1;
        let mut prefix = game.empty_coalition();
        let mut prev = game.value(&prefix);
        for &p in perm {
            prefix.insert(p);
            let now = game.value(&prefix);
            if now && !prev {
                successes[p] += 1;
            }
            prev = now;
        }
    });
    Ok(game
        .players()
        .iter()
        .cloned()
        .zip(
            successes
                .into_iter()
                .map(|s| BigRational::new(s.into(), total.into())),
        )
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Coalition, FnGame};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn chain2() -> FnGame<impl Fn(&Coalition) -> bool + Sync> {
        FnGame::numbered(2, |c: &Coalition| c.contains(0) && c.contains(1))
    }

    #[test]
    fn weights_sum_to_one_over_all_coalitions() {
        // Σ_b C(n-1, b) · b!(n-b-1)!/n! = 1
        for n in 1..8usize {
            let mut total = BigRational::zero();
            for b in 0..n {
                let binom = (0..b).fold(BigRational::one(), |acc, i| {
                    acc * r((n - 1 - i) as i64, (i + 1) as i64)
                });
                total += binom * permutation_weight(b, n);
            }
            assert_eq!(total, BigRational::one(), "n = {n}");
        }
    }

    #[test]
    fn two_player_chain_splits_evenly() {
        let g = chain2();
        // Brute force: subsets of the other player are ∅ (marginal 0) and
        // {other} (marginal 1, weight 1!0!/2! = 1/2); the two orderings
        // each give the later player the pivot.
        for a in 0..2 {
            assert_eq!(shapley_exact_subset(&g, a, 22).unwrap(), r(1, 2));
            assert_eq!(shapley_exact_permutation(&g, a, 9).unwrap(), r(1, 2));
        }
    }

    #[test]
    fn null_player_gets_zero() {
        let g = FnGame::numbered(3, |c: &Coalition| c.contains(0));
        assert_eq!(
            shapley_exact_subset(&g, 2, 22).unwrap(),
            BigRational::zero()
        );
        assert_eq!(
            shapley_exact_permutation(&g, 2, 9).unwrap(),
            BigRational::zero()
        );
        assert_eq!(shapley_exact_subset(&g, 0, 22).unwrap(), BigRational::one());
    }

    #[test]
    fn caps_are_enforced() {
        let g = FnGame::numbered(10, |c: &Coalition| c.count_ones(..) > 5);
        assert_eq!(
            shapley_exact_permutation(&g, 0, 9).unwrap_err(),
            Error::EnumerationOverflow { cap: 9 }
        );
        assert_eq!(
            shapley_exact_subset(&g, 0, 8).unwrap_err(),
            Error::EnumerationOverflow { cap: 8 }
        );
        let empty = FnGame::numbered(0, |_: &Coalition| false);
        assert_eq!(
            shapley_exact_subset_all(&empty, 22).unwrap_err(),
            Error::NoPlayers
        );
    }

    #[test]
    fn majority_game_is_symmetric() {
        let g = FnGame::numbered(5, |c: &Coalition| c.count_ones(..) >= 3);
        let all = shapley_exact_subset_all(&g, 22).unwrap();
        assert!(all.iter().all(|v| *v == r(1, 5)));
        let perm = shapley_exact_permutation_all(&g, 9).unwrap();
        assert!(perm.iter().all(|(_, v)| *v == r(1, 5)));
    }

    #[test]
    fn heap_permutations_are_complete() {
        let mut seen = std::collections::BTreeSet::new();
        for_each_permutation(4, |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 24);
    }
}
