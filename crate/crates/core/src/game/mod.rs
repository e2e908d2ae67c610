//! Generic Shapley machinery for monotone 0/1 coalition games.
//!
//! A game exposes an ordered player list and a valuation over coalitions
//! (bitsets over player positions). Valuations must satisfy `v(∅) = 0` and
//! be monotone; the sampled estimators rely on monotonicity.

mod exact;
mod memo;
mod nonzero;
mod report;
mod sampling;

use std::fmt;

use fixedbitset::FixedBitSet;

pub use exact::{
    permutation_weight, shapley_exact_permutation, shapley_exact_permutation_all,
    shapley_exact_subset, shapley_exact_subset_all, DEFAULT_PERMUTATION_CAP, DEFAULT_SUBSET_CAP,
};
pub use memo::{Memoized, DEFAULT_MEMO_CAPACITY};
pub use nonzero::shapley_nonzero;
pub use report::{Method, PlayerReport, PlayerValue, ShapleyReport};
pub use sampling::{
    hoeffding_samples, shapley_mc, shapley_mc_all, trial_rng, Estimate, SampleParams,
};

pub type Coalition = FixedBitSet;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlayerId(String);

impl PlayerId {
    pub fn new(id: impl Into<String>) -> Self {
        PlayerId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PlayerId {
    fn from(s: &str) -> Self {
        PlayerId(s.to_string())
    }
}

/// A cooperative game with a 0/1 valuation.
pub trait CoalitionGame: Sync {
    fn players(&self) -> &[PlayerId];

    fn value(&self, coalition: &Coalition) -> bool;

    fn player_count(&self) -> usize {
        self.players().len()
    }

    fn player_index(&self, id: &PlayerId) -> Option<usize> {
        self.players().iter().position(|p| p == id)
    }

    fn empty_coalition(&self) -> Coalition {
        Coalition::with_capacity(self.player_count())
    }

    fn grand_coalition(&self) -> Coalition {
        let mut c = self.empty_coalition();
        c.insert_range(..);
        c
    }
}

impl<G: CoalitionGame + ?Sized> CoalitionGame for &G {
    fn players(&self) -> &[PlayerId] {
        (**self).players()
    }

    fn value(&self, coalition: &Coalition) -> bool {
        (**self).value(coalition)
    }
}

/// A game given by a closure; handy for synthetic games.
pub struct FnGame<F> {
    players: Vec<PlayerId>,
    valuation: F,
}

impl<F: Fn(&Coalition) -> bool + Sync> FnGame<F> {
    pub fn new(players: Vec<PlayerId>, valuation: F) -> Self {
        FnGame { players, valuation }
    }

    /// Players named `p0`, `p1`, ...
    pub fn numbered(n: usize, valuation: F) -> Self {
        FnGame::new(
            (0..n).map(|i| PlayerId::new(format!("p{i}"))).collect(),
            valuation,
        )
    }
}

impl<F: Fn(&Coalition) -> bool + Sync> CoalitionGame for FnGame<F> {
    fn players(&self) -> &[PlayerId] {
        &self.players
    }

    fn value(&self, coalition: &Coalition) -> bool {
        (self.valuation)(coalition)
    }
}

/// Coalition from the low `n` bits of `mask`.
pub fn coalition_from_mask(n: usize, mask: u64) -> Coalition {
    let mut c = Coalition::with_capacity(n);
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        c.insert(i);
        m &= m - 1;
    }
    c
}

/// Low 64 bits of a coalition as a mask.
pub fn coalition_mask(c: &Coalition) -> u64 {
    c.ones().filter(|&i| i < 64).fold(0u64, |m, i| m | (1 << i))
}
