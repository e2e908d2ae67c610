use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use super::games::PlayerKind;
use crate::error::{Error, Result};
use crate::game::{shapley_mc, shapley_mc_all, CoalitionGame, Estimate, PlayerId, SampleParams};
use crate::query::Crpq;

/// Lower bound on every nonzero Shapley value of a query game whose atoms
/// have finite languages.
///
/// A minimal winning coalition has at most `k_sum` players, and the ordering
/// that puts it first, pivot last, has probability at least
/// `1 / (m (m−1) ⋯ (m−k_sum+1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapBound {
    pub k_sum: usize,
    pub players: usize,
    pub gap: BigRational,
}

impl GapBound {
    pub fn from_parts(k_sum: usize, players: usize) -> Self {
        let denominator = (0..k_sum.min(players))
            .map(|j| BigUint::from(players - j))
            .fold(BigUint::one(), |acc, x| acc * x);
        GapBound {
            k_sum,
            players,
            gap: BigRational::new(1.into(), denominator.into()),
        }
    }

    pub fn gap_f64(&self) -> f64 {
        self.gap.to_f64().unwrap_or(0.0)
    }
}

fn finite_bounds(query: &Crpq) -> Result<Vec<usize>> {
    query
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, atom)| {
            atom.profile
                .finite_bound()
                .ok_or(Error::InfiniteLanguage { atom: i })
        })
        .collect()
}

/// Gap for the edge game: `k_sum` is the sum of the longest word lengths.
pub fn gap_bound(query: &Crpq, players: usize) -> Result<GapBound> {
    let k_sum = finite_bounds(query)?.into_iter().sum();
    Ok(GapBound::from_parts(k_sum, players))
}

/// Gap for the vertex game: a path of `k` edges visits up to `k + 1`
/// vertices, so each atom contributes its longest word length plus one.
pub fn gap_bound_vertices(query: &Crpq, players: usize) -> Result<GapBound> {
    let k_sum = finite_bounds(query)?.into_iter().map(|k| k + 1).sum();
    Ok(GapBound::from_parts(k_sum, players))
}

pub fn gap_bound_for(query: &Crpq, players: usize, kind: PlayerKind) -> Result<GapBound> {
    match kind {
        PlayerKind::Edge => gap_bound(query, players),
        PlayerKind::Vertex => gap_bound_vertices(query, players),
    }
}

/// Multiplicative `(ε, δ)` parameters and the additive run they induce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplicativePlan {
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub gap: f64,
    /// `gap · ε / (1 + ε)`.
    pub additive_eps: f64,
}

impl MultiplicativePlan {
    pub fn new(gap: &GapBound, eps: f64, delta: f64, seed: u64) -> Result<Self> {
        SampleParams::new(eps, delta, seed)?;
        let g = gap.gap_f64();
        let plan = MultiplicativePlan {
            eps,
            delta,
            seed,
            gap: g,
            additive_eps: g * eps / (1.0 + eps),
        };
        if plan.additive_eps.is_nan() || plan.additive_eps <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gap {} is too small for floating-point sampling",
                gap.gap
            )));
        }
        Ok(plan)
    }

    pub fn additive(&self) -> SampleParams {
        SampleParams {
            eps: self.additive_eps,
            delta: self.delta,
            seed: self.seed,
        }
    }

    pub fn samples(&self) -> u64 {
        self.additive().samples()
    }

    /// Estimates below half the gap are reported as zero: a nonzero value is
    /// at least the gap, and the additive error is below half of it.
    fn round(&self, raw: Estimate) -> Estimate {
        let value = if raw.value < self.gap / 2.0 {
            0.0
        } else {
            raw.value
        };
        Estimate {
            value,
            eps: self.eps,
            ..raw
        }
    }
}

/// `(1 ± ε)`-multiplicative estimate of player `a` with probability `1 − δ`.
pub fn shapley_multiplicative(
    game: &impl CoalitionGame,
    a: usize,
    plan: &MultiplicativePlan,
) -> Result<Estimate> {
    shapley_mc(game, a, &plan.additive()).map(|e| plan.round(e))
}

pub fn shapley_multiplicative_all(
    game: &impl CoalitionGame,
    plan: &MultiplicativePlan,
) -> Result<Vec<(PlayerId, Estimate)>> {
    Ok(shapley_mc_all(game, &plan.additive())?
        .into_iter()
        .map(|(id, e)| (id, plan.round(e)))
        .collect())
}
