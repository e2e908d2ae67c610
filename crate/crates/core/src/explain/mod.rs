//! Shapley values of edges and vertices for answers of (C)RPQs.
//!
//! [`solve`] picks an algorithm for an [`ExplainRequest`] and returns a
//! [`ShapleyReport`]; [`decide_nonzero`] answers whether a single player has
//! a positive value.

pub mod approx;
pub mod games;
pub mod short;
pub mod support;

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Zero;

pub use approx::{
    gap_bound, gap_bound_for, gap_bound_vertices, shapley_multiplicative,
    shapley_multiplicative_all, GapBound, MultiplicativePlan,
};
pub use games::{edge_game, vertex_game, PlayerKind, QueryGame};
pub use short::{
    categorize_edges, count_blocking, count_enabling, shapley_short_rpq, shapley_short_rpq_using,
    BlockingCounter, EdgeCategorization, DEFAULT_COMPONENT_CAP,
};
pub use support::{
    candidate_supports, edge_on_simple_path, reachability_pivot_exists, DEFAULT_SEARCH_BUDGET,
};

use crate::error::{Error, Result};
use crate::game::{
    shapley_exact_subset, shapley_exact_subset_all, shapley_mc, shapley_mc_all, shapley_nonzero,
    CoalitionGame, Memoized, Method, PlayerId, PlayerReport, PlayerValue, SampleParams,
    ShapleyReport, DEFAULT_MEMO_CAPACITY, DEFAULT_SUBSET_CAP,
};
use crate::graph::LabeledGraph;
use crate::query::{Assignment, Crpq};

/// Largest ε accepted for multiplicative estimates; larger requests are
/// clamped with a warning flag.
pub const MAX_MULTIPLICATIVE_EPS: f64 = 0.99;

/// Default ceiling on Monte-Carlo trials for one run.
pub const DEFAULT_MAX_SAMPLES: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Auto,
    Exact,
    ApproxAdditive,
    ApproxMultiplicative,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Auto => "auto",
            Mode::Exact => "exact",
            Mode::ApproxAdditive => "approx-additive",
            Mode::ApproxMultiplicative => "approx-multiplicative",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Mode::Auto,
            Mode::Exact,
            Mode::ApproxAdditive,
            Mode::ApproxMultiplicative,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown mode `{s}`")))
    }
}

/// Resource limits for [`solve`] and [`decide_nonzero`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Most players handled by subset enumeration.
    pub subset_cap: usize,
    /// Largest conflict component for the short-word counter.
    pub component_cap: usize,
    /// Search steps for path and support enumeration.
    pub search_budget: u64,
    /// Most Monte-Carlo trials per run.
    pub max_samples: u64,
    pub memo_capacity: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            subset_cap: DEFAULT_SUBSET_CAP,
            component_cap: DEFAULT_COMPONENT_CAP,
            search_budget: DEFAULT_SEARCH_BUDGET,
            max_samples: DEFAULT_MAX_SAMPLES,
            memo_capacity: DEFAULT_MEMO_CAPACITY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExplainRequest<'a> {
    pub graph: &'a LabeledGraph,
    pub query: &'a Crpq,
    pub binding: Assignment,
    pub player_kind: PlayerKind,
    /// Restrict the report to one player.
    pub focus: Option<PlayerId>,
    pub mode: Mode,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    /// Whether the caller asserts that no atom is implied by the others.
    /// Only changes which guarantee the report cites.
    pub non_redundant: bool,
    pub limits: Limits,
}

impl<'a> ExplainRequest<'a> {
    pub fn new(graph: &'a LabeledGraph, query: &'a Crpq, binding: Assignment) -> Self {
        ExplainRequest {
            graph,
            query,
            binding,
            player_kind: PlayerKind::Edge,
            focus: None,
            mode: Mode::Auto,
            eps: 0.05,
            delta: 0.01,
            seed: 0,
            non_redundant: true,
            limits: Limits::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} not in (0,1)",
                self.delta
            )));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps = {} must be positive",
                self.eps
            )));
        }
        if self.eps >= 1.0 && self.mode != Mode::ApproxMultiplicative && self.mode != Mode::Auto {
            return Err(Error::InvalidParameter(format!(
                "eps = {} not in (0,1)",
                self.eps
            )));
        }
        self.binding.check_total(self.query)
    }
}

/// Whether the one-atom short-word algorithm could apply.
fn short_word_candidate(req: &ExplainRequest<'_>) -> bool {
    req.player_kind == PlayerKind::Edge
        && req.query.atoms().len() == 1
        && req.query.atoms()[0].profile.short2
}

fn exact_rows(
    game: &QueryGame<'_>,
    targets: &[usize],
    values: Vec<BigRational>,
) -> Vec<PlayerReport> {
    targets
        .iter()
        .zip(values)
        .map(|(&p, v)| PlayerReport {
            id: game.players()[p].clone(),
            value: PlayerValue::Exact(v),
        })
        .collect()
}

fn try_short_word(
    req: &ExplainRequest<'_>,
    game: &QueryGame<'_>,
    targets: &[usize],
    flags: &mut Vec<String>,
) -> Result<Option<Vec<PlayerReport>>> {
    let (s, t) = game.endpoints()[0];
    let dfa = &req.query.atoms()[0].dfa;
    let ids: Vec<_> = targets
        .iter()
        .map(|&p| req.graph.edge(game.items()[p]).id())
        .collect();
    let run = |counter| -> Result<(Vec<BigRational>, usize)> {
        let mut largest = 0;
        let mut values = Vec::with_capacity(ids.len());
        for id in &ids {
            let (v, c) = shapley_short_rpq_using(req.graph, s, t, dfa, id, counter)?;
            largest = largest.max(c);
            values.push(v);
        }
        Ok((values, largest))
    };
    match run(BlockingCounter::ClosedForm) {
        Ok((values, _)) => return Ok(Some(exact_rows(game, targets, values))),
        Err(Error::NonDisjointStructure(reason)) => {
            flags.push(format!("non-disjoint-structure: {reason}"));
        }
        Err(e) => return Err(e),
    }
    match run(BlockingCounter::ConflictComponents {
        cap: req.limits.component_cap,
    }) {
        Ok((values, largest)) => {
            flags.push(format!("conflict-components: largest has {largest} edges"));
            Ok(Some(exact_rows(game, targets, values)))
        }
        Err(Error::NotApplicable { reason, .. }) => {
            flags.push(format!("exact-poly unavailable: {reason}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn exact_subset_rows(
    req: &ExplainRequest<'_>,
    game: &QueryGame<'_>,
    targets: &[usize],
    trivial: bool,
) -> Result<Vec<PlayerReport>> {
    let n = game.player_count();
    if n > req.limits.subset_cap {
        return Err(Error::EnumerationOverflow {
            cap: req.limits.subset_cap,
        });
    }
    let values = if trivial {
        vec![BigRational::zero(); targets.len()]
    } else if targets.len() == 1 {
        vec![shapley_exact_subset(
            game,
            targets[0],
            req.limits.subset_cap,
        )?]
    } else {
        let all = shapley_exact_subset_all(game, req.limits.subset_cap)?;
        debug_assert_eq!(
            all.iter().fold(BigRational::zero(), |a, b| a + b),
            BigRational::from_integer(u8::from(game.value(&game.grand_coalition())).into())
        );
        all
    };
    Ok(exact_rows(game, targets, values))
}

fn additive_rows(
    req: &ExplainRequest<'_>,
    game: &QueryGame<'_>,
    targets: &[usize],
) -> Result<Vec<PlayerReport>> {
    let params = SampleParams::new(req.eps, req.delta, req.seed)?;
    if params.samples() > req.limits.max_samples {
        return Err(Error::TooManySamples {
            needed: params.samples(),
            limit: req.limits.max_samples,
        });
    }
    let memo = Memoized::with_capacity(game, req.limits.memo_capacity);
    sampled_rows(
        game,
        targets,
        |a| shapley_mc(&memo, a, &params),
        || shapley_mc_all(&memo, &params),
    )
}

fn sampled_rows(
    game: &QueryGame<'_>,
    targets: &[usize],
    one: impl Fn(usize) -> Result<crate::game::Estimate>,
    all: impl Fn() -> Result<Vec<(PlayerId, crate::game::Estimate)>>,
) -> Result<Vec<PlayerReport>> {
    if targets.len() == 1 {
        let e = one(targets[0])?;
        return Ok(vec![PlayerReport {
            id: game.players()[targets[0]].clone(),
            value: PlayerValue::Sampled(e),
        }]);
    }
    Ok(all()?
        .into_iter()
        .map(|(id, e)| PlayerReport {
            id,
            value: PlayerValue::Sampled(e),
        })
        .collect())
}

fn multiplicative_plan(
    req: &ExplainRequest<'_>,
    game: &QueryGame<'_>,
    flags: &mut Vec<String>,
) -> Result<MultiplicativePlan> {
    let gap = gap_bound_for(req.query, game.player_count(), req.player_kind)?;
    let mut eps = req.eps;
    if eps > MAX_MULTIPLICATIVE_EPS {
        flags.push(format!("eps-clamped: {eps} -> {MAX_MULTIPLICATIVE_EPS}"));
        eps = MAX_MULTIPLICATIVE_EPS;
    }
    let plan = MultiplicativePlan::new(&gap, eps, req.delta, req.seed)?;
    flags.push(format!(
        "gap: {} (k_sum = {}), additive eps = {:e}",
        gap.gap, gap.k_sum, plan.additive_eps
    ));
    if !req.non_redundant && req.query.atoms().len() > 1 {
        flags.push("atoms-may-be-redundant: guarantee refers to the non-redundant core".into());
    }
    Ok(plan)
}

fn multiplicative_rows(
    req: &ExplainRequest<'_>,
    game: &QueryGame<'_>,
    targets: &[usize],
    plan: &MultiplicativePlan,
) -> Result<Vec<PlayerReport>> {
    let memo = Memoized::with_capacity(game, req.limits.memo_capacity);
    sampled_rows(
        game,
        targets,
        |a| shapley_multiplicative(&memo, a, plan),
        || shapley_multiplicative_all(&memo, plan),
    )
}

/// Computes Shapley values for every player, or the focus player, choosing
/// the algorithm from the request mode:
///
/// * `exact`: the short-word counter when the query is a single RPQ with
///   words of length ≤ 2 over edges, otherwise subset enumeration.
/// * `approx-additive`: Monte-Carlo within `±ε`.
/// * `approx-multiplicative`: Monte-Carlo within a factor `1 ± ε`; needs
///   finite languages.
/// * `auto`: exact when cheap, else multiplicative when the languages are
///   finite and the trial count fits, else additive.
pub fn solve(req: &ExplainRequest<'_>) -> Result<ShapleyReport> {
    req.validate()?;
    let game = QueryGame::new(req.graph, req.query, &req.binding, req.player_kind)?;
    let n = game.player_count();
    if n == 0 {
        return Err(Error::NoPlayers);
    }
    let targets: Vec<usize> = match &req.focus {
        Some(id) => vec![game
            .player_index(id)
            .ok_or_else(|| Error::UnknownPlayer(id.to_string()))?],
        None => (0..n).collect(),
    };
    let mut flags = Vec::new();
    if req.query.any_empty() {
        flags.push("empty-language".to_string());
    } else if game.baseline_holds() {
        flags.push("answer-exogenous".to_string());
    } else if !game.holds_on_full_graph() {
        flags.push("not-an-answer".to_string());
    }
    let trivial = !flags.is_empty();

    let (method, players) = match req.mode {
        Mode::Exact => {
            let poly = if short_word_candidate(req) {
                try_short_word(req, &game, &targets, &mut flags)?
            } else {
                None
            };
            match poly {
                Some(rows) => (Method::ExactPoly, rows),
                None => (
                    Method::ExactSubset,
                    exact_subset_rows(req, &game, &targets, trivial)?,
                ),
            }
        }
        Mode::ApproxAdditive => (Method::McAdditive, additive_rows(req, &game, &targets)?),
        Mode::ApproxMultiplicative => {
            let plan = multiplicative_plan(req, &game, &mut flags)?;
            if plan.samples() > req.limits.max_samples {
                return Err(Error::TooManySamples {
                    needed: plan.samples(),
                    limit: req.limits.max_samples,
                });
            }
            (
                Method::McMultiplicative,
                multiplicative_rows(req, &game, &targets, &plan)?,
            )
        }
        Mode::Auto => solve_auto(req, &game, &targets, trivial, &mut flags)?,
    };
    Ok(ShapleyReport::new(method, players, flags))
}

fn solve_auto(
    req: &ExplainRequest<'_>,
    game: &QueryGame<'_>,
    targets: &[usize],
    trivial: bool,
    flags: &mut Vec<String>,
) -> Result<(Method, Vec<PlayerReport>)> {
    if short_word_candidate(req) {
        if let Some(rows) = try_short_word(req, game, targets, flags)? {
            return Ok((Method::ExactPoly, rows));
        }
    }
    if game.player_count() <= req.limits.subset_cap {
        return Ok((
            Method::ExactSubset,
            exact_subset_rows(req, game, targets, trivial)?,
        ));
    }
    let additive_req = ExplainRequest {
        eps: req.eps.min(MAX_MULTIPLICATIVE_EPS),
        ..req.clone()
    };
    if req.query.all_finite() {
        let mut plan_flags = Vec::new();
        let plan = multiplicative_plan(req, game, &mut plan_flags)?;
        if plan.samples() <= req.limits.max_samples {
            flags.extend(plan_flags);
            return Ok((
                Method::McMultiplicative,
                multiplicative_rows(req, game, targets, &plan)?,
            ));
        }
        flags.push(format!(
            "multiplicative run needs {} trials, over the limit of {}; additive guarantee only",
            plan.samples(),
            req.limits.max_samples
        ));
    } else {
        flags.push("infinite-language: additive guarantee only".into());
    }
    Ok((
        Method::McAdditive,
        additive_rows(&additive_req, game, targets)?,
    ))
}

/// Answer of [`decide_nonzero`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Positive,
    Zero,
    /// The search budget ran out.
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Positive => "true",
            Verdict::Zero => "false",
            Verdict::Unknown => "unknown",
        })
    }
}

/// Decides whether `player` has a positive Shapley value.
///
/// Reachability queries over edges use the simple-path search; everything
/// else checks the player against candidate minimal winning coalitions.
pub fn decide_nonzero(req: &ExplainRequest<'_>, player: &PlayerId) -> Result<Verdict> {
    req.binding.check_total(req.query)?;
    let game = QueryGame::new(req.graph, req.query, &req.binding, req.player_kind)?;
    let a = game
        .player_index(player)
        .ok_or_else(|| Error::UnknownPlayer(player.to_string()))?;
    if !game.value(&game.grand_coalition()) {
        return Ok(Verdict::Zero);
    }
    let budget = req.limits.search_budget;
    let atoms = req.query.atoms();
    let outcome =
        if req.player_kind == PlayerKind::Edge && atoms.len() == 1 && atoms[0].dfa.is_universal() {
            let (s, t) = game.endpoints()[0];
            let e = game.items()[a];
            if req.graph.exo_edges().is_empty() {
                edge_on_simple_path(req.graph, s, t, e, budget)
            } else {
                reachability_pivot_exists(req.graph, s, t, e, budget)
            }
        } else {
            candidate_supports(&game, budget)
                .and_then(|supports| shapley_nonzero(&game, a, supports.into_iter().map(Ok)))
        };
    match outcome {
        Ok(true) => Ok(Verdict::Positive),
        Ok(false) => Ok(Verdict::Zero),
        Err(Error::BudgetExceeded { .. }) => Ok(Verdict::Unknown),
        Err(e) => Err(e),
    }
}
