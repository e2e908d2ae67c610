use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::game::{Coalition, CoalitionGame, PlayerId};
use crate::graph::{LabeledGraph, Presence, Role};
use crate::query::{Assignment, Crpq, QueryEvaluator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlayerKind {
    Edge,
    Vertex,
}

impl fmt::Display for PlayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlayerKind::Edge => "edge",
            PlayerKind::Vertex => "vertex",
        })
    }
}

impl FromStr for PlayerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge" => Ok(PlayerKind::Edge),
            "vertex" => Ok(PlayerKind::Vertex),
            other => Err(Error::InvalidParameter(format!(
                "unknown player kind `{other}`"
            ))),
        }
    }
}

/// The game `v(B) = q[μ](G[B ∪ X]) − q[μ](G[X])` where `X` is the set of
/// exogenous edges (edge game) or vertices (vertex game).
///
/// Players are the endogenous items, ordered by id.
pub struct QueryGame<'a> {
    eval: QueryEvaluator<'a>,
    endpoints: Vec<(usize, usize)>,
    kind: PlayerKind,
    players: Vec<PlayerId>,
    items: Vec<usize>,
    base: FixedBitSet,
    baseline: bool,
}

impl<'a> QueryGame<'a> {
    pub fn new(
        graph: &'a LabeledGraph,
        query: &'a Crpq,
        binding: &Assignment,
        kind: PlayerKind,
    ) -> Result<Self> {
        let endpoints = binding.resolve(query, graph)?;
        let eval = QueryEvaluator::new(graph, query);
        let (mut entries, base) = match kind {
            PlayerKind::Edge => {
                let entries: Vec<(PlayerId, usize)> = graph
                    .endo_edges()
                    .into_iter()
                    .map(|e| (PlayerId::new(graph.edge(e).id().to_string()), e))
                    .collect();
                let mut base = FixedBitSet::with_capacity(graph.edge_count());
                graph.exo_edges().into_iter().for_each(|e| base.insert(e));
                (entries, base)
            }
            PlayerKind::Vertex => {
                let entries: Vec<(PlayerId, usize)> = graph
                    .endo_vertices()
                    .into_iter()
                    .map(|v| (PlayerId::new(graph.vertex(v).id.to_string()), v))
                    .collect();
                let mut base = FixedBitSet::with_capacity(graph.vertex_count());
                graph
                    .exo_vertices()
                    .into_iter()
                    .for_each(|v| base.insert(v));
                (entries, base)
            }
        };
        entries.sort();
        let (players, items) = entries.into_iter().unzip();
        let mut game = QueryGame {
            eval,
            endpoints,
            kind,
            players,
            items,
            base,
            baseline: false,
        };
        game.baseline = game.raw_value(&game.empty_coalition());
        Ok(game)
    }

    pub fn kind(&self) -> PlayerKind {
        self.kind
    }

    pub fn graph(&self) -> &'a LabeledGraph {
        self.eval.graph()
    }

    pub fn query(&self) -> &'a Crpq {
        self.eval.query()
    }

    pub fn evaluator(&self) -> &QueryEvaluator<'a> {
        &self.eval
    }

    /// Atom endpoints under the binding, as vertex positions.
    pub fn endpoints(&self) -> &[(usize, usize)] {
        &self.endpoints
    }

    /// Graph position (edge or vertex) of each player.
    pub fn items(&self) -> &[usize] {
        &self.items
    }

    /// Player position of a graph item, if it is a player.
    pub fn player_of_item(&self, item: usize) -> Option<usize> {
        self.items.iter().position(|&i| i == item)
    }

    /// Whether the query already holds on the exogenous part alone.
    pub fn baseline_holds(&self) -> bool {
        self.baseline
    }

    /// Whether the query holds on the whole graph.
    pub fn holds_on_full_graph(&self) -> bool {
        self.raw_value(&self.grand_coalition())
    }

    /// `q[μ](G[B ∪ X])` without the baseline shift.
    pub fn raw_value(&self, coalition: &Coalition) -> bool {
        let mut mask = self.base.clone();
        for p in coalition.ones() {
            mask.insert(self.items[p]);
        }
        let presence = match self.kind {
            PlayerKind::Edge => Presence::Edges(&mask),
            PlayerKind::Vertex => Presence::Vertices(&mask),
        };
        self.eval.holds(&self.endpoints, presence)
    }
}

impl CoalitionGame for QueryGame<'_> {
    fn players(&self) -> &[PlayerId] {
        &self.players
    }

    fn value(&self, coalition: &Coalition) -> bool {
        !self.baseline && self.raw_value(coalition)
    }
}

/// Edge game of `q` and answer `μ` on `graph`.
pub fn edge_game<'a>(
    graph: &'a LabeledGraph,
    query: &'a Crpq,
    binding: &Assignment,
) -> Result<QueryGame<'a>> {
    QueryGame::new(graph, query, binding, PlayerKind::Edge)
}

/// Vertex game of `q` and answer `μ` on `graph`.
pub fn vertex_game<'a>(
    graph: &'a LabeledGraph,
    query: &'a Crpq,
    binding: &Assignment,
) -> Result<QueryGame<'a>> {
    QueryGame::new(graph, query, binding, PlayerKind::Vertex)
}

/// Number of items of `kind` that are players.
pub fn player_count(graph: &LabeledGraph, kind: PlayerKind) -> usize {
    match kind {
        PlayerKind::Edge => graph
            .edges()
            .iter()
            .filter(|e| e.role == Role::Endogenous)
            .count(),
        PlayerKind::Vertex => graph
            .vertices()
            .iter()
            .filter(|v| v.role == Role::Endogenous)
            .count(),
    }
}
