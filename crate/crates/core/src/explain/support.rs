//! Search procedures behind the `Shapley(e) > 0` decision.

use std::cell::Cell;
use std::collections::{BTreeSet, VecDeque};

use fixedbitset::FixedBitSet;

use super::games::{PlayerKind, QueryGame};
use crate::dfa::Dfa;
use crate::error::{Error, Result};
use crate::game::{Coalition, CoalitionGame};
use crate::graph::{LabeledGraph, Presence, Role};
use crate::query::{edge_symbols, product_reaches, EMPTY_PATH_MATCHES};

/// Default number of search steps before giving up.
pub const DEFAULT_SEARCH_BUDGET: u64 = 5_000_000;

struct Budget {
    limit: u64,
    used: Cell<u64>,
}

impl Budget {
    fn new(limit: u64) -> Self {
        Budget {
            limit,
            used: Cell::new(0),
        }
    }

    fn step(&self) -> Result<()> {
        self.used.set(self.used.get() + 1);
        if self.used.get() > self.limit {
            Err(Error::BudgetExceeded { budget: self.limit })
        } else {
            Ok(())
        }
    }
}

fn reaches(
    graph: &LabeledGraph,
    from: usize,
    to: usize,
    blocked: &FixedBitSet,
    edge_ok: impl Fn(usize) -> bool,
) -> bool {
    if blocked.contains(from) {
        return false;
    }
    let mut seen = blocked.clone();
    seen.insert(from);
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            return true;
        }
        for &e in graph.out_edges(v) {
            let w = graph.endpoints(e).1;
            if edge_ok(e) && !seen.put(w) {
                queue.push_back(w);
            }
        }
    }
    false
}

/// Vertices that can reach `target` without touching `avoid`.
fn co_reachable(graph: &LabeledGraph, target: usize, avoid: &FixedBitSet) -> FixedBitSet {
    let mut seen = avoid.clone();
    let mut out = FixedBitSet::with_capacity(graph.vertex_count());
    if avoid.contains(target) {
        return out;
    }
    seen.insert(target);
    out.insert(target);
    let mut queue = VecDeque::from([target]);
    while let Some(v) = queue.pop_front() {
        for &e in graph.in_edges(v) {
            let u = graph.endpoints(e).0;
            if !seen.put(u) {
                out.insert(u);
                queue.push_back(u);
            }
        }
    }
    out
}

/// Depth-first enumeration of simple paths `s → u` avoiding `avoid`.
/// `visit` receives the vertex mask and edge list of each path and returns
/// `true` to stop.
fn simple_paths(
    graph: &LabeledGraph,
    s: usize,
    u: usize,
    avoid: &FixedBitSet,
    budget: &Budget,
    visit: &mut dyn FnMut(&FixedBitSet, &[usize]) -> bool,
) -> Result<bool> {
    let useful = co_reachable(graph, u, avoid);
    if !useful.contains(s) {
        return Ok(false);
    }
    let mut on_path = FixedBitSet::with_capacity(graph.vertex_count());
    let mut edges = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn go(
        graph: &LabeledGraph,
        v: usize,
        u: usize,
        useful: &FixedBitSet,
        on_path: &mut FixedBitSet,
        edges: &mut Vec<usize>,
        budget: &Budget,
        visit: &mut dyn FnMut(&FixedBitSet, &[usize]) -> bool,
    ) -> Result<bool> {
        budget.step()?;
        on_path.insert(v);
        if v == u {
            let stop = visit(on_path, edges);
            on_path.set(v, false);
            return Ok(stop);
        }
        for &e in graph.out_edges(v) {
            let w = graph.endpoints(e).1;
            if !useful.contains(w) || on_path.contains(w) {
                continue;
            }
            edges.push(e);
            let stop = go(graph, w, u, useful, on_path, edges, budget, visit)?;
            edges.pop();
            if stop {
                on_path.set(v, false);
                return Ok(true);
            }
        }
        on_path.set(v, false);
        Ok(false)
    }
    go(
        graph,
        s,
        u,
        &useful,
        &mut on_path,
        &mut edges,
        budget,
        visit,
    )
}

fn vertex_index_check(graph: &LabeledGraph, v: usize) -> Result<()> {
    if v < graph.vertex_count() {
        Ok(())
    } else {
        Err(Error::UnknownVertex(format!("vertex #{v}")))
    }
}

/// Whether edge `e` lies on some simple path from `s` to `t`.
///
/// Each simple prefix `s → source(e)` avoiding `target(e)` and `t` is
/// enumerated; the suffix only needs reachability from `target(e)` to `t`
/// outside the prefix, since any such walk shortens to a simple path.
pub fn edge_on_simple_path(
    graph: &LabeledGraph,
    s: usize,
    t: usize,
    e: usize,
    budget: u64,
) -> Result<bool> {
    vertex_index_check(graph, s)?;
    vertex_index_check(graph, t)?;
    let (u, w) = graph.endpoints(e);
    if u == w || s == t || u == t || w == s {
        return Ok(false);
    }
    let mut avoid = FixedBitSet::with_capacity(graph.vertex_count());
    avoid.insert(w);
    avoid.insert(t);
    let budget = Budget::new(budget);
    simple_paths(graph, s, u, &avoid, &budget, &mut |prefix, _| {
        reaches(graph, w, t, prefix, |_| true)
    })
}

/// Whether endogenous edge `e` has positive Shapley value for the query
/// "some path from `s` to `t`" when all present edges count.
///
/// With exogenous edges a simple path through `e` is not enough: the
/// endogenous edges of the path minus `e`, together with all exogenous
/// edges, must not already connect `s` to `t`. That set is then a coalition
/// where `e` is pivotal, and conversely a minimal winning coalition holding
/// `e` spans a simple path through `e` that has this property.
pub fn reachability_pivot_exists(
    graph: &LabeledGraph,
    s: usize,
    t: usize,
    e: usize,
    budget: u64,
) -> Result<bool> {
    vertex_index_check(graph, s)?;
    vertex_index_check(graph, t)?;
    if graph.edge(e).role != Role::Endogenous {
        return Err(Error::UnknownPlayer(graph.edge(e).id().to_string()));
    }
    let (u, w) = graph.endpoints(e);
    if u == w || s == t || u == t || w == s {
        return Ok(false);
    }
    let mut avoid = FixedBitSet::with_capacity(graph.vertex_count());
    avoid.insert(w);
    avoid.insert(t);
    let budget = Budget::new(budget);
    let mut inner_error = None;
    let found = simple_paths(graph, s, u, &avoid, &budget, &mut |prefix, prefix_edges| {
        let prefix_edges = prefix_edges.to_vec();
        let result = simple_paths(graph, w, t, prefix, &budget, &mut |_, suffix_edges| {
            let mut keep = FixedBitSet::with_capacity(graph.edge_count());
            for &x in prefix_edges.iter().chain(suffix_edges) {
                keep.insert(x);
            }
            let none = FixedBitSet::with_capacity(graph.vertex_count());
            !reaches(graph, s, t, &none, |x| {
                x != e && (keep.contains(x) || graph.edge(x).role == Role::Exogenous)
            })
        });
        result.unwrap_or_else(|err| {
            inner_error = Some(err);
            true
        })
    })?;
    match inner_error {
        Some(err) => Err(err),
        None => Ok(found),
    }
}

/// Coalitions containing every minimal winning coalition of the game.
///
/// For each atom, simple paths of the product of the graph with the atom's
/// automaton are enumerated from `(s, start)` to `(t, accepting)`; the
/// endogenous items on such a path form a candidate for that atom. A
/// shortest matching path inside a coalition is simple in the product, so
/// every minimal coalition arises as a union of one candidate per atom.
pub fn candidate_supports(game: &QueryGame<'_>, budget: u64) -> Result<Vec<Coalition>> {
    let graph = game.graph();
    let n = game.player_count();
    let budget = Budget::new(budget);
    let mut item_player = vec![
        None;
        match game.kind() {
            PlayerKind::Edge => graph.edge_count(),
            PlayerKind::Vertex => graph.vertex_count(),
        }
    ];
    for (p, &item) in game.items().iter().enumerate() {
        item_player[item] = Some(p);
    }
    let mut combined: BTreeSet<Vec<usize>> = BTreeSet::from([vec![]]);
    for (i, atom) in game.query().atoms().iter().enumerate() {
        let (s, t) = game.endpoints()[i];
        let per_atom = atom_candidates(graph, &atom.dfa, s, t, game.kind(), &item_player, &budget)?;
        let minimal = keep_minimal(per_atom);
        let mut next = BTreeSet::new();
        for base in &combined {
            for extra in &minimal {
                budget.step()?;
                let mut union: Vec<usize> = base.iter().chain(extra).copied().collect();
                union.sort_unstable();
                union.dedup();
                next.insert(union);
            }
        }
        combined = keep_minimal(next);
    }
    Ok(combined
        .into_iter()
        .map(|players| {
            let mut c = FixedBitSet::with_capacity(n);
            players.into_iter().for_each(|p| c.insert(p));
            c
        })
        .collect())
}

fn keep_minimal(sets: BTreeSet<Vec<usize>>) -> BTreeSet<Vec<usize>> {
    let mut by_size: Vec<Vec<usize>> = sets.into_iter().collect();
    by_size.sort_by_key(Vec::len);
    let mut kept: Vec<Vec<usize>> = Vec::new();
    for set in by_size {
        let covered = kept
            .iter()
            .any(|k| k.iter().all(|x| set.binary_search(x).is_ok()));
        if !covered {
            kept.push(set);
        }
    }
    kept.into_iter().collect()
}

fn atom_candidates(
    graph: &LabeledGraph,
    dfa: &Dfa,
    s: usize,
    t: usize,
    kind: PlayerKind,
    item_player: &[Option<usize>],
    budget: &Budget,
) -> Result<BTreeSet<Vec<usize>>> {
    let symbols = edge_symbols(graph, dfa);
    let states = dfa.state_count();
    let mut out = BTreeSet::new();
    if !product_reaches(graph, dfa, &symbols, s, t, Presence::All) {
        return Ok(out);
    }
    let vertex_player = |v: usize| match kind {
        PlayerKind::Vertex => item_player[v],
        PlayerKind::Edge => None,
    };
    if s == t && dfa.accepts_epsilon() && EMPTY_PATH_MATCHES {
        out.insert(vertex_player(s).into_iter().collect());
    }
    // product nodes (v, q) from which (t, accepting) is reachable
    let mut alive = FixedBitSet::with_capacity(graph.vertex_count() * states);
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); graph.vertex_count() * states];
    for (e, sym) in symbols.iter().enumerate() {
        let Some(a) = *sym else { continue };
        let (u, w) = graph.endpoints(e);
        for q in 0..states {
            let r = dfa.next(q, a);
            if dfa.is_useful(r) {
                reverse[w * states + r].push(u * states + q);
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..states)
        .filter(|&q| dfa.is_accepting(q))
        .map(|q| t * states + q)
        .collect();
    for &node in &queue {
        alive.insert(node);
    }
    while let Some(node) = queue.pop_front() {
        for &prev in &reverse[node] {
            if !alive.put(prev) {
                queue.push_back(prev);
            }
        }
    }
    let start = s * states + dfa.start();
    if !alive.contains(start) {
        return Ok(out);
    }
    let mut on_path = FixedBitSet::with_capacity(graph.vertex_count() * states);
    let mut items: Vec<usize> = vertex_player(s).into_iter().collect();
    #[allow(clippy::too_many_arguments)]
    fn go(
        graph: &LabeledGraph,
        dfa: &Dfa,
        symbols: &[Option<usize>],
        node: usize,
        t: usize,
        alive: &FixedBitSet,
        on_path: &mut FixedBitSet,
        items: &mut Vec<usize>,
        kind: PlayerKind,
        item_player: &[Option<usize>],
        out: &mut BTreeSet<Vec<usize>>,
        budget: &Budget,
    ) -> Result<()> {
        budget.step()?;
        let states = dfa.state_count();
        let (v, q) = (node / states, node % states);
        on_path.insert(node);
        for &e in graph.out_edges(v) {
            let Some(a) = symbols[e] else { continue };
            let r = dfa.next(q, a);
            let w = graph.endpoints(e).1;
            let next = w * states + r;
            if !alive.contains(next) || on_path.contains(next) {
                continue;
            }
            let player = match kind {
                PlayerKind::Edge => item_player[e],
                PlayerKind::Vertex => item_player[w],
            };
            let len = items.len();
            items.extend(player);
            if w == t && dfa.is_accepting(r) {
                let mut set = items.clone();
                set.sort_unstable();
                set.dedup();
                out.insert(set);
            }
            go(
                graph,
                dfa,
                symbols,
                next,
                t,
                alive,
                on_path,
                items,
                kind,
                item_player,
                out,
                budget,
            )?;
            items.truncate(len);
        }
        on_path.set(node, false);
        Ok(())
    }
    go(
        graph,
        dfa,
        &symbols,
        start,
        t,
        &alive,
        &mut on_path,
        &mut items,
        kind,
        item_player,
        &mut out,
        budget,
    )?;
    Ok(out)
}
