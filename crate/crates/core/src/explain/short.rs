//! Polynomial-time exact Shapley values for a single RPQ whose language only
//! contains words of length at most two.
//!
//! With such a language a subset `B` of endogenous edges is *enabling* when
//! `G[B ∪ X]` has a matching path, and the value of `e` is
//! `Σ_k k!(m−k−1)!/m! · (#enabling(G_e, k) − #enabling(G∖e, k))`, where
//! `G_e` turns `e` exogenous and `G∖e` drops it. Enabling sets are counted
//! through their complement: a blocking set picks no single edge that
//! completes a match on its own and at most one edge of every two-edge match.

use std::collections::{BTreeSet, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::dfa::Dfa;
use crate::error::{Error, Result};
use crate::game::permutation_weight;
use crate::graph::{EdgeId, LabeledGraph, Role};
use crate::query::EMPTY_PATH_MATCHES;

/// Default size limit for a connected component of the conflict graph.
pub const DEFAULT_COMPONENT_CAP: usize = 24;

/// Endogenous edges grouped by their role in matching paths of length ≤ 2.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeCategorization {
    /// On no matching path.
    pub permitted: BTreeSet<EdgeId>,
    /// A matching path of length one by itself.
    pub on_path1: BTreeSet<EdgeId>,
    /// On a matching length-two path whose other edge is exogenous.
    pub on_path2x: BTreeSet<EdgeId>,
    /// Both edges of a matching length-two path, both endogenous.
    pub on_path2e_pairs: BTreeSet<(EdgeId, EdgeId)>,
    /// Some matching path uses no endogenous edge at all.
    pub exogenous_match: bool,
}

impl EdgeCategorization {
    pub fn endogenous_count(&self) -> usize {
        self.permitted.len()
            + self.on_path1.len()
            + self.on_path2x.len()
            + 2 * self.on_path2e_pairs.len()
    }
}

/// Which counter turns a graph into blocking-set counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockingCounter {
    /// Closed form; requires every endogenous edge on at most one match.
    ClosedForm,
    /// Independent sets of the conflict graph, component by component.
    ConflictComponents { cap: usize },
}

fn check_short(dfa: &Dfa) -> Result<()> {
    if dfa.profile().short2 {
        Ok(())
    } else {
        Err(Error::NotApplicable {
            method: "exact-poly",
            reason: "the language has a word longer than two".into(),
        })
    }
}

/// All matching paths of length ≤ 2 from `s` to `t`, as edge positions.
fn short_matches(graph: &LabeledGraph, s: usize, t: usize, dfa: &Dfa) -> Vec<Vec<usize>> {
    let symbol = |e: usize| dfa.symbol_index(&graph.edge(e).label);
    let mut out = Vec::new();
    if s == t && dfa.accepts_epsilon() && EMPTY_PATH_MATCHES {
        out.push(vec![]);
    }
    if let Some(e) = graph.edge_between(s, t) {
        if let Some(a) = symbol(e) {
            if dfa.is_accepting(dfa.next(dfa.start(), a)) {
                out.push(vec![e]);
            }
        }
    }
    for &e1 in graph.out_edges(s) {
        let Some(a) = symbol(e1) else { continue };
        let q = dfa.next(dfa.start(), a);
        if !dfa.is_useful(q) {
            continue;
        }
        let mid = graph.endpoints(e1).1;
        if let Some(e2) = graph.edge_between(mid, t) {
            if let Some(b) = symbol(e2) {
                if dfa.is_accepting(dfa.next(q, b)) {
                    out.push(vec![e1, e2]);
                }
            }
        }
    }
    out
}

fn endo_part(graph: &LabeledGraph, path: &[usize]) -> Vec<usize> {
    path.iter()
        .copied()
        .filter(|&e| graph.edge(e).role == Role::Endogenous)
        .collect()
}

/// Sorts the endogenous edges by their role in matching paths.
///
/// Fails with [`Error::NonDisjointStructure`] when an endogenous edge lies on
/// more than one matching path, or a self-loop lies on a matching path of
/// length two.
pub fn categorize_edges(
    graph: &LabeledGraph,
    s: usize,
    t: usize,
    dfa: &Dfa,
) -> Result<EdgeCategorization> {
    check_short(dfa)?;
    let matches = short_matches(graph, s, t, dfa);
    let mut cat = EdgeCategorization::default();
    let id = |e: usize| graph.edge(e).id();
    let mut used = BTreeSet::new();
    if matches.iter().any(|m| endo_part(graph, m).is_empty()) {
        cat.exogenous_match = true;
    }
    for m in &matches {
        if m.len() == 2
            && m.iter()
                .any(|&e| graph.endpoints(e).0 == graph.endpoints(e).1)
        {
            return Err(Error::NonDisjointStructure(format!(
                "self-loop on the matching path {} {}",
                id(m[0]),
                id(m[1])
            )));
        }
        let endo = endo_part(graph, m);
        for &e in &endo {
            if !used.insert(e) {
                return Err(Error::NonDisjointStructure(format!(
                    "edge {} lies on several matching paths",
                    id(e)
                )));
            }
        }
        match (m.len(), endo.as_slice()) {
            (1, [e]) => {
                cat.on_path1.insert(id(*e));
            }
            (2, [e]) => {
                cat.on_path2x.insert(id(*e));
            }
            (2, [e1, e2]) => {
                cat.on_path2e_pairs.insert((id(*e1), id(*e2)));
            }
            _ => {}
        }
    }
    cat.permitted = graph
        .endo_edges()
        .into_iter()
        .filter(|e| !used.contains(e))
        .map(id)
        .collect();
    Ok(cat)
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| {
        acc * BigUint::from(n - i) / BigUint::from(i + 1)
    })
}

/// Number of blocking sets of size `k`:
/// `Σ_i C(|permitted|, i) · C(p, k−i) · 2^(k−i)` with `p` endogenous pairs,
/// since each pair contributes at most one of its two edges.
pub fn count_blocking(cat: &EdgeCategorization, k: usize) -> BigUint {
    if cat.exogenous_match {
        return BigUint::zero();
    }
    let free = cat.permitted.len();
    let pairs = cat.on_path2e_pairs.len();
    (0..=k)
        .map(|i| binomial(free, i) * binomial(pairs, k - i) * (BigUint::one() << (k - i)))
        .sum()
}

/// Number of enabling sets of `k` endogenous edges.
pub fn count_enabling(
    graph: &LabeledGraph,
    s: usize,
    t: usize,
    dfa: &Dfa,
    k: usize,
) -> Result<BigUint> {
    let cat = categorize_edges(graph, s, t, dfa)?;
    let total = binomial(graph.endo_edges().len(), k);
    Ok(total - count_blocking(&cat, k))
}

fn closed_form_polynomial(cat: &EdgeCategorization, m: usize) -> Vec<BigUint> {
    (0..=m).map(|k| count_blocking(cat, k)).collect()
}

type Poly = Vec<BigUint>;

fn poly_mul(a: &[BigUint], b: &[BigUint]) -> Poly {
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn binomial_poly(n: usize) -> Poly {
    (0..=n).map(|k| binomial(n, k)).collect()
}

/// Independent-set size polynomial of a graph on ≤ 64 vertices given as
/// neighbour masks.
fn independence_poly(adj: &[u64], alive: u64, memo: &mut HashMap<u64, Poly>) -> Poly {
    if let Some(p) = memo.get(&alive) {
        return p.clone();
    }
    let pick = (0..adj.len())
        .filter(|&v| alive >> v & 1 == 1)
        .max_by_key(|&v| (adj[v] & alive).count_ones());
    let result = match pick {
        None => vec![BigUint::one()],
        Some(v) if adj[v] & alive == 0 => binomial_poly(alive.count_ones() as usize),
        Some(v) => {
            let without = independence_poly(adj, alive & !(1 << v), memo);
            let with = independence_poly(adj, alive & !(adj[v] | 1 << v), memo);
            let mut sum = without;
            sum.resize(sum.len().max(with.len() + 1), BigUint::zero());
            for (k, c) in with.into_iter().enumerate() {
                sum[k + 1] += c;
            }
            sum
        }
    };
    memo.insert(alive, result.clone());
    result
}

/// Blocking-set counts for every size, without any disjointness assumption.
///
/// Edges completing a match alone are excluded; the rest must form an
/// independent set of the graph whose edges are the two-edge matches.
/// Returns the polynomial and the size of the largest conflict component.
fn component_polynomial(
    graph: &LabeledGraph,
    s: usize,
    t: usize,
    dfa: &Dfa,
    cap: usize,
) -> Result<(Poly, usize)> {
    let endo = graph.endo_edges();
    let m = endo.len();
    let sets: BTreeSet<Vec<usize>> = short_matches(graph, s, t, dfa)
        .iter()
        .map(|p| {
            let mut e = endo_part(graph, p);
            e.sort_unstable();
            e.dedup();
            e
        })
        .collect();
    if sets.iter().any(Vec::is_empty) {
        return Ok((vec![BigUint::zero(); m + 1], 0));
    }
    let forbidden: BTreeSet<usize> = sets.iter().filter(|s| s.len() == 1).map(|s| s[0]).collect();
    let mut neighbours: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    for pair in sets.iter().filter(|s| s.len() == 2) {
        let (a, b) = (pair[0], pair[1]);
        if forbidden.contains(&a) || forbidden.contains(&b) {
            continue;
        }
        neighbours.entry(a).or_default().insert(b);
        neighbours.entry(b).or_default().insert(a);
    }
    let free = m - forbidden.len() - neighbours.len();
    let mut poly = binomial_poly(free);
    let mut seen = BTreeSet::new();
    let mut largest = 0;
    let mut roots: Vec<usize> = neighbours.keys().copied().collect();
    roots.sort_unstable();
    for root in roots {
        if seen.contains(&root) {
            continue;
        }
        let mut component = vec![root];
        seen.insert(root);
        let mut i = 0;
        while i < component.len() {
            for &w in &neighbours[&component[i]] {
                if seen.insert(w) {
                    component.push(w);
                }
            }
            i += 1;
        }
        largest = largest.max(component.len());
        if component.len() > cap.min(64) {
            return Err(Error::NotApplicable {
                method: "exact-poly",
                reason: format!(
                    "conflict component of {} edges exceeds the limit of {}",
                    component.len(),
                    cap.min(64)
                ),
            });
        }
        let local: HashMap<usize, usize> =
            component.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let adj: Vec<u64> = component
            .iter()
            .map(|e| {
                neighbours[e]
                    .iter()
                    .fold(0u64, |acc, w| acc | 1 << local[w])
            })
            .collect();
        let alive = if component.len() == 64 {
            u64::MAX
        } else {
            (1u64 << component.len()) - 1
        };
        poly = poly_mul(&poly, &independence_poly(&adj, alive, &mut HashMap::new()));
    }
    poly.resize(m + 1, BigUint::zero());
    Ok((poly, largest))
}

fn blocking_polynomial(
    graph: &LabeledGraph,
    s: usize,
    t: usize,
    dfa: &Dfa,
    counter: BlockingCounter,
) -> Result<(Poly, usize)> {
    match counter {
        BlockingCounter::ClosedForm => {
            let cat = categorize_edges(graph, s, t, dfa)?;
            Ok((closed_form_polynomial(&cat, graph.endo_edges().len()), 2))
        }
        BlockingCounter::ConflictComponents { cap } => {
            check_short(dfa)?;
            component_polynomial(graph, s, t, dfa, cap)
        }
    }
}

/// Exact Shapley value of endogenous edge `e` in the game of `L(dfa)` from
/// `s` to `t`, using the closed-form counter.
pub fn shapley_short_rpq(
    graph: &LabeledGraph,
    s: usize,
    t: usize,
    dfa: &Dfa,
    e: &EdgeId,
) -> Result<BigRational> {
    shapley_short_rpq_using(graph, s, t, dfa, e, BlockingCounter::ClosedForm).map(|(v, _)| v)
}

/// Like [`shapley_short_rpq`] with a chosen counter. Also returns the size
/// of the largest conflict component met.
pub fn shapley_short_rpq_using(
    graph: &LabeledGraph,
    s: usize,
    t: usize,
    dfa: &Dfa,
    e: &EdgeId,
    counter: BlockingCounter,
) -> Result<(BigRational, usize)> {
    let pos = graph
        .edge_index(e)
        .filter(|&i| graph.edge(i).role == Role::Endogenous)
        .ok_or_else(|| Error::UnknownPlayer(e.to_string()))?;
    let m = graph.endo_edges().len();
    let removed = graph.without_edge(pos);
    let fixed = graph.with_edge_role(pos, Role::Exogenous);
    let (with_e, c1) = blocking_polynomial(&fixed, s, t, dfa, counter)?;
    let (without_e, c2) = blocking_polynomial(&removed, s, t, dfa, counter)?;
    // enabling(G_e) − enabling(G∖e) = blocking(G∖e) − blocking(G_e)
    let value = (0..m)
        .map(|k| {
            let diff = BigInt::from(without_e[k].clone()) - BigInt::from(with_e[k].clone());
            permutation_weight(k, m) * BigRational::from_integer(diff)
        })
        .fold(BigRational::zero(), |acc, x| acc + x);
    Ok((value, c1.max(c2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::games::edge_game;
    use crate::game::{shapley_exact_subset, CoalitionGame};
    use crate::query::{Assignment, Crpq};

    fn setup(text: &str, regex: &str) -> (LabeledGraph, Dfa) {
        let g = LabeledGraph::parse(text).unwrap();
        let q = Crpq::parse(regex, &g).unwrap();
        let dfa = q.atoms()[0].dfa.clone();
        (g, dfa)
    }

    fn v(g: &LabeledGraph, id: &str) -> usize {
        g.vertex_index(&id.into()).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn oracle(g: &LabeledGraph, regex: &str, s: &str, t: &str, e: &EdgeId) -> BigRational {
        let q = Crpq::parse(regex, g).unwrap();
        let mu = Assignment::parse(&format!("x={s},y={t}")).unwrap();
        let game = edge_game(g, &q, &mu).unwrap();
        let a = game.player_index(&e.to_string().as_str().into()).unwrap();
        shapley_exact_subset(&game, a, 22).unwrap()
    }

    #[test]
    fn categorizes_running_example_pair() {
        let g = crate::testing::running_example();
        let q = Crpq::parse("ab", &g).unwrap();
        let cat = categorize_edges(&g, v(&g, "v1"), v(&g, "v4"), &q.atoms()[0].dfa).unwrap();
        assert_eq!(
            cat.on_path2e_pairs,
            BTreeSet::from([(EdgeId::new("v1", "v2"), EdgeId::new("v2", "v4"))])
        );
        assert!(cat.on_path1.is_empty() && cat.on_path2x.is_empty());
        assert_eq!(cat.permitted.len(), 7);
    }

    #[test]
    fn blocking_counts() {
        // one pair, nothing else: pick one of its two edges
        let mut cat = EdgeCategorization::default();
        cat.on_path2e_pairs
            .insert((EdgeId::new("a", "b"), EdgeId::new("b", "c")));
        assert_eq!(count_blocking(&cat, 1), BigUint::from(2u8));
        assert_eq!(count_blocking(&cat, 2), BigUint::zero());
        assert_eq!(count_blocking(&cat, 0), BigUint::one());
    }

    #[test]
    fn blocking_plus_enabling_is_binomial() {
        let (g, dfa) = setup(
            "s a u n\nu b t n\ns c t n\ns a w n\nw b t x\nu c w n\n",
            "a b | c",
        );
        let (s, t) = (v(&g, "s"), v(&g, "t"));
        let cat = categorize_edges(&g, s, t, &dfa).unwrap();
        let m = g.endo_edges().len();
        for k in 0..=m {
            assert_eq!(
                count_blocking(&cat, k) + count_enabling(&g, s, t, &dfa, k).unwrap(),
                binomial(m, k)
            );
        }
    }

    #[test]
    fn chain_of_two() {
        let (g, dfa) = setup("s a u n\nu b t n\n", "a b");
        let (s, t) = (v(&g, "s"), v(&g, "t"));
        for e in [EdgeId::new("s", "u"), EdgeId::new("u", "t")] {
            assert_eq!(shapley_short_rpq(&g, s, t, &dfa, &e).unwrap(), r(1, 2));
        }
    }

    #[test]
    fn matches_subset_oracle_on_mixed_graph() {
        let text = "s a u n\nu b t n\ns c t n\ns a w n\nw b t x\nu c w n\nt a s n\n";
        let (g, dfa) = setup(text, "a b | c");
        let (s, t) = (v(&g, "s"), v(&g, "t"));
        for e in g.endo_edges() {
            let id = g.edge(e).id();
            assert_eq!(
                shapley_short_rpq(&g, s, t, &dfa, &id).unwrap(),
                oracle(&g, "a b | c", "s", "t", &id),
                "{id}"
            );
        }
    }

    #[test]
    fn shared_edge_is_refused_then_handled_by_components() {
        // s->t follows the loop at s and precedes the loop at t
        let text = "s a s n\ns b t n\nt c t n\nt a u n\n";
        let (g, dfa) = setup(text, "a b | b c");
        let (s, t) = (v(&g, "s"), v(&g, "t"));
        assert!(matches!(
            categorize_edges(&g, s, t, &dfa),
            Err(Error::NonDisjointStructure(_))
        ));
        for id in g.endo_edges().into_iter().map(|i| g.edge(i).id()) {
            let (value, largest) = shapley_short_rpq_using(
                &g,
                s,
                t,
                &dfa,
                &id,
                BlockingCounter::ConflictComponents {
                    cap: DEFAULT_COMPONENT_CAP,
                },
            )
            .unwrap();
            assert_eq!(value, oracle(&g, "a b | b c", "s", "t", &id), "{id}");
            assert!(largest <= 3);
        }
    }

    #[test]
    fn components_agree_with_closed_form_when_disjoint() {
        let text = "s a u n\nu b t n\ns c t n\ns a w n\nw b t x\nu c w n\nt a s n\n";
        let (g, dfa) = setup(text, "a b | c");
        let (s, t) = (v(&g, "s"), v(&g, "t"));
        for id in g.endo_edges().into_iter().map(|i| g.edge(i).id()) {
            let closed = shapley_short_rpq(&g, s, t, &dfa, &id).unwrap();
            let (general, _) = shapley_short_rpq_using(
                &g,
                s,
                t,
                &dfa,
                &id,
                BlockingCounter::ConflictComponents { cap: 4 },
            )
            .unwrap();
            assert_eq!(closed, general);
        }
    }

    #[test]
    fn component_cap_is_enforced() {
        let (g, dfa) = setup("s a s n\ns b t n\nt c t n\n", "a b | b c");
        let (s, t) = (v(&g, "s"), v(&g, "t"));
        let err = shapley_short_rpq_using(
            &g,
            s,
            t,
            &dfa,
            &EdgeId::new("s", "s"),
            BlockingCounter::ConflictComponents { cap: 1 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotApplicable { .. }));
    }

    #[test]
    fn self_loop_on_length_two_match_is_refused() {
        let (g, dfa) = setup("s a s n\ns b t n\n", "a b");
        let (s, t) = (v(&g, "s"), v(&g, "t"));
        assert!(matches!(
            categorize_edges(&g, s, t, &dfa),
            Err(Error::NonDisjointStructure(_))
        ));
        let id = EdgeId::new("s", "s");
        let (value, _) = shapley_short_rpq_using(
            &g,
            s,
            t,
            &dfa,
            &id,
            BlockingCounter::ConflictComponents { cap: 8 },
        )
        .unwrap();
        assert_eq!(value, r(1, 2));
    }

    #[test]
    fn exogenous_match_zeroes_everything() {
        let (g, dfa) = setup("s a t x\ns a u n\nu b t n\n", "a | a b");
        let (s, t) = (v(&g, "s"), v(&g, "t"));
        assert!(categorize_edges(&g, s, t, &dfa).unwrap().exogenous_match);
        for id in [EdgeId::new("s", "u"), EdgeId::new("u", "t")] {
            assert_eq!(shapley_short_rpq(&g, s, t, &dfa, &id).unwrap(), r(0, 1));
        }
    }

    #[test]
    fn epsilon_with_equal_endpoints() {
        let (g, dfa) = setup("s a s n\n", "@ | a");
        let s = v(&g, "s");
        let cat = categorize_edges(&g, s, s, &dfa).unwrap();
        assert!(cat.exogenous_match);
    }

    #[test]
    fn unknown_or_exogenous_edge_is_rejected() {
        let (g, dfa) = setup("s a t x\n", "a");
        let (s, t) = (v(&g, "s"), v(&g, "t"));
        assert!(matches!(
            shapley_short_rpq(&g, s, t, &dfa, &EdgeId::new("s", "t")),
            Err(Error::UnknownPlayer(_))
        ));
    }
}
