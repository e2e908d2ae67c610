//! Reference implementations used as oracles by the integration tests.
//!
//! Language membership uses Brzozowski derivatives on a separate term type,
//! and Shapley values are computed by enumerating orderings over
//! materialised subgraphs, so nothing here shares code with the automaton
//! or game engines under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_rational::BigRational;
use pathshap::graph::{EdgeId, LabeledGraph, Role, VertexId};
use pathshap::regex::Regex;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Re {
    Empty,
    Eps,
    Sym(String),
    Any,
    Alt(BTreeSet<Re>),
    Cat(Box<Re>, Box<Re>),
    Star(Box<Re>),
}

fn alt(a: Re, b: Re) -> Re {
    let mut set = BTreeSet::new();
    for r in [a, b] {
        match r {
            Re::Empty => {}
            Re::Alt(inner) => set.extend(inner),
            other => {
                set.insert(other);
            }
        }
    }
    match set.len() {
        0 => Re::Empty,
        1 => set.into_iter().next().unwrap(),
        _ => Re::Alt(set),
    }
}

fn cat(a: Re, b: Re) -> Re {
    match (a, b) {
        (Re::Empty, _) | (_, Re::Empty) => Re::Empty,
        (Re::Eps, r) | (r, Re::Eps) => r,
        // right-associate so equal languages get equal terms more often
        (Re::Cat(x, y), r) => cat(*x, cat(*y, r)),
        (l, r) => Re::Cat(Box::new(l), Box::new(r)),
    }
}

fn star(a: Re) -> Re {
    match a {
        Re::Empty | Re::Eps => Re::Eps,
        s @ Re::Star(_) => s,
        r => Re::Star(Box::new(r)),
    }
}

impl From<&Regex> for Re {
    fn from(r: &Regex) -> Self {
        match r {
            Regex::Empty => Re::Empty,
            Regex::Epsilon => Re::Eps,
            Regex::Symbol(l) => Re::Sym(l.as_str().to_string()),
            Regex::Any => Re::Any,
            Regex::Union(a, b) => alt(Re::from(&**a), Re::from(&**b)),
            Regex::Concat(a, b) => cat(Re::from(&**a), Re::from(&**b)),
            Regex::Star(a) => star(Re::from(&**a)),
        }
    }
}

impl Re {
    pub fn nullable(&self) -> bool {
        match self {
            Re::Empty | Re::Sym(_) | Re::Any => false,
            Re::Eps | Re::Star(_) => true,
            Re::Alt(set) => set.iter().any(Re::nullable),
            Re::Cat(a, b) => a.nullable() && b.nullable(),
        }
    }

    pub fn derive(&self, symbol: &str) -> Re {
        match self {
            Re::Empty | Re::Eps => Re::Empty,
            Re::Sym(s) => {
                if s == symbol {
                    Re::Eps
                } else {
                    Re::Empty
                }
            }
            Re::Any => Re::Eps,
            Re::Alt(set) => set
                .iter()
                .fold(Re::Empty, |acc, r| alt(acc, r.derive(symbol))),
            Re::Cat(a, b) => {
                let left = cat(a.derive(symbol), (**b).clone());
                if a.nullable() {
                    alt(left, b.derive(symbol))
                } else {
                    left
                }
            }
            Re::Star(a) => cat(a.derive(symbol), Re::Star(a.clone())),
        }
    }

    pub fn matches<S: AsRef<str>>(&self, word: &[S]) -> bool {
        word.iter()
            .fold(self.clone(), |r, s| r.derive(s.as_ref()))
            .nullable()
    }
}

/// Whether some path from `s` to `t` spells a word of `re`, by search over
/// (vertex, derivative) pairs.
pub fn rpq_oracle(graph: &LabeledGraph, s: &str, t: &str, re: &Re) -> bool {
    let mut seen: BTreeSet<(String, Re)> = BTreeSet::new();
    let mut queue = VecDeque::from([(s.to_string(), re.clone())]);
    let mut out: HashMap<&str, Vec<(&str, &str)>> = HashMap::new();
    for e in graph.edges() {
        out.entry(e.source.as_str())
            .or_default()
            .push((e.label.as_str(), e.target.as_str()));
    }
    if graph.vertex_index(&s.into()).is_none() || graph.vertex_index(&t.into()).is_none() {
        return false;
    }
    while let Some((v, r)) = queue.pop_front() {
        if r == Re::Empty || !seen.insert((v.clone(), r.clone())) {
            continue;
        }
        if v == t && r.nullable() {
            return true;
        }
        assert!(seen.len() < 200_000, "derivative search blew up");
        for &(label, w) in out.get(v.as_str()).into_iter().flatten() {
            queue.push_back((w.to_string(), r.derive(label)));
        }
    }
    false
}

/// Bound CRPQ evaluation by the oracle: every atom must hold.
pub fn crpq_oracle(graph: &LabeledGraph, atoms: &[(String, Re, String)]) -> bool {
    atoms.iter().all(|(s, re, t)| rpq_oracle(graph, s, t, re))
}

/// Average marginal contribution over all orderings of `players`.
pub fn permutation_oracle<F>(players: usize, value: F) -> Vec<BigRational>
where
    F: Fn(&[bool]) -> bool,
{
    let mut cache: HashMap<Vec<bool>, bool> = HashMap::new();
    let mut v = |c: &[bool]| *cache.entry(c.to_vec()).or_insert_with(|| value(c));
    let mut order: Vec<usize> = (0..players).collect();
    let mut counts = vec![0u64; players];
    let mut total = 0u64;
    loop {
        total += 1;
        let mut present = vec![false; players];
        let mut before = v(&present);
        for &p in &order {
            present[p] = true;
            let after = v(&present);
            if after && !before {
                counts[p] += 1;
            }
            before = after;
        }
        // next lexicographic permutation
        let Some(i) = (0..players.saturating_sub(1))
            .rev()
            .find(|&i| order[i] < order[i + 1])
        else {
            break;
        };
        let j = (i + 1..players)
            .rev()
            .find(|&j| order[j] > order[i])
            .unwrap();
        order.swap(i, j);
        order[i + 1..].reverse();
    }
    counts
        .into_iter()
        .map(|c| BigRational::new(c.into(), total.into()))
        .collect()
}

/// Shapley values of the endogenous edges, keyed by edge id, where the
/// game is evaluated on materialised subgraphs by the derivative oracle.
pub fn edge_shapley_oracle(
    graph: &LabeledGraph,
    atoms: &[(String, Re, String)],
) -> BTreeMap<String, BigRational> {
    let endo: Vec<EdgeId> = graph
        .edges()
        .iter()
        .filter(|e| e.role == Role::Endogenous)
        .map(|e| e.id())
        .collect();
    // exogenous edges are always kept by the subgraph
    let holds = |present: &[bool]| {
        let keep: BTreeSet<EdgeId> = endo
            .iter()
            .zip(present)
            .filter(|(_, &p)| p)
            .map(|(e, _)| e.clone())
            .collect();
        crpq_oracle(&graph.edge_subgraph(&keep).unwrap(), atoms)
    };
    let baseline = holds(&vec![false; endo.len()]);
    let values = permutation_oracle(endo.len(), |c| !baseline && holds(c));
    endo.iter().map(|e| e.to_string()).zip(values).collect()
}

/// Same for endogenous vertices.
pub fn vertex_shapley_oracle(
    graph: &LabeledGraph,
    atoms: &[(String, Re, String)],
) -> BTreeMap<String, BigRational> {
    let endo: Vec<String> = graph
        .vertices()
        .iter()
        .filter(|v| v.role == Role::Endogenous)
        .map(|v| v.id.to_string())
        .collect();
    let holds = |present: &[bool]| {
        let keep = endo
            .iter()
            .zip(present)
            .filter(|(_, &p)| p)
            .map(|(v, _)| VertexId::new(v.clone()))
            .collect();
        let sub = graph.vertex_subgraph(&keep).unwrap();
        atoms.iter().all(|(s, re, t)| rpq_oracle(&sub, s, t, re))
    };
    let baseline = holds(&vec![false; endo.len()]);
    let values = permutation_oracle(endo.len(), |c| !baseline && holds(c));
    endo.into_iter().zip(values).collect()
}

/// Random simple graph in the text format: `vertices` named `v0..`, up to
/// `edges` distinct ordered pairs (self-loops allowed), labels drawn from
/// `labels`, each edge exogenous with probability `exo`.
pub fn random_graph_text(
    rng: &mut impl Rng,
    vertices: usize,
    edges: usize,
    labels: &[&str],
    exo: f64,
) -> String {
    let mut pairs: Vec<(usize, usize)> = (0..vertices)
        .flat_map(|a| (0..vertices).map(move |b| (a, b)))
        .collect();
    pairs.shuffle(rng);
    let mut text = String::new();
    for v in 0..vertices {
        text.push_str(&format!("v v{v} n\n"));
    }
    for &(a, b) in pairs.iter().take(edges) {
        let label = labels[rng.random_range(0..labels.len())];
        let role = if rng.random_bool(exo) { "x" } else { "n" };
        text.push_str(&format!("v{a} {label} v{b} {role}\n"));
    }
    text
}

/// Random regular expression text over `labels`.
pub fn random_regex_text(rng: &mut impl Rng, depth: u32, labels: &[&str]) -> String {
    if depth == 0 || rng.random_bool(0.3) {
        return match rng.random_range(0..10) {
            0 => ".".into(),
            1 => "@".into(),
            _ => labels[rng.random_range(0..labels.len())].into(),
        };
    }
    match rng.random_range(0..3) {
        0 => format!(
            "({} | {})",
            random_regex_text(rng, depth - 1, labels),
            random_regex_text(rng, depth - 1, labels)
        ),
        1 => format!(
            "({} {})",
            random_regex_text(rng, depth - 1, labels),
            random_regex_text(rng, depth - 1, labels)
        ),
        _ => format!("({})*", random_regex_text(rng, depth - 1, labels)),
    }
}

/// Random finite language of words of length ≤ 2, as regex text.
pub fn random_short_language(rng: &mut impl Rng, labels: &[&str]) -> String {
    let mut words = Vec::new();
    for _ in 0..rng.random_range(1..=4) {
        let len = rng.random_range(0..=2);
        let word: Vec<&str> = (0..len)
            .map(|_| labels[rng.random_range(0..labels.len())])
            .collect();
        words.push(if word.is_empty() {
            "@".to_string()
        } else {
            word.join(" ")
        });
    }
    words.join(" | ")
}
