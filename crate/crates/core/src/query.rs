//! RPQ atoms, conjunctive queries, variable bindings and their evaluation.
//!
//! Evaluation is breadth-first reachability over the product of the graph
//! and an atom's DFA. A fully bound CRPQ holds iff every atom holds.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::dfa::{compile, Dfa, LanguageProfile};
use crate::error::{Error, Result};
use crate::graph::{Label, LabeledGraph, Presence, VertexId};
use crate::regex::{parse_regex, Regex};

/// Whether the empty path from `u` to `u` counts as a match when the atom
/// language contains ε.
pub const EMPTY_PATH_MATCHES: bool = true;

/// Default cap for [`enumerate_answers`].
pub const DEFAULT_ANSWER_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName(String);

impl VarName {
    pub fn new(name: impl Into<String>) -> Self {
        VarName(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VarName {
    fn from(s: &str) -> Self {
        VarName(s.to_string())
    }
}

/// An atom before compilation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomSyntax {
    pub source_var: VarName,
    pub regex: Regex,
    pub target_var: VarName,
}

/// Parsed CRPQ text; variables in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrpqSyntax {
    pub variables: Vec<VarName>,
    pub atoms: Vec<AtomSyntax>,
}

impl CrpqSyntax {
    pub fn symbols(&self) -> BTreeSet<Label> {
        self.atoms.iter().flat_map(|a| a.regex.symbols()).collect()
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Parses `(x, a*, y) & (y, b*, z)`. Text without any comma is read as a
/// single atom `(x, <text>, y)`.
pub fn parse_crpq(text: &str) -> Result<CrpqSyntax> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::QuerySyntax("query has no atoms".into()));
    }
    let mut atoms = Vec::new();
    if !text.contains(',') {
        atoms.push(AtomSyntax {
            source_var: VarName::new("x"),
            regex: parse_regex(text)?,
            target_var: VarName::new("y"),
        });
    } else {
        for piece in text.split('&') {
            let piece = piece.trim();
            let inner = piece
                .strip_prefix('(')
                .and_then(|p| p.strip_suffix(')'))
                .ok_or_else(|| {
                    Error::QuerySyntax(format!(
                        "atom `{piece}` must have the form (var, regex, var)"
                    ))
                })?;
            let (source, rest) = inner
                .split_once(',')
                .ok_or_else(|| Error::QuerySyntax(format!("atom `{piece}` is missing commas")))?;
            let (regex, target) = rest
                .rsplit_once(',')
                .ok_or_else(|| Error::QuerySyntax(format!("atom `{piece}` is missing commas")))?;
            let (source, target) = (source.trim(), target.trim());
            for var in [source, target] {
                if !is_identifier(var) {
                    return Err(Error::QuerySyntax(format!(
                        "`{var}` is not a variable name"
                    )));
                }
            }
            atoms.push(AtomSyntax {
                source_var: VarName::new(source),
                regex: parse_regex(regex)?,
                target_var: VarName::new(target),
            });
        }
    }
    let mut variables: Vec<VarName> = Vec::new();
    for atom in &atoms {
        for v in [&atom.source_var, &atom.target_var] {
            if !variables.contains(v) {
                variables.push(v.clone());
            }
        }
    }
    Ok(CrpqSyntax { variables, atoms })
}

#[derive(Debug, Clone)]
pub struct RpqAtom {
    pub source_var: VarName,
    pub regex: Regex,
    pub dfa: Dfa,
    pub target_var: VarName,
    pub profile: LanguageProfile,
}

impl RpqAtom {
    pub fn new(source_var: VarName, regex: Regex, dfa: Dfa, target_var: VarName) -> Self {
        let profile = dfa.profile();
        RpqAtom {
            source_var,
            regex,
            dfa,
            target_var,
            profile,
        }
    }
}

/// A conjunction of RPQ atoms over an ordered variable list.
#[derive(Debug, Clone)]
pub struct Crpq {
    variables: Vec<VarName>,
    atoms: Vec<RpqAtom>,
}

impl Crpq {
    /// Rejects queries without atoms, duplicate variables, atoms using
    /// undeclared variables and declared variables no atom uses.
    pub fn new(variables: Vec<VarName>, atoms: Vec<RpqAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::QuerySyntax("query has no atoms".into()));
        }
        let declared: BTreeSet<&VarName> = variables.iter().collect();
        if declared.len() != variables.len() {
            return Err(Error::QuerySyntax("duplicate variable".into()));
        }
        let mut used = BTreeSet::new();
        for atom in &atoms {
            for v in [&atom.source_var, &atom.target_var] {
                if !declared.contains(v) {
                    return Err(Error::QuerySyntax(format!(
                        "variable `{v}` is not declared"
                    )));
                }
                used.insert(v);
            }
        }
        if let Some(unused) = variables.iter().find(|v| !used.contains(v)) {
            return Err(Error::QuerySyntax(format!("variable `{unused}` is unused")));
        }
        Ok(Crpq { variables, atoms })
    }

    /// Compiles every atom over `alphabet` extended with the query's own
    /// symbols.
    pub fn compile(syntax: &CrpqSyntax, alphabet: &BTreeSet<Label>) -> Result<Self> {
        let mut sigma = alphabet.clone();
        sigma.extend(syntax.symbols());
        let atoms = syntax
            .atoms
            .iter()
            .map(|a| {
                Ok(RpqAtom::new(
                    a.source_var.clone(),
                    a.regex.clone(),
                    compile(&a.regex, &sigma)?,
                    a.target_var.clone(),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Crpq::new(syntax.variables.clone(), atoms)
    }

    /// Parses and compiles against the labels of `graph`.
    pub fn parse(text: &str, graph: &LabeledGraph) -> Result<Self> {
        Crpq::compile(&parse_crpq(text)?, &graph.labels())
    }

    pub fn variables(&self) -> &[VarName] {
        &self.variables
    }

    pub fn atoms(&self) -> &[RpqAtom] {
        &self.atoms
    }

    pub fn all_finite(&self) -> bool {
        self.atoms.iter().all(|a| a.profile.is_finite)
    }

    pub fn any_empty(&self) -> bool {
        self.atoms.iter().any(|a| a.profile.is_empty)
    }
}

/// A binding of query variables to vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<VarName, VertexId>);

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn bind(mut self, var: &str, vertex: &str) -> Self {
        self.0.insert(VarName::new(var), VertexId::new(vertex));
        self
    }

    /// Parses `x=v1,y=v2`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (var, vertex) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidBinding(format!("`{part}` is not var=vertex")))?;
            let (var, vertex) = (var.trim(), vertex.trim());
            if !is_identifier(var) || vertex.is_empty() {
                return Err(Error::InvalidBinding(format!("`{part}` is not var=vertex")));
            }
            if map
                .insert(VarName::new(var), VertexId::new(vertex))
                .is_some()
            {
                return Err(Error::InvalidBinding(format!("`{var}` bound twice")));
            }
        }
        Ok(Assignment(map))
    }

    pub fn get(&self, var: &VarName) -> Option<&VertexId> {
        self.0.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarName, &VertexId)> {
        self.0.iter()
    }

    /// Checks totality on the query's variables and that no unknown variable
    /// is bound.
    pub fn check_total(&self, query: &Crpq) -> Result<()> {
        for v in query.variables() {
            if !self.0.contains_key(v) {
                return Err(Error::InvalidBinding(format!(
                    "variable `{v}` is not bound"
                )));
            }
        }
        if let Some(extra) = self.0.keys().find(|v| !query.variables().contains(v)) {
            return Err(Error::InvalidBinding(format!(
                "`{extra}` is not a query variable"
            )));
        }
        Ok(())
    }

    /// Vertex positions of every atom's endpoints.
    pub fn resolve(&self, query: &Crpq, graph: &LabeledGraph) -> Result<Vec<(usize, usize)>> {
        self.check_total(query)?;
        let lookup = |var: &VarName| -> Result<usize> {
            let id = &self.0[var];
            graph
                .vertex_index(id)
                .ok_or_else(|| Error::UnknownVertex(id.to_string()))
        };
        query
            .atoms()
            .iter()
            .map(|a| Ok((lookup(&a.source_var)?, lookup(&a.target_var)?)))
            .collect()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Per-edge DFA symbol of each atom, precomputed so repeated evaluation on
/// subgraphs does no label lookups.
#[derive(Debug, Clone)]
pub struct QueryEvaluator<'a> {
    graph: &'a LabeledGraph,
    query: &'a Crpq,
    edge_symbols: Vec<Vec<Option<usize>>>,
}

impl<'a> QueryEvaluator<'a> {
    pub fn new(graph: &'a LabeledGraph, query: &'a Crpq) -> Self {
        let edge_symbols = query
            .atoms()
            .iter()
            .map(|a| edge_symbols(graph, &a.dfa))
            .collect();
        QueryEvaluator {
            graph,
            query,
            edge_symbols,
        }
    }

    pub fn graph(&self) -> &'a LabeledGraph {
        self.graph
    }

    pub fn query(&self) -> &'a Crpq {
        self.query
    }

    pub fn atom_holds(&self, atom: usize, s: usize, t: usize, presence: Presence<'_>) -> bool {
        product_reaches(
            self.graph,
            &self.query.atoms()[atom].dfa,
            &self.edge_symbols[atom],
            s,
            t,
            presence,
        )
    }

    /// `q[μ]` on the subgraph selected by `presence`.
    pub fn holds(&self, endpoints: &[(usize, usize)], presence: Presence<'_>) -> bool {
        endpoints
            .iter()
            .enumerate()
            .all(|(i, &(s, t))| self.atom_holds(i, s, t, presence))
    }

    pub fn edge_symbols(&self, atom: usize) -> &[Option<usize>] {
        &self.edge_symbols[atom]
    }
}

pub(crate) fn edge_symbols(graph: &LabeledGraph, dfa: &Dfa) -> Vec<Option<usize>> {
    graph
        .edges()
        .iter()
        .map(|e| dfa.symbol_index(&e.label))
        .collect()
}

/// Product-graph BFS from `(s, start)` to `(t, accepting)`.
pub(crate) fn product_reaches(
    graph: &LabeledGraph,
    dfa: &Dfa,
    symbols: &[Option<usize>],
    s: usize,
    t: usize,
    presence: Presence<'_>,
) -> bool {
    if !presence.vertex(s) || !presence.vertex(t) || !dfa.is_useful(dfa.start()) {
        return false;
    }
    if s == t && dfa.accepts_epsilon() && EMPTY_PATH_MATCHES {
        return true;
    }
    let states = dfa.state_count();
    let mut seen = FixedBitSet::with_capacity(graph.vertex_count() * states);
    let mut queue = VecDeque::new();
    let mut expand = |v: usize, q: usize, queue: &mut VecDeque<(usize, usize)>| -> bool {
        for &e in graph.out_edges(v) {
            if !presence.edge(graph, e) {
                continue;
            }
            let Some(a) = symbols[e] else { continue };
            let r = dfa.next(q, a);
            if !dfa.is_useful(r) {
                continue;
            }
            let w = graph.endpoints(e).1;
            if w == t && dfa.is_accepting(r) {
                return true;
            }
            if !seen.put(w * states + r) {
                queue.push_back((w, r));
            }
        }
        false
    };
    if expand(s, dfa.start(), &mut queue) {
        return true;
    }
    while let Some((v, q)) = queue.pop_front() {
        if expand(v, q, &mut queue) {
            return true;
        }
    }
    false
}

/// `true` iff some path from `s` to `t` spells a word of `L(dfa)`.
pub fn eval_rpq(graph: &LabeledGraph, s: &VertexId, t: &VertexId, dfa: &Dfa) -> Result<bool> {
    let si = graph
        .vertex_index(s)
        .ok_or_else(|| Error::UnknownVertex(s.to_string()))?;
    let ti = graph
        .vertex_index(t)
        .ok_or_else(|| Error::UnknownVertex(t.to_string()))?;
    let symbols = edge_symbols(graph, dfa);
    Ok(product_reaches(graph, dfa, &symbols, si, ti, Presence::All))
}

/// `q[μ](G)`.
pub fn eval_crpq_bound(graph: &LabeledGraph, query: &Crpq, binding: &Assignment) -> Result<bool> {
    let endpoints = binding.resolve(query, graph)?;
    Ok(QueryEvaluator::new(graph, query).holds(&endpoints, Presence::All))
}

fn relation_indices(graph: &LabeledGraph, dfa: &Dfa) -> Vec<(usize, usize)> {
    let symbols = edge_symbols(graph, dfa);
    let states = dfa.state_count();
    let mut out = Vec::new();
    if !dfa.is_useful(dfa.start()) {
        return out;
    }
    let mut seen = FixedBitSet::with_capacity(graph.vertex_count() * states);
    let mut hit = FixedBitSet::with_capacity(graph.vertex_count());
    for s in 0..graph.vertex_count() {
        seen.clear();
        hit.clear();
        if dfa.accepts_epsilon() && EMPTY_PATH_MATCHES {
            hit.insert(s);
        }
        let mut queue = VecDeque::new();
        if EMPTY_PATH_MATCHES {
            seen.insert(s * states + dfa.start());
        }
        queue.push_back((s, dfa.start()));
        while let Some((v, q)) = queue.pop_front() {
            for &e in graph.out_edges(v) {
                let Some(a) = symbols[e] else { continue };
                let r = dfa.next(q, a);
                if !dfa.is_useful(r) {
                    continue;
                }
                let w = graph.endpoints(e).1;
                if dfa.is_accepting(r) {
                    hit.insert(w);
                }
                if !seen.put(w * states + r) {
                    queue.push_back((w, r));
                }
            }
        }
        out.extend(hit.ones().map(|t| (s, t)));
    }
    out
}

/// All pairs `(s, t)` connected by a path whose word is in `L(dfa)`.
pub fn atom_relation(graph: &LabeledGraph, dfa: &Dfa) -> BTreeSet<(VertexId, VertexId)> {
    relation_indices(graph, dfa)
        .into_iter()
        .map(|(s, t)| (graph.vertex(s).id.clone(), graph.vertex(t).id.clone()))
        .collect()
}

/// Every satisfying assignment as a tuple over `query.variables()`, sorted
/// lexicographically by vertex id.
pub fn enumerate_answers(
    graph: &LabeledGraph,
    query: &Crpq,
    cap: usize,
) -> Result<Vec<Vec<VertexId>>> {
    let var_pos: HashMap<&VarName, usize> = query
        .variables()
        .iter()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    // (source position, target position, matching vertex pairs)
    type Relation = (usize, usize, Vec<(usize, usize)>);
    let mut relations: Vec<Relation> = query
        .atoms()
        .par_iter()
        .map(|a| {
            let mut rel = relation_indices(graph, &a.dfa);
            if a.source_var == a.target_var {
                rel.retain(|&(s, t)| s == t);
            }
            (var_pos[&a.source_var], var_pos[&a.target_var], rel)
        })
        .collect();
    relations.sort_by_key(|(_, _, rel)| rel.len());

    let k = query.variables().len();
    let mut partial: Vec<Vec<Option<usize>>> = vec![vec![None; k]];
    for (x, y, rel) in &relations {
        let (x, y) = (*x, *y);
        let mut next = Vec::new();
        // All partial tuples share the same bound variables at this point.
        let bound_x = partial.first().is_some_and(|p| p[x].is_some());
        let bound_y = partial.first().is_some_and(|p| p[y].is_some());
        match (bound_x, bound_y) {
            (false, false) => {
                for p in &partial {
                    for &(s, t) in rel {
                        let mut q = p.clone();
                        q[x] = Some(s);
                        q[y] = Some(t);
                        next.push(q);
                    }
                }
            }
            (true, true) => {
                let set: BTreeSet<(usize, usize)> = rel.iter().copied().collect();
                next = partial
                    .into_iter()
                    .filter(|p| set.contains(&(p[x].unwrap(), p[y].unwrap())))
                    .collect();
            }
            (true, false) => {
                let mut index: HashMap<usize, Vec<usize>> = HashMap::new();
                for &(s, t) in rel {
                    index.entry(s).or_default().push(t);
                }
                for p in &partial {
                    for &t in index.get(&p[x].unwrap()).into_iter().flatten() {
                        let mut q = p.clone();
                        q[y] = Some(t);
                        next.push(q);
                    }
                }
            }
            (false, true) => {
                let mut index: HashMap<usize, Vec<usize>> = HashMap::new();
                for &(s, t) in rel {
                    index.entry(t).or_default().push(s);
                }
                for p in &partial {
                    for &s in index.get(&p[y].unwrap()).into_iter().flatten() {
                        let mut q = p.clone();
                        q[x] = Some(s);
                        next.push(q);
                    }
                }
            }
        }
        partial = next;
        if partial.is_empty() {
            break;
        }
    }
    if partial.len() > cap {
        return Err(Error::EnumerationOverflow { cap });
    }
    let mut out: Vec<Vec<VertexId>> = partial
        .into_iter()
        .map(|p| {
            p.into_iter()
                .map(|v| graph.vertex(v.expect("every variable is bound")).id.clone())
                .collect()
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}
