//! Edge-labeled directed graphs with endogenous/exogenous tagging.
//!
//! Graphs are simple: at most one edge per ordered `(source, target)` pair,
//! whatever its label. An edge is therefore identified by its endpoints and
//! written `source->target`.
//!
//! Text format, one record per line, whitespace separated:
//!
//! ```text
//! # comment
//! v <id> <n|x>                  vertex declaration (optional)
//! <src> <label> <dst> <n|x>     edge
//! ```
//!
//! `n` marks an endogenous item (a player), `x` an exogenous one. Vertices
//! only mentioned by edges default to endogenous.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(id: impl Into<String>) -> Self {
        VertexId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_string())
    }
}

/// An edge label, i.e. a symbol of the alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

impl Label {
    pub fn new(label: impl Into<String>) -> Self {
        Label(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_string())
    }
}

/// Identity of an edge in a simple graph: its ordered endpoints.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId {
    pub source: VertexId,
    pub target: VertexId,
}

impl EdgeId {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        EdgeId {
            source: VertexId::new(source),
            target: VertexId::new(target),
        }
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.source, self.target)
    }
}

impl FromStr for EdgeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once("->") {
            Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                Ok(EdgeId::new(a.trim(), b.trim()))
            }
            _ => Err(Error::UnknownPlayer(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Endogenous,
    Exogenous,
}

impl Role {
    fn tag(self) -> &'static str {
        match self {
            Role::Endogenous => "n",
            Role::Exogenous => "x",
        }
    }

    fn parse_tag(tag: &str) -> Option<Role> {
        match tag {
            "n" => Some(Role::Endogenous),
            "x" => Some(Role::Exogenous),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: VertexId,
    pub label: Label,
    pub target: VertexId,
    pub role: Role,
}

impl Edge {
    pub fn id(&self) -> EdgeId {
        EdgeId {
            source: self.source.clone(),
            target: self.target.clone(),
        }
    }
}

/// A walk through the graph together with its label word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub edges: Vec<EdgeId>,
    pub word: Vec<Label>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Which items of a graph are present when evaluating a query on a
/// subgraph without materialising it.
///
/// `Edges` masks are indexed by edge position and must include the
/// exogenous edges; `Vertices` masks are indexed by vertex position and keep
/// exactly the edges whose endpoints both survive.
#[derive(Debug, Clone, Copy)]
pub enum Presence<'a> {
    All,
    Edges(&'a FixedBitSet),
    Vertices(&'a FixedBitSet),
}

impl Presence<'_> {
    #[inline]
    pub fn vertex(&self, v: usize) -> bool {
        match self {
            Presence::Vertices(mask) => mask.contains(v),
            _ => true,
        }
    }

    #[inline]
    pub fn edge(&self, graph: &LabeledGraph, e: usize) -> bool {
        match self {
            Presence::All => true,
            Presence::Edges(mask) => mask.contains(e),
            Presence::Vertices(mask) => {
                let (s, t) = graph.endpoints(e);
                mask.contains(s) && mask.contains(t)
            }
        }
    }
}

/// Immutable edge-labeled directed graph.
///
/// Vertices are stored sorted by id and edges sorted by `(source, target)`,
/// so positions are stable and iteration order is deterministic.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    vertex_pos: HashMap<VertexId, usize>,
    edge_pos: HashMap<(usize, usize), usize>,
    endpoints: Vec<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl PartialEq for LabeledGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl Eq for LabeledGraph {}

impl LabeledGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut builder = GraphBuilder::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let malformed = |reason: String| Error::MalformedGraph {
                line: line_no,
                reason,
            };
            match fields.as_slice() {
                ["v", id, tag] => {
                    let role = Role::parse_tag(tag)
                        .ok_or_else(|| malformed(format!("unknown classification tag `{tag}`")))?;
                    builder.declare_vertex(id, role).map_err(&malformed)?;
                }
                [src, label, dst, tag] => {
                    let role = Role::parse_tag(tag)
                        .ok_or_else(|| malformed(format!("unknown classification tag `{tag}`")))?;
                    builder
                        .add_edge(src, label, dst, role)
                        .map_err(&malformed)?;
                }
                _ => {
                    return Err(malformed(format!(
                        "expected `v <id> <n|x>` or `<src> <label> <dst> <n|x>`, got {} fields",
                        fields.len()
                    )))
                }
            }
        }
        Ok(builder.build())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn vertex_index(&self, id: &VertexId) -> Option<usize> {
        self.vertex_pos.get(id).copied()
    }

    pub fn edge_index(&self, id: &EdgeId) -> Option<usize> {
        let s = self.vertex_index(&id.source)?;
        let t = self.vertex_index(&id.target)?;
        self.edge_pos.get(&(s, t)).copied()
    }

    pub fn edge_between(&self, source: usize, target: usize) -> Option<usize> {
        self.edge_pos.get(&(source, target)).copied()
    }

    #[inline]
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.endpoints[e]
    }

    #[inline]
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    #[inline]
    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    /// Positions of endogenous edges, in edge order.
    pub fn endo_edges(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].role == Role::Endogenous)
            .collect()
    }

    pub fn exo_edges(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].role == Role::Exogenous)
            .collect()
    }

    pub fn endo_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertices[v].role == Role::Endogenous)
            .collect()
    }

    pub fn exo_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertices[v].role == Role::Exogenous)
            .collect()
    }

    /// Set of labels used by edges.
    pub fn labels(&self) -> BTreeSet<Label> {
        self.edges.iter().map(|e| e.label.clone()).collect()
    }

    /// Builds the [`Path`] for a sequence of edge positions, checking incidence.
    pub fn path(&self, edges: &[usize]) -> Option<Path> {
        for w in edges.windows(2) {
            if self.endpoints[w[0]].1 != self.endpoints[w[1]].0 {
                return None;
            }
        }
        Some(Path {
            edges: edges.iter().map(|&e| self.edges[e].id()).collect(),
            word: edges.iter().map(|&e| self.edges[e].label.clone()).collect(),
        })
    }

    /// `G[B ∪ E_x]`: keeps every vertex, drops endogenous edges outside `keep`.
    pub fn edge_subgraph(&self, keep: &BTreeSet<EdgeId>) -> Result<LabeledGraph> {
        let mut kept = FixedBitSet::with_capacity(self.edges.len());
        for id in keep {
            let e = self
                .edge_index(id)
                .ok_or_else(|| Error::InvalidPlayerSet(format!("unknown edge {id}")))?;
            if self.edges[e].role != Role::Endogenous {
                return Err(Error::InvalidPlayerSet(format!("edge {id} is exogenous")));
            }
            kept.insert(e);
        }
        let mut builder = self.vertex_shell(|_| true);
        for (e, edge) in self.edges.iter().enumerate() {
            if edge.role == Role::Exogenous || kept.contains(e) {
                builder.push_edge_unchecked(edge.clone());
            }
        }
        Ok(builder.build())
    }

    /// Induced subgraph on `B ∪ V_x`.
    pub fn vertex_subgraph(&self, keep: &BTreeSet<VertexId>) -> Result<LabeledGraph> {
        let mut kept = FixedBitSet::with_capacity(self.vertices.len());
        for id in keep {
            let v = self
                .vertex_index(id)
                .ok_or_else(|| Error::InvalidPlayerSet(format!("unknown vertex {id}")))?;
            if self.vertices[v].role != Role::Endogenous {
                return Err(Error::InvalidPlayerSet(format!("vertex {id} is exogenous")));
            }
            kept.insert(v);
        }
        for v in self.exo_vertices() {
            kept.insert(v);
        }
        let mut builder = self.vertex_shell(|v| kept.contains(v));
        for (e, edge) in self.edges.iter().enumerate() {
            let (s, t) = self.endpoints[e];
            if kept.contains(s) && kept.contains(t) {
                builder.push_edge_unchecked(edge.clone());
            }
        }
        Ok(builder.build())
    }

    /// Copy of the graph with one edge reclassified.
    pub fn with_edge_role(&self, e: usize, role: Role) -> LabeledGraph {
        let mut g = self.clone();
        g.edges[e].role = role;
        g
    }

    /// Copy of the graph without the given edge.
    pub fn without_edge(&self, e: usize) -> LabeledGraph {
        let mut builder = self.vertex_shell(|_| true);
        for (i, edge) in self.edges.iter().enumerate() {
            if i != e {
                builder.push_edge_unchecked(edge.clone());
            }
        }
        builder.build()
    }

    fn vertex_shell(&self, keep: impl Fn(usize) -> bool) -> GraphBuilder {
        let mut builder = GraphBuilder::default();
        for (v, vertex) in self.vertices.iter().enumerate() {
            if keep(v) {
                builder.roles.insert(vertex.id.clone(), Some(vertex.role));
            }
        }
        builder
    }
}

impl FromStr for LabeledGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LabeledGraph::parse(s)
    }
}

impl fmt::Display for LabeledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vertices {
            writeln!(f, "v\t{}\t{}", v.id, v.role.tag())?;
        }
        let mut edges: Vec<&Edge> = self.edges.iter().collect();
        edges.sort_by(|a, b| {
            (&a.source, &a.label, &a.target).cmp(&(&b.source, &b.label, &b.target))
        });
        for e in edges {
            writeln!(
                f,
                "{}\t{}\t{}\t{}",
                e.source,
                e.label,
                e.target,
                e.role.tag()
            )?;
        }
        Ok(())
    }
}

/// Incremental construction of a [`LabeledGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    // `None` = implied by an edge, not declared.
    roles: HashMap<VertexId, Option<Role>>,
    edges: Vec<Edge>,
    pairs: HashMap<(VertexId, VertexId), usize>,
}

impl GraphBuilder {
    /// Declares a vertex with an explicit classification.
    pub fn declare_vertex(
        &mut self,
        id: &str,
        role: Role,
    ) -> std::result::Result<&mut Self, String> {
        let slot = self.roles.entry(VertexId::new(id)).or_insert(None);
        match slot {
            Some(existing) if *existing != role => {
                return Err(format!("vertex `{id}` declared both n and x"));
            }
            _ => *slot = Some(role),
        }
        Ok(self)
    }

    pub fn add_edge(
        &mut self,
        source: &str,
        label: &str,
        target: &str,
        role: Role,
    ) -> std::result::Result<&mut Self, String> {
        if label.is_empty() {
            return Err("empty label".to_string());
        }
        let key = (VertexId::new(source), VertexId::new(target));
        if self.pairs.contains_key(&key) {
            return Err(format!(
                "parallel edge {source}->{target}: at most one edge per ordered pair"
            ));
        }
        self.pairs.insert(key, self.edges.len());
        self.roles.entry(VertexId::new(source)).or_insert(None);
        self.roles.entry(VertexId::new(target)).or_insert(None);
        self.edges.push(Edge {
            source: VertexId::new(source),
            label: Label::new(label),
            target: VertexId::new(target),
            role,
        });
        Ok(self)
    }

    fn push_edge_unchecked(&mut self, edge: Edge) {
        self.pairs
            .insert((edge.source.clone(), edge.target.clone()), self.edges.len());
        self.edges.push(edge);
    }

    pub fn build(self) -> LabeledGraph {
        let mut vertices: Vec<Vertex> = self
            .roles
            .into_iter()
            .map(|(id, role)| Vertex {
                id,
                role: role.unwrap_or(Role::Endogenous),
            })
            .collect();
        vertices.sort_by(|a, b| a.id.cmp(&b.id));
        let vertex_pos: HashMap<VertexId, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.clone(), i))
            .collect();

        let mut edges = self.edges;
        edges.sort_by(|a, b| (&a.source, &a.target).cmp(&(&b.source, &b.target)));
        let n = vertices.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let mut endpoints = Vec::with_capacity(edges.len());
        let mut edge_pos = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            let s = vertex_pos[&e.source];
            let t = vertex_pos[&e.target];
            endpoints.push((s, t));
            edge_pos.insert((s, t), i);
            out_adj[s].push(i);
            in_adj[t].push(i);
        }
        LabeledGraph {
            vertices,
            edges,
            vertex_pos,
            edge_pos,
            endpoints,
            out_adj,
            in_adj,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::running_example;

    fn ids(g: &LabeledGraph) -> BTreeSet<String> {
        g.edges().iter().map(|e| e.id().to_string()).collect()
    }

    #[test]
    fn loads_running_example() {
        let g = running_example();
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.edge_count(), 9);
        assert_eq!(g.endo_edges().len(), 9);
    }

    #[test]
    fn empty_file_is_empty_graph() {
        let g = LabeledGraph::parse("").unwrap();
        assert_eq!(g.vertex_count(), 0);
        assert_eq!(g.edge_count(), 0);
        let g = LabeledGraph::parse("# nothing\n\n").unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn parallel_pair_is_rejected() {
        let err = LabeledGraph::parse("v1 a v2 n\nv1 b v2 n\n").unwrap_err();
        assert!(
            matches!(err, Error::MalformedGraph { line: 2, .. }),
            "{err}"
        );
    }

    #[test]
    fn unknown_tag_is_rejected() {
        let err = LabeledGraph::parse("v1 a v2 q\n").unwrap_err();
        assert!(matches!(err, Error::MalformedGraph { line: 1, .. }));
        let err = LabeledGraph::parse("v v1 maybe\n").unwrap_err();
        assert!(matches!(err, Error::MalformedGraph { .. }));
    }

    #[test]
    fn conflicting_vertex_declarations_are_rejected() {
        let err = LabeledGraph::parse("v a n\nv a x\n").unwrap_err();
        assert!(matches!(err, Error::MalformedGraph { line: 2, .. }));
    }

    #[test]
    fn vertex_lines_declare_isolated_vertices_and_override_defaults() {
        let g = LabeledGraph::parse("s a t n\nv t x\nv lonely n\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        let t = g.vertex_index(&"t".into()).unwrap();
        assert_eq!(g.vertex(t).role, Role::Exogenous);
        let s = g.vertex_index(&"s".into()).unwrap();
        assert_eq!(g.vertex(s).role, Role::Endogenous);
    }

    #[test]
    fn self_loops_are_accepted() {
        let g = LabeledGraph::parse("u a u n\n").unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.endpoints(0), (0, 0));
    }

    #[test]
    fn edge_subgraph_of_empty_coalition_keeps_exogenous_only() {
        let g = running_example();
        let sub = g.edge_subgraph(&BTreeSet::new()).unwrap();
        assert_eq!(sub.edge_count(), 0);
        assert_eq!(sub.vertex_count(), 6);

        let all: BTreeSet<EdgeId> = g.edges().iter().map(Edge::id).collect();
        assert_eq!(g.edge_subgraph(&all).unwrap(), g);
    }

    #[test]
    fn edge_subgraph_with_exogenous_edge() {
        let g = running_example().with_edge_role(
            running_example()
                .edge_index(&EdgeId::new("v1", "v3"))
                .unwrap(),
            Role::Exogenous,
        );
        let keep = [EdgeId::new("v3", "v5"), EdgeId::new("v5", "v6")]
            .into_iter()
            .collect();
        let sub = g.edge_subgraph(&keep).unwrap();
        assert_eq!(
            ids(&sub),
            ["v1->v3", "v3->v5", "v5->v6"]
                .iter()
                .map(|s| s.to_string())
                .collect()
        );
    }

    #[test]
    fn edge_subgraph_rejects_non_players() {
        let g = LabeledGraph::parse("s a t x\n").unwrap();
        let keep = [EdgeId::new("s", "t")].into_iter().collect();
        assert!(matches!(
            g.edge_subgraph(&keep),
            Err(Error::InvalidPlayerSet(_))
        ));
        let keep = [EdgeId::new("t", "s")].into_iter().collect();
        assert!(matches!(
            g.edge_subgraph(&keep),
            Err(Error::InvalidPlayerSet(_))
        ));
    }

    #[test]
    fn vertex_subgraph_cuts_incident_edges() {
        let g = LabeledGraph::parse("v s x\nv t x\ns a u n\nu b t n\n").unwrap();
        let sub = g.vertex_subgraph(&BTreeSet::new()).unwrap();
        assert_eq!(sub.vertex_count(), 2);
        assert_eq!(sub.edge_count(), 0);

        let all = [VertexId::new("u")].into_iter().collect();
        assert_eq!(g.vertex_subgraph(&all).unwrap(), g);

        let exo_only = LabeledGraph::parse("v s x\nv t x\ns a t n\n").unwrap();
        assert_eq!(
            exo_only.vertex_subgraph(&BTreeSet::new()).unwrap(),
            exo_only
        );
    }

    #[test]
    fn serialization_is_sorted_vertices_then_edges() {
        let g = LabeledGraph::parse("b c a x\na z b n\n").unwrap();
        assert_eq!(g.to_string(), "v\ta\tn\nv\tb\tn\na\tz\tb\tn\nb\tc\ta\tx\n");
    }

    #[test]
    fn path_checks_incidence() {
        let g = running_example();
        let e13 = g.edge_index(&EdgeId::new("v1", "v3")).unwrap();
        let e35 = g.edge_index(&EdgeId::new("v3", "v5")).unwrap();
        let e24 = g.edge_index(&EdgeId::new("v2", "v4")).unwrap();
        let p = g.path(&[e13, e35]).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.word, vec![Label::from("a"), Label::from("b")]);
        assert!(g.path(&[e13, e24]).is_none());
        assert!(g.path(&[]).unwrap().is_empty());
    }

    #[test]
    fn edge_id_parses() {
        assert_eq!("v1->v3".parse::<EdgeId>().unwrap(), EdgeId::new("v1", "v3"));
        assert!("v1v3".parse::<EdgeId>().is_err());
    }
}
