//! Dependency graph data model.
//!
//! A [`DependencyGraph`] is an immutable directed graph over [`ModuleId`]s.
//! Nodes are stored in lexicographic order, so node indices, adjacency lists
//! and edge iteration all follow the `(source, target)` lexicographic order.

mod io;
mod series;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_edge_list, load_odem, load_series, to_edge_list, GraphFormat, ManifestEntry};
pub use series::{
    candidate_pairs, delta, filter_version_pairs, sparsity, sparsity_from_counts, version_stats, GraphDelta,
    PairFilterConfig, PairSummary, VersionSeries, VersionSnapshot, VersionStats,
};
pub(crate) use series::{candidate_index_pairs, universe_indices};

/// Identifier of a module (for Java systems, a dotted package name).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModuleId(Arc<str>);

impl ModuleId {
    pub fn new(name: impl AsRef<str>) -> Result<Self> {
        let name = name.as_ref();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidModuleId(name.to_string()));
        }
        Ok(ModuleId(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ModuleId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        ModuleId::new(value)
    }
}

impl From<ModuleId> for String {
    fn from(value: ModuleId) -> Self {
        value.0.to_string()
    }
}

impl AsRef<str> for ModuleId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// An ordered `(source, target)` dependency.
pub type Edge = (ModuleId, ModuleId);

/// Directed dependency graph without self-loops or parallel edges.
#[derive(Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    nodes: Vec<ModuleId>,
    index: HashMap<ModuleId, usize>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    edge_count: usize,
}

impl fmt::Debug for DependencyGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DependencyGraph")
            .field("nodes", &self.nodes)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Default for DependencyGraph {
    fn default() -> Self {
        GraphBuilder::new().build()
    }
}

impl DependencyGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    /// Convenience constructor from string pairs; panics on invalid names.
    /// Meant for tests and examples.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, S)]) -> Self {
        let mut b = GraphBuilder::new();
        for (s, t) in pairs {
            b.add_edge_str(s.as_ref(), t.as_ref())
                .expect("valid module names");
        }
        b.build()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Nodes in lexicographic order; position equals node index.
    pub fn nodes(&self) -> &[ModuleId] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &ModuleId {
        &self.nodes[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        // HashMap<ModuleId, _> cannot be queried by &str without a Borrow
        // impl that would bypass validation, so fall back to binary search.
        self.nodes
            .binary_search_by(|probe| probe.as_str().cmp(name))
            .ok()
    }

    pub fn index_of_id(&self, id: &ModuleId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub(crate) fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    /// Sorted out-neighbour indices.
    pub fn out_neighbors(&self, idx: usize) -> &[usize] {
        &self.out[idx]
    }

    /// Sorted in-neighbour indices.
    pub fn in_neighbors(&self, idx: usize) -> &[usize] {
        &self.inc[idx]
    }

    pub fn has_edge_idx(&self, source: usize, target: usize) -> bool {
        self.out[source].binary_search(&target).is_ok()
    }

    pub fn has_edge(&self, source: &str, target: &str) -> bool {
        match (self.index_of(source), self.index_of(target)) {
            (Some(s), Some(t)) => self.has_edge_idx(s, t),
            _ => false,
        }
    }

    /// Edges in lexicographic `(source, target)` order.
    pub fn edges(&self) -> impl Iterator<Item = (&ModuleId, &ModuleId)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(move |(s, ts)| ts.iter().map(move |&t| (&self.nodes[s], &self.nodes[t])))
    }

    pub fn edge_set(&self) -> BTreeSet<Edge> {
        self.edges().map(|(s, t)| (s.clone(), t.clone())).collect()
    }

    pub fn node_set(&self) -> BTreeSet<ModuleId> {
        self.nodes.iter().cloned().collect()
    }

    /// Copy of the graph with one edge removed (no-op when absent).
    pub fn without_edge(&self, source: &ModuleId, target: &ModuleId) -> DependencyGraph {
        let mut b = self.to_builder();
        b.edges.remove(&(source.clone(), target.clone()));
        b.build()
    }

    /// Copy of the graph with one edge added. Both endpoints must exist.
    pub fn with_edge(&self, source: &ModuleId, target: &ModuleId) -> Result<DependencyGraph> {
        self.require(source.as_str())?;
        self.require(target.as_str())?;
        let mut b = self.to_builder();
        b.add_edge(source.clone(), target.clone());
        Ok(b.build())
    }

    pub fn to_builder(&self) -> GraphBuilder {
        GraphBuilder {
            nodes: self.node_set(),
            edges: self.edge_set(),
        }
    }
}

/// Incremental construction of a [`DependencyGraph`].
///
/// Self-loops are dropped and duplicate edges collapse.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    nodes: BTreeSet<ModuleId>,
    edges: BTreeSet<Edge>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: ModuleId) -> &mut Self {
        self.nodes.insert(id);
        self
    }

    pub fn add_edge(&mut self, source: ModuleId, target: ModuleId) -> &mut Self {
        self.nodes.insert(source.clone());
        self.nodes.insert(target.clone());
        if source != target {
            self.edges.insert((source, target));
        }
        self
    }

    pub fn add_edge_str(&mut self, source: &str, target: &str) -> Result<&mut Self> {
        let s = ModuleId::new(source)?;
        let t = ModuleId::new(target)?;
        Ok(self.add_edge(s, t))
    }

    pub fn remove_edge(&mut self, source: &ModuleId, target: &ModuleId) -> bool {
        self.edges.remove(&(source.clone(), target.clone()))
    }

    pub fn contains_edge(&self, source: &ModuleId, target: &ModuleId) -> bool {
        self.edges.contains(&(source.clone(), target.clone()))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn build(&self) -> DependencyGraph {
        let nodes: Vec<ModuleId> = self.nodes.iter().cloned().collect();
        let index: HashMap<ModuleId, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut out = vec![Vec::new(); nodes.len()];
        let mut inc = vec![Vec::new(); nodes.len()];
        // BTreeSet iteration is lexicographic, so both lists come out sorted.
        for (s, t) in &self.edges {
            let (si, ti) = (index[s], index[t]);
            out[si].push(ti);
            inc[ti].push(si);
        }
        DependencyGraph {
            nodes,
            index,
            out,
            inc,
            edge_count: self.edges.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_id_rejects_whitespace_and_empty() {
        assert!(ModuleId::new("").is_err());
        assert!(ModuleId::new("a b").is_err());
        assert!(ModuleId::new("a\tb").is_err());
        assert!(ModuleId::new("org.apache.derby").is_ok());
    }

    #[test]
    fn builder_drops_self_loops_and_duplicates() {
        let g = DependencyGraph::from_pairs(&[("a", "a"), ("a", "c"), ("a", "c"), ("b", "c")]);
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge("a", "c"));
        assert!(!g.has_edge("a", "a"));
    }

    #[test]
    fn adjacency_is_sorted_and_consistent() {
        let g = DependencyGraph::from_pairs(&[("c", "a"), ("c", "b"), ("a", "b")]);
        let c = g.index_of("c").unwrap();
        assert_eq!(g.out_neighbors(c), &[0, 1]);
        assert_eq!(g.in_neighbors(1), &[0, 2]);
        let edges: Vec<_> = g.edges().map(|(s, t)| format!("{s}>{t}")).collect();
        assert_eq!(edges, ["a>b", "c>a", "c>b"]);
    }

    #[test]
    fn edge_edit_copies() {
        let g = DependencyGraph::from_pairs(&[("a", "b")]);
        let a = ModuleId::new("a").unwrap();
        let b = ModuleId::new("b").unwrap();
        let g2 = g.with_edge(&b, &a).unwrap();
        assert_eq!(g2.edge_count(), 2);
        assert_eq!(g2.without_edge(&b, &a), g);
        assert!(g.with_edge(&a, &ModuleId::new("zz").unwrap()).is_err());
    }
}
