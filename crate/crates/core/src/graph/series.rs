use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{DependencyGraph, Edge, ModuleId};
use crate::error::{Error, Result};

/// One version of the system under analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct VersionSnapshot {
    label: String,
    graph: DependencyGraph,
    class_count: Option<u64>,
}

impl VersionSnapshot {
    pub fn new(label: impl Into<String>, graph: DependencyGraph, class_count: Option<u64>) -> Result<Self> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(Error::Data("version label must not be empty".into()));
        }
        Ok(Self {
            label,
            graph,
            class_count,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    pub fn class_count(&self) -> Option<u64> {
        self.class_count
    }
}

/// Snapshots in chronological order with pairwise distinct labels.
#[derive(Debug, Clone, PartialEq)]
pub struct VersionSeries {
    snapshots: Vec<VersionSnapshot>,
}

impl VersionSeries {
    pub fn new(snapshots: Vec<VersionSnapshot>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &snapshots {
            if !seen.insert(s.label()) {
                return Err(Error::Data(format!("duplicate version label {:?}", s.label())));
            }
        }
        Ok(Self { snapshots })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[VersionSnapshot] {
        &self.snapshots
    }

    pub fn get(&self, idx: usize) -> Option<&VersionSnapshot> {
        self.snapshots.get(idx)
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.snapshots.iter().position(|s| s.label() == label)
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.position(label)
            .ok_or_else(|| Error::Data(format!("unknown version {label:?}")))
    }
}

/// `1 − |E| / (|V|·(|V|−1))`, the fraction of absent directed dependencies.
pub fn sparsity(g: &DependencyGraph) -> f64 {
    sparsity_from_counts(g.node_count(), g.edge_count())
}

pub fn sparsity_from_counts(nodes: usize, edges: usize) -> f64 {
    if nodes <= 1 {
        return 1.0;
    }
    let possible = nodes as f64 * (nodes as f64 - 1.0);
    1.0 - edges as f64 / possible
}

/// Set differences between two graphs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphDelta {
    pub added_edges: BTreeSet<Edge>,
    pub removed_edges: BTreeSet<Edge>,
    pub added_nodes: BTreeSet<ModuleId>,
    pub removed_nodes: BTreeSet<ModuleId>,
    pub shared_nodes: BTreeSet<ModuleId>,
}

impl GraphDelta {
    fn among_shared<'a>(&'a self, edges: &'a BTreeSet<Edge>) -> impl Iterator<Item = &'a Edge> + 'a {
        edges
            .iter()
            .filter(|(s, t)| self.shared_nodes.contains(s) && self.shared_nodes.contains(t))
    }

    /// Added edges whose endpoints both exist in the earlier version.
    pub fn added_shared(&self) -> BTreeSet<Edge> {
        self.among_shared(&self.added_edges).cloned().collect()
    }

    pub fn removed_shared(&self) -> BTreeSet<Edge> {
        self.among_shared(&self.removed_edges).cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.added_edges.is_empty()
            && self.removed_edges.is_empty()
            && self.added_nodes.is_empty()
            && self.removed_nodes.is_empty()
    }
}

pub fn delta(g1: &DependencyGraph, g2: &DependencyGraph) -> GraphDelta {
    let (n1, n2) = (g1.node_set(), g2.node_set());
    let (e1, e2) = (g1.edge_set(), g2.edge_set());
    GraphDelta {
        added_edges: e2.difference(&e1).cloned().collect(),
        removed_edges: e1.difference(&e2).cloned().collect(),
        added_nodes: n2.difference(&n1).cloned().collect(),
        removed_nodes: n1.difference(&n2).cloned().collect(),
        shared_nodes: n1.intersection(&n2).cloned().collect(),
    }
}

/// Thresholds deciding which consecutive versions are worth predicting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairFilterConfig {
    pub max_node_growth_fraction: f64,
    pub min_added_edges: usize,
    pub require_class_growth: bool,
}

impl Default for PairFilterConfig {
    fn default() -> Self {
        Self {
            max_node_growth_fraction: 0.15,
            min_added_edges: 1,
            require_class_growth: false,
        }
    }
}

impl PairFilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_node_growth_fraction >= 0.0) || !self.max_node_growth_fraction.is_finite() {
            return Err(Error::Config("max_node_growth_fraction must be finite and >= 0".into()));
        }
        if self.min_added_edges < 1 {
            return Err(Error::Config("min_added_edges must be >= 1".into()));
        }
        Ok(())
    }
}

/// The counts the eligibility rule looks at for one `(vₙ, vₙ₊₁)` pair.
///
/// Added dependencies are counted among modules present in both versions;
/// dependencies of freshly added modules are outside the prediction task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSummary {
    pub nodes_before: usize,
    pub added_nodes: usize,
    pub added_shared_edges: usize,
    pub classes_before: Option<u64>,
    pub classes_after: Option<u64>,
}

impl PairSummary {
    pub fn between(a: &VersionSnapshot, b: &VersionSnapshot) -> Self {
        let d = delta(a.graph(), b.graph());
        Self {
            nodes_before: a.graph().node_count(),
            added_nodes: d.added_nodes.len(),
            added_shared_edges: d.added_shared().len(),
            classes_before: a.class_count(),
            classes_after: b.class_count(),
        }
    }

    pub fn node_growth(&self) -> f64 {
        if self.nodes_before == 0 {
            return f64::INFINITY;
        }
        self.added_nodes as f64 / self.nodes_before as f64
    }

    pub fn is_eligible(&self, cfg: &PairFilterConfig) -> bool {
        if self.node_growth() > cfg.max_node_growth_fraction {
            return false;
        }
        if self.added_shared_edges < cfg.min_added_edges {
            return false;
        }
        if cfg.require_class_growth {
            if let (Some(before), Some(after)) = (self.classes_before, self.classes_after) {
                return after >= before;
            }
        }
        true
    }
}

/// Indices `(n, n+1)` of the consecutive pairs that pass the filter.
pub fn filter_version_pairs(series: &VersionSeries, cfg: &PairFilterConfig) -> Result<Vec<(usize, usize)>> {
    cfg.validate()?;
    if series.len() < 2 {
        return Err(Error::Data("a version series needs at least two snapshots".into()));
    }
    Ok(series
        .snapshots()
        .windows(2)
        .enumerate()
        .filter(|(_, w)| PairSummary::between(&w[0], &w[1]).is_eligible(cfg))
        .map(|(i, _)| (i, i + 1))
        .collect())
}

/// All ordered non-edges `(x, y)`, `x ≠ y`, over `universe`, in
/// lexicographic order.
pub fn candidate_pairs(g: &DependencyGraph, universe: &BTreeSet<ModuleId>) -> Result<Vec<Edge>> {
    let idx = universe_indices(g, universe)?;
    Ok(candidate_index_pairs(g, &idx)
        .into_iter()
        .map(|(s, t)| (g.node(s).clone(), g.node(t).clone()))
        .collect())
}

pub(crate) fn universe_indices(g: &DependencyGraph, universe: &BTreeSet<ModuleId>) -> Result<Vec<usize>> {
    // BTreeSet order matches node index order, so the result is sorted.
    universe
        .iter()
        .map(|id| g.index_of_id(id).ok_or_else(|| Error::UnknownNode(id.to_string())))
        .collect()
}

pub(crate) fn candidate_index_pairs(g: &DependencyGraph, universe: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &s in universe {
        for &t in universe {
            if s != t && !g.has_edge_idx(s, t) {
                out.push((s, t));
            }
        }
    }
    out
}

/// One row of the per-version statistics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionStats {
    pub label: String,
    pub classes: Option<u64>,
    pub packages: usize,
    pub deps: usize,
    pub added: Option<usize>,
    pub removed: Option<usize>,
    pub sparsity: f64,
}

/// Package count, dependency count, change versus the previous version
/// (among shared modules) and sparsity for each snapshot.
pub fn version_stats(series: &VersionSeries) -> Vec<VersionStats> {
    let snaps = series.snapshots();
    snaps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (added, removed) = if i == 0 {
                (None, None)
            } else {
                let d = delta(snaps[i - 1].graph(), s.graph());
                (Some(d.added_shared().len()), Some(d.removed_shared().len()))
            };
            VersionStats {
                label: s.label().to_string(),
                classes: s.class_count(),
                packages: s.graph().node_count(),
                deps: s.graph().edge_count(),
                added,
                removed,
                sparsity: sparsity(s.graph()),
            }
        })
        .collect()
}
