//! Homophily rankings: for each module, the non-dependencies it is most
//! similar to under one metric, and their precision against the next version.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{delta, universe_indices, DependencyGraph, Edge, ModuleId};
use crate::metrics::{MetricConfig, MetricId, PairScorer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub target: ModuleId,
    pub score: f64,
}

/// Top-scoring candidate dependencies of one module, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRanking {
    pub source: ModuleId,
    pub metric: MetricId,
    pub entries: Vec<RankingEntry>,
}

/// Descending score, then ascending target name.
fn by_score_then_name(a: (f64, &ModuleId), b: (f64, &ModuleId)) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}

pub(crate) fn rank_with_scorer(
    scorer: &PairScorer<'_>,
    source: usize,
    metric: MetricId,
    n: usize,
    allowed: Option<&[bool]>,
) -> NodeRanking {
    let g = scorer.graph();
    let mut scored: Vec<(f64, usize)> = (0..g.node_count())
        .filter(|&t| t != source && !g.has_edge_idx(source, t))
        .filter(|&t| allowed.is_none_or(|mask| mask[t]))
        .map(|t| (scorer.score(source, t, metric), t))
        .collect();
    scored.sort_by(|a, b| by_score_then_name((a.0, g.node(a.1)), (b.0, g.node(b.1))));
    scored.truncate(n);
    NodeRanking {
        source: g.node(source).clone(),
        metric,
        entries: scored
            .into_iter()
            .map(|(score, t)| RankingEntry {
                target: g.node(t).clone(),
                score,
            })
            .collect(),
    }
}

/// The `n` best candidate targets for `source`. Zero-score candidates stay
/// in the list.
pub fn rank_for_node(
    g: &DependencyGraph,
    source: &str,
    metric: MetricId,
    cfg: &MetricConfig,
    n: usize,
) -> Result<NodeRanking> {
    if n == 0 {
        return Err(Error::Config("top count must be >= 1".into()));
    }
    let s = g.require(source)?;
    let scorer = PairScorer::new(g, &without_community(cfg))?;
    Ok(rank_with_scorer(&scorer, s, metric, n, None))
}

fn without_community(cfg: &MetricConfig) -> MetricConfig {
    MetricConfig {
        include_community_feature: false,
        ..*cfg
    }
}

/// All candidate pairs over `universe` scored by one metric, best first.
pub fn global_ranking(
    g: &DependencyGraph,
    universe: &BTreeSet<ModuleId>,
    metric: MetricId,
    cfg: &MetricConfig,
) -> Result<Vec<(Edge, f64)>> {
    let scorer = PairScorer::new(g, &without_community(cfg))?;
    let idx = universe_indices(g, universe)?;
    let mut out: Vec<(usize, usize, f64)> = Vec::new();
    for &s in &idx {
        for &t in &idx {
            if s != t && !g.has_edge_idx(s, t) {
                out.push((s, t, scorer.score(s, t, metric)));
            }
        }
    }
    // Index order is lexicographic, so a stable sort on score keeps ties in
    // (source, target) order.
    out.sort_by(|a, b| b.2.total_cmp(&a.2));
    Ok(out
        .into_iter()
        .map(|(s, t, v)| ((g.node(s).clone(), g.node(t).clone()), v))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeHits {
    pub hits: usize,
    pub predictions: usize,
    /// Dependencies this module actually gained in the next version.
    pub gained: usize,
}

impl NodeHits {
    pub fn precision(&self) -> f64 {
        ratio(self.hits, self.predictions)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision@N of per-module rankings against the dependencies that appear
/// in the next version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEvaluation {
    pub metric: MetricId,
    pub top_n: usize,
    pub per_node: BTreeMap<ModuleId, NodeHits>,
    /// Σ hits / Σ predictions over every ranked module.
    pub micro_precision: f64,
    /// Same ratio restricted to modules that gained at least one dependency.
    pub gaining_precision: f64,
    pub rankings: Vec<NodeRanking>,
    pub added: BTreeSet<Edge>,
}

impl RankingEvaluation {
    pub fn is_hit(&self, source: &ModuleId, target: &ModuleId) -> bool {
        self.added.contains(&(source.clone(), target.clone()))
    }
}

/// Ranks every shared module of `g_n` (candidates limited to shared
/// modules) and counts how many predictions became real in `g_next`.
pub fn evaluate_ranking(
    g_n: &DependencyGraph,
    g_next: &DependencyGraph,
    metric: MetricId,
    cfg: &MetricConfig,
    n: usize,
) -> Result<RankingEvaluation> {
    if n == 0 {
        return Err(Error::Config("top count must be >= 1".into()));
    }
    let d = delta(g_n, g_next);
    if d.shared_nodes.is_empty() {
        return Err(Error::Data("versions share no modules".into()));
    }
    let added = d.added_shared();
    let scorer = PairScorer::new(g_n, &without_community(cfg))?;
    let shared_idx = universe_indices(g_n, &d.shared_nodes)?;
    let mut mask = vec![false; g_n.node_count()];
    for &i in &shared_idx {
        mask[i] = true;
    }

    let mut per_node = BTreeMap::new();
    let mut rankings = Vec::new();
    let (mut hits, mut preds, mut g_hits, mut g_preds) = (0, 0, 0, 0);
    for &s in &shared_idx {
        let ranking = rank_with_scorer(&scorer, s, metric, n, Some(&mask));
        if ranking.entries.is_empty() {
            continue;
        }
        let source = g_n.node(s).clone();
        let node_hits = ranking
            .entries
            .iter()
            .filter(|e| added.contains(&(source.clone(), e.target.clone())))
            .count();
        let gained = added.iter().filter(|(src, _)| *src == source).count();
        let nh = NodeHits {
            hits: node_hits,
            predictions: ranking.entries.len(),
            gained,
        };
        hits += nh.hits;
        preds += nh.predictions;
        if gained > 0 {
            g_hits += nh.hits;
            g_preds += nh.predictions;
        }
        per_node.insert(source, nh);
        rankings.push(ranking);
    }
    Ok(RankingEvaluation {
        metric,
        top_n: n,
        per_node,
        micro_precision: ratio(hits, preds),
        gaining_precision: ratio(g_hits, g_preds),
        rankings,
        added,
    })
}
