//! Topological similarity metrics for ordered node pairs.
//!
//! Seven of the nine metrics read the neighbourhood selected by
//! [`NeighborhoodMode`]. Katz always counts directed walks and SimRank always
//! follows in-neighbours, whatever the mode.
//!
//! For scoring many pairs of one graph, build a [`PairScorer`] once: it
//! precomputes neighbourhoods, the Katz walk sums and the SimRank table.

mod community;
mod katz;
mod overlap;
mod simrank;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DependencyGraph, ModuleId};

pub use community::{communities, CommunityPartition};
pub use katz::{katz, KatzTable};
pub use overlap::{
    contingency_metrics, neighbors, overlap_metrics, ContingencyScores, Neighborhoods,
    OverlapScores,
};
pub use simrank::{simrank, SimRankTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NeighborhoodMode {
    Out,
    In,
    #[default]
    Union,
}

impl FromStr for NeighborhoodMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "out" => Ok(Self::Out),
            "in" => Ok(Self::In),
            "union" => Ok(Self::Union),
            other => Err(Error::Config(format!("unknown neighbourhood mode {other:?}"))),
        }
    }
}

/// The nine similarity metrics, in feature-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    CommonNeighbours,
    AdamicAdar,
    ResourceAllocation,
    Sorensen,
    Kulczynski,
    RelativeMatching,
    RussellRao,
    Katz,
    SimRank,
}

impl MetricId {
    pub const ALL: [MetricId; 9] = [
        MetricId::CommonNeighbours,
        MetricId::AdamicAdar,
        MetricId::ResourceAllocation,
        MetricId::Sorensen,
        MetricId::Kulczynski,
        MetricId::RelativeMatching,
        MetricId::RussellRao,
        MetricId::Katz,
        MetricId::SimRank,
    ];

    pub fn position(self) -> usize {
        self as usize
    }

    /// Column name used in feature CSV files.
    pub fn column(self) -> &'static str {
        match self {
            MetricId::CommonNeighbours => "cn",
            MetricId::AdamicAdar => "aa",
            MetricId::ResourceAllocation => "ra",
            MetricId::Sorensen => "sorensen",
            MetricId::Kulczynski => "kulczynski",
            MetricId::RelativeMatching => "relmatch",
            MetricId::RussellRao => "russellrao",
            MetricId::Katz => "katz",
            MetricId::SimRank => "simrank",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricId::CommonNeighbours => "common-neighbours",
            MetricId::AdamicAdar => "adamic-adar",
            MetricId::ResourceAllocation => "resource-allocation",
            MetricId::Sorensen => "sorensen",
            MetricId::Kulczynski => "kulczynski",
            MetricId::RelativeMatching => "relative-matching",
            MetricId::RussellRao => "russell-rao",
            MetricId::Katz => "katz",
            MetricId::SimRank => "simrank",
        }
    }

    /// True for metrics whose values lie in `[0, 1]`; the rest are only
    /// bounded below by zero.
    pub fn is_unit_interval(self) -> bool {
        matches!(
            self,
            MetricId::Sorensen
                | MetricId::Kulczynski
                | MetricId::RelativeMatching
                | MetricId::RussellRao
                | MetricId::SimRank
        )
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        MetricId::ALL
            .into_iter()
            .find(|m| m.name() == norm || m.column() == norm)
            .or(match norm.as_str() {
                "common-neighbors" => Some(MetricId::CommonNeighbours),
                "russel-rao" | "russelrao" => Some(MetricId::RussellRao),
                "relativematching" => Some(MetricId::RelativeMatching),
                _ => None,
            })
            .ok_or_else(|| Error::Config(format!("unknown metric {s:?}")))
    }
}

/// Parameters shared by every metric computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub mode: NeighborhoodMode,
    pub katz_beta: f64,
    pub katz_max_length: usize,
    pub simrank_decay: f64,
    pub simrank_max_iters: usize,
    pub simrank_tol: f64,
    pub include_community_feature: bool,
    pub community_seed: u64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            mode: NeighborhoodMode::Union,
            katz_beta: 0.005,
            katz_max_length: 5,
            simrank_decay: 0.8,
            simrank_max_iters: 50,
            simrank_tol: 1e-4,
            include_community_feature: false,
            community_seed: 0,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.katz_beta > 0.0 && self.katz_beta.is_finite()) {
            return Err(Error::Config("katz_beta must be positive".into()));
        }
        if self.katz_max_length < 1 {
            return Err(Error::Config("katz_max_length must be >= 1".into()));
        }
        if !(self.simrank_decay > 0.0 && self.simrank_decay < 1.0) {
            return Err(Error::Config("simrank_decay must lie in (0, 1)".into()));
        }
        if !(self.simrank_tol > 0.0) {
            return Err(Error::Config("simrank_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn feature_arity(&self) -> usize {
        if self.include_community_feature {
            10
        } else {
            9
        }
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = MetricId::ALL.iter().map(|m| m.column().to_string()).collect();
        if self.include_community_feature {
            names.push(COMMUNITY_COLUMN.to_string());
        }
        names
    }
}

pub const COMMUNITY_COLUMN: &str = "community";

/// Metric scores for one ordered pair, in [`MetricId::ALL`] order, optionally
/// followed by a same-community flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != 9 && values.len() != 10 {
            return Err(Error::Data(format!(
                "feature vectors have 9 or 10 entries, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("feature vector contains a non-finite value".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, metric: MetricId) -> f64 {
        self.0[metric.position()]
    }

    pub fn same_community(&self) -> Option<bool> {
        self.0.get(9).map(|&v| v > 0.5)
    }
}

/// Precomputed state for scoring many pairs of one graph.
#[derive(Debug, Clone)]
pub struct PairScorer<'g> {
    graph: &'g DependencyGraph,
    cfg: MetricConfig,
    hoods: Neighborhoods,
    katz: KatzTable,
    simrank: SimRankTable,
    partition: Option<CommunityPartition>,
}

impl<'g> PairScorer<'g> {
    pub fn new(graph: &'g DependencyGraph, cfg: &MetricConfig) -> Result<Self> {
        Self::build(graph, cfg, None)
    }

    fn build(
        graph: &'g DependencyGraph,
        cfg: &MetricConfig,
        partition: Option<CommunityPartition>,
    ) -> Result<Self> {
        cfg.validate()?;
        let partition = match partition {
            Some(p) => Some(p),
            None => cfg
                .include_community_feature
                .then(|| communities(graph, cfg.community_seed)),
        };
        Ok(Self {
            graph,
            cfg: *cfg,
            hoods: Neighborhoods::new(graph, cfg.mode),
            katz: KatzTable::new(graph, cfg.katz_beta, cfg.katz_max_length),
            simrank: SimRankTable::new(graph, cfg.simrank_decay, cfg.simrank_max_iters, cfg.simrank_tol),
            partition,
        })
    }

    /// Replaces the partition used for the community flag (for example one
    /// computed on a different version of the system).
    pub fn with_partition(mut self, partition: CommunityPartition) -> Self {
        self.partition = Some(partition);
        self
    }

    pub fn graph(&self) -> &DependencyGraph {
        self.graph
    }

    pub fn config(&self) -> &MetricConfig {
        &self.cfg
    }

    pub fn partition(&self) -> Option<&CommunityPartition> {
        self.partition.as_ref()
    }

    pub fn simrank_table(&self) -> &SimRankTable {
        &self.simrank
    }

    pub fn score(&self, x: usize, y: usize, metric: MetricId) -> f64 {
        match metric {
            MetricId::CommonNeighbours => self.hoods.overlap(x, y).common_neighbours,
            MetricId::AdamicAdar => self.hoods.overlap(x, y).adamic_adar,
            MetricId::ResourceAllocation => self.hoods.overlap(x, y).resource_allocation,
            MetricId::Sorensen => self.hoods.overlap(x, y).sorensen,
            MetricId::Kulczynski => self.hoods.contingency(x, y).kulczynski,
            MetricId::RelativeMatching => self.hoods.contingency(x, y).relative_matching,
            MetricId::RussellRao => self.hoods.contingency(x, y).russell_rao,
            MetricId::Katz => self.katz.get(x, y),
            MetricId::SimRank => self.simrank.get(x, y),
        }
    }

    /// Feature vector for the pair of node indices `(x, y)`.
    pub fn features(&self, x: usize, y: usize) -> Result<FeatureVector> {
        let o = self.hoods.overlap(x, y);
        let c = self.hoods.contingency(x, y);
        let mut values = vec![
            o.common_neighbours,
            o.adamic_adar,
            o.resource_allocation,
            o.sorensen,
            c.kulczynski,
            c.relative_matching,
            c.russell_rao,
            self.katz.get(x, y),
            self.simrank.get(x, y),
        ];
        if self.cfg.include_community_feature {
            let p = self.partition.as_ref().ok_or_else(|| {
                Error::Config("community feature requested without a partition".into())
            })?;
            let same = p.same_community(self.graph.node(x), self.graph.node(y));
            values.push(if same { 1.0 } else { 0.0 });
        }
        Ok(FeatureVector(values))
    }

    pub fn features_by_id(&self, x: &ModuleId, y: &ModuleId) -> Result<FeatureVector> {
        let xi = self.graph.require(x.as_str())?;
        let yi = self.graph.require(y.as_str())?;
        self.features(xi, yi)
    }
}

/// Feature vector of one pair. When `cfg.include_community_feature` is set,
/// `partition` must be supplied.
pub fn feature_vector(
    g: &DependencyGraph,
    x: &str,
    y: &str,
    cfg: &MetricConfig,
    partition: Option<&CommunityPartition>,
) -> Result<FeatureVector> {
    let xi = g.require(x)?;
    let yi = g.require(y)?;
    if cfg.include_community_feature && partition.is_none() {
        return Err(Error::Config(
            "community feature requested without a partition".into(),
        ));
    }
    PairScorer::build(g, cfg, partition.cloned())?.features(xi, yi)
}
