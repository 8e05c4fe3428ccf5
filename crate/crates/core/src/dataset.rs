//! Labelled pair datasets for the classifier.
//!
//! Training sets come from one version: existing dependencies are positive,
//! every other ordered pair negative. Test sets pair one version with the
//! next, in one of two [`DatasetMode`]s.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{candidate_index_pairs, delta, universe_indices, DependencyGraph, ModuleId};
use crate::metrics::{FeatureVector, MetricConfig, PairScorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

/// How the test set of a version pair is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DatasetMode {
    /// Every ordered pair of shared modules, with features and labels both
    /// taken from the next version.
    AsPaper,
    /// Non-dependencies of the current version, with features from the
    /// current version and labels from the dependencies that appear next.
    #[default]
    Forward,
}

impl fmt::Display for DatasetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetMode::AsPaper => "as_paper",
            DatasetMode::Forward => "forward",
        })
    }
}

impl FromStr for DatasetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "as_paper" => Ok(DatasetMode::AsPaper),
            "forward" => Ok(DatasetMode::Forward),
            other => Err(Error::Config(format!("unknown dataset mode {other:?}"))),
        }
    }
}

/// Handling of the negative-heavy class balance of training sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ImbalanceStrategy {
    /// Weight each class by `|instances| / (2·|class|)`.
    #[default]
    ClassWeights,
    /// Keep a seeded sample of `negative_ratio·|positives|` negatives.
    Undersample { negative_ratio: f64, seed: u64 },
    None,
}

impl ImbalanceStrategy {
    pub fn validate(&self) -> Result<()> {
        if let ImbalanceStrategy::Undersample { negative_ratio, .. } = self {
            if !(*negative_ratio > 0.0 && negative_ratio.is_finite()) {
                return Err(Error::Config("negative_ratio must be positive".into()));
            }
        }
        Ok(())
    }
}

impl FromStr for ImbalanceStrategy {
    type Err = Error;

    /// `class-weights`, `none`, or `undersample:<ratio>[:<seed>]`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let strategy = match parts.as_slice() {
            ["class-weights" | "class_weights"] => ImbalanceStrategy::ClassWeights,
            ["none"] => ImbalanceStrategy::None,
            ["undersample", ratio] | ["undersample", ratio, _] => ImbalanceStrategy::Undersample {
                negative_ratio: ratio
                    .parse()
                    .map_err(|_| Error::Config(format!("bad undersampling ratio {ratio:?}")))?,
                seed: match parts.get(2) {
                    Some(seed) => seed
                        .parse()
                        .map_err(|_| Error::Config(format!("bad undersampling seed {seed:?}")))?,
                    None => 0,
                },
            },
            _ => return Err(Error::Config(format!("unknown imbalance strategy {s:?}"))),
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

/// Which graph positive training pairs are scored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PositiveFeatures {
    /// The full graph, the pair's own dependency included.
    #[default]
    WithEdge,
    /// The graph with the pair's own dependency temporarily removed.
    EdgeRemoved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub source: ModuleId,
    pub target: ModuleId,
    pub features: FeatureVector,
    pub label: Label,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetProvenance {
    /// Version labels the dataset was built from, oldest first.
    pub versions: Vec<String>,
    pub mode: Option<DatasetMode>,
    pub strategy: Option<ImbalanceStrategy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub instances: Vec<Instance>,
    pub feature_names: Vec<String>,
    pub provenance: DatasetProvenance,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.feature_names.len()
    }

    pub fn positives(&self) -> usize {
        self.instances.iter().filter(|i| i.label.is_positive()).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.instances.iter().map(|i| i.label).collect()
    }

    pub fn with_versions(mut self, versions: &[&str]) -> Self {
        self.provenance.versions = versions.iter().map(|v| v.to_string()).collect();
        self
    }

    /// Writes `<stem>.csv` with features and labels plus a `<stem>.json`
    /// sidecar carrying provenance and instance weights.
    pub fn export(&self, csv_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(csv_path)?;
        let mut header = vec!["source".to_string(), "target".to_string()];
        header.extend(self.feature_names.iter().cloned());
        header.push("label".into());
        w.write_record(&header)?;
        for inst in &self.instances {
            let mut rec = vec![inst.source.to_string(), inst.target.to_string()];
            rec.extend(inst.features.values().iter().map(|v| v.to_string()));
            rec.push(if inst.label.is_positive() { "1" } else { "0" }.into());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(csv_path, e))?;
        let sidecar = Sidecar {
            feature_names: self.feature_names.clone(),
            provenance: self.provenance.clone(),
            weights: self.instances.iter().map(|i| i.weight).collect(),
        };
        let side_path = csv_path.with_extension("json");
        let body = serde_json::to_string_pretty(&sidecar)?;
        std::fs::write(&side_path, body).map_err(|e| Error::io(&side_path, e))
    }

    pub fn import(csv_path: &Path) -> Result<Self> {
        let side_path = csv_path.with_extension("json");
        let side_text = std::fs::read_to_string(&side_path).map_err(|e| Error::io(&side_path, e))?;
        let sidecar: Sidecar = serde_json::from_str(&side_text)?;
        let mut r = csv::Reader::from_path(csv_path)?;
        let header = r.headers()?.clone();
        let arity = sidecar.feature_names.len();
        if header.len() != arity + 3 {
            return Err(Error::Data(format!(
                "{} has {} columns, sidecar declares {} features",
                csv_path.display(),
                header.len(),
                arity
            )));
        }
        let mut instances = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let weight = *sidecar.weights.get(row).ok_or_else(|| {
                Error::Data(format!("sidecar has no weight for row {}", row + 1))
            })?;
            let values = (2..2 + arity)
                .map(|i| {
                    rec[i].parse::<f64>().map_err(|_| {
                        Error::Data(format!("row {}: bad number {:?}", row + 1, &rec[i]))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let label = match &rec[arity + 2] {
                "1" => Label::Positive,
                "0" => Label::Negative,
                other => return Err(Error::Data(format!("row {}: bad label {other:?}", row + 1))),
            };
            instances.push(Instance {
                source: ModuleId::new(&rec[0])?,
                target: ModuleId::new(&rec[1])?,
                features: FeatureVector::new(values)?,
                label,
                weight,
            });
        }
        if instances.len() != sidecar.weights.len() {
            return Err(Error::Data("sidecar weight count does not match rows".into()));
        }
        Ok(Dataset {
            instances,
            feature_names: sidecar.feature_names,
            provenance: sidecar.provenance,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    feature_names: Vec<String>,
    provenance: DatasetProvenance,
    weights: Vec<f64>,
}

/// Training set from one version, positive pairs scored with their own
/// dependency present.
pub fn build_training_set(g: &DependencyGraph, cfg: &MetricConfig, strategy: ImbalanceStrategy) -> Result<Dataset> {
    build_training_set_with(g, cfg, strategy, PositiveFeatures::WithEdge)
}

pub fn build_training_set_with(
    g: &DependencyGraph,
    cfg: &MetricConfig,
    strategy: ImbalanceStrategy,
    positive_features: PositiveFeatures,
) -> Result<Dataset> {
    strategy.validate()?;
    let n = g.node_count();
    if n < 3 {
        return Err(Error::Data(format!("training graph needs at least 3 modules, has {n}")));
    }
    let possible = n * (n - 1);
    if g.edge_count() == 0 || g.edge_count() == possible {
        return Err(Error::SingleClass(
            "training graph must have at least one dependency and one non-dependency".into(),
        ));
    }

    let scorer = PairScorer::new(g, cfg)?;
    let all: Vec<usize> = (0..n).collect();
    let mut negatives = candidate_index_pairs(g, &all);
    if let ImbalanceStrategy::Undersample { negative_ratio, seed } = strategy {
        let keep = ((negative_ratio * g.edge_count() as f64).round() as usize).clamp(1, negatives.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = rand::seq::index::sample(&mut rng, negatives.len(), keep).into_vec();
        picked.sort_unstable();
        negatives = picked.into_iter().map(|i| negatives[i]).collect();
    }

    let mut pairs: Vec<(usize, usize, bool)> = negatives.into_iter().map(|(s, t)| (s, t, false)).collect();
    for s in 0..n {
        for &t in g.out_neighbors(s) {
            pairs.push((s, t, true));
        }
    }
    pairs.sort_unstable();

    let n_pos = g.edge_count();
    let n_neg = pairs.len() - n_pos;
    let (w_pos, w_neg) = match strategy {
        ImbalanceStrategy::ClassWeights => {
            let total = pairs.len() as f64;
            (total / (2.0 * n_pos as f64), total / (2.0 * n_neg as f64))
        }
        _ => (1.0, 1.0),
    };

    let mut instances = Vec::with_capacity(pairs.len());
    for (s, t, positive) in pairs {
        let features = if positive && positive_features == PositiveFeatures::EdgeRemoved {
            let reduced = g.without_edge(g.node(s), g.node(t));
            // Communities stay those of the full graph.
            let local = PairScorer::new(&reduced, &MetricConfig { include_community_feature: false, ..*cfg })?;
            let mut fv = local.features(s, t)?.values().to_vec();
            if let Some(flag) = scorer.features(s, t)?.values().get(9) {
                fv.push(*flag);
            }
            FeatureVector::new(fv)?
        } else {
            scorer.features(s, t)?
        };
        instances.push(Instance {
            source: g.node(s).clone(),
            target: g.node(t).clone(),
            features,
            label: Label::from_bool(positive),
            weight: if positive { w_pos } else { w_neg },
        });
    }
    Ok(Dataset {
        instances,
        feature_names: cfg.feature_names(),
        provenance: DatasetProvenance {
            versions: Vec::new(),
            mode: None,
            strategy: Some(strategy),
        },
    })
}

/// Test set for the version pair `(g_n, g_next)`; all weights are 1.
pub fn build_test_set(
    g_n: &DependencyGraph,
    g_next: &DependencyGraph,
    cfg: &MetricConfig,
    mode: DatasetMode,
) -> Result<Dataset> {
    let d = delta(g_n, g_next);
    if d.shared_nodes.len() < 3 {
        return Err(Error::Data(format!(
            "versions share {} modules, at least 3 are needed",
            d.shared_nodes.len()
        )));
    }
    let instances = match mode {
        DatasetMode::AsPaper => {
            let scorer = PairScorer::new(g_next, cfg)?;
            let idx = universe_indices(g_next, &d.shared_nodes)?;
            let mut out = Vec::with_capacity(idx.len() * idx.len());
            for &s in &idx {
                for &t in &idx {
                    if s == t {
                        continue;
                    }
                    out.push(Instance {
                        source: g_next.node(s).clone(),
                        target: g_next.node(t).clone(),
                        features: scorer.features(s, t)?,
                        label: Label::from_bool(g_next.has_edge_idx(s, t)),
                        weight: 1.0,
                    });
                }
            }
            out
        }
        DatasetMode::Forward => {
            let scorer = PairScorer::new(g_n, cfg)?;
            let idx = universe_indices(g_n, &d.shared_nodes)?;
            candidate_index_pairs(g_n, &idx)
                .into_iter()
                .map(|(s, t)| {
                    let (src, tgt) = (g_n.node(s).clone(), g_n.node(t).clone());
                    let positive = d.added_edges.contains(&(src.clone(), tgt.clone()));
                    Ok(Instance {
                        source: src,
                        target: tgt,
                        features: scorer.features(s, t)?,
                        label: Label::from_bool(positive),
                        weight: 1.0,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(Dataset {
        instances,
        feature_names: cfg.feature_names(),
        provenance: DatasetProvenance {
            versions: Vec::new(),
            mode: Some(mode),
            strategy: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricId;

    fn sample() -> DependencyGraph {
        DependencyGraph::from_pairs(&[("a", "c"), ("b", "c"), ("c", "d")])
    }

    #[test]
    fn training_counts_and_class_weights() {
        let ds = build_training_set(&sample(), &MetricConfig::default(), ImbalanceStrategy::ClassWeights).unwrap();
        assert_eq!((ds.positives(), ds.negatives()), (3, 9));
        for inst in &ds.instances {
            let want = if inst.label.is_positive() { 2.0 } else { 12.0 / 18.0 };
            assert!((inst.weight - want).abs() < 1e-12);
        }
        let mass = |l: Label| -> f64 { ds.instances.iter().filter(|i| i.label == l).map(|i| i.weight).sum() };
        assert!((mass(Label::Positive) - mass(Label::Negative)).abs() < 1e-12);
    }

    #[test]
    fn training_order_is_lexicographic() {
        let ds = build_training_set(&sample(), &MetricConfig::default(), ImbalanceStrategy::None).unwrap();
        let pairs: Vec<_> = ds.instances.iter().map(|i| (i.source.clone(), i.target.clone())).collect();
        let mut sorted = pairs.clone();
        sorted.sort();
        assert_eq!(pairs, sorted);
    }

    #[test]
    fn undersampling_is_seeded() {
        let g = DependencyGraph::from_pairs(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "f")]);
        let s = ImbalanceStrategy::Undersample { negative_ratio: 1.0, seed: 9 };
        let a = build_training_set(&g, &MetricConfig::default(), s).unwrap();
        let b = build_training_set(&g, &MetricConfig::default(), s).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.positives(), a.negatives()), (5, 5));
        assert!(a.instances.iter().all(|i| i.weight == 1.0));
    }

    #[test]
    fn single_class_graphs_are_rejected() {
        let complete = DependencyGraph::from_pairs(&[
            ("a", "b"), ("a", "c"), ("b", "a"), ("b", "c"), ("c", "a"), ("c", "b"),
        ]);
        assert!(matches!(
            build_training_set(&complete, &MetricConfig::default(), ImbalanceStrategy::None),
            Err(Error::SingleClass(_))
        ));
        let mut b = DependencyGraph::builder();
        for n in ["a", "b", "c"] {
            b.add_node(ModuleId::new(n).unwrap());
        }
        assert!(build_training_set(&b.build(), &MetricConfig::default(), ImbalanceStrategy::None).is_err());
    }

    #[test]
    fn edge_removed_positive_features_drop_direct_walk() {
        let g = sample();
        let cfg = MetricConfig::default();
        let with = build_training_set(&g, &cfg, ImbalanceStrategy::None).unwrap();
        let without = build_training_set_with(&g, &cfg, ImbalanceStrategy::None, PositiveFeatures::EdgeRemoved).unwrap();
        let find = |ds: &Dataset| {
            ds.instances
                .iter()
                .find(|i| i.source.as_str() == "a" && i.target.as_str() == "c")
                .unwrap()
                .features
                .get(MetricId::Katz)
        };
        assert!((find(&with) - 0.005).abs() < 1e-12);
        assert_eq!(find(&without), 0.0);
    }

    #[test]
    fn forward_unchanged_graph_is_all_negative() {
        let g = sample();
        let ds = build_test_set(&g, &g, &MetricConfig::default(), DatasetMode::Forward).unwrap();
        assert_eq!(ds.positives(), 0);
        assert_eq!(ds.len(), 4 * 3 - 3);
    }

    #[test]
    fn forward_universe_and_labels() {
        let g = sample();
        let mut next = g.to_builder();
        next.add_edge_str("a", "b").unwrap();
        next.add_edge_str("e", "a").unwrap(); // new module, ignored
        let next = next.build();
        let ds = build_test_set(&g, &next, &MetricConfig::default(), DatasetMode::Forward).unwrap();
        assert_eq!(ds.len(), 9);
        assert_eq!(ds.positives(), 1);
        assert!(ds.instances.iter().all(|i| i.weight == 1.0));
    }

    #[test]
    fn as_paper_labels_every_next_edge_among_shared() {
        let g = sample();
        let mut next = g.to_builder();
        next.add_edge_str("a", "b").unwrap();
        let next = next.build();
        let ds = build_test_set(&g, &next, &MetricConfig::default(), DatasetMode::AsPaper).unwrap();
        assert_eq!(ds.len(), 12);
        assert_eq!(ds.positives(), next.edge_count());
    }

    #[test]
    fn too_few_shared_modules() {
        let g1 = DependencyGraph::from_pairs(&[("a", "b")]);
        let g2 = DependencyGraph::from_pairs(&[("c", "d")]);
        assert!(build_test_set(&g1, &g2, &MetricConfig::default(), DatasetMode::Forward).is_err());
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("class-weights".parse::<ImbalanceStrategy>().unwrap(), ImbalanceStrategy::ClassWeights);
        assert_eq!(
            "undersample:2.5:4".parse::<ImbalanceStrategy>().unwrap(),
            ImbalanceStrategy::Undersample { negative_ratio: 2.5, seed: 4 }
        );
        assert!("undersample:0".parse::<ImbalanceStrategy>().is_err());
        assert!("smote".parse::<ImbalanceStrategy>().is_err());
    }

    #[test]
    fn export_import_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.csv");
        let cfg = MetricConfig { include_community_feature: true, ..Default::default() };
        let ds = build_training_set(&sample(), &cfg, ImbalanceStrategy::ClassWeights)
            .unwrap()
            .with_versions(&["v1"]);
        ds.export(&path).unwrap();
        let header = std::fs::read_to_string(&path).unwrap();
        assert!(header.starts_with(
            "source,target,cn,aa,ra,sorensen,kulczynski,relmatch,russellrao,katz,simrank,community,label\n"
        ));
        assert_eq!(Dataset::import(&path).unwrap(), ds);
    }
}
