//! Seeded generator of evolving dependency graphs.
//!
//! Version 1 is a uniform random digraph. Every later version copies its
//! predecessor and adds `edges_per_version` edges one at a time: with
//! probability `p_triadic` the non-edge with the most common neighbours
//! (union neighbourhoods, random tie-break), otherwise a uniform non-edge.
//! The node set never changes.

use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::write_text;
use crate::graph::{to_edge_list, DependencyGraph, GraphFormat, ManifestEntry, ModuleId, VersionSeries, VersionSnapshot};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub node_count: usize,
    pub version_count: usize,
    pub initial_edge_fraction: f64,
    pub edges_per_version: usize,
    pub p_triadic: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            node_count: 20,
            version_count: 10,
            initial_edge_fraction: 0.1,
            edges_per_version: 3,
            p_triadic: 0.7,
        }
    }
}

impl SynthConfig {
    fn slots(&self) -> usize {
        self.node_count * (self.node_count.saturating_sub(1))
    }

    pub fn initial_edges(&self) -> usize {
        (self.initial_edge_fraction * self.slots() as f64).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 5 {
            return Err(Error::Config("node_count must be at least 5".into()));
        }
        if self.version_count < 3 {
            return Err(Error::Config("version_count must be at least 3".into()));
        }
        if self.edges_per_version == 0 {
            return Err(Error::Config("edges_per_version must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.initial_edge_fraction) {
            return Err(Error::Config("initial_edge_fraction must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.p_triadic) {
            return Err(Error::Config("p_triadic must lie in [0, 1]".into()));
        }
        let total = self.initial_edges() + (self.version_count - 1) * self.edges_per_version;
        if total >= self.slots() {
            return Err(Error::Config(format!(
                "{total} edges do not fit in a {}-node digraph",
                self.node_count
            )));
        }
        Ok(())
    }
}

/// Module names `m00, m01, ...`, padded so that name order equals index order.
fn node_names(n: usize) -> Vec<ModuleId> {
    let width = (n - 1).to_string().len();
    (0..n)
        .map(|i| ModuleId::new(format!("m{i:0width$}")).expect("generated names are valid"))
        .collect()
}

struct Adjacency {
    n: usize,
    edge: Vec<bool>,
}

impl Adjacency {
    fn has(&self, s: usize, t: usize) -> bool {
        self.edge[s * self.n + t]
    }

    fn linked(&self, a: usize, b: usize) -> bool {
        self.has(a, b) || self.has(b, a)
    }

    fn non_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.n {
            for t in 0..self.n {
                if s != t && !self.has(s, t) {
                    out.push((s, t));
                }
            }
        }
        out
    }

    fn common_neighbours(&self, x: usize, y: usize) -> usize {
        (0..self.n)
            .filter(|&z| z != x && z != y && self.linked(x, z) && self.linked(y, z))
            .count()
    }

    fn to_graph(&self, names: &[ModuleId]) -> DependencyGraph {
        let mut b = DependencyGraph::builder();
        for id in names {
            b.add_node(id.clone());
        }
        for s in 0..self.n {
            for t in 0..self.n {
                if self.has(s, t) {
                    b.add_edge(names[s].clone(), names[t].clone());
                }
            }
        }
        b.build()
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<VersionSeries> {
    cfg.validate()?;
    let n = cfg.node_count;
    let names = node_names(n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adj = Adjacency {
        n,
        edge: vec![false; n * n],
    };

    let slots: Vec<(usize, usize)> = adj.non_edges();
    for k in sample(&mut rng, slots.len(), cfg.initial_edges()).into_vec() {
        let (s, t) = slots[k];
        adj.edge[s * n + t] = true;
    }

    let mut snapshots = vec![VersionSnapshot::new("v1", adj.to_graph(&names), None)?];
    for v in 2..=cfg.version_count {
        for _ in 0..cfg.edges_per_version {
            let candidates = adj.non_edges();
            let (s, t) = if rng.gen_bool(cfg.p_triadic) {
                let scored: Vec<usize> = candidates.iter().map(|&(x, y)| adj.common_neighbours(x, y)).collect();
                let best = *scored.iter().max().expect("capacity was validated");
                let top: Vec<(usize, usize)> = candidates
                    .iter()
                    .zip(&scored)
                    .filter(|(_, &c)| c == best)
                    .map(|(p, _)| *p)
                    .collect();
                top[rng.gen_range(0..top.len())]
            } else {
                candidates[rng.gen_range(0..candidates.len())]
            };
            adj.edge[s * n + t] = true;
        }
        snapshots.push(VersionSnapshot::new(format!("v{v}"), adj.to_graph(&names), None)?);
    }
    VersionSeries::new(snapshots)
}

/// Writes one edge list per version plus `manifest.json` into `dir` and
/// returns the manifest path.
pub fn write_series(series: &VersionSeries, dir: &Path) -> Result<PathBuf> {
    let mut entries = Vec::with_capacity(series.len());
    for snap in series.snapshots() {
        let file = format!("{}.tsv", snap.label());
        write_text(&dir.join(&file), &to_edge_list(snap.graph()))?;
        entries.push(ManifestEntry {
            label: snap.label().to_string(),
            path: file,
            format: GraphFormat::Edgelist,
            class_count: snap.class_count(),
        });
    }
    let manifest = dir.join(MANIFEST_FILE);
    write_text(&manifest, &(serde_json::to_string_pretty(&entries)? + "\n"))?;
    Ok(manifest)
}
