use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{DependencyGraph, ModuleId};

const MAX_ROUNDS: usize = 100;

/// Community label per module. Labels are indices of a representative node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityPartition {
    assignment: BTreeMap<ModuleId, usize>,
}

impl CommunityPartition {
    pub fn label(&self, id: &ModuleId) -> Option<usize> {
        self.assignment.get(id).copied()
    }

    /// Unknown modules are never in the same community as anything.
    pub fn same_community(&self, a: &ModuleId, b: &ModuleId) -> bool {
        match (self.label(a), self.label(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }

    pub fn same_community_str(&self, a: &str, b: &str) -> bool {
        match (ModuleId::new(a), ModuleId::new(b)) {
            (Ok(a), Ok(b)) => self.same_community(&a, &b),
            _ => false,
        }
    }

    pub fn assignment(&self) -> &BTreeMap<ModuleId, usize> {
        &self.assignment
    }

    pub fn community_count(&self) -> usize {
        let mut labels: Vec<usize> = self.assignment.values().copied().collect();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }
}

/// Asynchronous label propagation on the undirected view of `g`.
///
/// Each node starts with its own index as label. Every round visits the
/// nodes in a fresh seeded permutation; a node takes the most frequent label
/// among its neighbours, smallest label on ties. Stops when a round changes
/// nothing, or after 100 rounds.
pub fn communities(g: &DependencyGraph, seed: u64) -> CommunityPartition {
    let n = g.node_count();
    let undirected: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut nb: Vec<usize> = g.out_neighbors(v).iter().chain(g.in_neighbors(v)).copied().collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..MAX_ROUNDS {
        order.shuffle(&mut rng);
        let mut changed = false;
        for &v in &order {
            if undirected[v].is_empty() {
                continue;
            }
            counts.clear();
            for &w in &undirected[v] {
                *counts.entry(labels[w]).or_default() += 1;
            }
            // BTreeMap iterates labels ascending; keep the first maximum.
            let mut best = (0usize, usize::MAX);
            for (&label, &count) in &counts {
                if count > best.0 {
                    best = (count, label);
                }
            }
            if best.1 != labels[v] {
                labels[v] = best.1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    CommunityPartition {
        assignment: g.nodes().iter().cloned().zip(labels).collect(),
    }
}
