use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{MetricConfig, NeighborhoodMode};
use crate::error::Result;
use crate::graph::{DependencyGraph, ModuleId};

/// Γ(v) for every node under one [`NeighborhoodMode`], as sorted index lists.
#[derive(Debug, Clone)]
pub struct Neighborhoods {
    sets: Vec<Vec<usize>>,
}

impl Neighborhoods {
    pub fn new(g: &DependencyGraph, mode: NeighborhoodMode) -> Self {
        let sets = (0..g.node_count())
            .map(|v| match mode {
                NeighborhoodMode::Out => g.out_neighbors(v).to_vec(),
                NeighborhoodMode::In => g.in_neighbors(v).to_vec(),
                NeighborhoodMode::Union => merge_union(g.out_neighbors(v), g.in_neighbors(v)),
            })
            .collect();
        Self { sets }
    }

    pub fn of(&self, v: usize) -> &[usize] {
        &self.sets[v]
    }

    pub fn universe(&self) -> usize {
        self.sets.len()
    }

    pub fn overlap(&self, x: usize, y: usize) -> OverlapScores {
        let (gx, gy) = (self.of(x), self.of(y));
        let mut cn = 0usize;
        let mut aa = 0.0;
        let mut ra = 0.0;
        for z in SortedIntersection::new(gx, gy) {
            cn += 1;
            let deg = self.of(z).len();
            // Under in/out modes Γ(z) can be empty even though z ∈ Γ(x).
            // Terms with an undefined denominator (ln 1, ln 0, 1/0) are skipped.
            if deg >= 2 {
                aa += 1.0 / (deg as f64).ln();
            }
            if deg >= 1 {
                ra += 1.0 / deg as f64;
            }
        }
        let denom = gx.len() + gy.len();
        let sorensen = if denom == 0 {
            0.0
        } else {
            2.0 * cn as f64 / denom as f64
        };
        OverlapScores {
            common_neighbours: cn as f64,
            adamic_adar: aa,
            resource_allocation: ra,
            sorensen,
        }
    }

    /// 2×2 contingency counts of Γ(x) and Γ(y) over the node universe.
    pub fn contingency_counts(&self, x: usize, y: usize) -> [usize; 4] {
        let (gx, gy) = (self.of(x), self.of(y));
        let a = SortedIntersection::new(gx, gy).count();
        let b = gx.len() - a;
        let c = gy.len() - a;
        let d = self.universe() - (a + b + c);
        [a, b, c, d]
    }

    pub fn contingency(&self, x: usize, y: usize) -> ContingencyScores {
        let [a, b, c, d] = self.contingency_counts(x, y).map(|v| v as f64);
        let kulczynski = if a == 0.0 || a + b == 0.0 || a + c == 0.0 {
            0.0
        } else {
            0.5 * (a / (a + b) + a / (a + c))
        };
        let n = a + b + c + d;
        let russell_rao = if n == 0.0 { 0.0 } else { a / n };
        let root = (a * d).sqrt();
        let relative_matching = if n + root == 0.0 {
            0.0
        } else {
            (a + root) / (n + root)
        };
        ContingencyScores {
            kulczynski,
            relative_matching,
            russell_rao,
        }
    }
}

fn merge_union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

struct SortedIntersection<'a> {
    a: &'a [usize],
    b: &'a [usize],
}

impl<'a> SortedIntersection<'a> {
    fn new(a: &'a [usize], b: &'a [usize]) -> Self {
        Self { a, b }
    }
}

impl Iterator for SortedIntersection<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while let (Some(&x), Some(&y)) = (self.a.first(), self.b.first()) {
            match x.cmp(&y) {
                std::cmp::Ordering::Less => self.a = &self.a[1..],
                std::cmp::Ordering::Greater => self.b = &self.b[1..],
                std::cmp::Ordering::Equal => {
                    self.a = &self.a[1..];
                    self.b = &self.b[1..];
                    return Some(x);
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapScores {
    pub common_neighbours: f64,
    pub adamic_adar: f64,
    pub resource_allocation: f64,
    pub sorensen: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContingencyScores {
    pub kulczynski: f64,
    pub relative_matching: f64,
    pub russell_rao: f64,
}

/// Γ(v) under `mode`.
pub fn neighbors(g: &DependencyGraph, v: &str, mode: NeighborhoodMode) -> Result<BTreeSet<ModuleId>> {
    let vi = g.require(v)?;
    let idx: Vec<usize> = match mode {
        NeighborhoodMode::Out => g.out_neighbors(vi).to_vec(),
        NeighborhoodMode::In => g.in_neighbors(vi).to_vec(),
        NeighborhoodMode::Union => merge_union(g.out_neighbors(vi), g.in_neighbors(vi)),
    };
    Ok(idx.into_iter().map(|i| g.node(i).clone()).collect())
}

/// Common neighbours, Adamic-Adar, resource allocation and Sørensen.
pub fn overlap_metrics(g: &DependencyGraph, x: &str, y: &str, cfg: &MetricConfig) -> Result<OverlapScores> {
    let (xi, yi) = (g.require(x)?, g.require(y)?);
    Ok(Neighborhoods::new(g, cfg.mode).overlap(xi, yi))
}

/// Kulczynski, relative matching and Russell–Rao from the contingency table
/// of the two neighbourhoods over all nodes.
pub fn contingency_metrics(
    g: &DependencyGraph,
    x: &str,
    y: &str,
    cfg: &MetricConfig,
) -> Result<ContingencyScores> {
    let (xi, yi) = (g.require(x)?, g.require(y)?);
    Ok(Neighborhoods::new(g, cfg.mode).contingency(xi, yi))
}
