//! Helpers shared by the integration test targets: seeded graph generators,
//! brute-force oracles and the published release statistics of two systems.
#![allow(dead_code)]

use std::collections::BTreeSet;

use deplink::dataset::Label;
use deplink::graph::ModuleId;
use deplink::{DependencyGraph, NeighborhoodMode, VersionSeries, VersionSnapshot};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn node_name(i: usize) -> String {
    format!("n{i:02}")
}

/// Erdős–Rényi digraph on `n` nodes named `n00..`, each ordered pair present
/// with probability `p`.
pub fn random_digraph(rng: &mut impl Rng, n: usize, p: f64) -> DependencyGraph {
    let mut b = DependencyGraph::builder();
    let ids: Vec<ModuleId> = (0..n).map(|i| ModuleId::new(node_name(i)).unwrap()).collect();
    for id in &ids {
        b.add_node(id.clone());
    }
    for s in 0..n {
        for t in 0..n {
            if s != t && rng.gen_bool(p) {
                b.add_edge(ids[s].clone(), ids[t].clone());
            }
        }
    }
    b.build()
}

/// Dense 0/1 adjacency, indexed like `g.nodes()`.
pub fn adjacency(g: &DependencyGraph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for (s, t) in g.edges() {
        a[g.index_of_id(s).unwrap()][g.index_of_id(t).unwrap()] = 1.0;
    }
    a
}

pub fn neighborhood(g: &DependencyGraph, v: usize, mode: NeighborhoodMode) -> BTreeSet<usize> {
    let a = adjacency(g);
    (0..g.node_count())
        .filter(|&u| match mode {
            NeighborhoodMode::Out => a[v][u] > 0.0,
            NeighborhoodMode::In => a[u][v] > 0.0,
            NeighborhoodMode::Union => a[v][u] > 0.0 || a[u][v] > 0.0,
        })
        .collect()
}

/// The nine metric values of `(x, y)` in feature order, from set arithmetic,
/// dense matrix powers and a dense SimRank fixed point.
pub struct MetricOracle {
    hoods: Vec<BTreeSet<usize>>,
    katz: Vec<Vec<f64>>,
    simrank: Vec<Vec<f64>>,
    n: usize,
}

impl MetricOracle {
    pub fn new(g: &DependencyGraph, mode: NeighborhoodMode, beta: f64, max_len: usize, decay: f64) -> Self {
        let n = g.node_count();
        let a = adjacency(g);
        Self {
            hoods: (0..n).map(|v| neighborhood(g, v, mode)).collect(),
            katz: katz_by_powers(&a, beta, max_len),
            simrank: simrank_fixed_point(&a, decay),
            n,
        }
    }

    pub fn scores(&self, x: usize, y: usize) -> [f64; 9] {
        let (gx, gy) = (&self.hoods[x], &self.hoods[y]);
        let common: Vec<usize> = gx.intersection(gy).copied().collect();
        let cn = common.len() as f64;
        let aa: f64 = common
            .iter()
            .map(|&z| self.hoods[z].len())
            .filter(|&d| d >= 2)
            .map(|d| 1.0 / (d as f64).ln())
            .sum();
        let ra: f64 = common
            .iter()
            .map(|&z| self.hoods[z].len())
            .filter(|&d| d >= 1)
            .map(|d| 1.0 / d as f64)
            .sum();

        let a = cn;
        let b = gx.difference(gy).count() as f64;
        let c = gy.difference(gx).count() as f64;
        let d = self.n as f64 - a - b - c;
        let div = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
        let sorensen = div(2.0 * a, gx.len() as f64 + gy.len() as f64);
        let kulczynski = 0.5 * (div(a, a + b) + div(a, a + c));
        let root = (a * d).sqrt();
        let relmatch = div(a + root, a + b + c + d + root);
        let russellrao = div(a, a + b + c + d);
        [
            cn,
            aa,
            ra,
            sorensen,
            kulczynski,
            relmatch,
            russellrao,
            self.katz[x][y],
            self.simrank[x][y],
        ]
    }
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = (0..n).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// `Σ_{l=1..L} β^l A^l`, where `(A^l)[x][y]` counts walks of length `l`.
pub fn katz_by_powers(a: &[Vec<f64>], beta: f64, max_len: usize) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut total = vec![vec![0.0; n]; n];
    let mut power = a.to_vec();
    let mut coeff = beta;
    for _ in 0..max_len {
        for i in 0..n {
            for j in 0..n {
                total[i][j] += coeff * power[i][j];
            }
        }
        power = matmul(&power, a);
        coeff *= beta;
    }
    total
}

/// SimRank on in-neighbours, iterated until the update no longer changes any
/// entry by more than 1e-15.
pub fn simrank_fixed_point(a: &[Vec<f64>], decay: f64) -> Vec<Vec<f64>> {
    let n = a.len();
    let ins: Vec<Vec<usize>> = (0..n).map(|v| (0..n).filter(|&u| a[u][v] > 0.0).collect()).collect();
    let mut s: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
    for _ in 0..10_000 {
        let mut next = s.clone();
        let mut change = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let v = if ins[x].is_empty() || ins[y].is_empty() {
                    0.0
                } else {
                    let mut sum = 0.0;
                    for &i in &ins[x] {
                        for &j in &ins[y] {
                            sum += s[i][j];
                        }
                    }
                    decay * sum / (ins[x].len() * ins[y].len()) as f64
                };
                change = change.max((v - s[x][y]).abs());
                next[x][y] = v;
            }
        }
        s = next;
        if change < 1e-15 {
            break;
        }
    }
    s
}

/// Average precision by sweeping every distinct score as a threshold and
/// recounting the predictions `score ≥ t` from scratch.
pub fn sweep_average_precision(scores: &[f64], labels: &[Label]) -> f64 {
    let total_pos = labels.iter().filter(|l| l.is_positive()).count();
    if total_pos == 0 {
        return 0.0;
    }
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for t in thresholds {
        let (mut tp, mut fp) = (0usize, 0usize);
        for (s, l) in scores.iter().zip(labels) {
            if *s >= t {
                if l.is_positive() {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        let recall = tp as f64 / total_pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    ap
}

/// One printed release row: classes, packages, dependencies, the optional
/// "(+added, −removed)" annotation and the printed sparsity.
#[derive(Debug, Clone, Copy)]
pub struct ReleaseRow {
    pub version: &'static str,
    pub classes: u64,
    pub packages: usize,
    pub deps: usize,
    pub added: Option<usize>,
    pub removed: Option<usize>,
    pub sparsity: f64,
    pub bold: bool,
}

const fn row(
    version: &'static str,
    classes: u64,
    packages: usize,
    deps: usize,
    added: Option<usize>,
    removed: Option<usize>,
    sparsity: f64,
    bold: bool,
) -> ReleaseRow {
    ReleaseRow {
        version,
        classes,
        packages,
        deps,
        added,
        removed,
        sparsity,
        bold,
    }
}

pub const HW: [ReleaseRow; 10] = [
    row("v1", 88, 19, 67, None, None, 0.8041, false),
    row("v2", 92, 20, 70, Some(8), Some(5), 0.8157, true),
    row("v3", 104, 21, 75, Some(5), None, 0.8214, true),
    row("v4", 106, 22, 85, Some(10), None, 0.8160, true),
    row("v5", 108, 22, 86, Some(7), Some(2), 0.8138, true),
    row("v6", 112, 23, 91, None, None, 0.8201, false),
    row("v7", 116, 23, 91, None, None, 0.8201, false),
    row("v8", 120, 24, 96, Some(5), None, 0.8261, true),
    row("v9", 132, 24, 97, Some(1), None, 0.8242, true),
    row("v10", 135, 25, 101, Some(4), None, 0.8317, true),
];

pub const SDB: [ReleaseRow; 10] = [
    row("v1", 98, 14, 30, None, None, 0.8352, false),
    row("v2", 167, 16, 47, Some(17), None, 0.8042, true),
    row("v3", 192, 17, 50, Some(4), Some(1), 0.8162, true),
    row("v4", 193, 17, 50, None, None, 0.8162, false),
    row("v5", 193, 17, 50, None, None, 0.8162, false),
    row("v6", 193, 17, 50, None, None, 0.8162, false),
    row("v7", 195, 17, 50, None, None, 0.8162, false),
    row("v8", 195, 17, 51, Some(1), None, 0.8125, true),
    row("v9", 195, 17, 51, None, None, 0.8125, false),
    row("v10", 195, 17, 51, None, None, 0.8125, false),
];

/// A version series with exactly the printed package and dependency counts.
///
/// Annotated additions are placed among packages of the previous release and
/// annotated removals are taken from its edges. Any remaining change in the
/// dependency count attaches to the release's new packages, and extra
/// removals are made when the annotation overshoots the printed total.
pub fn realize(rows: &[ReleaseRow], seed: u64) -> VersionSeries {
    let mut rng = rng(seed);
    let id = |i: usize| ModuleId::new(format!("pkg.p{i:02}")).unwrap();
    let mut b = DependencyGraph::builder();
    for i in 0..rows[0].packages {
        b.add_node(id(i));
    }
    add_random_edges(&mut b, &mut rng, rows[0].deps, &(0..rows[0].packages).collect::<Vec<_>>(), None, &id);
    let mut snapshots = vec![VersionSnapshot::new(rows[0].version, b.build(), Some(rows[0].classes)).unwrap()];

    for w in rows.windows(2) {
        let (prev, cur) = (w[0], w[1]);
        let old: Vec<usize> = (0..prev.packages).collect();
        let added = cur.added.unwrap_or(0);
        let removed = cur.removed.unwrap_or(0).max((prev.deps + added).saturating_sub(cur.deps));
        let before = b.build();
        let mut existing: Vec<(ModuleId, ModuleId)> =
            before.edges().map(|(s, t)| (s.clone(), t.clone())).collect();
        existing.shuffle(&mut rng);
        let dropped: BTreeSet<(ModuleId, ModuleId)> = existing.into_iter().take(removed).collect();
        for (s, t) in &dropped {
            b.remove_edge(s, t);
        }
        add_random_edges(&mut b, &mut rng, added, &old, Some(&dropped), &id);
        for i in prev.packages..cur.packages {
            b.add_node(id(i));
        }
        let rest = cur.deps - b.edge_count();
        let new: Vec<usize> = (prev.packages..cur.packages).collect();
        attach_to_new(&mut b, &mut rng, rest, cur.packages, &new, &id);
        assert_eq!(b.edge_count(), cur.deps, "{}", cur.version);
        snapshots.push(VersionSnapshot::new(cur.version, b.build(), Some(cur.classes)).unwrap());
    }
    VersionSeries::new(snapshots).unwrap()
}

fn add_random_edges(
    b: &mut deplink::graph::GraphBuilder,
    rng: &mut ChaCha8Rng,
    count: usize,
    nodes: &[usize],
    forbidden: Option<&BTreeSet<(ModuleId, ModuleId)>>,
    id: &dyn Fn(usize) -> ModuleId,
) {
    let mut slots: Vec<(ModuleId, ModuleId)> = nodes
        .iter()
        .flat_map(|&s| nodes.iter().filter(move |&&t| t != s).map(move |&t| (id(s), id(t))))
        .filter(|(s, t)| !b.contains_edge(s, t))
        .filter(|e| forbidden.is_none_or(|f| !f.contains(e)))
        .collect();
    assert!(slots.len() >= count, "not enough free slots");
    slots.shuffle(rng);
    for (s, t) in slots.into_iter().take(count) {
        b.add_edge(s, t);
    }
}

fn attach_to_new(
    b: &mut deplink::graph::GraphBuilder,
    rng: &mut ChaCha8Rng,
    count: usize,
    total: usize,
    new: &[usize],
    id: &dyn Fn(usize) -> ModuleId,
) {
    let mut slots: Vec<(ModuleId, ModuleId)> = Vec::new();
    for &v in new {
        for u in 0..total {
            if u != v {
                slots.push((id(v), id(u)));
                if !new.contains(&u) {
                    slots.push((id(u), id(v)));
                }
            }
        }
    }
    assert!(count == 0 || slots.len() >= count, "not enough slots at new packages");
    slots.shuffle(rng);
    for (s, t) in slots.into_iter().take(count) {
        b.add_edge(s, t);
    }
}

/// 0-based `(n, n+1)` pairs whose later row is printed in bold.
pub fn bold_pairs(rows: &[ReleaseRow]) -> Vec<(usize, usize)> {
    (1..rows.len()).filter(|&i| rows[i].bold).map(|i| (i - 1, i)).collect()
}
