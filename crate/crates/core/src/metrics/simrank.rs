use super::MetricConfig;
use crate::error::Result;
use crate::graph::DependencyGraph;

/// All-pairs SimRank over in-neighbourhoods.
///
/// Starts from the identity and iterates
/// `s(x,y) = C / (|I(x)|·|I(y)|) · Σ_{a∈I(x)} Σ_{b∈I(y)} s(a,b)` with
/// `s(v,v) = 1`, until the largest entry change drops below the tolerance
/// or the iteration budget runs out.
#[derive(Debug, Clone)]
pub struct SimRankTable {
    n: usize,
    scores: Vec<f64>,
    iterations: usize,
    deltas: Vec<f64>,
}

impl SimRankTable {
    pub fn new(g: &DependencyGraph, decay: f64, max_iters: usize, tol: f64) -> Self {
        let n = g.node_count();
        let mut current = vec![0.0; n * n];
        for v in 0..n {
            current[v * n + v] = 1.0;
        }
        let mut next = vec![0.0; n * n];
        // partial[a * n + y] = Σ_{b ∈ I(y)} s(a, b)
        let mut partial = vec![0.0; n * n];
        let mut deltas = Vec::new();
        for _ in 0..max_iters {
            for a in 0..n {
                let row = &current[a * n..(a + 1) * n];
                for y in 0..n {
                    partial[a * n + y] = g.in_neighbors(y).iter().map(|&b| row[b]).sum();
                }
            }
            let mut max_change: f64 = 0.0;
            for x in 0..n {
                let ix = g.in_neighbors(x);
                for y in 0..n {
                    let value = if x == y {
                        1.0
                    } else {
                        let iy = g.in_neighbors(y);
                        if ix.is_empty() || iy.is_empty() {
                            0.0
                        } else {
                            let sum: f64 = ix.iter().map(|&a| partial[a * n + y]).sum();
                            decay * sum / (ix.len() * iy.len()) as f64
                        }
                    };
                    max_change = max_change.max((value - current[x * n + y]).abs());
                    next[x * n + y] = value;
                }
            }
            std::mem::swap(&mut current, &mut next);
            deltas.push(max_change);
            if max_change < tol {
                break;
            }
        }
        Self {
            n,
            scores: current,
            iterations: deltas.len(),
            deltas,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.scores[x * self.n + y]
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Largest absolute entry change of each iteration.
    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }
}

pub fn simrank(g: &DependencyGraph, x: &str, y: &str, cfg: &MetricConfig) -> Result<f64> {
    cfg.validate()?;
    let (xi, yi) = (g.require(x)?, g.require(y)?);
    let table = SimRankTable::new(g, cfg.simrank_decay, cfg.simrank_max_iters, cfg.simrank_tol);
    Ok(table.get(xi, yi))
}
