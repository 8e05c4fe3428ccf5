use super::MetricConfig;
use crate::error::Result;
use crate::graph::DependencyGraph;

/// Truncated Katz index `Σ_{l=1..L} β^l · walks_l(x, y)` for every ordered
/// pair, counting directed walks along dependency edges.
#[derive(Debug, Clone)]
pub struct KatzTable {
    n: usize,
    scores: Vec<f64>,
}

impl KatzTable {
    pub fn new(g: &DependencyGraph, beta: f64, max_length: usize) -> Self {
        let n = g.node_count();
        let mut scores = vec![0.0; n * n];
        let mut walks = vec![0.0; n];
        let mut next = vec![0.0; n];
        for source in 0..n {
            walks.iter_mut().for_each(|w| *w = 0.0);
            walks[source] = 1.0;
            let row = &mut scores[source * n..(source + 1) * n];
            let mut weight = 1.0;
            for _ in 0..max_length {
                next.iter_mut().for_each(|w| *w = 0.0);
                for (v, &count) in walks.iter().enumerate() {
                    if count != 0.0 {
                        for &t in g.out_neighbors(v) {
                            next[t] += count;
                        }
                    }
                }
                weight *= beta;
                for (r, &count) in row.iter_mut().zip(&next) {
                    *r += weight * count;
                }
                std::mem::swap(&mut walks, &mut next);
            }
        }
        Self { n, scores }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.scores[x * self.n + y]
    }
}

pub fn katz(g: &DependencyGraph, x: &str, y: &str, cfg: &MetricConfig) -> Result<f64> {
    cfg.validate()?;
    let (xi, yi) = (g.require(x)?, g.require(y)?);
    Ok(KatzTable::new(g, cfg.katz_beta, cfg.katz_max_length).get(xi, yi))
}
