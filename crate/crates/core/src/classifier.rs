//! Soft-margin RBF support vector machine trained with sequential minimal
//! optimization.
//!
//! Each training instance `i` gets its own box constraint
//! `0 ≤ αᵢ ≤ Cᵢ = cost·weightᵢ`, which is how class weights enter the
//! optimisation. Features are z-scored inside the model; constant features
//! map to 0. The decision function is
//! `f(x) = Σᵢ αᵢyᵢ·exp(−γ‖svᵢ − z(x)‖²) + b`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};

/// Largest training set for which the full kernel matrix is cached.
const DENSE_KERNEL_LIMIT: usize = 2500;
/// Minimum relative change for a multiplier update to count as progress.
const STEP_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: f64,
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self> {
        let spec = Self {
            kind: KernelKind::Rbf,
            gamma,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `γ = 1 / arity`.
    pub fn for_arity(arity: usize) -> Self {
        Self {
            kind: KernelKind::Rbf,
            gamma: 1.0 / arity.max(1) as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config("kernel gamma must be positive".into()));
        }
        Ok(())
    }

    fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        (-self.gamma * d2).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub cost: f64,
    pub tolerance: f64,
    pub max_passes: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            cost: 1.0,
            tolerance: 1e-3,
            max_passes: 10,
            max_iters: 10_000,
            seed: 0,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cost > 0.0 && self.cost.is_finite()) {
            return Err(Error::Config("cost must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.max_passes == 0 || self.max_iters == 0 {
            return Err(Error::Config("max_passes and max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// Per-feature z-score statistics. A zero `std` marks a constant feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let arity = rows.first().map_or(0, |r| r.len());
        let n = rows.len() as f64;
        let mut mean = vec![0.0; arity];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r.iter()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; arity];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / n).sqrt();
                // Relative cut-off: rounding noise on a constant column is not spread.
                if sd <= 1e-12 * m.abs().max(1.0) {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s == 0.0 { 0.0 } else { (v - m) / s })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub instances: usize,
    pub updates: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kernel: KernelSpec,
    pub standardization: Standardization,
    pub feature_names: Vec<String>,
    /// Standardized feature vectors with a non-zero multiplier.
    pub support_vectors: Vec<Vec<f64>>,
    /// `αᵢ·yᵢ` for each support vector.
    pub coefficients: Vec<f64>,
    /// `Cᵢ` of each support vector.
    pub box_constraints: Vec<f64>,
    /// Position of each support vector in the training data.
    pub support_indices: Vec<usize>,
    pub bias: f64,
    pub training: TrainingSummary,
}

impl TrainedModel {
    pub fn arity(&self) -> usize {
        self.standardization.mean.len()
    }

    pub fn decision_value(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                actual: features.len(),
            });
        }
        let z = self.standardization.apply(features);
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * self.kernel.eval(sv, &z))
            .sum::<f64>()
            + self.bias)
    }

    /// Positive iff the decision value is strictly above `threshold`.
    pub fn predict(&self, features: &[f64], threshold: f64) -> Result<Label> {
        Ok(Label::from_bool(self.decision_value(features)? > threshold))
    }

    pub fn decision_values(&self, dataset: &Dataset) -> Result<Vec<f64>> {
        dataset
            .instances
            .iter()
            .map(|i| self.decision_value(i.features.values()))
            .collect()
    }

    /// Multiplier `αᵢ` of training instance `i` (0 for non-support vectors).
    pub fn alpha_of(&self, i: usize) -> f64 {
        self.support_indices
            .iter()
            .position(|&s| s == i)
            .map_or(0.0, |k| self.coefficients[k].abs())
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        let arity = self.arity();
        let bad = |m: &str| Err(Error::Data(format!("invalid model: {m}")));
        if self.standardization.std.len() != arity || self.feature_names.len() != arity {
            return bad("standardization and feature names disagree on arity");
        }
        if self.standardization.std.iter().any(|s| !(*s >= 0.0)) {
            return bad("negative standard deviation");
        }
        let k = self.support_vectors.len();
        if self.coefficients.len() != k || self.box_constraints.len() != k || self.support_indices.len() != k {
            return bad("support vector arrays differ in length");
        }
        if self.support_vectors.iter().any(|sv| sv.len() != arity) {
            return bad("support vector arity mismatch");
        }
        for (c, cap) in self.coefficients.iter().zip(&self.box_constraints) {
            if !c.is_finite() || c.abs() > cap * (1.0 + 1e-9) {
                return bad("multiplier outside its box constraint");
            }
        }
        let balance: f64 = self.coefficients.iter().sum();
        let scale = self.box_constraints.iter().fold(1.0f64, |a, b| a.max(*b));
        if balance.abs() > 1e-6 * scale {
            return bad("Σαy is not zero");
        }
        if !self.bias.is_finite() {
            return bad("non-finite bias");
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }
}

/// Trains on a [`Dataset`], using instance weights as box-constraint scales.
pub fn train(dataset: &Dataset, kernel: &KernelSpec, params: &SvmParams) -> Result<TrainedModel> {
    let rows: Vec<&[f64]> = dataset.instances.iter().map(|i| i.features.values()).collect();
    let labels: Vec<bool> = dataset.instances.iter().map(|i| i.label.is_positive()).collect();
    let weights: Vec<f64> = dataset.instances.iter().map(|i| i.weight).collect();
    train_rows(&rows, &labels, &weights, dataset.feature_names.clone(), kernel, params)
}

/// Trains on raw rows. `feature_names` may be empty, in which case columns
/// are named `f0, f1, ...`.
pub fn train_rows(
    rows: &[&[f64]],
    labels: &[bool],
    weights: &[f64],
    mut feature_names: Vec<String>,
    kernel: &KernelSpec,
    params: &SvmParams,
) -> Result<TrainedModel> {
    kernel.validate()?;
    params.validate()?;
    let n = rows.len();
    if labels.len() != n || weights.len() != n {
        return Err(Error::Data("rows, labels and weights differ in length".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    if n_pos == 0 || n_pos == n {
        return Err(Error::SingleClass("training data must contain both classes".into()));
    }
    let arity = rows[0].len();
    if rows.iter().any(|r| r.len() != arity) {
        return Err(Error::Data("rows differ in arity".into()));
    }
    if rows.iter().flat_map(|r| r.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite feature value".into()));
    }
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::Data("instance weights must be positive".into()));
    }
    if feature_names.is_empty() {
        feature_names = (0..arity).map(|i| format!("f{i}")).collect();
    } else if feature_names.len() != arity {
        return Err(Error::ArityMismatch {
            expected: feature_names.len(),
            actual: arity,
        });
    }

    let standardization = Standardization::fit(rows);
    let x: Vec<Vec<f64>> = rows.iter().map(|r| standardization.apply(r)).collect();
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let c: Vec<f64> = weights.iter().map(|w| params.cost * w).collect();

    let mut smo = Smo::new(&x, &y, &c, *kernel, params);
    let (updates, converged) = smo.run();

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    let mut box_constraints = Vec::new();
    let mut support_indices = Vec::new();
    for i in 0..n {
        if smo.alpha[i] > 0.0 {
            support_vectors.push(x[i].clone());
            coefficients.push(smo.alpha[i] * y[i]);
            box_constraints.push(c[i]);
            support_indices.push(i);
        }
    }
    Ok(TrainedModel {
        kernel: *kernel,
        standardization,
        feature_names,
        support_vectors,
        coefficients,
        box_constraints,
        support_indices,
        bias: smo.bias,
        training: TrainingSummary {
            instances: n,
            updates,
            converged,
        },
    })
}

enum KernelRows {
    Dense(Vec<f64>),
    OnTheFly,
}

struct Smo<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    c: &'a [f64],
    kernel: KernelSpec,
    tol: f64,
    max_passes: usize,
    max_iters: usize,
    rows: KernelRows,
    alpha: Vec<f64>,
    bias: f64,
    /// `f(xᵢ) − yᵢ` for every instance.
    errors: Vec<f64>,
    rng: ChaCha8Rng,
    updates: usize,
}

impl<'a> Smo<'a> {
    fn new(x: &'a [Vec<f64>], y: &'a [f64], c: &'a [f64], kernel: KernelSpec, params: &SvmParams) -> Self {
        let n = x.len();
        let rows = if n <= DENSE_KERNEL_LIMIT {
            let mut k = vec![0.0; n * n];
            for i in 0..n {
                k[i * n + i] = 1.0;
                for j in (i + 1)..n {
                    let v = kernel.eval(&x[i], &x[j]);
                    k[i * n + j] = v;
                    k[j * n + i] = v;
                }
            }
            KernelRows::Dense(k)
        } else {
            KernelRows::OnTheFly
        };
        Self {
            x,
            y,
            c,
            kernel,
            tol: params.tolerance,
            max_passes: params.max_passes,
            max_iters: params.max_iters,
            rows,
            alpha: vec![0.0; n],
            bias: 0.0,
            errors: y.iter().map(|v| -v).collect(),
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            updates: 0,
        }
    }

    fn k(&self, i: usize, j: usize) -> f64 {
        match &self.rows {
            KernelRows::Dense(m) => m[i * self.x.len() + j],
            KernelRows::OnTheFly => self.kernel.eval(&self.x[i], &self.x[j]),
        }
    }

    fn is_non_bound(&self, i: usize) -> bool {
        self.alpha[i] > 0.0 && self.alpha[i] < self.c[i]
    }

    /// Outer loop: alternate full sweeps and sweeps over non-bound
    /// multipliers until full sweeps stop changing anything.
    fn run(&mut self) -> (usize, bool) {
        let n = self.x.len();
        let mut examine_all = true;
        let mut quiet_full_passes = 0;
        loop {
            if self.updates >= self.max_iters {
                return (self.updates, false);
            }
            let mut changed = 0;
            if examine_all {
                for i in 0..n {
                    changed += usize::from(self.examine(i));
                    if self.updates >= self.max_iters {
                        return (self.updates, false);
                    }
                }
                if changed == 0 {
                    quiet_full_passes += 1;
                    if quiet_full_passes >= self.max_passes {
                        return (self.updates, true);
                    }
                } else {
                    quiet_full_passes = 0;
                    examine_all = false;
                }
            } else {
                for i in 0..n {
                    if self.is_non_bound(i) {
                        changed += usize::from(self.examine(i));
                        if self.updates >= self.max_iters {
                            return (self.updates, false);
                        }
                    }
                }
                if changed == 0 {
                    examine_all = true;
                }
            }
        }
    }

    fn violates_kkt(&self, i: usize) -> bool {
        let r = self.errors[i] * self.y[i];
        (r < -self.tol && self.alpha[i] < self.c[i]) || (r > self.tol && self.alpha[i] > 0.0)
    }

    fn examine(&mut self, i2: usize) -> bool {
        if !self.violates_kkt(i2) {
            return false;
        }
        let n = self.x.len();
        let e2 = self.errors[i2];
        let non_bound: Vec<usize> = (0..n).filter(|&i| self.is_non_bound(i)).collect();

        if non_bound.len() > 1 {
            let mut best = None;
            let mut best_gap = -1.0;
            for &i in &non_bound {
                let gap = (self.errors[i] - e2).abs();
                if gap > best_gap {
                    best_gap = gap;
                    best = Some(i);
                }
            }
            if let Some(i1) = best {
                if self.take_step(i1, i2) {
                    return true;
                }
            }
        }
        if !non_bound.is_empty() {
            let start = self.rng.gen_range(0..non_bound.len());
            for k in 0..non_bound.len() {
                let i1 = non_bound[(start + k) % non_bound.len()];
                if self.take_step(i1, i2) {
                    return true;
                }
            }
        }
        let start = self.rng.gen_range(0..n);
        for k in 0..n {
            let i1 = (start + k) % n;
            if self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (alph1, alph2) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (c1, c2) = (self.c[i1], self.c[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;

        let (lo, hi) = if s < 0.0 {
            ((alph2 - alph1).max(0.0), c2.min(c1 - alph1 + alph2))
        } else {
            ((alph1 + alph2 - c1).max(0.0), c2.min(alph1 + alph2))
        };
        if hi - lo <= STEP_EPS * (hi.abs() + lo.abs() + STEP_EPS) {
            return false;
        }

        let k11 = self.k(i1, i1);
        let k12 = self.k(i1, i2);
        let k22 = self.k(i2, i2);
        let eta = k11 + k22 - 2.0 * k12;
        // Change of the dual objective when α₂ moves by Δ along the constraint line.
        let gain = |delta: f64| y2 * (e1 - e2) * delta - 0.5 * eta * delta * delta;

        let mut a2 = if eta > 1e-12 {
            (alph2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            let (g_lo, g_hi) = (gain(lo - alph2), gain(hi - alph2));
            if g_lo > g_hi + STEP_EPS {
                lo
            } else if g_hi > g_lo + STEP_EPS {
                hi
            } else {
                alph2
            }
        };
        if (a2 - lo).abs() <= STEP_EPS * c2 {
            a2 = lo;
        } else if (hi - a2).abs() <= STEP_EPS * c2 {
            a2 = hi;
        }
        if (a2 - alph2).abs() < STEP_EPS * (a2 + alph2 + STEP_EPS) {
            return false;
        }
        let mut a1 = alph1 + s * (alph2 - a2);
        if a1.abs() <= 1e-12 * c1.max(1.0) {
            a1 = 0.0;
        } else if (a1 - c1).abs() <= 1e-12 * c1.max(1.0) {
            a1 = c1;
        }

        let d1 = y1 * (a1 - alph1);
        let d2 = y2 * (a2 - alph2);
        let b1 = self.bias - e1 - d1 * k11 - d2 * k12;
        let b2 = self.bias - e2 - d1 * k12 - d2 * k22;
        let new_bias = if a1 > 0.0 && a1 < c1 {
            b1
        } else if a2 > 0.0 && a2 < c2 {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        let db = new_bias - self.bias;

        for k in 0..self.x.len() {
            let (k1, k2) = (self.k(i1, k), self.k(i2, k));
            self.errors[k] += d1 * k1 + d2 * k2 + db;
        }
        self.alpha[i1] = a1;
        self.alpha[i2] = a2;
        self.bias = new_bias;
        self.updates += 1;
        true
    }
}
