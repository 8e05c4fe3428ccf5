//! Precision-recall evaluation and report files.
//!
//! AUPR is average precision with step interpolation: `Σₖ (Rₖ − Rₖ₋₁)·Pₖ`
//! over the curve points, with `R₀ = 0`. Tied scores form one group, so the
//! result does not depend on input order.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetMode, Label};
use crate::error::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";
pub const PR_CURVE_FILE: &str = "pr_curve.csv";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

fn check_inputs(scores: &[f64], labels: &[Label]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::Data("no scores to evaluate".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Data("NaN score".into()));
    }
    Ok(())
}

/// One point per distinct score, highest threshold first.
pub fn pr_curve(scores: &[f64], labels: &[Label]) -> Result<Vec<PrPoint>> {
    check_inputs(scores, labels)?;
    let total_pos = labels.iter().filter(|l| l.is_positive()).count();
    if total_pos == 0 {
        return Err(Error::SingleClass("precision-recall curve needs a positive".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut curve = Vec::new();
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let threshold = scores[order[k]];
        while k < order.len() && scores[order[k]] == threshold {
            tp += usize::from(labels[order[k]].is_positive());
            seen += 1;
            k += 1;
        }
        curve.push(PrPoint {
            threshold,
            recall: tp as f64 / total_pos as f64,
            precision: tp as f64 / seen as f64,
        });
    }
    Ok(curve)
}

pub fn aupr(curve: &[PrPoint]) -> f64 {
    let mut prev = 0.0;
    let mut area = 0.0;
    for p in curve {
        area += (p.recall - prev) * p.precision;
        prev = p.recall;
    }
    area
}

/// Positive-class AUPR of raw scores.
pub fn average_precision(scores: &[f64], labels: &[Label]) -> Result<f64> {
    Ok(aupr(&pr_curve(scores, labels)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassAupr {
    pub positive: f64,
    pub negative: f64,
    pub weighted: f64,
}

/// Per-class AUPRs combined by class support. The negative class is scored
/// on negated scores.
pub fn weighted_aupr(scores: &[f64], labels: &[Label]) -> Result<ClassAupr> {
    check_inputs(scores, labels)?;
    let n_pos = labels.iter().filter(|l| l.is_positive()).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass("weighted AUPR needs both classes".into()));
    }
    let positive = average_precision(scores, labels)?;
    let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
    let flipped: Vec<Label> = labels.iter().map(|l| Label::from_bool(!l.is_positive())).collect();
    let negative = average_precision(&negated, &flipped)?;
    let weighted = (n_pos as f64 * positive + n_neg as f64 * negative) / (n_pos + n_neg) as f64;
    Ok(ClassAupr {
        positive,
        negative,
        weighted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Counts with "predicted positive" meaning `score > threshold`.
pub fn confusion(scores: &[f64], labels: &[Label], threshold: f64) -> Confusion {
    let mut c = Confusion::default();
    for (s, l) in scores.iter().zip(labels) {
        match (*s > threshold, l.is_positive()) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionAtN {
    pub n: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub positive: usize,
    pub negative: usize,
}

/// Where a report row comes from. `train` is the version the model (or
/// ranking) was built on and `test` the version supplying labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub approach: String,
    pub train: String,
    pub test: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<DatasetMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Provenance {
    pub fn new(approach: &str, train: &str, test: &str) -> Self {
        Self {
            approach: approach.to_string(),
            train: train.to_string(),
            test: test.to_string(),
            window: None,
            mode: None,
            detail: None,
        }
    }

    pub fn with_mode(mut self, mode: DatasetMode) -> Self {
        self.mode = Some(mode);
        self
    }

    pub fn with_window(mut self, window: &str) -> Self {
        self.window = Some(window.to_string());
        self
    }

    pub fn with_detail(mut self, detail: &str) -> Self {
        self.detail = Some(detail.to_string());
        self
    }

    /// `"train-test"`, or the window label when one is set.
    pub fn key(&self) -> String {
        match &self.window {
            Some(w) => w.clone(),
            None => format!("{}-{}", self.train, self.test),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.approach.is_empty() || self.train.is_empty() || self.test.is_empty() {
            return Err(Error::Data("report provenance is incomplete".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub key: String,
    pub provenance: Provenance,
    pub positive_aupr: f64,
    pub negative_aupr: f64,
    pub weighted_aupr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_at_n: Option<PrecisionAtN>,
    pub confusion: Confusion,
    pub counts: ClassCounts,
    #[serde(skip)]
    pub curve: Vec<PrPoint>,
}

/// Fraction of positives among the `n` highest scores (ties broken by input
/// position).
pub fn precision_at_n(scores: &[f64], labels: &[Label], n: usize) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let top = n.min(order.len());
    if top == 0 {
        return 0.0;
    }
    order[..top].iter().filter(|&&i| labels[i].is_positive()).count() as f64 / top as f64
}

/// Scores one score/label array into a report row.
pub fn evaluate(
    scores: &[f64],
    labels: &[Label],
    provenance: Provenance,
    top_n: Option<usize>,
) -> Result<EvalReport> {
    provenance.validate()?;
    let auprs = weighted_aupr(scores, labels)?;
    let curve = pr_curve(scores, labels)?;
    let positive = labels.iter().filter(|l| l.is_positive()).count();
    Ok(EvalReport {
        key: provenance.key(),
        provenance,
        positive_aupr: auprs.positive,
        negative_aupr: auprs.negative,
        weighted_aupr: auprs.weighted,
        precision_at_n: top_n.map(|n| PrecisionAtN {
            n,
            value: precision_at_n(scores, labels, n),
        }),
        confusion: confusion(scores, labels, 0.0),
        counts: ClassCounts {
            positive,
            negative: labels.len() - positive,
        },
        curve,
    })
}

/// Serialized form of a run: the resolved configuration plus one row per
/// evaluated version pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub config: serde_json::Value,
    pub rows: Vec<EvalReport>,
}

impl ReportFile {
    pub fn new(config: serde_json::Value) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            config,
            rows: Vec::new(),
        }
    }

    pub fn row(&self, key: &str) -> Option<&EvalReport> {
        self.rows.iter().find(|r| r.key == key)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ReportFile = serde_json::from_str(text)?;
        if file.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Data(format!(
                "unsupported report schema version {}",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Writes `report.json` and `pr_curve.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(REPORT_FILE);
        fs::write(&path, self.to_json()?).map_err(|e| Error::io(&path, e))?;
        let curves: Vec<(&str, &[PrPoint])> = self
            .rows
            .iter()
            .filter(|r| !r.curve.is_empty())
            .map(|r| (r.key.as_str(), r.curve.as_slice()))
            .collect();
        if !curves.is_empty() {
            write_pr_csv(&dir.join(PR_CURVE_FILE), &curves)?;
        }
        Ok(path)
    }

    /// Concatenates rows of several reports; configs are kept as a list.
    pub fn merge(files: &[ReportFile]) -> Result<ReportFile> {
        if files.is_empty() {
            return Err(Error::Data("nothing to merge".into()));
        }
        let configs = files.iter().map(|f| f.config.clone()).collect();
        let mut merged = ReportFile::new(serde_json::json!({ "merged": serde_json::Value::Array(configs) }));
        for f in files {
            merged.rows.extend(f.rows.iter().cloned());
        }
        Ok(merged)
    }
}

/// PR curves as CSV with columns `key,threshold,recall,precision`.
pub fn write_pr_csv(path: &Path, curves: &[(&str, &[PrPoint])]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["key", "threshold", "recall", "precision"])?;
    for (key, curve) in curves {
        for p in *curve {
            w.write_record([
                key.to_string(),
                p.threshold.to_string(),
                p.recall.to_string(),
                p.precision.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Writes `text` to `path`, creating parent directories.
pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
