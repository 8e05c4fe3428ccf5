//! End-to-end runs over version pairs, shared by the command line and the
//! examples.

use serde::{Deserialize, Serialize};

use crate::classifier::{self, KernelSpec, SvmParams, TrainedModel};
use crate::dataset::{build_test_set, build_training_set_with, Dataset, DatasetMode, ImbalanceStrategy, PositiveFeatures};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport, Provenance};
use crate::graph::{filter_version_pairs, PairFilterConfig, VersionSeries};
use crate::metrics::{MetricConfig, MetricId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ClassifySettings {
    pub metrics: MetricConfig,
    pub kernel: Option<KernelSpec>,
    pub svm: SvmParams,
    pub mode: DatasetMode,
    pub strategy: ImbalanceStrategy,
    pub positive_features: PositiveFeatures,
}

/// Classifier trained on one version and scored on the next.
#[derive(Debug, Clone)]
pub struct PairRun {
    pub report: EvalReport,
    pub model: TrainedModel,
    pub test_set: Dataset,
    pub scores: Vec<f64>,
}

fn pair_graphs(series: &VersionSeries, train: usize, test: usize) -> Result<(&str, &str)> {
    if train >= test {
        return Err(Error::Config("the training version must precede the test version".into()));
    }
    let a = series
        .get(train)
        .ok_or_else(|| Error::Config(format!("no version at position {train}")))?;
    let b = series
        .get(test)
        .ok_or_else(|| Error::Config(format!("no version at position {test}")))?;
    Ok((a.label(), b.label()))
}

pub fn classify_pair(series: &VersionSeries, train: usize, test: usize, settings: &ClassifySettings) -> Result<PairRun> {
    let (train_label, test_label) = pair_graphs(series, train, test)?;
    let g_n = series.snapshots()[train].graph();
    let g_next = series.snapshots()[test].graph();

    let training = build_training_set_with(g_n, &settings.metrics, settings.strategy, settings.positive_features)?
        .with_versions(&[train_label]);
    let kernel = settings.kernel.unwrap_or_else(|| KernelSpec::for_arity(training.arity()));
    let model = classifier::train(&training, &kernel, &settings.svm)?;

    let test_set = build_test_set(g_n, g_next, &settings.metrics, settings.mode)?.with_versions(&[train_label, test_label]);
    let scores = model.decision_values(&test_set)?;
    let provenance = Provenance::new("classifier", train_label, test_label).with_mode(settings.mode);
    let report = evaluate(&scores, &test_set.labels(), provenance, None)?;
    Ok(PairRun {
        report,
        model,
        test_set,
        scores,
    })
}

/// Each metric used directly as a score on `test_set`, one report per metric
/// in feature order.
pub fn metric_reports(test_set: &Dataset, train_label: &str, test_label: &str) -> Result<Vec<EvalReport>> {
    let labels = test_set.labels();
    let mode = test_set.provenance.mode;
    MetricId::ALL
        .into_iter()
        .map(|m| {
            let scores: Vec<f64> = test_set.instances.iter().map(|i| i.features.get(m)).collect();
            let mut prov = Provenance::new("ranking", train_label, test_label).with_detail(m.name());
            prov.mode = mode;
            evaluate(&scores, &labels, prov, None)
        })
        .collect()
}

/// Single-metric reports for the same test pairs the classifier sees.
pub fn metric_scorer_reports(
    series: &VersionSeries,
    train: usize,
    test: usize,
    cfg: &MetricConfig,
    mode: DatasetMode,
) -> Result<Vec<EvalReport>> {
    let (train_label, test_label) = pair_graphs(series, train, test)?;
    let set = build_test_set(series.snapshots()[train].graph(), series.snapshots()[test].graph(), cfg, mode)?;
    metric_reports(&set, train_label, test_label)
}

/// Classifier runs over every eligible consecutive pair.
pub fn classify_eligible(
    series: &VersionSeries,
    filter: &PairFilterConfig,
    settings: &ClassifySettings,
) -> Result<Vec<PairRun>> {
    let pairs = filter_version_pairs(series, filter)?;
    if pairs.is_empty() {
        return Err(Error::Data("no eligible version pairs".into()));
    }
    pairs
        .into_iter()
        .map(|(a, b)| classify_pair(series, a, b, settings))
        .collect()
}

/// Mean positive-class AUPR of the classifier and of the best single metric
/// over a set of classifier runs. The best metric is the one with the highest
/// mean over the runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub classifier_aupr: f64,
    pub classifier_weighted_aupr: f64,
    pub best_metric: MetricId,
    pub best_metric_aupr: f64,
}

pub fn compare_with_metrics(runs: &[PairRun]) -> Result<BaselineComparison> {
    if runs.is_empty() {
        return Err(Error::Data("no runs to compare".into()));
    }
    let k = runs.len() as f64;
    let mut per_metric = [0.0; 9];
    for run in runs {
        let p = &run.report.provenance;
        for (slot, r) in per_metric.iter_mut().zip(metric_reports(&run.test_set, &p.train, &p.test)?) {
            *slot += r.positive_aupr / k;
        }
    }
    let (best, best_aupr) = per_metric
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Ok(BaselineComparison {
        classifier_aupr: runs.iter().map(|r| r.report.positive_aupr).sum::<f64>() / k,
        classifier_weighted_aupr: runs.iter().map(|r| r.report.weighted_aupr).sum::<f64>() / k,
        best_metric: MetricId::ALL[best],
        best_metric_aupr: best_aupr,
    })
}
