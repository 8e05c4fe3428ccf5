//! Feature forecasting: per-pair metric time series over a window of
//! versions, extrapolated one step to estimate the features of the next
//! version before it exists.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifier::{self, KernelSpec, SvmParams};
use crate::dataset::{build_test_set, build_training_set, DatasetMode, ImbalanceStrategy, Label};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport, Provenance};
use crate::graph::{delta, DependencyGraph, Edge, ModuleId, VersionSeries};
use crate::metrics::{communities, FeatureVector, MetricConfig, MetricId, PairScorer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSeries {
    pub pair: Edge,
    pub metric: MetricId,
    pub values: Vec<f64>,
}

impl FeatureSeries {
    pub fn forecast(&self, method: ForecastMethod) -> Result<f64> {
        forecast_next(&self.values, self.metric, method)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForecastMethod {
    /// Least-squares line through `(t, value)` for `t = 0..k`, read at `t = k`.
    #[default]
    LinearLs,
    NaiveLast,
    ExpSmoothing { alpha: f64 },
}

impl ForecastMethod {
    pub fn validate(&self) -> Result<()> {
        if let ForecastMethod::ExpSmoothing { alpha } = self {
            if !(*alpha > 0.0 && *alpha <= 1.0) {
                return Err(Error::Config("smoothing alpha must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ForecastMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForecastMethod::LinearLs => f.write_str("linear_ls"),
            ForecastMethod::NaiveLast => f.write_str("naive"),
            ForecastMethod::ExpSmoothing { alpha } => write!(f, "exp:{alpha}"),
        }
    }
}

impl FromStr for ForecastMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let method = match s {
            "linear_ls" | "linear" => ForecastMethod::LinearLs,
            "naive" | "naive_last" => ForecastMethod::NaiveLast,
            "exp" | "exp_smoothing" => ForecastMethod::ExpSmoothing { alpha: 0.5 },
            _ => match s.strip_prefix("exp:") {
                Some(a) => ForecastMethod::ExpSmoothing {
                    alpha: a
                        .parse()
                        .map_err(|_| Error::Config(format!("bad smoothing alpha {a:?}")))?,
                },
                None => return Err(Error::Config(format!("unknown forecast method {s:?}"))),
            },
        };
        method.validate()?;
        Ok(method)
    }
}

fn linear_next(values: &[f64]) -> f64 {
    let k = values.len() as f64;
    let t_mean = (k - 1.0) / 2.0;
    let v_mean = values.iter().sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, v) in values.iter().enumerate() {
        let dt = t as f64 - t_mean;
        sxy += dt * (v - v_mean);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    v_mean + slope * (k - t_mean)
}

/// Raw extrapolation without range clamping.
pub fn extrapolate(values: &[f64], method: ForecastMethod) -> Result<f64> {
    method.validate()?;
    let last = *values
        .last()
        .ok_or_else(|| Error::Data("cannot forecast an empty series".into()))?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("series contains a non-finite value".into()));
    }
    Ok(match method {
        ForecastMethod::NaiveLast => last,
        ForecastMethod::LinearLs if values.len() < 3 => last,
        ForecastMethod::LinearLs => linear_next(values),
        ForecastMethod::ExpSmoothing { alpha } => values[1..]
            .iter()
            .fold(values[0], |level, v| alpha * v + (1.0 - alpha) * level),
    })
}

/// Next value of a metric series, clamped to `[0, 1]` for bounded metrics
/// and floored at 0 otherwise.
pub fn forecast_next(values: &[f64], metric: MetricId, method: ForecastMethod) -> Result<f64> {
    let raw = extrapolate(values, method)?;
    Ok(if metric.is_unit_interval() {
        raw.clamp(0.0, 1.0)
    } else {
        raw.max(0.0)
    })
}

/// `"v1-v3"` style label of a window.
pub fn window_label(series: &VersionSeries, window: &RangeInclusive<usize>) -> Result<String> {
    let first = series
        .get(*window.start())
        .ok_or_else(|| Error::Config("window starts past the series".into()))?;
    let last = series
        .get(*window.end())
        .ok_or_else(|| Error::Config("window ends past the series".into()))?;
    Ok(format!("{}-{}", first.label(), last.label()))
}

fn window_universe(series: &VersionSeries, window: &RangeInclusive<usize>) -> Result<BTreeSet<ModuleId>> {
    if window.start() >= window.end() {
        return Err(Error::Config("a forecast window covers at least 2 versions".into()));
    }
    window_label(series, window)?;
    let mut universe = series.snapshots()[*window.start()].graph().node_set();
    for i in window.clone().skip(1) {
        let g = series.snapshots()[i].graph();
        universe.retain(|m| g.index_of_id(m).is_some());
    }
    if universe.len() < 2 {
        return Err(Error::Data("the window shares fewer than 2 modules".into()));
    }
    Ok(universe)
}

/// Metric values of `pairs` on every windowed snapshot:
/// `out[p][m][t]` for pair `p`, metric position `m`, window offset `t`.
fn metric_histories(
    series: &VersionSeries,
    window: &RangeInclusive<usize>,
    pairs: &[Edge],
    cfg: &MetricConfig,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let cfg = MetricConfig {
        include_community_feature: false,
        ..*cfg
    };
    let len = window.clone().count();
    let mut out = vec![vec![Vec::with_capacity(len); MetricId::ALL.len()]; pairs.len()];
    for i in window.clone() {
        let g = series.snapshots()[i].graph();
        let scorer = PairScorer::new(g, &cfg)?;
        for (p, (s, t)) in pairs.iter().enumerate() {
            let (si, ti) = (g.index_of_id(s).expect("in universe"), g.index_of_id(t).expect("in universe"));
            let fv = scorer.features(si, ti)?;
            for (m, v) in fv.values().iter().enumerate() {
                out[p][m].push(*v);
            }
        }
    }
    Ok(out)
}

fn ordered_pairs(universe: &BTreeSet<ModuleId>) -> Vec<Edge> {
    let nodes: Vec<&ModuleId> = universe.iter().collect();
    let mut pairs = Vec::with_capacity(nodes.len() * nodes.len());
    for s in &nodes {
        for t in &nodes {
            if s != t {
                pairs.push(((*s).clone(), (*t).clone()));
            }
        }
    }
    pairs
}

/// One series per ordered pair of modules present in every windowed version
/// and per metric.
pub fn build_series(
    series: &VersionSeries,
    window: RangeInclusive<usize>,
    cfg: &MetricConfig,
) -> Result<Vec<FeatureSeries>> {
    let universe = window_universe(series, &window)?;
    let pairs = ordered_pairs(&universe);
    let histories = metric_histories(series, &window, &pairs, cfg)?;
    let mut out = Vec::with_capacity(pairs.len() * MetricId::ALL.len());
    for (pair, per_metric) in pairs.into_iter().zip(histories) {
        for (metric, values) in MetricId::ALL.into_iter().zip(per_metric) {
            out.push(FeatureSeries {
                pair: pair.clone(),
                metric,
                values,
            });
        }
    }
    Ok(out)
}

/// Forecast features of one test pair, as written to `forecasts.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRow {
    pub source: ModuleId,
    pub target: ModuleId,
    pub features: FeatureVector,
    pub label: Label,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastSettings {
    pub metrics: MetricConfig,
    pub kernel: Option<KernelSpec>,
    pub svm: SvmParams,
    pub mode: DatasetMode,
    pub strategy: ImbalanceStrategy,
    pub method: ForecastMethod,
}

impl Default for ForecastSettings {
    fn default() -> Self {
        Self {
            metrics: MetricConfig::default(),
            kernel: None,
            svm: SvmParams::default(),
            mode: DatasetMode::AsPaper,
            strategy: ImbalanceStrategy::default(),
            method: ForecastMethod::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastOutcome {
    /// Classifier scores on forecast features.
    pub estimated: EvalReport,
    /// Classifier scores on the real features of the test version, with
    /// `as_paper` labels over the same modules.
    pub real: EvalReport,
    pub rows: Vec<ForecastRow>,
}

/// Trains on the last windowed version, forecasts test features from the
/// window and scores them against the version after it.
pub fn forecast_pipeline(
    series: &VersionSeries,
    window: RangeInclusive<usize>,
    test: usize,
    settings: &ForecastSettings,
) -> Result<ForecastOutcome> {
    settings.method.validate()?;
    let last = *window.end();
    if test <= last {
        return Err(Error::Config("the test version must follow the window".into()));
    }
    let g_next = series
        .get(test)
        .ok_or_else(|| Error::Config("test version is past the series".into()))?
        .graph();
    let g_n = series.snapshots()[last].graph();
    let label = window_label(series, &window)?;
    let (train_label, test_label) = (series.snapshots()[last].label(), series.snapshots()[test].label());

    let mut universe = window_universe(series, &window)?;
    universe.retain(|m| g_next.index_of_id(m).is_some());
    if universe.len() < 3 {
        return Err(Error::Data("fewer than 3 modules persist into the test version".into()));
    }
    let cfg = &settings.metrics;
    let pairs: Vec<Edge> = ordered_pairs(&universe)
        .into_iter()
        .filter(|(s, t)| settings.mode == DatasetMode::AsPaper || !g_n.has_edge(s.as_str(), t.as_str()))
        .collect();
    if pairs.is_empty() {
        return Err(Error::Data("no candidate pairs to forecast".into()));
    }

    let training = build_training_set(g_n, cfg, settings.strategy)?;
    let kernel = settings.kernel.unwrap_or_else(|| KernelSpec::for_arity(training.arity()));
    let model = classifier::train(&training, &kernel, &settings.svm)?;

    let partition = cfg.include_community_feature.then(|| communities(g_n, cfg.community_seed));
    let added = delta(g_n, g_next).added_edges;
    let histories = metric_histories(series, &window, &pairs, cfg)?;
    let mut rows = Vec::with_capacity(pairs.len());
    for ((s, t), per_metric) in pairs.into_iter().zip(histories) {
        let mut values = MetricId::ALL
            .into_iter()
            .zip(&per_metric)
            .map(|(m, hist)| forecast_next(hist, m, settings.method))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(p) = &partition {
            values.push(if p.same_community(&s, &t) { 1.0 } else { 0.0 });
        }
        let features = FeatureVector::new(values)?;
        let positive = match settings.mode {
            DatasetMode::AsPaper => g_next.has_edge(s.as_str(), t.as_str()),
            DatasetMode::Forward => added.contains(&(s.clone(), t.clone())),
        };
        let score = model.decision_value(features.values())?;
        rows.push(ForecastRow {
            source: s,
            target: t,
            features,
            label: Label::from_bool(positive),
            score,
        });
    }
    let scores: Vec<f64> = rows.iter().map(|r| r.score).collect();
    let labels: Vec<Label> = rows.iter().map(|r| r.label).collect();
    let provenance = Provenance::new("forecast", train_label, test_label)
        .with_window(&label)
        .with_mode(settings.mode)
        .with_detail(&format!("estimated features, {}", settings.method));
    let estimated = evaluate(&scores, &labels, provenance, None)?;

    let mut real_set = build_test_set(g_n, g_next, cfg, DatasetMode::AsPaper)?;
    real_set
        .instances
        .retain(|i| universe.contains(&i.source) && universe.contains(&i.target));
    let real_scores = model.decision_values(&real_set)?;
    let provenance = Provenance::new("forecast", train_label, test_label)
        .with_window(&format!("{label} real"))
        .with_mode(DatasetMode::AsPaper)
        .with_detail("real features");
    let real = evaluate(&real_scores, &real_set.labels(), provenance, None)?;

    Ok(ForecastOutcome { estimated, real, rows })
}

/// Writes forecast rows as CSV: `source,target,<feature columns>,label,score`.
pub fn write_forecasts(path: &Path, feature_names: &[String], rows: &[ForecastRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["source".to_string(), "target".to_string()];
    header.extend(feature_names.iter().cloned());
    header.extend(["label".to_string(), "score".to_string()]);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.source.to_string(), r.target.to_string()];
        rec.extend(r.features.values().iter().map(|v| v.to_string()));
        rec.push(if r.label.is_positive() { "1" } else { "0" }.to_string());
        rec.push(r.score.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Forecast of every metric of one pair from an explicit graph window.
pub fn forecast_pair(
    graphs: &[&DependencyGraph],
    source: &str,
    target: &str,
    cfg: &MetricConfig,
    method: ForecastMethod,
) -> Result<Vec<f64>> {
    if graphs.is_empty() {
        return Err(Error::Data("empty window".into()));
    }
    let cfg = MetricConfig {
        include_community_feature: false,
        ..*cfg
    };
    let mut hist = vec![Vec::with_capacity(graphs.len()); MetricId::ALL.len()];
    for g in graphs {
        let fv = PairScorer::new(g, &cfg)?.features(g.require(source)?, g.require(target)?)?;
        for (m, v) in fv.values().iter().enumerate() {
            hist[m].push(*v);
        }
    }
    MetricId::ALL
        .into_iter()
        .zip(&hist)
        .map(|(m, h)| forecast_next(h, m, method))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VersionSnapshot;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn linear_examples() {
        let m = ForecastMethod::LinearLs;
        assert!(close(forecast_next(&[0.2, 0.2, 0.2], MetricId::Sorensen, m).unwrap(), 0.2));
        assert!(close(forecast_next(&[0.1, 0.2, 0.3], MetricId::Sorensen, m).unwrap(), 0.4));
        assert!(close(extrapolate(&[0.0, 0.5, 1.0], m).unwrap(), 1.5));
        assert_eq!(forecast_next(&[0.0, 0.5, 1.0], MetricId::Sorensen, m).unwrap(), 1.0);
        assert!(close(forecast_next(&[0.0, 0.5, 1.0], MetricId::CommonNeighbours, m).unwrap(), 1.5));
        assert_eq!(forecast_next(&[3.0, 1.0, 0.0], MetricId::CommonNeighbours, m).unwrap(), 0.0);
        // Short series fall back to the last value.
        assert_eq!(forecast_next(&[1.0, 4.0], MetricId::Katz, m).unwrap(), 4.0);
    }

    #[test]
    fn other_methods() {
        assert_eq!(extrapolate(&[5.0, 2.0, 7.0], ForecastMethod::NaiveLast).unwrap(), 7.0);
        let exp = ForecastMethod::ExpSmoothing { alpha: 0.5 };
        assert!(close(extrapolate(&[0.0, 1.0, 1.0], exp).unwrap(), 0.75));
        assert!(extrapolate(&[], ForecastMethod::NaiveLast).is_err());
        assert!(extrapolate(&[1.0], ForecastMethod::ExpSmoothing { alpha: 0.0 }).is_err());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("linear_ls".parse::<ForecastMethod>().unwrap(), ForecastMethod::LinearLs);
        assert_eq!("naive".parse::<ForecastMethod>().unwrap(), ForecastMethod::NaiveLast);
        assert_eq!(
            "exp:0.3".parse::<ForecastMethod>().unwrap(),
            ForecastMethod::ExpSmoothing { alpha: 0.3 }
        );
        assert!("exp:2".parse::<ForecastMethod>().is_err());
        assert!("arima".parse::<ForecastMethod>().is_err());
        for m in [ForecastMethod::LinearLs, ForecastMethod::NaiveLast, ForecastMethod::ExpSmoothing { alpha: 0.25 }] {
            assert_eq!(m.to_string().parse::<ForecastMethod>().unwrap(), m);
        }
    }

    fn series_of(graphs: Vec<DependencyGraph>) -> VersionSeries {
        VersionSeries::new(
            graphs
                .into_iter()
                .enumerate()
                .map(|(i, g)| VersionSnapshot::new(format!("v{}", i + 1), g, None).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn common_neighbour_series() {
        let g1 = DependencyGraph::from_pairs(&[("a", "c"), ("b", "d")]);
        let g2 = DependencyGraph::from_pairs(&[("a", "c"), ("b", "d"), ("b", "c")]);
        let s = series_of(vec![g1, g2.clone(), g2]);
        let all = build_series(&s, 0..=2, &MetricConfig::default()).unwrap();
        let a = ModuleId::new("a").unwrap();
        let b = ModuleId::new("b").unwrap();
        let cn = all
            .iter()
            .find(|f| f.pair == (a.clone(), b.clone()) && f.metric == MetricId::CommonNeighbours)
            .unwrap();
        assert_eq!(cn.values, [0.0, 1.0, 1.0]);
        assert_eq!(all.len(), 4 * 3 * 9);
        assert!(build_series(&s, 1..=1, &MetricConfig::default()).is_err());
    }

    #[test]
    fn constant_system_matches_real_features() {
        let g = DependencyGraph::from_pairs(&[
            ("a", "b"), ("b", "c"), ("c", "a"), ("c", "d"), ("d", "e"), ("e", "c"), ("a", "e"),
        ]);
        let s = series_of(vec![g.clone(), g.clone(), g.clone(), g]);
        let out = forecast_pipeline(&s, 0..=2, 3, &ForecastSettings::default()).unwrap();
        assert_eq!(out.estimated.key, "v1-v3");
        assert_eq!(out.estimated.positive_aupr, out.real.positive_aupr);
        assert_eq!(out.estimated.weighted_aupr, out.real.weighted_aupr);
    }
}
