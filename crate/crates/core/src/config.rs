//! Resolved settings of one run, loadable from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::{KernelSpec, SvmParams};
use crate::dataset::{DatasetMode, ImbalanceStrategy, PositiveFeatures};
use crate::error::{Error, Result};
use crate::forecast::{ForecastMethod, ForecastSettings};
use crate::graph::PairFilterConfig;
use crate::metrics::MetricConfig;
use crate::pipeline::ClassifySettings;
use crate::synth::SynthConfig;

/// Every knob of a run. All randomness is seeded from fields of this struct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub metrics: MetricConfig,
    pub filter: PairFilterConfig,
    pub mode: DatasetMode,
    pub strategy: ImbalanceStrategy,
    pub positive_features: PositiveFeatures,
    /// `None` selects `γ = 1 / arity`.
    pub kernel: Option<KernelSpec>,
    pub svm: SvmParams,
    pub forecast: ForecastMethod,
    pub top_n: usize,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            output_dir: None,
            metrics: MetricConfig::default(),
            filter: PairFilterConfig::default(),
            mode: DatasetMode::default(),
            strategy: ImbalanceStrategy::default(),
            positive_features: PositiveFeatures::default(),
            kernel: None,
            svm: SvmParams::default(),
            forecast: ForecastMethod::default(),
            top_n: 5,
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.metrics.validate()?;
        self.filter.validate()?;
        self.strategy.validate()?;
        self.svm.validate()?;
        self.forecast.validate()?;
        if let Some(k) = &self.kernel {
            k.validate()?;
        }
        if self.top_n == 0 {
            return Err(Error::Config("top_n must be >= 1".into()));
        }
        if let Some(m) = &self.manifest {
            if !m.is_file() {
                return Err(Error::Config(format!("manifest {} does not exist", m.display())));
            }
        }
        Ok(())
    }

    /// The configuration as embedded in reports. The output directory is
    /// left out so that reruns into different directories compare equal.
    pub fn provenance_json(&self) -> Result<serde_json::Value> {
        let mut copy = self.clone();
        copy.output_dir = None;
        Ok(serde_json::to_value(copy)?)
    }

    pub fn classify_settings(&self) -> ClassifySettings {
        ClassifySettings {
            metrics: self.metrics,
            kernel: self.kernel,
            svm: self.svm,
            mode: self.mode,
            strategy: self.strategy,
            positive_features: self.positive_features,
        }
    }

    pub fn forecast_settings(&self) -> ForecastSettings {
        ForecastSettings {
            metrics: self.metrics,
            kernel: self.kernel,
            svm: self.svm,
            mode: self.mode,
            strategy: self.strategy,
            method: self.forecast,
        }
    }
}
