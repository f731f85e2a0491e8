//! Pipeline configuration: one TOML file drives the whole experiment grid.
//!
//! Every field has a default; the fully resolved configuration (all defaults
//! materialized) is embedded in every report so a run is reproducible from
//! its output alone.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use affekt::classifiers::ClassifierKind;
use affekt::features::FeatureMethod;
use affekt::filter::{BandName, FilterSpec, DEFAULT_MAX_TAPS};
use affekt::labeling::{AffectDimension, PartitionScheme};
use affekt::signal::ChannelId;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config invalid: {0}")]
    Invalid(String),
}

/// Top-level config file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub dataset: DatasetSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub pipeline: PipelineSection,
    #[serde(default)]
    pub labeling: LabelingSection,
    #[serde(default)]
    pub folds: FoldsSection,
    /// Per-band filter design overrides, keyed by band name.
    #[serde(default)]
    pub filters: BTreeMap<BandName, FilterSection>,
    #[serde(default)]
    pub train: TrainSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineSection {
    pub channels: Vec<ChannelId>,
    pub methods: Vec<FeatureMethod>,
    pub schemes: Vec<PartitionScheme>,
    pub dimensions: Vec<AffectDimension>,
    pub classifiers: Vec<ClassifierKind>,
    pub seed: u64,
    /// Worker threads; 0 means one per core.
    pub jobs: usize,
    pub histogram_bins: usize,
    /// Seconds dropped from the start of every trial; 0 keeps full length.
    pub trim_baseline_s: f64,
    pub hoc_order: usize,
}

impl Default for PipelineSection {
    fn default() -> Self {
        Self {
            channels: ChannelId::SELECTED.to_vec(),
            methods: FeatureMethod::ALL.to_vec(),
            schemes: PartitionScheme::ALL.to_vec(),
            dimensions: AffectDimension::ALL.to_vec(),
            classifiers: ClassifierKind::ALL.to_vec(),
            seed: 42,
            jobs: 0,
            histogram_bins: 20,
            trim_baseline_s: 0.0,
            hoc_order: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct LabelingSection {
    pub contiguous_boundaries: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FoldsSection {
    pub k: usize,
    pub stratified: bool,
    pub subject_grouped: bool,
}

impl Default for FoldsSection {
    fn default() -> Self {
        Self { k: 10, stratified: true, subject_grouped: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    /// `None` keeps the band default `min(1 Hz, 0.5 × low edge)`.
    pub transition_hz: Option<f64>,
    pub passband_ripple_db: f64,
    pub stopband_atten_db: f64,
    pub max_taps: usize,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self {
            transition_hz: None,
            passband_ripple_db: 1.0,
            stopband_atten_db: 40.0,
            max_taps: DEFAULT_MAX_TAPS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub c: f64,
    pub n_trees: usize,
    /// 0 means ⌊√n_features⌋.
    pub mtry: usize,
    pub min_leaf: usize,
    pub bootstrap: bool,
    pub max_epochs: usize,
    pub tolerance: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            c: 1.0,
            n_trees: 500,
            mtry: 0,
            min_leaf: 1,
            bootstrap: true,
            max_epochs: 1000,
            tolerance: 1e-4,
        }
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let config: PipelineConfig =
            toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.dataset.path.exists() {
            return Err(ConfigError::Invalid(format!(
                "dataset path {} does not exist",
                self.dataset.path.display()
            )));
        }
        let p = &self.pipeline;
        if p.channels.is_empty()
            || p.methods.is_empty()
            || p.schemes.is_empty()
            || p.dimensions.is_empty()
            || p.classifiers.is_empty()
        {
            return Err(ConfigError::Invalid(
                "channels, methods, schemes, dimensions, and classifiers must be non-empty".into(),
            ));
        }
        if p.histogram_bins < 2 {
            return Err(ConfigError::Invalid("histogram_bins must be at least 2".into()));
        }
        if p.hoc_order < 1 {
            return Err(ConfigError::Invalid("hoc_order must be at least 1".into()));
        }
        if self.folds.k < 2 {
            return Err(ConfigError::Invalid("folds.k must be at least 2".into()));
        }
        if self.train.n_trees < 1 || self.train.min_leaf < 1 || self.train.c.is_nan() || self.train.c <= 0.0 {
            return Err(ConfigError::Invalid(
                "train.n_trees, train.min_leaf must be >= 1 and train.c > 0".into(),
            ));
        }
        Ok(())
    }

    /// The filter spec to design for one band at the dataset's sample rate.
    pub fn filter_spec(&self, band: BandName, sample_rate_hz: f64) -> FilterSpec {
        let mut spec = FilterSpec::default_for(band, sample_rate_hz);
        if let Some(over) = self.filters.get(&band) {
            if let Some(t) = over.transition_hz {
                spec.transition_hz = t;
            }
            spec.passband_ripple_db = over.passband_ripple_db;
            spec.stopband_atten_db = over.stopband_atten_db;
            spec.max_taps = over.max_taps;
        }
        spec
    }
}
