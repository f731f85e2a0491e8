//! Feature extraction: statistical descriptors, per-band log power, and
//! Higher Order Crossing sequences.
//!
//! Every extractor produces a [`FeatureVector`] whose layout — one
//! `(channel, band, feature)` descriptor per value — is a deterministic
//! function of the channels and bands involved: channels enumerate in
//! [`ChannelId`] order, bands in [`BandName`] order. For the default
//! four-channel selection this gives 24 values for time-domain statistics,
//! 96 for per-band statistics, 16 for band power, and 24 for HOC.

mod table;

pub use table::{read_feature_table, write_feature_table};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bands::BandName;
use crate::filter::BandDecomposition;
use crate::signal::{center, ChannelId, TrialRecording};

/// Default maximum HOC order.
pub const DEFAULT_HOC_ORDER: usize = 6;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("signal too short: {len} samples, need at least {need}")]
    SignalTooShort { len: usize, need: usize },
    #[error("degenerate signal (zero variance){}", fmt_channel(.channel))]
    DegenerateSignal { channel: Option<ChannelId> },
    #[error("missing band signal for ({0}, {1})")]
    MissingBandSignal(ChannelId, BandName),
    #[error("band ({0}, {1}) has zero power; log-power undefined")]
    ZeroPowerBand(ChannelId, BandName),
    #[error("feature table: {0}")]
    Table(String),
}

fn fmt_channel(ch: &Option<ChannelId>) -> String {
    match ch {
        Some(c) => format!(" in channel {c}"),
        None => String::new(),
    }
}

/// The six descriptive statistics of one signal, in microvolts where
/// dimensional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatFeatures {
    /// Mean.
    pub mu: f64,
    /// Population standard deviation.
    pub sigma: f64,
    /// Mean absolute first difference.
    pub afd: f64,
    /// AFD divided by sigma.
    pub afd_norm: f64,
    /// Mean absolute second (skip-one) difference.
    pub asd: f64,
    /// ASD divided by sigma.
    pub asd_norm: f64,
}

impl StatFeatures {
    fn as_array(&self) -> [f64; 6] {
        [self.mu, self.sigma, self.afd, self.afd_norm, self.asd, self.asd_norm]
    }
}

/// Zero-crossing counts of the successively differenced signal, orders
/// `1..=K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HocSequence {
    pub d: Vec<u64>,
}

/// Which extractor produced a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMethod {
    StatsTime,
    StatsBand,
    Spd,
    Hoc,
}

impl FeatureMethod {
    pub const ALL: [FeatureMethod; 4] = [
        FeatureMethod::StatsTime,
        FeatureMethod::StatsBand,
        FeatureMethod::Spd,
        FeatureMethod::Hoc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FeatureMethod::StatsTime => "stats_time",
            FeatureMethod::StatsBand => "stats_band",
            FeatureMethod::Spd => "spd",
            FeatureMethod::Hoc => "hoc",
        }
    }
}

impl fmt::Display for FeatureMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureMethod::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown feature method `{s}`"))
    }
}

/// Names one scalar inside a feature vector: channel, optional band, and the
/// feature itself. Rendered as `Fp1.alpha.sigma` / `F3.hoc.D4` / `Fp2.time.mu`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub channel: ChannelId,
    pub band: Option<BandName>,
    pub feature: String,
}

impl FeatureDescriptor {
    fn render(&self, method: FeatureMethod) -> String {
        let middle = match self.band {
            Some(b) => b.name(),
            None => match method {
                FeatureMethod::Hoc => "hoc",
                _ => "time",
            },
        };
        format!("{}.{}.{}", self.channel, middle, self.feature)
    }
}

/// A flat real vector with a self-describing layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub method: FeatureMethod,
    pub values: Vec<f64>,
    pub layout: Vec<FeatureDescriptor>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Column headers for CSV serialization, one per value.
    pub fn column_names(&self) -> Vec<String> {
        self.layout.iter().map(|d| d.render(self.method)).collect()
    }

    /// Restricts the vector to the descriptors `keep` accepts, preserving
    /// order. Used for band-subset experiments.
    pub fn select(&self, keep: impl Fn(&FeatureDescriptor) -> bool) -> FeatureVector {
        let mut values = Vec::new();
        let mut layout = Vec::new();
        for (v, d) in self.values.iter().zip(&self.layout) {
            if keep(d) {
                values.push(*v);
                layout.push(d.clone());
            }
        }
        FeatureVector { method: self.method, values, layout }
    }
}

const STAT_NAMES: [&str; 6] = ["mu", "sigma", "afd", "afd_norm", "asd", "asd_norm"];

/// The six descriptive statistics of one signal: mean, population standard
/// deviation, mean absolute first difference, its sigma-normalized variant,
/// mean absolute skip-one second difference, and its sigma-normalized
/// variant.
pub fn stat_features(signal: &[f64]) -> Result<StatFeatures, FeatureError> {
    stat_features_tagged(signal, None)
}

fn stat_features_tagged(
    signal: &[f64],
    channel: Option<ChannelId>,
) -> Result<StatFeatures, FeatureError> {
    let n = signal.len();
    if n < 3 {
        return Err(FeatureError::SignalTooShort { len: n, need: 3 });
    }
    let mu = signal.iter().sum::<f64>() / n as f64;
    let sigma = (signal.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n as f64).sqrt();
    let afd = signal.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (n - 1) as f64;
    let asd = signal.windows(3).map(|w| (w[2] - w[0]).abs()).sum::<f64>() / (n - 2) as f64;
    if sigma == 0.0 {
        return Err(FeatureError::DegenerateSignal { channel });
    }
    Ok(StatFeatures {
        mu,
        sigma,
        afd,
        afd_norm: afd / sigma,
        asd,
        asd_norm: asd / sigma,
    })
}

/// Channels of a trial in layout order.
fn layout_channels(trial: &TrialRecording) -> Vec<ChannelId> {
    let mut ids = trial.channel_ids();
    ids.sort();
    ids
}

/// Time-domain statistics of every channel: layout `[channel × 6 statistics]`.
pub fn time_stat_vector(trial: &TrialRecording) -> Result<FeatureVector, FeatureError> {
    let mut values = Vec::new();
    let mut layout = Vec::new();
    for ch in layout_channels(trial) {
        let stats =
            stat_features_tagged(trial.samples(ch).expect("channel from trial"), Some(ch))?;
        values.extend(stats.as_array());
        layout.extend(STAT_NAMES.iter().map(|name| FeatureDescriptor {
            channel: ch,
            band: None,
            feature: (*name).to_string(),
        }));
    }
    Ok(FeatureVector { method: FeatureMethod::StatsTime, values, layout })
}

/// Channels present in a decomposition, in layout order, with every band
/// required per channel.
fn decomposition_channels(bands: &BandDecomposition) -> Result<Vec<ChannelId>, FeatureError> {
    let mut channels: Vec<ChannelId> = bands.keys().map(|(c, _)| *c).collect();
    channels.dedup();
    for &ch in &channels {
        for band in BandName::ALL {
            if !bands.contains_key(&(ch, band)) {
                return Err(FeatureError::MissingBandSignal(ch, band));
            }
        }
    }
    Ok(channels)
}

/// Per-band statistics: layout `[channel × band × 6 statistics]`.
pub fn band_stat_vector(bands: &BandDecomposition) -> Result<FeatureVector, FeatureError> {
    let channels = decomposition_channels(bands)?;
    let mut values = Vec::new();
    let mut layout = Vec::new();
    for &ch in &channels {
        for band in BandName::ALL {
            let stats = stat_features_tagged(&bands[&(ch, band)].samples, Some(ch))?;
            values.extend(stats.as_array());
            layout.extend(STAT_NAMES.iter().map(|name| FeatureDescriptor {
                channel: ch,
                band: Some(band),
                feature: (*name).to_string(),
            }));
        }
    }
    Ok(FeatureVector { method: FeatureMethod::StatsBand, values, layout })
}

/// Log10 mean-square band power: layout `[channel × band]`.
pub fn spd_vector(bands: &BandDecomposition) -> Result<FeatureVector, FeatureError> {
    let channels = decomposition_channels(bands)?;
    let mut values = Vec::new();
    let mut layout = Vec::new();
    for &ch in &channels {
        for band in BandName::ALL {
            let samples = &bands[&(ch, band)].samples;
            let mean_sq = samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64;
            if mean_sq == 0.0 {
                return Err(FeatureError::ZeroPowerBand(ch, band));
            }
            values.push(mean_sq.log10());
            layout.push(FeatureDescriptor {
                channel: ch,
                band: Some(band),
                feature: "spd".to_string(),
            });
        }
    }
    Ok(FeatureVector { method: FeatureMethod::Spd, values, layout })
}

/// Applies the first-difference operator `k−1` times (`k = 1` is identity).
pub fn difference_series(signal: &[f64], k: usize) -> Result<Vec<f64>, FeatureError> {
    assert!(k >= 1, "difference order starts at 1");
    if signal.len() < k {
        return Err(FeatureError::SignalTooShort { len: signal.len(), need: k });
    }
    let mut series = signal.to_vec();
    for _ in 1..k {
        series = series.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(series)
}

/// Counts sign changes of the binary-clipped signal (`x ≥ 0` maps to 1).
pub fn count_zero_crossings(signal: &[f64]) -> Result<u64, FeatureError> {
    if signal.len() < 2 {
        return Err(FeatureError::SignalTooShort { len: signal.len(), need: 2 });
    }
    Ok(signal
        .windows(2)
        .filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0))
        .count() as u64)
}

/// HOC sequence of a signal: centers once, then counts zero crossings of the
/// order-1..K difference cascade.
pub fn hoc_sequence(signal: &[f64], max_order: usize) -> Result<HocSequence, FeatureError> {
    if signal.len() < max_order + 1 {
        return Err(FeatureError::SignalTooShort { len: signal.len(), need: max_order + 1 });
    }
    let centered = center(signal).expect("length checked above");
    let mut d = Vec::with_capacity(max_order);
    let mut series = centered;
    for k in 1..=max_order {
        if k > 1 {
            series = series.windows(2).map(|w| w[1] - w[0]).collect();
        }
        d.push(count_zero_crossings(&series)?);
    }
    Ok(HocSequence { d })
}

/// HOC features of every channel: layout `[channel × D1..DK]`, counts as reals.
pub fn hoc_vector(trial: &TrialRecording, max_order: usize) -> Result<FeatureVector, FeatureError> {
    let mut values = Vec::new();
    let mut layout = Vec::new();
    for ch in layout_channels(trial) {
        let seq = hoc_sequence(trial.samples(ch).expect("channel from trial"), max_order)?;
        values.extend(seq.d.iter().map(|&c| c as f64));
        layout.extend((1..=max_order).map(|k| FeatureDescriptor {
            channel: ch,
            band: None,
            feature: format!("D{k}"),
        }));
    }
    Ok(FeatureVector { method: FeatureMethod::Hoc, values, layout })
}
