//! Core EEG data types, canonical dataset I/O, channel selection, and a
//! seeded synthetic-EEG generator.
//!
//! A [`TrialRecording`] is one subject/trial segment of multi-channel EEG in
//! microvolts. Trials pair with SAM [`Ratings`] inside a [`Dataset`], which
//! round-trips through the canonical on-disk format (JSON manifest plus one
//! raw float32 matrix per trial, see [`io`]).

mod io;
mod synth;

pub use io::{load_dataset, write_dataset, DatasetManifest, ManifestTrial, FORMAT_VERSION};
pub use synth::{synth_trial, SynthComponent, SynthSpec};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Highest band edge handled by the toolkit (beta top, Hz). Trials must be
/// sampled above twice this.
pub const MAX_BAND_EDGE_HZ: f64 = 30.0;

/// 10–20-system electrode labels.
///
/// The first four variants are the channels the pipeline classifies from;
/// the declaration order defines `Ord` and therefore the channel order of
/// every feature-vector layout. The remaining labels cover the 32-channel
/// recording montage used by the benchmark EEG datasets this toolkit ingests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(missing_docs)]
pub enum ChannelId {
    Fp1,
    Fp2,
    F3,
    F4,
    AF3,
    AF4,
    F7,
    F8,
    Fz,
    FC1,
    FC2,
    FC5,
    FC6,
    C3,
    C4,
    Cz,
    T7,
    T8,
    CP1,
    CP2,
    CP5,
    CP6,
    P3,
    P4,
    P7,
    P8,
    Pz,
    PO3,
    PO4,
    O1,
    O2,
    Oz,
}

impl ChannelId {
    /// The four frontal/pre-frontal channels the pipeline selects by default.
    pub const SELECTED: [ChannelId; 4] = [ChannelId::Fp1, ChannelId::Fp2, ChannelId::F3, ChannelId::F4];

    /// All known labels, in layout (`Ord`) order.
    pub const ALL: [ChannelId; 32] = [
        ChannelId::Fp1,
        ChannelId::Fp2,
        ChannelId::F3,
        ChannelId::F4,
        ChannelId::AF3,
        ChannelId::AF4,
        ChannelId::F7,
        ChannelId::F8,
        ChannelId::Fz,
        ChannelId::FC1,
        ChannelId::FC2,
        ChannelId::FC5,
        ChannelId::FC6,
        ChannelId::C3,
        ChannelId::C4,
        ChannelId::Cz,
        ChannelId::T7,
        ChannelId::T8,
        ChannelId::CP1,
        ChannelId::CP2,
        ChannelId::CP5,
        ChannelId::CP6,
        ChannelId::P3,
        ChannelId::P4,
        ChannelId::P7,
        ChannelId::P8,
        ChannelId::Pz,
        ChannelId::PO3,
        ChannelId::PO4,
        ChannelId::O1,
        ChannelId::O2,
        ChannelId::Oz,
    ];

    /// Electrode label as written in the 10–20 system.
    pub fn name(&self) -> &'static str {
        match self {
            ChannelId::Fp1 => "Fp1",
            ChannelId::Fp2 => "Fp2",
            ChannelId::F3 => "F3",
            ChannelId::F4 => "F4",
            ChannelId::AF3 => "AF3",
            ChannelId::AF4 => "AF4",
            ChannelId::F7 => "F7",
            ChannelId::F8 => "F8",
            ChannelId::Fz => "Fz",
            ChannelId::FC1 => "FC1",
            ChannelId::FC2 => "FC2",
            ChannelId::FC5 => "FC5",
            ChannelId::FC6 => "FC6",
            ChannelId::C3 => "C3",
            ChannelId::C4 => "C4",
            ChannelId::Cz => "Cz",
            ChannelId::T7 => "T7",
            ChannelId::T8 => "T8",
            ChannelId::CP1 => "CP1",
            ChannelId::CP2 => "CP2",
            ChannelId::CP5 => "CP5",
            ChannelId::CP6 => "CP6",
            ChannelId::P3 => "P3",
            ChannelId::P4 => "P4",
            ChannelId::P7 => "P7",
            ChannelId::P8 => "P8",
            ChannelId::Pz => "Pz",
            ChannelId::PO3 => "PO3",
            ChannelId::PO4 => "PO4",
            ChannelId::O1 => "O1",
            ChannelId::O2 => "O2",
            ChannelId::Oz => "Oz",
        }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelId {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChannelId::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| SignalError::UnknownChannel(s.to_string()))
    }
}

/// Identifies one trial of one subject within a dataset.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct TrialKey {
    pub subject_id: u32,
    pub trial_id: u32,
}

impl TrialKey {
    pub fn new(subject_id: u32, trial_id: u32) -> Self {
        Self { subject_id, trial_id }
    }
}

impl fmt::Display for TrialKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{:02}_t{:02}", self.subject_id, self.trial_id)
    }
}

/// Errors from dataset construction, I/O, and signal-level operations.
#[derive(Debug, Error)]
pub enum SignalError {
    #[error("unknown channel label `{0}`")]
    UnknownChannel(String),
    #[error("duplicate channel {0} in trial")]
    DuplicateChannel(ChannelId),
    #[error("channel {0} not found in trial")]
    ChannelNotFound(ChannelId),
    #[error("trial {key}: channel {channel} has {got} samples, expected {expected}")]
    DimensionMismatch {
        key: TrialKey,
        channel: ChannelId,
        expected: usize,
        got: usize,
    },
    #[error("trial must contain at least one channel with at least 2 samples")]
    TooFewSamples,
    #[error("sample rate {0} Hz is not above twice the highest band edge (30 Hz)")]
    SampleRateTooLow(f64),
    #[error("non-finite sample in trial {key}, channel {channel}")]
    NonFiniteSample { key: TrialKey, channel: ChannelId },
    #[error("{0} rating {1} outside [1, 9]")]
    RatingOutOfRange(&'static str, f64),
    #[error("subject/trial ids must be >= 1")]
    InvalidTrialKey,
    #[error("duplicate trial key {0}")]
    DuplicateTrialKey(TrialKey),
    #[error("empty signal")]
    EmptySignal,
    #[error("manifest not found at {0}")]
    MissingManifest(String),
    #[error("unsupported dataset format `{got}`, expected `{expected}`")]
    UnsupportedFormat { expected: String, got: String },
    #[error("manifest channel list mismatch: {0}")]
    ManifestChannelMismatch(String),
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
    #[error("baseline of {baseline_s} s is not shorter than the trial ({trial_s} s)")]
    BaselineTooLong { baseline_s: f64, trial_s: f64 },
    #[error("manifest parse error: {0}")]
    ManifestParse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One subject/trial multi-channel EEG segment, in microvolts.
///
/// Channel order is preserved exactly as constructed; all channels carry the
/// same number of samples. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecording {
    subject_id: u32,
    trial_id: u32,
    sample_rate_hz: f64,
    channels: Vec<(ChannelId, Vec<f64>)>,
}

impl TrialRecording {
    /// Validates and builds a trial. The channel vectors must be equal-length
    /// (≥ 2), finite, and free of duplicate labels; the sample rate must
    /// exceed twice the highest band edge.
    pub fn new(
        subject_id: u32,
        trial_id: u32,
        sample_rate_hz: f64,
        channels: Vec<(ChannelId, Vec<f64>)>,
    ) -> Result<Self, SignalError> {
        if subject_id < 1 || trial_id < 1 {
            return Err(SignalError::InvalidTrialKey);
        }
        if sample_rate_hz.is_nan() || sample_rate_hz <= 2.0 * MAX_BAND_EDGE_HZ {
            return Err(SignalError::SampleRateTooLow(sample_rate_hz));
        }
        let key = TrialKey::new(subject_id, trial_id);
        let n = match channels.first() {
            Some((_, v)) => v.len(),
            None => return Err(SignalError::TooFewSamples),
        };
        if n < 2 {
            return Err(SignalError::TooFewSamples);
        }
        let mut seen = BTreeSet::new();
        for (ch, samples) in &channels {
            if !seen.insert(*ch) {
                return Err(SignalError::DuplicateChannel(*ch));
            }
            if samples.len() != n {
                return Err(SignalError::DimensionMismatch {
                    key,
                    channel: *ch,
                    expected: n,
                    got: samples.len(),
                });
            }
            if samples.iter().any(|s| !s.is_finite()) {
                return Err(SignalError::NonFiniteSample { key, channel: *ch });
            }
        }
        Ok(Self { subject_id, trial_id, sample_rate_hz, channels })
    }

    pub fn key(&self) -> TrialKey {
        TrialKey::new(self.subject_id, self.trial_id)
    }

    pub fn subject_id(&self) -> u32 {
        self.subject_id
    }

    pub fn trial_id(&self) -> u32 {
        self.trial_id
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Number of samples per channel.
    pub fn n_samples(&self) -> usize {
        self.channels[0].1.len()
    }

    /// Channel labels in trial order.
    pub fn channel_ids(&self) -> Vec<ChannelId> {
        self.channels.iter().map(|(c, _)| *c).collect()
    }

    /// Channels with their sample vectors, in trial order.
    pub fn channels(&self) -> &[(ChannelId, Vec<f64>)] {
        &self.channels
    }

    /// Sample vector for one channel.
    pub fn samples(&self, channel: ChannelId) -> Result<&[f64], SignalError> {
        self.channels
            .iter()
            .find(|(c, _)| *c == channel)
            .map(|(_, v)| v.as_slice())
            .ok_or(SignalError::ChannelNotFound(channel))
    }

    /// Drops the first `baseline_s` seconds of every channel.
    pub fn trim_baseline(&self, baseline_s: f64) -> Result<TrialRecording, SignalError> {
        let skip = (baseline_s * self.sample_rate_hz).round() as usize;
        if skip + 2 > self.n_samples() {
            return Err(SignalError::BaselineTooLong {
                baseline_s,
                trial_s: self.n_samples() as f64 / self.sample_rate_hz,
            });
        }
        let channels = self
            .channels
            .iter()
            .map(|(c, v)| (*c, v[skip..].to_vec()))
            .collect();
        TrialRecording::new(self.subject_id, self.trial_id, self.sample_rate_hz, channels)
    }
}

/// Self-reported affect ratings on the SAM 1–9 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratings {
    pub valence: f64,
    pub arousal: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub liking: Option<f64>,
}

impl Ratings {
    pub fn new(valence: f64, arousal: f64) -> Result<Self, SignalError> {
        Self {
            valence,
            arousal,
            dominance: None,
            liking: None,
        }
        .validated()
    }

    /// Checks every present rating against the [1, 9] scale.
    pub fn validated(self) -> Result<Self, SignalError> {
        fn check(name: &'static str, r: f64) -> Result<(), SignalError> {
            if !(1.0..=9.0).contains(&r) {
                return Err(SignalError::RatingOutOfRange(name, r));
            }
            Ok(())
        }
        check("valence", self.valence)?;
        check("arousal", self.arousal)?;
        if let Some(d) = self.dominance {
            check("dominance", d)?;
        }
        if let Some(l) = self.liking {
            check("liking", l)?;
        }
        Ok(self)
    }
}

/// A full collection of rated trials, ordered by `(subject_id, trial_id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    trials: Vec<(TrialRecording, Ratings)>,
    /// Free-form provenance note carried into reports.
    pub source: String,
}

impl Dataset {
    /// Builds a dataset, sorting trials by key and rejecting duplicates.
    pub fn new(
        mut trials: Vec<(TrialRecording, Ratings)>,
        source: impl Into<String>,
    ) -> Result<Self, SignalError> {
        trials.sort_by_key(|(t, _)| t.key());
        for pair in trials.windows(2) {
            if pair[0].0.key() == pair[1].0.key() {
                return Err(SignalError::DuplicateTrialKey(pair[0].0.key()));
            }
        }
        for (_, r) in &trials {
            r.validated()?;
        }
        Ok(Self { trials, source: source.into() })
    }

    pub fn trials(&self) -> &[(TrialRecording, Ratings)] {
        &self.trials
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn ratings(&self) -> Vec<(TrialKey, Ratings)> {
        self.trials.iter().map(|(t, r)| (t.key(), *r)).collect()
    }
}

/// Restricts a trial to `wanted` channels, in the given order, data
/// bit-identical.
pub fn select_channels(
    trial: &TrialRecording,
    wanted: &[ChannelId],
) -> Result<TrialRecording, SignalError> {
    let mut channels = Vec::with_capacity(wanted.len());
    for ch in wanted {
        channels.push((*ch, trial.samples(*ch)?.to_vec()));
    }
    TrialRecording::new(trial.subject_id, trial.trial_id, trial.sample_rate_hz, channels)
}

/// Subtracts the arithmetic mean from a signal.
pub fn center(signal: &[f64]) -> Result<Vec<f64>, SignalError> {
    if signal.is_empty() {
        return Err(SignalError::EmptySignal);
    }
    let mean = signal.iter().sum::<f64>() / signal.len() as f64;
    Ok(signal.iter().map(|x| x - mean).collect())
}
