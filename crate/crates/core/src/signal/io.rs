//! Canonical on-disk dataset format.
//!
//! A dataset directory holds `manifest.json` plus one raw data file per
//! trial: row-major float32 little-endian, shape `channels × n_samples`, no
//! header. The manifest pins the format version, sample rate, sample count,
//! the shared channel list, and the trial table with ratings.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ChannelId, Dataset, Ratings, SignalError, TrialKey, TrialRecording};

/// Current canonical format version.
pub const FORMAT_VERSION: &str = "1";

/// `manifest.json` contents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: String,
    pub source: String,
    pub sample_rate_hz: f64,
    pub n_samples: usize,
    pub channels: Vec<ChannelId>,
    pub trials: Vec<ManifestTrial>,
}

/// One row of the manifest trial table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestTrial {
    pub subject_id: u32,
    pub trial_id: u32,
    pub file: String,
    pub valence: f64,
    pub arousal: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub liking: Option<f64>,
}

/// Loads a canonical dataset directory, validating every invariant.
///
/// `expected_format` is the manifest `format_version` the caller supports
/// (use [`FORMAT_VERSION`]). Trials load in parallel; the result is ordered
/// by `(subject_id, trial_id)` regardless of completion order.
pub fn load_dataset(root: &Path, expected_format: &str) -> Result<Dataset, SignalError> {
    let manifest_path = root.join("manifest.json");
    if !manifest_path.is_file() {
        return Err(SignalError::MissingManifest(manifest_path.display().to_string()));
    }
    let manifest: DatasetManifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)
        .map_err(|e| SignalError::ManifestParse(e.to_string()))?;
    if manifest.format_version != expected_format {
        return Err(SignalError::UnsupportedFormat {
            expected: expected_format.to_string(),
            got: manifest.format_version.clone(),
        });
    }

    let trials: Vec<(TrialRecording, Ratings)> = manifest
        .trials
        .par_iter()
        .map(|entry| load_trial(root, &manifest, entry))
        .collect::<Result<_, _>>()?;

    Dataset::new(trials, manifest.source.clone())
}

fn load_trial(
    root: &Path,
    manifest: &DatasetManifest,
    entry: &ManifestTrial,
) -> Result<(TrialRecording, Ratings), SignalError> {
    let key = TrialKey::new(entry.subject_id, entry.trial_id);
    let bytes = fs::read(root.join(&entry.file))?;
    let expected_len = manifest.channels.len() * manifest.n_samples * 4;
    if bytes.len() != expected_len {
        // Report the first channel that cannot be fully read.
        let have = bytes.len() / 4;
        let short_channel = (have / manifest.n_samples).min(manifest.channels.len() - 1);
        return Err(SignalError::DimensionMismatch {
            key,
            channel: manifest.channels[short_channel],
            expected: manifest.n_samples,
            got: have - short_channel * manifest.n_samples,
        });
    }

    let mut channels = Vec::with_capacity(manifest.channels.len());
    for (ci, ch) in manifest.channels.iter().enumerate() {
        let start = ci * manifest.n_samples * 4;
        let samples: Vec<f64> = bytes[start..start + manifest.n_samples * 4]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(SignalError::NonFiniteSample { key, channel: *ch });
        }
        channels.push((*ch, samples));
    }

    let trial = TrialRecording::new(
        entry.subject_id,
        entry.trial_id,
        manifest.sample_rate_hz,
        channels,
    )?;
    let ratings = Ratings {
        valence: entry.valence,
        arousal: entry.arousal,
        dominance: entry.dominance,
        liking: entry.liking,
    }
    .validated()?;
    Ok((trial, ratings))
}

/// Writes a dataset in the canonical format.
///
/// All trials must share one channel list and sample count (the manifest
/// declares them once). Samples are stored as float32; a dataset that has
/// been through the format once therefore round-trips bit-identically.
pub fn write_dataset(dataset: &Dataset, root: &Path) -> Result<(), SignalError> {
    let (first, _) = dataset
        .trials()
        .first()
        .ok_or(SignalError::TooFewSamples)?;
    let channels = first.channel_ids();
    let n_samples = first.n_samples();
    let sample_rate_hz = first.sample_rate_hz();

    fs::create_dir_all(root)?;
    let mut entries = Vec::with_capacity(dataset.len());
    for (trial, ratings) in dataset.trials() {
        if trial.channel_ids() != channels {
            return Err(SignalError::ManifestChannelMismatch(format!(
                "trial {} has a different channel list",
                trial.key()
            )));
        }
        if trial.n_samples() != n_samples {
            return Err(SignalError::DimensionMismatch {
                key: trial.key(),
                channel: channels[0],
                expected: n_samples,
                got: trial.n_samples(),
            });
        }
        let file = format!("{}.dat", trial.key());
        let mut bytes = Vec::with_capacity(channels.len() * n_samples * 4);
        for (_, samples) in trial.channels() {
            for s in samples {
                bytes.extend_from_slice(&(*s as f32).to_le_bytes());
            }
        }
        fs::write(root.join(&file), bytes)?;
        entries.push(ManifestTrial {
            subject_id: trial.subject_id(),
            trial_id: trial.trial_id(),
            file,
            valence: ratings.valence,
            arousal: ratings.arousal,
            dominance: ratings.dominance,
            liking: ratings.liking,
        });
    }

    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION.to_string(),
        source: dataset.source.clone(),
        sample_rate_hz,
        n_samples,
        channels,
        trials: entries,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| SignalError::ManifestParse(e.to_string()))?;
    fs::write(root.join("manifest.json"), json + "\n")?;
    Ok(())
}
