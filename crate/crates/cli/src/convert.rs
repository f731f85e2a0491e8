//! CSV → canonical dataset conversion.
//!
//! Input layout: a directory holding `ratings.csv` with columns
//! `subject_id,trial_id,file,valence,arousal[,dominance][,liking]` and, per
//! trial, the CSV file that row names — one row per channel, one column per
//! sample, values in microvolts. Channel identity comes from the `--channels`
//! list, matched to row order.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use affekt::signal::{write_dataset, ChannelId, Dataset, Ratings, TrialRecording};

#[derive(Debug, Error)]
pub enum ConvertError {
    #[error("no trials found in {0} (missing or empty ratings.csv)")]
    NoTrials(PathBuf),
    #[error("{file}: {problem}")]
    BadRatings { file: PathBuf, problem: String },
    #[error("{file} line {line}: {problem}")]
    BadTrialData { file: PathBuf, line: usize, problem: String },
    #[error("{file}: expected {expected} channels, found {got} rows")]
    ChannelCountMismatch { file: PathBuf, expected: usize, got: usize },
    #[error(transparent)]
    Signal(#[from] affekt::signal::SignalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Deserialize)]
struct RatingsRow {
    subject_id: u32,
    trial_id: u32,
    file: String,
    valence: f64,
    arousal: f64,
    #[serde(default)]
    dominance: Option<f64>,
    #[serde(default)]
    liking: Option<f64>,
}

/// Reads a CSV trial directory and writes it as a canonical dataset.
/// Returns `(n_trials, n_channels, n_samples)`.
pub fn convert(
    input: &Path,
    output: &Path,
    channels: &[ChannelId],
    sample_rate_hz: f64,
) -> Result<(usize, usize, usize), ConvertError> {
    let ratings_path = input.join("ratings.csv");
    if !ratings_path.is_file() {
        return Err(ConvertError::NoTrials(input.to_path_buf()));
    }
    let mut reader = csv::Reader::from_path(&ratings_path).map_err(|e| ConvertError::BadRatings {
        file: ratings_path.clone(),
        problem: e.to_string(),
    })?;
    let rows: Vec<RatingsRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| ConvertError::BadRatings { file: ratings_path.clone(), problem: e.to_string() })?;
    if rows.is_empty() {
        return Err(ConvertError::NoTrials(input.to_path_buf()));
    }

    let mut trials = Vec::with_capacity(rows.len());
    for row in &rows {
        let trial_path = input.join(&row.file);
        let trial = read_trial_csv(&trial_path, row, channels, sample_rate_hz)?;
        let ratings = Ratings {
            valence: row.valence,
            arousal: row.arousal,
            dominance: row.dominance,
            liking: row.liking,
        }
        .validated()?;
        trials.push((trial, ratings));
    }

    let dataset = Dataset::new(trials, format!("converted from {}", input.display()))?;
    write_dataset(&dataset, output)?;
    let (first, _) = &dataset.trials()[0];
    Ok((dataset.len(), first.channel_ids().len(), first.n_samples()))
}

fn read_trial_csv(
    path: &Path,
    row: &RatingsRow,
    channels: &[ChannelId],
    sample_rate_hz: f64,
) -> Result<TrialRecording, ConvertError> {
    let text = std::fs::read_to_string(path)?;
    let mut data: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let samples: Vec<f64> = line
            .split(',')
            .enumerate()
            .map(|(col, field)| {
                field.trim().parse::<f64>().map_err(|_| ConvertError::BadTrialData {
                    file: path.to_path_buf(),
                    line: lineno + 1,
                    problem: format!("field {} (`{}`) is not a number", col + 1, field.trim()),
                })
            })
            .collect::<Result<_, _>>()?;
        if let Some(first) = data.first() {
            if samples.len() != first.len() {
                return Err(ConvertError::BadTrialData {
                    file: path.to_path_buf(),
                    line: lineno + 1,
                    problem: format!(
                        "ragged row: {} samples, previous rows have {}",
                        samples.len(),
                        first.len()
                    ),
                });
            }
        }
        data.push(samples);
    }
    if data.len() != channels.len() {
        return Err(ConvertError::ChannelCountMismatch {
            file: path.to_path_buf(),
            expected: channels.len(),
            got: data.len(),
        });
    }
    Ok(TrialRecording::new(
        row.subject_id,
        row.trial_id,
        sample_rate_hz,
        channels.iter().copied().zip(data).collect(),
    )?)
}
