//! Class-conditional synthesis recipes: each class gets a band component
//! template and a fixed rating, trials alternate across classes, and noise
//! is scaled to a target SNR.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use affekt::filter::BandName;
use affekt::signal::{synth_trial, ChannelId, Dataset, Ratings, SynthComponent, SynthSpec};

#[derive(Debug, Error)]
pub enum RecipeError {
    #[error("unknown built-in recipe `{0}`")]
    UnknownRecipe(String),
    #[error("cannot read recipe {0}: {1}")]
    Read(String, std::io::Error),
    #[error("recipe parse error: {0}")]
    Parse(String),
    #[error("invalid recipe: {0}")]
    Invalid(String),
    #[error(transparent)]
    Signal(#[from] affekt::signal::SignalError),
}

/// One class of trials: a single band component plus its SAM rating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecipeClass {
    pub rating: f64,
    pub band: BandName,
    pub freq_hz: f64,
}

/// A full synthesis recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthRecipe {
    pub name: String,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub amplitude_uv: f64,
    pub snr_db: f64,
    pub channels: Vec<ChannelId>,
    pub classes: Vec<RecipeClass>,
    /// Trials per synthetic subject, for subject-grouped fold studies.
    pub trials_per_subject: u32,
}

impl Default for SynthRecipe {
    fn default() -> Self {
        Self {
            name: "alpha-vs-beta".into(),
            duration_s: 10.0,
            sample_rate_hz: 128.0,
            amplitude_uv: 20.0,
            snr_db: 0.0,
            channels: ChannelId::SELECTED.to_vec(),
            classes: vec![
                RecipeClass { rating: 2.0, band: BandName::Alpha, freq_hz: 10.0 },
                RecipeClass { rating: 8.0, band: BandName::Beta, freq_hz: 20.0 },
            ],
            trials_per_subject: 40,
        }
    }
}

impl SynthRecipe {
    /// Looks up a built-in recipe by name.
    pub fn builtin(name: &str) -> Result<Self, RecipeError> {
        match name {
            "alpha-vs-beta" => Ok(Self::default()),
            other => Err(RecipeError::UnknownRecipe(other.to_string())),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, RecipeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RecipeError::Read(path.display().to_string(), e))?;
        let recipe: SynthRecipe =
            toml::from_str(&text).map_err(|e| RecipeError::Parse(e.to_string()))?;
        recipe.validate()?;
        Ok(recipe)
    }

    fn validate(&self) -> Result<(), RecipeError> {
        if self.classes.is_empty() {
            return Err(RecipeError::Invalid("recipe needs at least one class".into()));
        }
        if self.amplitude_uv.is_nan() || self.amplitude_uv <= 0.0 {
            return Err(RecipeError::Invalid("amplitude must be positive".into()));
        }
        if self.trials_per_subject == 0 {
            return Err(RecipeError::Invalid("trials_per_subject must be >= 1".into()));
        }
        Ok(())
    }

    /// Noise sigma giving the configured SNR against one component's power.
    fn noise_sigma(&self) -> f64 {
        let signal_power = self.amplitude_uv * self.amplitude_uv / 2.0;
        (signal_power / 10f64.powf(self.snr_db / 10.0)).sqrt()
    }

    /// Generates `n_trials` rated trials, cycling classes so labels stay
    /// balanced. Deterministic given `seed`.
    pub fn generate(&self, n_trials: u32, seed: u64) -> Result<Dataset, RecipeError> {
        self.validate()?;
        if n_trials == 0 {
            return Err(RecipeError::Invalid("n_trials must be >= 1".into()));
        }
        let sigma = self.noise_sigma();
        let mut trials = Vec::with_capacity(n_trials as usize);
        for t in 0..n_trials {
            let class = &self.classes[(t as usize) % self.classes.len()];
            let spec = SynthSpec {
                duration_s: self.duration_s,
                sample_rate_hz: self.sample_rate_hz,
                channels: self.channels.clone(),
                components: vec![SynthComponent {
                    band: class.band,
                    amplitude_uv: self.amplitude_uv,
                    freq_hz: class.freq_hz,
                }],
                noise_sigma: sigma,
                seed: affekt::seed::mix(seed, t as u64),
            };
            let subject_id = t / self.trials_per_subject + 1;
            let trial_id = t % self.trials_per_subject + 1;
            let trial = synth_trial(&spec, subject_id, trial_id)?;
            let ratings = Ratings::new(class.rating, class.rating)?;
            trials.push((trial, ratings));
        }
        Ok(Dataset::new(trials, format!("synth:{} seed={seed} snr={}dB", self.name, self.snr_db))?)
    }
}
