//! Equiripple linear-phase FIR band-pass design and band decomposition.
//!
//! [`design_bandpass`] turns a [`FilterSpec`] into type-I [`FirCoefficients`]
//! by Remez exchange, estimating the order and incrementing it until the
//! ripple/attenuation targets verify on a dense response grid.
//! [`filter_signal`] applies a filter either zero-phase (forward–backward
//! with reflection padding, the default for feature extraction) or causally.
//! [`extract_bands`] decomposes a trial's channels into the four brainwave
//! bands.

mod remez;

pub use crate::bands::{BandDefinition, BandName};

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::{ChannelId, TrialRecording};
use remez::{remez_type1, RemezBand, RemezError};

/// Number of response samples used to verify a design against its spec.
pub const VERIFY_GRID_POINTS: usize = 8192;

/// Default upper bound on the designed filter length.
pub const DEFAULT_MAX_TAPS: usize = 4001;

/// Dense-grid density (points per reference node) for the exchange.
const GRID_DENSITY: usize = 16;

/// Remez iteration budget.
const MAX_EXCHANGE_ITERATIONS: usize = 100;

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("invalid filter spec: {0}")]
    InvalidSpec(String),
    #[error("spec infeasible: no design within {max_taps} taps meets it (best deviation pass={passband_dev:.3e} stop={stopband_dev:.3e})")]
    InfeasibleSpec {
        max_taps: usize,
        passband_dev: f64,
        stopband_dev: f64,
    },
    #[error("Remez exchange failed to converge within {0} iterations")]
    ConvergenceFailure(usize),
    #[error("frequency {0} Hz outside [0, fs/2]")]
    FrequencyOutOfRange(f64),
    #[error("signal of {len} samples is too short for a {taps}-tap filter")]
    SignalTooShort { len: usize, taps: usize },
    #[error("trial sampled at {trial_hz} Hz but filter designed for {filter_hz} Hz")]
    SampleRateMismatch { trial_hz: f64, filter_hz: f64 },
    #[error("filter bank must contain exactly one filter per band; {0}")]
    IncompleteBank(String),
    #[error("imported coefficients violate {0}")]
    InvalidCoefficients(String),
    #[error("bank file error: {0}")]
    BankFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Design targets for one band-pass filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub band: BandDefinition,
    pub transition_hz: f64,
    pub passband_ripple_db: f64,
    pub stopband_atten_db: f64,
    pub sample_rate_hz: f64,
    pub max_taps: usize,
}

impl FilterSpec {
    /// The default design for one band at `sample_rate_hz`: canonical band
    /// edges, 1 dB passband ripple, 40 dB stopband attenuation, transition
    /// width `min(1 Hz, 0.5 × low edge)`.
    pub fn default_for(band: BandName, sample_rate_hz: f64) -> Self {
        let band = BandDefinition::canonical(band);
        Self {
            transition_hz: (0.5 * band.low_hz).min(1.0),
            band,
            passband_ripple_db: 1.0,
            stopband_atten_db: 40.0,
            sample_rate_hz,
            max_taps: DEFAULT_MAX_TAPS,
        }
    }

    /// Default specs for all four bands, in band layout order.
    pub fn default_bank(sample_rate_hz: f64) -> Vec<FilterSpec> {
        BandName::ALL
            .iter()
            .map(|&b| FilterSpec::default_for(b, sample_rate_hz))
            .collect()
    }

    fn validate(&self) -> Result<(), FilterError> {
        let nyquist = self.sample_rate_hz / 2.0;
        let b = &self.band;
        if !(b.low_hz > 0.0 && b.low_hz < b.high_hz && b.high_hz < nyquist) {
            return Err(FilterError::InvalidSpec(format!(
                "band edges {}-{} Hz must satisfy 0 < low < high < fs/2",
                b.low_hz, b.high_hz
            )));
        }
        if self.transition_hz.is_nan() || self.transition_hz <= 0.0 {
            return Err(FilterError::InvalidSpec("transition width must be > 0".into()));
        }
        // A transition reaching exactly 0 Hz leaves no lower stopband, which
        // is a valid (if unusual) band-pass request.
        if b.low_hz - self.transition_hz < 0.0 || b.high_hz + self.transition_hz >= nyquist {
            return Err(FilterError::InvalidSpec(format!(
                "band edges ± transition ({}-{} Hz) must stay within [0, {nyquist})",
                b.low_hz - self.transition_hz,
                b.high_hz + self.transition_hz
            )));
        }
        if self.passband_ripple_db.is_nan()
            || self.passband_ripple_db <= 0.0
            || self.stopband_atten_db.is_nan()
            || self.stopband_atten_db <= 0.0
        {
            return Err(FilterError::InvalidSpec(
                "ripple and attenuation must be > 0 dB".into(),
            ));
        }
        Ok(())
    }

    /// Linear passband deviation bound δp for the configured ripple.
    pub fn passband_delta(&self) -> f64 {
        let rho = 10f64.powf(self.passband_ripple_db / 20.0);
        (rho - 1.0) / (rho + 1.0)
    }

    /// Linear stopband deviation bound δs for the configured attenuation.
    pub fn stopband_delta(&self) -> f64 {
        10f64.powf(-self.stopband_atten_db / 20.0)
    }
}

/// A designed linear-phase type-I filter.
///
/// Taps are exactly symmetric (`tap[i] == tap[L−1−i]`) with odd length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirCoefficients {
    pub taps: Vec<f64>,
    pub design_spec: FilterSpec,
    /// Largest measured |A−1| over the passband on the verification grid.
    pub passband_dev: f64,
    /// Largest measured |A| over both stopbands on the verification grid.
    pub stopband_dev: f64,
}

impl FirCoefficients {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    fn check_invariants(&self) -> Result<(), FilterError> {
        let l = self.taps.len();
        if l.is_multiple_of(2) || l < 3 {
            return Err(FilterError::InvalidCoefficients(format!(
                "tap count {l} (must be odd, >= 3)"
            )));
        }
        let scale = self.taps.iter().fold(0.0f64, |m, t| m.max(t.abs())).max(1.0);
        for i in 0..l / 2 {
            if (self.taps[i] - self.taps[l - 1 - i]).abs() > 1e-12 * scale {
                return Err(FilterError::InvalidCoefficients(format!(
                    "tap symmetry at index {i}"
                )));
            }
        }
        Ok(())
    }
}

/// How [`filter_signal`] applies a filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    /// Forward–backward application over a reflection-padded signal: no
    /// group delay, attenuation doubled in dB, output length = input length.
    ZeroPhase,
    /// Direct causal convolution: output delayed by (L−1)/2 samples, with
    /// the leading L−1 samples carrying the edge transient.
    Causal,
}

/// One channel of a trial filtered to one band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSignal {
    pub channel: ChannelId,
    pub band: BandName,
    pub samples: Vec<f64>,
}

/// All band signals of one trial, keyed by `(channel, band)`.
///
/// The map order (channel layout order, then band layout order) is the
/// order feature layouts enumerate.
pub type BandDecomposition = BTreeMap<(ChannelId, BandName), BandSignal>;

/// Designs an equiripple band-pass filter meeting `spec`.
///
/// The order starts at the Kaiser estimate and grows until the response
/// verifies on a [`VERIFY_GRID_POINTS`]-point grid (plus the exact band
/// edges), or the tap cap is exceeded.
pub fn design_bandpass(spec: &FilterSpec) -> Result<FirCoefficients, FilterError> {
    spec.validate()?;
    let fs = spec.sample_rate_hz;
    let delta_p = spec.passband_delta();
    let delta_s = spec.stopband_delta();

    let stop_low = spec.band.low_hz - spec.transition_hz;
    let stop_high = spec.band.high_hz + spec.transition_hz;
    let mut bands = Vec::with_capacity(3);
    if stop_low > 0.0 {
        bands.push(RemezBand { low: 0.0, high: stop_low / fs, desired: 0.0, weight: 1.0 / delta_s });
    }
    bands.push(RemezBand {
        low: spec.band.low_hz / fs,
        high: spec.band.high_hz / fs,
        desired: 1.0,
        weight: 1.0 / delta_p,
    });
    bands.push(RemezBand { low: stop_high / fs, high: 0.5, desired: 0.0, weight: 1.0 / delta_s });

    let mut num_taps = estimate_taps(delta_p, delta_s, spec.transition_hz / fs);
    let mut best_devs = (f64::INFINITY, f64::INFINITY);
    while num_taps <= spec.max_taps {
        let design = match remez_type1(num_taps, &bands, GRID_DENSITY, MAX_EXCHANGE_ITERATIONS) {
            Ok(d) => d,
            // A sparse grid can starve the exchange of extrema; retry denser.
            Err(RemezError::TooFewExtrema) => {
                remez_type1(num_taps, &bands, 4 * GRID_DENSITY, MAX_EXCHANGE_ITERATIONS)
                    .map_err(|_| FilterError::ConvergenceFailure(MAX_EXCHANGE_ITERATIONS))?
            }
            Err(RemezError::NotConverged) => {
                return Err(FilterError::ConvergenceFailure(MAX_EXCHANGE_ITERATIONS))
            }
        };

        // Weights are 1/δ, so a weighted deviation above 1 already misses
        // the targets; skip the grid measurement and grow.
        if design.deviation > 1.0 {
            num_taps += 2 * (1 + num_taps / 128);
            continue;
        }
        let coeffs = FirCoefficients {
            taps: design.taps,
            design_spec: *spec,
            passband_dev: 0.0,
            stopband_dev: 0.0,
        };
        let (pass_dev, stop_dev) = measure_deviations(&coeffs);
        if pass_dev <= delta_p && stop_dev <= delta_s {
            return Ok(FirCoefficients { passband_dev: pass_dev, stopband_dev: stop_dev, ..coeffs });
        }
        best_devs = (best_devs.0.min(pass_dev), best_devs.1.min(stop_dev));
        // Grow faster for long designs so the search stays bounded.
        num_taps += 2 * (1 + num_taps / 128);
    }
    Err(FilterError::InfeasibleSpec {
        max_taps: spec.max_taps,
        passband_dev: best_devs.0,
        stopband_dev: best_devs.1,
    })
}

/// Kaiser's equiripple length estimate, rounded up to the next odd count.
fn estimate_taps(delta_p: f64, delta_s: f64, transition_norm: f64) -> usize {
    let n = (-20.0 * (delta_p * delta_s).sqrt().log10() - 13.0) / (14.6 * transition_norm) + 1.0;
    let n = (n.ceil() as usize).max(5);
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}

/// Measures the worst passband/stopband deviations of a design on the
/// verification grid plus the exact band edges.
pub fn measure_deviations(coeffs: &FirCoefficients) -> (f64, f64) {
    let spec = &coeffs.design_spec;
    let fs = spec.sample_rate_hz;
    let nyquist = fs / 2.0;
    let stop_low = spec.band.low_hz - spec.transition_hz;
    let stop_high = spec.band.high_hz + spec.transition_hz;

    let mut freqs: Vec<f64> = (0..VERIFY_GRID_POINTS)
        .map(|i| nyquist * i as f64 / (VERIFY_GRID_POINTS - 1) as f64)
        .collect();
    freqs.extend([spec.band.low_hz, spec.band.high_hz, stop_low, stop_high]);

    let mags = freq_response(coeffs, &freqs).expect("frequencies constructed in range");
    let mut pass_dev = 0.0f64;
    let mut stop_dev = 0.0f64;
    for (&f, &mag) in freqs.iter().zip(&mags) {
        if f >= spec.band.low_hz && f <= spec.band.high_hz {
            pass_dev = pass_dev.max((mag - 1.0).abs());
        } else if (stop_low > 0.0 && f <= stop_low) || f >= stop_high {
            stop_dev = stop_dev.max(mag);
        }
    }
    (pass_dev, stop_dev)
}

/// Magnitude response `|Σ tap[n]·e^{−j2πfn/fs}|` at each frequency.
pub fn freq_response(coeffs: &FirCoefficients, freqs_hz: &[f64]) -> Result<Vec<f64>, FilterError> {
    let fs = coeffs.design_spec.sample_rate_hz;
    freqs_hz
        .iter()
        .map(|&f| {
            if !(0.0..=fs / 2.0).contains(&f) {
                return Err(FilterError::FrequencyOutOfRange(f));
            }
            let w = TAU * f / fs;
            let mut re = 0.0;
            let mut im = 0.0;
            for (n, &t) in coeffs.taps.iter().enumerate() {
                let ph = w * n as f64;
                re += t * ph.cos();
                im -= t * ph.sin();
            }
            Ok(re.hypot(im))
        })
        .collect()
}

/// Applies a designed filter to a signal.
///
/// Zero-phase mode mirrors `taps.len()` samples at each end, runs the filter
/// forward then backward, and returns the central input-length slice; the
/// effective response is `|H|²`. Causal mode is plain convolution with zero
/// initial state.
pub fn filter_signal(
    coeffs: &FirCoefficients,
    signal: &[f64],
    mode: FilterMode,
) -> Result<Vec<f64>, FilterError> {
    let l = coeffs.taps.len();
    if signal.len() <= l {
        return Err(FilterError::SignalTooShort { len: signal.len(), taps: l });
    }
    match mode {
        FilterMode::Causal => Ok(convolve_causal(&coeffs.taps, signal)),
        FilterMode::ZeroPhase => {
            let n = signal.len();
            let mut padded = Vec::with_capacity(n + 2 * l);
            // Mirror without repeating the edge sample.
            padded.extend((1..=l).rev().map(|i| signal[i]));
            padded.extend_from_slice(signal);
            padded.extend((1..=l).map(|i| signal[n - 1 - i]));

            let mut forward = convolve_causal(&coeffs.taps, &padded);
            forward.reverse();
            let mut backward = convolve_causal(&coeffs.taps, &forward);
            backward.reverse();
            Ok(backward[l..l + n].to_vec())
        }
    }
}

fn convolve_causal(taps: &[f64], signal: &[f64]) -> Vec<f64> {
    let l = taps.len();
    let mut out = vec![0.0; signal.len()];
    for (n, o) in out.iter_mut().enumerate() {
        let kmax = l.min(n + 1);
        let mut acc = 0.0;
        for k in 0..kmax {
            acc += taps[k] * signal[n - k];
        }
        *o = acc;
    }
    out
}

/// Filters every channel of a trial into every band, zero-phase.
///
/// The bank must hold exactly one filter per band, designed at the trial's
/// sample rate. Channel×band jobs run in parallel with deterministic output.
pub fn extract_bands(
    trial: &TrialRecording,
    bank: &[FirCoefficients],
) -> Result<BandDecomposition, FilterError> {
    let mut by_band = BTreeMap::new();
    for coeffs in bank {
        if coeffs.design_spec.sample_rate_hz != trial.sample_rate_hz() {
            return Err(FilterError::SampleRateMismatch {
                trial_hz: trial.sample_rate_hz(),
                filter_hz: coeffs.design_spec.sample_rate_hz,
            });
        }
        if by_band.insert(coeffs.design_spec.band.name, coeffs).is_some() {
            return Err(FilterError::IncompleteBank(format!(
                "band {} appears twice",
                coeffs.design_spec.band.name
            )));
        }
    }
    for band in BandName::ALL {
        if !by_band.contains_key(&band) {
            return Err(FilterError::IncompleteBank(format!("band {band} missing")));
        }
    }

    let jobs: Vec<(ChannelId, BandName)> = trial
        .channel_ids()
        .into_iter()
        .flat_map(|ch| BandName::ALL.into_iter().map(move |b| (ch, b)))
        .collect();
    let signals: Vec<((ChannelId, BandName), BandSignal)> = jobs
        .par_iter()
        .map(|&(ch, band)| {
            let samples = filter_signal(
                by_band[&band],
                trial.samples(ch).expect("channel listed by trial"),
                FilterMode::ZeroPhase,
            )?;
            Ok(((ch, band), BandSignal { channel: ch, band, samples }))
        })
        .collect::<Result<_, FilterError>>()?;
    Ok(signals.into_iter().collect())
}

/// Serializes a filter bank as JSON with floats at 17 significant digits,
/// enough to reproduce every `f64` bit-exactly in any implementation.
pub fn export_bank(bank: &[FirCoefficients], path: &Path) -> Result<(), FilterError> {
    struct SigDigits;
    impl serde_json::ser::Formatter for SigDigits {
        fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            write!(writer, "{value:.16e}")
        }
    }

    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    serde::Serialize::serialize(&bank, &mut ser).map_err(|e| FilterError::BankFile(e.to_string()))?;
    buf.push(b'\n');
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

/// Loads a filter bank exported by [`export_bank`], re-validating the
/// linear-phase invariants.
pub fn import_bank(path: &Path) -> Result<Vec<FirCoefficients>, FilterError> {
    let text = std::fs::read_to_string(path)?;
    let bank: Vec<FirCoefficients> =
        serde_json::from_str(&text).map_err(|e| FilterError::BankFile(e.to_string()))?;
    for coeffs in &bank {
        coeffs.check_invariants()?;
    }
    Ok(bank)
}
