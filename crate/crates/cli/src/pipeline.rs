//! End-to-end experiment runs: load → band-decompose → extract features →
//! label → cross-validate → tabulate.
//!
//! A run is fully deterministic given its config: every cell derives its
//! fold and training seeds from `(master seed, cell key)`, cells and trials
//! may evaluate concurrently but outputs collect in declaration order, and
//! no report embeds wall-clock state. Re-running a config overwrites every
//! output file with identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use affekt::classifiers::{ClassifierKind, TrainConfig};
use affekt::evaluation::{
    cross_validate_detailed, feature_histograms, plan_folds_by_subject, plan_folds_keyed,
    plan_folds_shuffled, roc_curve, tabulate, AccuracyTable, CvResult, PooledScores,
};
use affekt::features::{
    band_stat_vector, hoc_vector, spd_vector, time_stat_vector, write_feature_table,
    FeatureMethod, FeatureVector,
};
use affekt::filter::{design_bandpass, export_bank, extract_bands, FirCoefficients};
use affekt::labeling::{
    build_dataset, AffectDimension, LabelingConfig, PartitionScheme,
};
use affekt::seed;
use affekt::signal::{load_dataset, select_channels, Ratings, TrialKey, FORMAT_VERSION};

use crate::config::PipelineConfig;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Signal(#[from] affekt::signal::SignalError),
    #[error(transparent)]
    Filter(#[from] affekt::filter::FilterError),
    #[error(transparent)]
    Feature(#[from] affekt::features::FeatureError),
    #[error("output: {0}")]
    Output(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One grid cell: a (method, scheme, dimension, classifier) combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellKey {
    pub method: FeatureMethod,
    pub scheme: PartitionScheme,
    pub dimension: AffectDimension,
    pub classifier: ClassifierKind,
}

impl CellKey {
    pub fn dir_name(&self) -> String {
        format!("{}_{}_{}_{}", self.method, self.scheme, self.dimension, self.classifier)
    }
}

/// Everything recorded about one evaluated cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub cell: String,
    pub method: FeatureMethod,
    pub scheme: PartitionScheme,
    pub dimension: AffectDimension,
    pub classifier: ClassifierKind,
    pub failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv: Option<CvResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roc_auc: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Dataset facts echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub source: String,
    pub n_trials: usize,
    pub sample_rate_hz: f64,
    pub n_samples: usize,
    pub trimmed_baseline_s: f64,
    pub full_length: bool,
}

/// Designed-filter facts echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSummary {
    pub band: affekt::filter::BandName,
    pub taps: usize,
    pub passband_dev: f64,
    pub stopband_dev: f64,
}

/// The full report written as `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: PipelineConfig,
    pub dataset: DatasetSummary,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub filter_bank: Vec<FilterSummary>,
    pub cells: Vec<CellOutcome>,
    pub tables: BTreeMap<ClassifierKind, AccuracyTable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Result of a run: the report plus how many cells failed.
pub struct RunOutcome {
    pub report: Report,
    pub failed_cells: usize,
}

/// Executes the full experiment grid described by `config`.
pub fn run(config: &PipelineConfig) -> Result<RunOutcome, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.pipeline.jobs)
        .build()
        .map_err(|e| PipelineError::Output(e.to_string()))?;
    pool.install(|| run_inner(config))
}

fn run_inner(config: &PipelineConfig) -> Result<RunOutcome, PipelineError> {
    let out = &config.output.dir;
    fs::create_dir_all(out)?;

    // Load, select, trim.
    let raw = load_dataset(&config.dataset.path, FORMAT_VERSION)?;
    let mut warnings = Vec::new();
    let trials: Vec<(affekt::signal::TrialRecording, Ratings)> = raw
        .trials()
        .par_iter()
        .map(|(trial, ratings)| {
            let selected = select_channels(trial, &config.pipeline.channels)?;
            let prepared = if config.pipeline.trim_baseline_s > 0.0 {
                selected.trim_baseline(config.pipeline.trim_baseline_s)?
            } else {
                selected
            };
            Ok((prepared, *ratings))
        })
        .collect::<Result<_, affekt::signal::SignalError>>()?;
    let first = &trials[0].0;
    let dataset_summary = DatasetSummary {
        source: raw.source.clone(),
        n_trials: trials.len(),
        sample_rate_hz: first.sample_rate_hz(),
        n_samples: first.n_samples(),
        trimmed_baseline_s: config.pipeline.trim_baseline_s,
        full_length: config.pipeline.trim_baseline_s == 0.0,
    };

    // Design the filter bank once per run when any banded method is active.
    let needs_bands = config
        .pipeline
        .methods
        .iter()
        .any(|m| matches!(m, FeatureMethod::StatsBand | FeatureMethod::Spd));
    let bank: Vec<FirCoefficients> = if needs_bands {
        let specs: Vec<_> = affekt::filter::BandName::ALL
            .iter()
            .map(|&b| config.filter_spec(b, first.sample_rate_hz()))
            .collect();
        let bank = specs
            .par_iter()
            .map(design_bandpass)
            .collect::<Result<Vec<_>, _>>()?;
        export_bank(&bank, &out.join("filter_bank.json"))?;
        bank
    } else {
        Vec::new()
    };
    let filter_summaries: Vec<FilterSummary> = bank
        .iter()
        .map(|c| FilterSummary {
            band: c.design_spec.band.name,
            taps: c.len(),
            passband_dev: c.passband_dev,
            stopband_dev: c.stopband_dev,
        })
        .collect();

    // Per-method feature tables, extracted once and shared across cells.
    let features = extract_features(config, &trials, &bank)?;
    let features_dir = out.join("features");
    fs::create_dir_all(&features_dir)?;
    for (method, table) in &features {
        write_feature_table(table, &features_dir.join(format!("{method}.csv")))?;
    }
    let ratings: Vec<(TrialKey, Ratings)> =
        trials.iter().map(|(t, r)| (t.key(), *r)).collect();

    // The experiment grid, in declaration order.
    let cells: Vec<CellKey> = config
        .pipeline
        .methods
        .iter()
        .flat_map(|&method| {
            config.pipeline.schemes.iter().flat_map(move |&scheme| {
                config.pipeline.dimensions.iter().flat_map(move |&dimension| {
                    config
                        .pipeline
                        .classifiers
                        .iter()
                        .map(move |&classifier| CellKey { method, scheme, dimension, classifier })
                })
            })
        })
        .collect();

    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|cell| evaluate_cell(config, cell, &features[&cell.method], &ratings, out))
        .collect::<Result<_, PipelineError>>()?;

    // Tables per classifier over the successful cells.
    let mut tables = BTreeMap::new();
    for classifier in &config.pipeline.classifiers {
        let results: Vec<CvResult> = outcomes
            .iter()
            .filter(|o| o.classifier == *classifier)
            .filter_map(|o| o.cv.clone())
            .collect();
        if !results.is_empty() {
            let table = tabulate(&results);
            warnings.extend(table.warnings.iter().cloned());
            tables.insert(*classifier, table);
        }
    }

    let failed_cells = outcomes.iter().filter(|o| o.failed).count();
    let report = Report {
        config: resolved_config(config, first.sample_rate_hz()),
        dataset: dataset_summary,
        filter_bank: filter_summaries,
        cells: outcomes,
        tables,
        warnings,
    };
    write_report(&report, out)?;
    Ok(RunOutcome { report, failed_cells })
}

/// The config as echoed into reports: every per-band filter section is
/// materialized so defaulted design values are visible.
fn resolved_config(config: &PipelineConfig, sample_rate_hz: f64) -> PipelineConfig {
    let mut resolved = config.clone();
    for band in affekt::filter::BandName::ALL {
        let spec = config.filter_spec(band, sample_rate_hz);
        resolved.filters.insert(
            band,
            crate::config::FilterSection {
                transition_hz: Some(spec.transition_hz),
                passband_ripple_db: spec.passband_ripple_db,
                stopband_atten_db: spec.stopband_atten_db,
                max_taps: spec.max_taps,
            },
        );
    }
    resolved
}

/// Extracts one feature table per configured method.
fn extract_features(
    config: &PipelineConfig,
    trials: &[(affekt::signal::TrialRecording, Ratings)],
    bank: &[FirCoefficients],
) -> Result<BTreeMap<FeatureMethod, Vec<(TrialKey, FeatureVector)>>, PipelineError> {
    let methods = &config.pipeline.methods;
    let needs_bands = methods
        .iter()
        .any(|m| matches!(m, FeatureMethod::StatsBand | FeatureMethod::Spd));

    // Row-per-trial extraction, parallel across trials.
    let rows: Vec<BTreeMap<FeatureMethod, FeatureVector>> = trials
        .par_iter()
        .map(|(trial, _)| {
            let mut row = BTreeMap::new();
            let bands = if needs_bands {
                Some(extract_bands(trial, bank)?)
            } else {
                None
            };
            for &method in methods {
                let fv = match method {
                    FeatureMethod::StatsTime => time_stat_vector(trial)?,
                    FeatureMethod::Hoc => hoc_vector(trial, config.pipeline.hoc_order)?,
                    FeatureMethod::StatsBand => band_stat_vector(bands.as_ref().expect("bands built"))?,
                    FeatureMethod::Spd => spd_vector(bands.as_ref().expect("bands built"))?,
                };
                row.insert(method, fv);
            }
            Ok(row)
        })
        .collect::<Result<_, PipelineError>>()?;

    let mut tables: BTreeMap<FeatureMethod, Vec<(TrialKey, FeatureVector)>> = BTreeMap::new();
    for (row, (trial, _)) in rows.into_iter().zip(trials) {
        for (method, fv) in row {
            tables.entry(method).or_default().push((trial.key(), fv));
        }
    }
    Ok(tables)
}

/// Evaluates one cell and writes its artifacts under `cells/<key>/`.
fn evaluate_cell(
    config: &PipelineConfig,
    cell: &CellKey,
    features: &[(TrialKey, FeatureVector)],
    ratings: &[(TrialKey, Ratings)],
    out: &Path,
) -> Result<CellOutcome, PipelineError> {
    let key = cell.dir_name();
    let cell_dir = out.join("cells").join(&key);
    fs::create_dir_all(&cell_dir)?;

    let outcome = match evaluate_cell_inner(config, cell, &key, features, ratings, &cell_dir) {
        Ok(outcome) => outcome,
        Err(message) => CellOutcome {
            cell: key,
            method: cell.method,
            scheme: cell.scheme,
            dimension: cell.dimension,
            classifier: cell.classifier,
            failed: true,
            error: Some(message),
            cv: None,
            roc_auc: None,
            warnings: Vec::new(),
        },
    };
    write_json(&outcome, &cell_dir.join("result.json"))?;
    Ok(outcome)
}

fn evaluate_cell_inner(
    config: &PipelineConfig,
    cell: &CellKey,
    key: &str,
    features: &[(TrialKey, FeatureVector)],
    ratings: &[(TrialKey, Ratings)],
    cell_dir: &Path,
) -> Result<CellOutcome, String> {
    let labeling = LabelingConfig {
        contiguous_boundaries: config.labeling.contiguous_boundaries,
    };
    let data = build_dataset(features, ratings, cell.dimension, cell.scheme, labeling)
        .map_err(|e| e.to_string())?;

    let master = config.pipeline.seed;
    let fold_seed = seed::mix_str(master, &format!("{key}/folds"));
    let k = config.folds.k;
    let plan = if config.folds.subject_grouped {
        plan_folds_by_subject(&data, k, fold_seed)
    } else if config.folds.stratified {
        plan_folds_keyed(&data, k, fold_seed)
    } else {
        plan_folds_shuffled(&data, k, fold_seed)
    }
    .map_err(|e| e.to_string())?;

    let train = TrainConfig {
        kind: cell.classifier,
        c: config.train.c,
        n_trees: config.train.n_trees,
        mtry: (config.train.mtry > 0).then_some(config.train.mtry),
        min_leaf: config.train.min_leaf,
        bootstrap: config.train.bootstrap,
        max_epochs: config.train.max_epochs,
        tolerance: config.train.tolerance,
        seed: seed::mix_str(master, &format!("{key}/train")),
    };

    let (cv, _models, pooled) =
        cross_validate_detailed(&data, &train, &plan).map_err(|e| e.to_string())?;

    let mut warnings = Vec::new();
    let mut roc_auc = None;
    if cell.scheme == PartitionScheme::Bipartition {
        if let Some(PooledScores { scores, labels, .. }) = pooled {
            match roc_curve(&scores, &labels) {
                Ok(roc) => {
                    roc_auc = Some(roc.auc);
                    write_roc_csv(&roc, &cell_dir.join("roc.csv")).map_err(|e| e.to_string())?;
                }
                Err(e) => warnings.push(format!("roc: {e}")),
            }
        }
        match write_histograms(&data, config.pipeline.histogram_bins, &cell_dir.join("histograms.csv")) {
            Ok(histogram_warnings) => warnings.extend(histogram_warnings),
            Err(e) => warnings.push(format!("histograms: {e}")),
        }
    }

    Ok(CellOutcome {
        cell: key.to_string(),
        method: cell.method,
        scheme: cell.scheme,
        dimension: cell.dimension,
        classifier: cell.classifier,
        failed: false,
        error: None,
        cv: Some(cv),
        roc_auc,
        warnings,
    })
}

fn write_roc_csv(roc: &affekt::evaluation::RocCurve, path: &Path) -> std::io::Result<()> {
    let mut text = String::from("fpr,tpr\n");
    for (fpr, tpr) in &roc.points {
        text.push_str(&format!("{fpr},{tpr}\n"));
    }
    fs::write(path, text)
}

/// Class-conditional histograms for every feature; constant features are
/// reported as warnings rather than failing the cell.
fn write_histograms(
    data: &affekt::labeling::LabeledDataset,
    bins: usize,
    path: &Path,
) -> Result<Vec<String>, PipelineError> {
    let mut warnings = Vec::new();
    let mut text = String::from("feature,bin_lo,bin_hi,count_low,count_high\n");
    for index in 0..data.n_features() {
        match feature_histograms(data, index, bins) {
            Ok(hist) => {
                for b in 0..bins {
                    text.push_str(&format!(
                        "{},{},{},{},{}\n",
                        hist.feature_name,
                        hist.edges[b],
                        hist.edges[b + 1],
                        hist.counts_low[b],
                        hist.counts_high[b]
                    ));
                }
            }
            Err(e) => warnings.push(format!("feature {index}: {e}")),
        }
    }
    fs::write(path, text)?;
    Ok(warnings)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| PipelineError::Output(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes `report.json` and `report.csv`.
pub fn write_report(report: &Report, out: &Path) -> Result<(), PipelineError> {
    write_json(report, &out.join("report.json"))?;

    let mut csv = String::new();
    for (classifier, table) in &report.tables {
        for (i, line) in table.to_csv().lines().enumerate() {
            if i == 0 {
                if csv.is_empty() {
                    csv.push_str(&format!("classifier,{line}\n"));
                }
            } else {
                csv.push_str(&format!("{classifier},{line}\n"));
            }
        }
    }
    fs::write(out.join("report.csv"), csv)?;
    Ok(())
}

/// Re-tabulates an output directory from its `cells/*/result.json` files.
pub fn retabulate(out: &Path) -> Result<RunOutcome, PipelineError> {
    let report_path = out.join("report.json");
    let mut report: Report = serde_json::from_str(
        &fs::read_to_string(&report_path).map_err(|_| {
            PipelineError::Output(format!("no report.json under {}", out.display()))
        })?,
    )
    .map_err(|e| PipelineError::Output(format!("report.json: {e}")))?;

    let cells_dir = out.join("cells");
    let mut cell_dirs: Vec<PathBuf> = fs::read_dir(&cells_dir)
        .map_err(|_| PipelineError::Output(format!("no cells directory under {}", out.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    cell_dirs.sort();

    let mut outcomes = Vec::new();
    for dir in cell_dirs {
        let text = fs::read_to_string(dir.join("result.json"))?;
        let outcome: CellOutcome = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Output(format!("{}: {e}", dir.display())))?;
        outcomes.push(outcome);
    }

    let mut tables = BTreeMap::new();
    let classifiers: Vec<ClassifierKind> = {
        let mut seen: Vec<ClassifierKind> = outcomes.iter().map(|o| o.classifier).collect();
        seen.sort();
        seen.dedup();
        seen
    };
    for classifier in classifiers {
        let results: Vec<CvResult> = outcomes
            .iter()
            .filter(|o| o.classifier == classifier)
            .filter_map(|o| o.cv.clone())
            .collect();
        if !results.is_empty() {
            tables.insert(classifier, tabulate(&results));
        }
    }

    let failed_cells = outcomes.iter().filter(|o| o.failed).count();
    report.cells = outcomes;
    report.tables = tables;
    write_report(&report, out)?;
    Ok(RunOutcome { report, failed_cells })
}
