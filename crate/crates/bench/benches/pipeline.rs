//! Hot-path benchmarks: feature extraction on trial-length signals, filter
//! design, zero-phase filtering, and forest training.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use affekt::classifiers::{train_random_forest, ClassifierKind, TrainConfig};
use affekt::features::{hoc_sequence, stat_features};
use affekt::filter::{design_bandpass, filter_signal, BandName, FilterMode, FilterSpec};
use affekt::labeling::{AffectDimension, Label, LabeledDataset, LabelingConfig, PartitionScheme};
use affekt::signal::{ChannelId, TrialKey};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const TRIAL_SAMPLES: usize = 8064;

fn trial_signal(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 10.0).unwrap();
    (0..TRIAL_SAMPLES).map(|_| noise.sample(&mut rng)).collect()
}

fn bench_features(c: &mut Criterion) {
    let signal = trial_signal(1);
    c.bench_function("hoc_sequence 8064 samples K=6", |b| {
        b.iter(|| hoc_sequence(black_box(&signal), 6).unwrap())
    });
    c.bench_function("stat_features 8064 samples", |b| {
        b.iter(|| stat_features(black_box(&signal)).unwrap())
    });
}

fn bench_filter(c: &mut Criterion) {
    c.bench_function("design alpha band fs=128", |b| {
        b.iter(|| design_bandpass(black_box(&FilterSpec::default_for(BandName::Alpha, 128.0))).unwrap())
    });

    let alpha = design_bandpass(&FilterSpec::default_for(BandName::Alpha, 128.0)).unwrap();
    let signal = trial_signal(2);
    c.bench_function("zero-phase alpha filter 8064 samples", |b| {
        b.iter(|| filter_signal(black_box(&alpha), black_box(&signal), FilterMode::ZeroPhase).unwrap())
    });
}

fn synthetic_dataset(rows: usize, dims: usize) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..rows {
        let high = i % 2 == 0;
        let center = if high { 1.0 } else { -1.0 };
        x.push((0..dims).map(|_| center + noise.sample(&mut rng)).collect::<Vec<f64>>());
        y.push(if high { Label::High } else { Label::Low });
    }
    let mut class_counts = std::collections::BTreeMap::new();
    for &label in &y {
        *class_counts.entry(label).or_insert(0usize) += 1;
    }
    LabeledDataset {
        method: affekt::features::FeatureMethod::Spd,
        dimension: AffectDimension::Valence,
        scheme: PartitionScheme::Bipartition,
        labeling: LabelingConfig::default(),
        layout: (0..dims)
            .map(|i| affekt::features::FeatureDescriptor {
                channel: ChannelId::Fp1,
                band: None,
                feature: format!("f{i}"),
            })
            .collect(),
        keys: (0..rows as u32).map(|i| TrialKey::new(1, i + 1)).collect(),
        x,
        y,
        class_counts,
        excluded: 0,
    }
}

fn bench_forest(c: &mut Criterion) {
    let data = synthetic_dataset(360, 16);
    let cfg = TrainConfig { n_trees: 100, ..TrainConfig::new(ClassifierKind::Rf) };
    c.bench_function("random forest 100 trees, 360x16", |b| {
        b.iter(|| train_random_forest(black_box(&data), black_box(&cfg)).unwrap())
    });
}

criterion_group!(benches, bench_features, bench_filter, bench_forest);
criterion_main!(benches);
