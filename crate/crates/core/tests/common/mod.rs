//! Shared builders for integration tests.

use std::collections::BTreeMap;

use affekt::features::{FeatureDescriptor, FeatureMethod};
use affekt::labeling::{AffectDimension, Label, LabeledDataset, LabelingConfig, PartitionScheme};
use affekt::signal::{ChannelId, TrialKey};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn dataset_from(x: Vec<Vec<f64>>, y: Vec<Label>) -> LabeledDataset {
    let d = x[0].len();
    let mut class_counts: BTreeMap<Label, usize> = BTreeMap::new();
    for &label in &y {
        *class_counts.entry(label).or_insert(0) += 1;
    }
    LabeledDataset {
        method: FeatureMethod::Spd,
        dimension: AffectDimension::Valence,
        scheme: PartitionScheme::Bipartition,
        labeling: LabelingConfig::default(),
        layout: (0..d)
            .map(|i| FeatureDescriptor {
                channel: ChannelId::Fp1,
                band: None,
                feature: format!("f{i}"),
            })
            .collect(),
        keys: (0..x.len() as u32).map(|i| TrialKey::new(1, i + 1)).collect(),
        x,
        y,
        class_counts,
        excluded: 0,
    }
}

/// Two separable Gaussian blobs in `dims` dimensions, alternating labels.
pub fn gaussian_clusters(n: usize, dims: usize, seed: u64, sep: f64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let high = i % 2 == 0;
        let center = if high { sep } else { -sep };
        x.push((0..dims).map(|_| center + noise.sample(&mut rng)).collect());
        y.push(if high { Label::High } else { Label::Low });
    }
    dataset_from(x, y)
}
