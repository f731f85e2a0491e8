//! SAM-rating → Low/Medium/High mapping and labeled-dataset assembly.
//!
//! The published ranges are [1.0–3.0] → Low, [4.0–6.0] → Medium,
//! [7.0–9.0] → High. Ratings falling in the gaps (3,4) and (6,7) are
//! excluded under both schemes; the bipartition scheme additionally drops
//! Medium. An opt-in `contiguous_boundaries` mode splits the scale into
//! equal thirds instead (Low below 11/3, High above 19/3) for sensitivity
//! analysis.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureDescriptor, FeatureMethod, FeatureVector};
use crate::signal::{Ratings, TrialKey};

#[derive(Debug, Error)]
pub enum LabelingError {
    #[error("rating {0} outside [1, 9]")]
    RatingOutOfRange(f64),
    #[error("feature row {0} does not share the dataset layout")]
    LayoutMismatch(TrialKey),
    #[error("no ratings record for trial {0}")]
    MissingRating(TrialKey),
    #[error("no instances left after exclusion")]
    EmptyAfterExclusion,
    #[error("all remaining instances share one label ({0})")]
    SingleClassDataset(Label),
    #[error("non-finite feature value in trial {0}")]
    NonFiniteFeature(TrialKey),
    #[error("dataset export: {0}")]
    Export(String),
}

/// The affect dimension a dataset is labeled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AffectDimension {
    Valence,
    Arousal,
}

impl AffectDimension {
    pub const ALL: [AffectDimension; 2] = [AffectDimension::Valence, AffectDimension::Arousal];

    pub fn name(&self) -> &'static str {
        match self {
            AffectDimension::Valence => "valence",
            AffectDimension::Arousal => "arousal",
        }
    }

    /// The rating this dimension reads from a [`Ratings`] record.
    pub fn rating(&self, ratings: &Ratings) -> f64 {
        match self {
            AffectDimension::Valence => ratings.valence,
            AffectDimension::Arousal => ratings.arousal,
        }
    }
}

impl fmt::Display for AffectDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AffectDimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "valence" => Ok(AffectDimension::Valence),
            "arousal" => Ok(AffectDimension::Arousal),
            _ => Err(format!("unknown affect dimension `{s}`")),
        }
    }
}

/// How the 1–9 scale is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionScheme {
    Tripartition,
    Bipartition,
}

impl PartitionScheme {
    pub const ALL: [PartitionScheme; 2] = [PartitionScheme::Bipartition, PartitionScheme::Tripartition];

    pub fn name(&self) -> &'static str {
        match self {
            PartitionScheme::Tripartition => "tripartition",
            PartitionScheme::Bipartition => "bipartition",
        }
    }
}

impl fmt::Display for PartitionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PartitionScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tripartition" => Ok(PartitionScheme::Tripartition),
            "bipartition" => Ok(PartitionScheme::Bipartition),
            _ => Err(format!("unknown partition scheme `{s}`")),
        }
    }
}

/// Class label. `Ord` follows the scale: Low < Medium < High.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Low,
    Medium,
    High,
}

impl Label {
    pub fn name(&self) -> &'static str {
        match self {
            Label::Low => "Low",
            Label::Medium => "Medium",
            Label::High => "High",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Labeling options beyond the scheme itself.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingConfig {
    /// Replace the published gapped ranges with contiguous equal thirds.
    pub contiguous_boundaries: bool,
}

/// Maps one rating to a label, or `None` when the instance is excluded
/// (gap ratings under both schemes; Medium under bipartition).
pub fn map_rating(
    r: f64,
    scheme: PartitionScheme,
    cfg: LabelingConfig,
) -> Result<Option<Label>, LabelingError> {
    if !(1.0..=9.0).contains(&r) {
        return Err(LabelingError::RatingOutOfRange(r));
    }
    let label = if cfg.contiguous_boundaries {
        if r < 11.0 / 3.0 {
            Some(Label::Low)
        } else if r > 19.0 / 3.0 {
            Some(Label::High)
        } else {
            Some(Label::Medium)
        }
    } else if r <= 3.0 {
        Some(Label::Low)
    } else if (4.0..=6.0).contains(&r) {
        Some(Label::Medium)
    } else if r >= 7.0 {
        Some(Label::High)
    } else {
        None
    };
    Ok(match (label, scheme) {
        (Some(Label::Medium), PartitionScheme::Bipartition) => None,
        (l, _) => l,
    })
}

/// Feature matrix plus labels for one dimension under one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub method: FeatureMethod,
    pub dimension: AffectDimension,
    pub scheme: PartitionScheme,
    pub labeling: LabelingConfig,
    pub layout: Vec<FeatureDescriptor>,
    /// Row-major feature matrix, one row per kept instance.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Label>,
    pub keys: Vec<TrialKey>,
    pub class_counts: BTreeMap<Label, usize>,
    /// Instances dropped by gap/Medium exclusion.
    pub excluded: usize,
}

impl LabeledDataset {
    pub fn n_rows(&self) -> usize {
        self.x.len()
    }

    pub fn n_features(&self) -> usize {
        self.layout.len()
    }

    /// Distinct labels present, ascending.
    pub fn classes(&self) -> Vec<Label> {
        self.class_counts.keys().copied().collect()
    }

    /// CSV export: key columns, feature columns, then label/dimension/scheme.
    pub fn write_csv(&self, path: &Path) -> Result<(), LabelingError> {
        let mut out = String::from("subject_id,trial_id");
        let probe = FeatureVector {
            method: self.method,
            values: vec![0.0; self.layout.len()],
            layout: self.layout.clone(),
        };
        for name in probe.column_names() {
            out.push(',');
            out.push_str(&name);
        }
        out.push_str(",label,dimension,scheme\n");
        for ((key, row), label) in self.keys.iter().zip(&self.x).zip(&self.y) {
            out.push_str(&format!("{},{}", key.subject_id, key.trial_id));
            for v in row {
                out.push(',');
                out.push_str(&format!("{v}"));
            }
            out.push_str(&format!(",{},{},{}\n", label, self.dimension, self.scheme));
        }
        fs::write(path, out).map_err(|e| LabelingError::Export(e.to_string()))
    }
}

/// Joins features with ratings, maps the chosen dimension's rating, drops
/// excluded rows, and validates the result.
pub fn build_dataset(
    features: &[(TrialKey, FeatureVector)],
    ratings: &[(TrialKey, Ratings)],
    dimension: AffectDimension,
    scheme: PartitionScheme,
    labeling: LabelingConfig,
) -> Result<LabeledDataset, LabelingError> {
    let rating_map: BTreeMap<TrialKey, Ratings> = ratings.iter().copied().collect();
    let layout = match features.first() {
        Some((_, fv)) => fv.layout.clone(),
        None => return Err(LabelingError::EmptyAfterExclusion),
    };
    let method = features[0].1.method;

    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut keys = Vec::new();
    let mut class_counts: BTreeMap<Label, usize> = BTreeMap::new();
    let mut excluded = 0usize;

    for (key, fv) in features {
        if fv.layout != layout || fv.method != method {
            return Err(LabelingError::LayoutMismatch(*key));
        }
        if fv.values.iter().any(|v| !v.is_finite()) {
            return Err(LabelingError::NonFiniteFeature(*key));
        }
        let ratings = rating_map
            .get(key)
            .ok_or(LabelingError::MissingRating(*key))?;
        match map_rating(dimension.rating(ratings), scheme, labeling)? {
            Some(label) => {
                x.push(fv.values.clone());
                y.push(label);
                keys.push(*key);
                *class_counts.entry(label).or_insert(0) += 1;
            }
            None => excluded += 1,
        }
    }

    if y.is_empty() {
        return Err(LabelingError::EmptyAfterExclusion);
    }
    if class_counts.len() < 2 {
        return Err(LabelingError::SingleClassDataset(y[0]));
    }
    Ok(LabeledDataset {
        method,
        dimension,
        scheme,
        labeling,
        layout,
        x,
        y,
        keys,
        class_counts,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::ChannelId;

    const DEFAULT: LabelingConfig = LabelingConfig { contiguous_boundaries: false };

    #[test]
    fn published_ranges() {
        let t = PartitionScheme::Tripartition;
        let b = PartitionScheme::Bipartition;
        assert_eq!(map_rating(2.0, t, DEFAULT).unwrap(), Some(Label::Low));
        assert_eq!(map_rating(5.0, t, DEFAULT).unwrap(), Some(Label::Medium));
        assert_eq!(map_rating(5.0, b, DEFAULT).unwrap(), None);
        assert_eq!(map_rating(8.0, b, DEFAULT).unwrap(), Some(Label::High));
        // Gap values are excluded under both schemes.
        assert_eq!(map_rating(3.5, t, DEFAULT).unwrap(), None);
        assert_eq!(map_rating(3.5, b, DEFAULT).unwrap(), None);
        assert_eq!(map_rating(6.5, t, DEFAULT).unwrap(), None);
        // Boundary values belong to their stated ranges.
        assert_eq!(map_rating(3.0, t, DEFAULT).unwrap(), Some(Label::Low));
        assert_eq!(map_rating(4.0, t, DEFAULT).unwrap(), Some(Label::Medium));
        assert_eq!(map_rating(6.0, t, DEFAULT).unwrap(), Some(Label::Medium));
        assert_eq!(map_rating(7.0, t, DEFAULT).unwrap(), Some(Label::High));
        assert!(map_rating(0.5, t, DEFAULT).is_err());
        assert!(map_rating(9.1, t, DEFAULT).is_err());
    }

    #[test]
    fn contiguous_boundaries_mode() {
        let cfg = LabelingConfig { contiguous_boundaries: true };
        let t = PartitionScheme::Tripartition;
        assert_eq!(map_rating(3.5, t, cfg).unwrap(), Some(Label::Low));
        assert_eq!(map_rating(3.7, t, cfg).unwrap(), Some(Label::Medium));
        assert_eq!(map_rating(6.4, t, cfg).unwrap(), Some(Label::High));
        assert_eq!(
            map_rating(5.0, PartitionScheme::Bipartition, cfg).unwrap(),
            None
        );
    }

    fn fv(v: f64) -> FeatureVector {
        FeatureVector {
            method: FeatureMethod::Spd,
            values: vec![v, v + 1.0],
            layout: vec![
                FeatureDescriptor {
                    channel: ChannelId::Fp1,
                    band: Some(crate::bands::BandName::Alpha),
                    feature: "spd".into(),
                },
                FeatureDescriptor {
                    channel: ChannelId::Fp1,
                    band: Some(crate::bands::BandName::Beta),
                    feature: "spd".into(),
                },
            ],
        }
    }

    type Joined = (Vec<(TrialKey, FeatureVector)>, Vec<(TrialKey, Ratings)>);

    fn rated(keys: &[(u32, f64)]) -> Joined {
        let features = keys
            .iter()
            .map(|&(t, _)| (TrialKey::new(1, t), fv(t as f64)))
            .collect();
        let ratings = keys
            .iter()
            .map(|&(t, r)| (TrialKey::new(1, t), Ratings::new(r, r).unwrap()))
            .collect();
        (features, ratings)
    }

    #[test]
    fn build_drops_excluded_rows() {
        let (features, ratings) = rated(&[(1, 2.0), (2, 5.0), (3, 8.0)]);
        let bi = build_dataset(
            &features,
            &ratings,
            AffectDimension::Valence,
            PartitionScheme::Bipartition,
            DEFAULT,
        )
        .unwrap();
        assert_eq!(bi.n_rows(), 2);
        assert_eq!(bi.y, vec![Label::Low, Label::High]);
        assert_eq!(bi.excluded, 1);

        let tri = build_dataset(
            &features,
            &ratings,
            AffectDimension::Valence,
            PartitionScheme::Tripartition,
            DEFAULT,
        )
        .unwrap();
        assert_eq!(tri.n_rows(), 3);
        assert_eq!(tri.y, vec![Label::Low, Label::Medium, Label::High]);
    }

    #[test]
    fn all_medium_bipartition_is_empty() {
        let (features, ratings) = rated(&[(1, 5.0), (2, 5.0)]);
        assert!(matches!(
            build_dataset(
                &features,
                &ratings,
                AffectDimension::Valence,
                PartitionScheme::Bipartition,
                DEFAULT,
            ),
            Err(LabelingError::EmptyAfterExclusion)
        ));
    }

    #[test]
    fn single_class_is_rejected() {
        let (features, ratings) = rated(&[(1, 2.0), (2, 2.5)]);
        assert!(matches!(
            build_dataset(
                &features,
                &ratings,
                AffectDimension::Valence,
                PartitionScheme::Bipartition,
                DEFAULT,
            ),
            Err(LabelingError::SingleClassDataset(Label::Low))
        ));
    }

    #[test]
    fn csv_export_carries_labels_and_keys() {
        let (features, ratings) = rated(&[(1, 2.0), (2, 8.0)]);
        let ds = build_dataset(
            &features,
            &ratings,
            AffectDimension::Valence,
            PartitionScheme::Bipartition,
            DEFAULT,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labeled.csv");
        ds.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "subject_id,trial_id,Fp1.alpha.spd,Fp1.beta.spd,label,dimension,scheme"
        );
        assert_eq!(lines.next().unwrap(), "1,1,1,2,Low,valence,bipartition");
        assert_eq!(lines.next().unwrap(), "1,2,2,3,High,valence,bipartition");
    }

    #[test]
    fn missing_rating_is_reported() {
        let (features, mut ratings) = rated(&[(1, 2.0), (2, 8.0)]);
        ratings.pop();
        assert!(matches!(
            build_dataset(
                &features,
                &ratings,
                AffectDimension::Valence,
                PartitionScheme::Bipartition,
                DEFAULT,
            ),
            Err(LabelingError::MissingRating(_))
        ));
    }
}
