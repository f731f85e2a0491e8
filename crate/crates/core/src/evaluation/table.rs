//! Accuracy tables: methods down the rows, scheme × dimension across the
//! columns, mean accuracy in percent (one decimal) in the cells.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::features::FeatureMethod;
use crate::labeling::{AffectDimension, PartitionScheme};

use super::CvResult;

/// One tabulated grid of mean accuracies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub methods: Vec<FeatureMethod>,
    pub columns: Vec<(PartitionScheme, AffectDimension)>,
    /// `cells[row][col]`, `None` where no result was supplied.
    pub cells: Vec<Vec<Option<f64>>>,
    pub warnings: Vec<String>,
}

/// Column order mirroring the published tables: bipartition before
/// tripartition, arousal before valence.
fn column_order() -> Vec<(PartitionScheme, AffectDimension)> {
    vec![
        (PartitionScheme::Bipartition, AffectDimension::Arousal),
        (PartitionScheme::Bipartition, AffectDimension::Valence),
        (PartitionScheme::Tripartition, AffectDimension::Arousal),
        (PartitionScheme::Tripartition, AffectDimension::Valence),
    ]
}

/// Tabulates cross-validation results by (method, scheme, dimension).
/// Duplicate keys keep the later result, with a warning.
pub fn tabulate(results: &[CvResult]) -> AccuracyTable {
    let mut warnings = Vec::new();
    let mut by_key: BTreeMap<(FeatureMethod, PartitionScheme, AffectDimension), f64> =
        BTreeMap::new();
    for r in results {
        let key = (r.config.method, r.config.scheme, r.config.dimension);
        if by_key.insert(key, r.mean_accuracy).is_some() {
            warnings.push(format!(
                "duplicate result for ({}, {}, {}); keeping the later one",
                key.0, key.1, key.2
            ));
        }
    }

    let methods: Vec<FeatureMethod> = FeatureMethod::ALL
        .into_iter()
        .filter(|m| by_key.keys().any(|(km, _, _)| km == m))
        .collect();
    let columns: Vec<(PartitionScheme, AffectDimension)> = column_order()
        .into_iter()
        .filter(|(s, d)| by_key.keys().any(|(_, ks, kd)| ks == s && kd == d))
        .collect();

    let cells = methods
        .iter()
        .map(|&m| {
            columns
                .iter()
                .map(|&(s, d)| by_key.get(&(m, s, d)).copied())
                .collect()
        })
        .collect();

    AccuracyTable { methods, columns, cells, warnings }
}

impl AccuracyTable {
    /// Cell accuracy formatted as percent with one decimal, or "" if absent.
    fn cell_text(cell: Option<f64>) -> String {
        match cell {
            Some(acc) => format!("{:.1}", acc * 100.0),
            None => String::new(),
        }
    }

    /// CSV rendering, one header row then one row per method.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method");
        for (scheme, dim) in &self.columns {
            out.push_str(&format!(",{scheme}_{dim}"));
        }
        out.push('\n');
        for (method, row) in self.methods.iter().zip(&self.cells) {
            out.push_str(method.name());
            for cell in row {
                out.push(',');
                out.push_str(&Self::cell_text(*cell));
            }
            out.push('\n');
        }
        out
    }

    /// Fixed-width text rendering for terminals.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<12}", "method");
        for (scheme, dim) in &self.columns {
            out.push_str(&format!("{:>24}", format!("{scheme}/{dim}")));
        }
        out.push('\n');
        for (method, row) in self.methods.iter().zip(&self.cells) {
            out.push_str(&format!("{:<12}", method.name()));
            for cell in row {
                out.push_str(&format!("{:>24}", Self::cell_text(*cell)));
            }
            out.push('\n');
        }
        out
    }
}
