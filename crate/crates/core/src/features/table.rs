//! CSV serialization of per-trial feature vectors.
//!
//! One row per trial: `subject_id,trial_id` key columns followed by one
//! column per feature, headed by its layout descriptor
//! (`Fp1.alpha.sigma`, `F3.hoc.D4`, ...). Values are written in shortest
//! round-trip form, so a read-back is bit-exact.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::signal::TrialKey;

use super::{FeatureDescriptor, FeatureError, FeatureMethod, FeatureVector};

/// Writes a feature table. All rows must share one layout.
pub fn write_feature_table(
    rows: &[(TrialKey, FeatureVector)],
    path: &Path,
) -> Result<(), FeatureError> {
    let (_, first) = rows
        .first()
        .ok_or_else(|| FeatureError::Table("empty feature table".into()))?;
    let mut out = String::new();
    out.push_str("subject_id,trial_id");
    for name in first.column_names() {
        out.push(',');
        out.push_str(&name);
    }
    out.push('\n');

    for (key, fv) in rows {
        if fv.layout != first.layout || fv.method != first.method {
            return Err(FeatureError::Table(format!(
                "row {key} does not share the table layout"
            )));
        }
        out.push_str(&format!("{},{}", key.subject_id, key.trial_id));
        for v in &fv.values {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| FeatureError::Table(e.to_string()))
}

/// Reads a feature table written by [`write_feature_table`].
pub fn read_feature_table(
    path: &Path,
    method: FeatureMethod,
) -> Result<Vec<(TrialKey, FeatureVector)>, FeatureError> {
    let text = fs::read_to_string(path).map_err(|e| FeatureError::Table(e.to_string()))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| FeatureError::Table("empty file".into()))?;
    let mut cols = header.split(',');
    if cols.next() != Some("subject_id") || cols.next() != Some("trial_id") {
        return Err(FeatureError::Table("missing key columns".into()));
    }
    let layout: Vec<FeatureDescriptor> = cols.map(parse_descriptor).collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let subject_id = parse_field::<u32>(&mut fields, lineno + 2)?;
        let trial_id = parse_field::<u32>(&mut fields, lineno + 2)?;
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| FeatureError::Table(format!("bad value `{f}` on line {}", lineno + 2)))
            })
            .collect::<Result<_, _>>()?;
        if values.len() != layout.len() {
            return Err(FeatureError::Table(format!(
                "line {}: {} values for {} columns",
                lineno + 2,
                values.len(),
                layout.len()
            )));
        }
        rows.push((
            TrialKey::new(subject_id, trial_id),
            FeatureVector { method, values, layout: layout.clone() },
        ));
    }
    Ok(rows)
}

fn parse_field<T: FromStr>(
    fields: &mut std::str::Split<'_, char>,
    lineno: usize,
) -> Result<T, FeatureError> {
    fields
        .next()
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| FeatureError::Table(format!("bad key field on line {lineno}")))
}

fn parse_descriptor(column: &str) -> Result<FeatureDescriptor, FeatureError> {
    let parts: Vec<&str> = column.split('.').collect();
    if parts.len() != 3 {
        return Err(FeatureError::Table(format!("bad column `{column}`")));
    }
    let channel = parts[0]
        .parse()
        .map_err(|_| FeatureError::Table(format!("bad channel in `{column}`")))?;
    let band = match parts[1] {
        "time" | "hoc" => None,
        b => Some(
            b.parse()
                .map_err(|_| FeatureError::Table(format!("bad band in `{column}`")))?,
        ),
    };
    Ok(FeatureDescriptor { channel, band, feature: parts[2].to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::time_stat_vector;
    use crate::signal::{ChannelId, TrialRecording};

    #[test]
    fn table_round_trips_bit_exactly() {
        let mk = |t: u32, scale: f64| {
            let trial = TrialRecording::new(
                1,
                t,
                128.0,
                ChannelId::SELECTED
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| {
                        (c, (0..32).map(|j| scale * ((i + 1) * j) as f64 / 7.0 - 1.5).collect())
                    })
                    .collect(),
            )
            .unwrap();
            (trial.key(), time_stat_vector(&trial).unwrap())
        };
        let rows = vec![mk(1, 1.0), mk(2, 0.12345678901234567)];

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        write_feature_table(&rows, &path).unwrap();
        let back = read_feature_table(&path, FeatureMethod::StatsTime).unwrap();
        assert_eq!(rows, back);
    }
}
