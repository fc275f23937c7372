//! CSV ingestion.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::model::{BlockSpec, ModelSpec};

/// A data row skipped during ingestion. Rows are numbered from 1, not
/// counting the header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRow {
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    pub rejected: Vec<RejectedRow>,
}

/// Feature columns used by either block, in first-use order.
fn feature_columns(spec: &ModelSpec) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for f in spec.first.features.iter().chain(&spec.second.features) {
        if !out.contains(f) {
            out.push(f.clone());
        }
    }
    out
}

/// Reads a comma-separated file with a header row.
///
/// Rows with an empty required field are rejected and logged. Unparseable
/// numbers, indicators outside `{0, 1}` and unknown category labels are
/// errors carrying the row and column.
pub fn load_csv(path: impl AsRef<Path>, spec: &ModelSpec) -> Result<Loaded> {
    let file = std::fs::File::open(path.as_ref())?;
    load_csv_from(file, spec)
}

pub fn load_csv_from<R: Read>(reader: R, spec: &ModelSpec) -> Result<Loaded> {
    spec.validate()?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Schema("empty file: no header row".into()));
    }
    let position = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column '{name}' not found in header")))
    };
    let columns = feature_columns(spec);
    let feature_pos: Vec<usize> = columns.iter().map(|c| position(c)).collect::<Result<_>>()?;
    let first_pos = position(&spec.first.outcome)?;
    let second_pos = position(&spec.second.outcome)?;
    let indicator_pos: Vec<(String, usize)> = spec
        .indicators
        .iter()
        .map(|c| position(c).map(|p| (c.clone(), p)))
        .collect::<Result<_>>()?;

    let mut features = Vec::new();
    let mut first_raw = Vec::new();
    let mut second_raw = Vec::new();
    let mut rejected = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let required = feature_pos
            .iter()
            .chain([&first_pos, &second_pos])
            .chain(indicator_pos.iter().map(|(_, p)| p));
        if let Some(&p) = required.clone().find(|&&p| record.get(p).is_none_or(str::is_empty)) {
            rejected.push(RejectedRow {
                row,
                reason: format!("empty value in column '{}'", header[p]),
            });
            continue;
        }
        let parse = |p: usize| -> Result<f64> {
            let s = &record[p];
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidValue {
                    row,
                    column: header[p].clone(),
                    message: format!("cannot parse '{s}' as a finite number"),
                })
        };
        for (name, p) in &indicator_pos {
            let x = parse(*p)?;
            if x != 0.0 && x != 1.0 {
                return Err(Error::InvalidValue {
                    row,
                    column: name.clone(),
                    message: format!("indicator must be 0 or 1, got {x}"),
                });
            }
        }
        for &p in &feature_pos {
            features.push(parse(p)?);
        }
        first_raw.push((row, record[first_pos].to_string()));
        second_raw.push((row, record[second_pos].to_string()));
    }
    if first_raw.is_empty() {
        return Err(Error::Schema("no usable data rows".into()));
    }
    let (first, first_labels) = encode(&spec.first, &first_raw)?;
    let (second, second_labels) = encode(&spec.second, &second_raw)?;
    let dataset = Dataset {
        columns,
        features,
        first,
        second,
        first_categories: spec.first.kind.categories(),
        second_categories: spec.second.kind.categories(),
        first_labels,
        second_labels,
    };
    dataset.validate()?;
    Ok(Loaded { dataset, rejected })
}

/// Maps raw category strings to 0-based indices. Uses the block's labels
/// when given, otherwise numeric order if every value is a number, otherwise
/// lexicographic order.
fn encode(block: &BlockSpec, raw: &[(usize, String)]) -> Result<(Vec<usize>, Vec<String>)> {
    let k = block.kind.categories();
    let labels: Vec<String> = match &block.labels {
        Some(labels) => labels.clone(),
        None => {
            let distinct: BTreeSet<&str> = raw.iter().map(|(_, s)| s.as_str()).collect();
            let mut labels: Vec<String> = distinct.into_iter().map(str::to_string).collect();
            let numeric: Option<Vec<f64>> = labels.iter().map(|s| s.parse::<f64>().ok()).collect();
            if let Some(nums) = numeric {
                let mut pairs: Vec<(f64, String)> = nums.into_iter().zip(labels).collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                labels = pairs.into_iter().map(|p| p.1).collect();
            }
            if labels.len() != k {
                return Err(Error::Schema(format!(
                    "outcome '{}' has {} distinct values {:?} but the model declares {k} categories",
                    block.outcome,
                    labels.len(),
                    labels
                )));
            }
            labels
        }
    };
    let index = raw
        .iter()
        .map(|(row, s)| {
            labels.iter().position(|l| l == s).ok_or_else(|| Error::InvalidValue {
                row: *row,
                column: block.outcome.clone(),
                message: format!("unknown category '{s}' (expected one of {labels:?})"),
            })
        })
        .collect::<Result<_>>()?;
    Ok((index, labels))
}

/// All values of one numeric column. Empty fields are skipped.
pub fn read_numeric_column(path: impl AsRef<Path>, column: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let pos = rdr
        .headers()?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Schema(format!("column '{column}' not found in header")))?;
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let s = record.get(pos).unwrap_or("");
        if s.is_empty() {
            continue;
        }
        let x = s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Error::InvalidValue {
            row: i + 1,
            column: column.into(),
            message: format!("cannot parse '{s}' as a finite number"),
        })?;
        out.push(x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::CopulaFamily;
    use crate::model::{Backbone, BlockKind};

    fn spec() -> ModelSpec {
        ModelSpec {
            first: BlockSpec {
                outcome: "stress".into(),
                kind: BlockKind::Ordinal { levels: 2 },
                features: vec!["age".into(), "female".into()],
                labels: Some(vec!["low".into(), "high".into()]),
            },
            second: BlockSpec {
                outcome: "wait".into(),
                kind: BlockKind::Ordinal { levels: 2 },
                features: vec!["female".into()],
                labels: None,
            },
            backbone: Backbone::Logit,
            family: CopulaFamily::Frank,
            indicators: vec!["female".into()],
        }
    }

    #[test]
    fn well_formed() {
        let text = "age,female,stress,wait\n31,1,low,0\n45.5,0,high,1\n22,0,high,0\n";
        let loaded = load_csv_from(text.as_bytes(), &spec()).unwrap();
        let d = loaded.dataset;
        assert_eq!(d.len(), 3);
        assert_eq!(d.columns, vec!["age", "female"]);
        assert_eq!(d.first, vec![0, 1, 1]);
        assert_eq!(d.second, vec![0, 1, 0]);
        assert_eq!(d.second_labels, vec!["0", "1"]);
        assert!(loaded.rejected.is_empty());
    }

    #[test]
    fn missing_outcome_column() {
        let text = "age,female,stress\n31,1,low\n";
        match load_csv_from(text.as_bytes(), &spec()) {
            Err(Error::Schema(msg)) => assert!(msg.contains("'wait'")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn indicator_out_of_range() {
        let text = "age,female,stress,wait\n31,1,low,0\n40,2,low,1\n";
        match load_csv_from(text.as_bytes(), &spec()) {
            Err(Error::InvalidValue { row, column, .. }) => {
                assert_eq!((row, column.as_str()), (2, "female"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_fields_rejected_and_bad_numbers_fail() {
        let text = "age,female,stress,wait\n31,1,low,0\n,0,high,1\n50,0,high,1\n";
        let loaded = load_csv_from(text.as_bytes(), &spec()).unwrap();
        assert_eq!(loaded.dataset.len(), 2);
        assert_eq!(loaded.rejected[0].row, 2);

        let text = "age,female,stress,wait\n31,1,low,0\nold,0,high,1\n";
        assert!(matches!(
            load_csv_from(text.as_bytes(), &spec()),
            Err(Error::InvalidValue { row: 2, .. })
        ));
    }

    #[test]
    fn empty_file() {
        assert!(load_csv_from("".as_bytes(), &spec()).is_err());
        assert!(load_csv_from("age,female,stress,wait\n".as_bytes(), &spec()).is_err());
    }

    #[test]
    fn numeric_labels_sort_numerically() {
        let mut s = spec();
        s.first.labels = None;
        s.first.kind = BlockKind::Ordinal { levels: 3 };
        let text = "age,female,stress,wait\n1,1,10,0\n2,0,9,1\n3,0,100,0\n";
        let d = load_csv_from(text.as_bytes(), &s).unwrap().dataset;
        assert_eq!(d.first_labels, vec!["9", "10", "100"]);
        assert_eq!(d.first, vec![1, 0, 2]);
    }
}
