//! Datasets: ingestion, discretization, splitting and synthetic generation.

mod jenks;
mod load;
mod simulate;
mod split;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use jenks::{class_counts, jenks_breaks, within_class_sse};
pub use load::{load_csv, load_csv_from, read_numeric_column, Loaded, RejectedRow};
pub use simulate::{simulate, Covariate, CovariateKind, Simulated, SyntheticTruth};
pub use split::{stratified_split, Split};

use crate::error::{Error, Result};

/// Feature matrix plus the two observed outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub columns: Vec<String>,
    /// Row-major, `len() * columns.len()` values.
    pub features: Vec<f64>,
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub first_categories: usize,
    pub second_categories: usize,
    /// Category labels, index `i` is the label of category `i`.
    pub first_labels: Vec<String>,
    pub second_labels: Vec<String>,
}

impl Dataset {
    /// Builds a dataset with numeric labels `"0", "1", ...`.
    pub fn new(
        columns: Vec<String>,
        features: Vec<f64>,
        first: Vec<usize>,
        second: Vec<usize>,
        first_categories: usize,
        second_categories: usize,
    ) -> Result<Self> {
        let labels = |k: usize| (0..k).map(|i| i.to_string()).collect();
        let data = Self {
            first_labels: labels(first_categories),
            second_labels: labels(second_categories),
            columns,
            features,
            first,
            second,
            first_categories,
            second_categories,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.first.len();
        if self.second.len() != n || self.features.len() != n * self.columns.len() {
            return Err(Error::Dimension(format!(
                "{} first outcomes, {} second outcomes, {} feature values for {} columns",
                n,
                self.second.len(),
                self.features.len(),
                self.columns.len()
            )));
        }
        if self.first_labels.len() != self.first_categories || self.second_labels.len() != self.second_categories {
            return Err(Error::Dimension("label maps do not match category counts".into()));
        }
        for (name, ys, k) in [
            ("first", &self.first, self.first_categories),
            ("second", &self.second, self.second_categories),
        ] {
            if let Some(row) = ys.iter().position(|&y| y >= k) {
                return Err(Error::InvalidValue {
                    row: row + 1,
                    column: name.into(),
                    message: format!("category index {} outside 0..{k}", ys[row]),
                });
            }
        }
        if let Some(pos) = self.features.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidValue {
                row: pos / self.columns.len().max(1) + 1,
                column: self.columns[pos % self.columns.len()].clone(),
                message: "non-finite value".into(),
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.columns.len();
        &self.features[i * d..(i + 1) * d]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column_index(name)?;
        Some((0..self.len()).map(|i| self.row(i)[c]).collect())
    }

    /// Row-major joint cell index of each observation.
    pub fn joint_cells(&self) -> Vec<usize> {
        self.first
            .iter()
            .zip(&self.second)
            .map(|(&a, &b)| a * self.second_categories + b)
            .collect()
    }

    /// Observation counts per joint cell, row-major.
    pub fn cell_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.first_categories * self.second_categories];
        for c in self.joint_cells() {
            counts[c] += 1;
        }
        counts
    }

    /// A new dataset with the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Self {
        let mut features = Vec::with_capacity(rows.len() * self.columns.len());
        for &r in rows {
            features.extend_from_slice(self.row(r));
        }
        Self {
            columns: self.columns.clone(),
            features,
            first: rows.iter().map(|&r| self.first[r]).collect(),
            second: rows.iter().map(|&r| self.second[r]).collect(),
            first_categories: self.first_categories,
            second_categories: self.second_categories,
            first_labels: self.first_labels.clone(),
            second_labels: self.second_labels.clone(),
        }
    }

    /// Writes a CSV with the feature columns followed by the two outcome
    /// columns (as labels). Floats use the shortest round-trip form.
    pub fn write_csv<W: Write>(&self, out: W, first_name: &str, second_name: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.columns.iter().map(String::as_str).collect();
        header.push(first_name);
        header.push(second_name);
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for i in 0..self.len() {
            record.clear();
            record.extend(self.row(i).iter().map(|x| x.to_string()));
            record.push(self.first_labels[self.first[i]].clone());
            record.push(self.second_labels[self.second[i]].clone());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        Dataset::new(
            vec!["x".into(), "z".into()],
            vec![0.5, 1.0, -1.25, 0.0, 3.0, 1.0],
            vec![0, 1, 1],
            vec![1, 0, 1],
            2,
            2,
        )
        .unwrap()
    }

    #[test]
    fn accessors() {
        let d = tiny();
        assert_eq!(d.len(), 3);
        assert_eq!(d.row(1), &[-1.25, 0.0]);
        assert_eq!(d.column("z").unwrap(), vec![1.0, 0.0, 1.0]);
        assert_eq!(d.joint_cells(), vec![1, 2, 3]);
        assert_eq!(d.cell_counts(), vec![0, 1, 1, 1]);
        let s = d.subset(&[2, 0]);
        assert_eq!(s.first, vec![1, 0]);
        assert_eq!(s.row(0), &[3.0, 1.0]);
    }

    #[test]
    fn out_of_range_category_rejected() {
        let err = Dataset::new(vec![], vec![], vec![0, 2], vec![0, 0], 2, 2);
        assert!(matches!(err, Err(Error::InvalidValue { row: 2, .. })));
    }

    #[test]
    fn csv_output() {
        let mut buf = Vec::new();
        tiny().write_csv(&mut buf, "a", "b").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "x,z,a,b\n0.5,1,0,1\n-1.25,0,1,0\n3,1,1,1\n");
    }
}
