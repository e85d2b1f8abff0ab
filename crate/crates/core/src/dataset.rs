//! Labeled sample storage shared by every learner, generator and metric.

use faer::MatRef;

use crate::error::{Error, Result};

/// A feature matrix (row-major, one row per sample) with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<usize>,
    class_count: usize,
}

impl LabeledDataset {
    /// Builds a dataset from row-major features.
    ///
    /// Labels must all be below `class_count`, and `class_count` must be at
    /// least 2. Non-finite features are accepted here; learners reject them.
    pub fn new(
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::InvalidData("feature dimension must be at least 1".into()));
        }
        if class_count < 2 {
            return Err(Error::InvalidData(format!(
                "class_count must be at least 2, got {class_count}"
            )));
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::InvalidData(format!(
                "{} feature values do not fill {} rows of {} columns",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some((row, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= class_count) {
            return Err(Error::InvalidData(format!(
                "label {label} at row {row} is not below class_count {class_count}"
            )));
        }
        Ok(Self {
            features,
            n_features,
            labels,
            class_count,
        })
    }

    pub fn empty(n_features: usize, class_count: usize) -> Self {
        assert!(n_features >= 1 && class_count >= 2);
        Self {
            features: Vec::new(),
            n_features,
            labels: Vec::new(),
            class_count,
        }
    }

    /// Convenience constructor from nested rows.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>, class_count: usize) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_features) {
            return Err(Error::InvalidData("rows have differing lengths".into()));
        }
        let features = rows.iter().flatten().copied().collect();
        Self::new(features, n_features, labels, class_count)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Row-major feature values.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn is_finite(&self) -> bool {
        self.features.iter().all(|v| v.is_finite())
    }

    pub(crate) fn matrix(&self) -> MatRef<'_, f64> {
        MatRef::from_row_major_slice(&self.features, self.len(), self.n_features)
    }

    /// Appends all rows of `other`, which must share dimension and class count.
    pub fn append(&mut self, other: &LabeledDataset) -> Result<()> {
        self.check_compatible(other)?;
        self.features.extend_from_slice(&other.features);
        self.labels.extend_from_slice(&other.labels);
        Ok(())
    }

    pub fn push_row(&mut self, row: &[f64], label: usize) -> Result<()> {
        if row.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: row.len(),
            });
        }
        if label >= self.class_count {
            return Err(Error::InvalidData(format!("label {label} out of range")));
        }
        self.features.extend_from_slice(row);
        self.labels.push(label);
        Ok(())
    }

    /// Copies the given rows, in order, into a new dataset.
    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        LabeledDataset {
            features,
            n_features: self.n_features,
            labels,
            class_count: self.class_count,
        }
    }

    pub fn concat(&self, other: &LabeledDataset) -> Result<LabeledDataset> {
        let mut out = self.clone();
        out.append(other)?;
        Ok(out)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Replaces the labels, keeping the features. Used by tests and canaries.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<LabeledDataset> {
        LabeledDataset::new(self.features.clone(), self.n_features, labels, self.class_count)
    }

    fn check_compatible(&self, other: &LabeledDataset) -> Result<()> {
        if other.n_features != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: other.n_features,
            });
        }
        if other.class_count != self.class_count {
            return Err(Error::InvalidData(format!(
                "class_count {} does not match {}",
                other.class_count, self.class_count
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_label() {
        let err = LabeledDataset::new(vec![0.0, 1.0], 1, vec![0, 2], 2).unwrap_err();
        assert!(err.to_string().starts_with("invalid data"));
    }

    #[test]
    fn rejects_ragged_features() {
        assert!(LabeledDataset::new(vec![0.0, 1.0, 2.0], 2, vec![0, 1], 2).is_err());
    }

    #[test]
    fn append_and_select() {
        let mut a = LabeledDataset::from_rows(&[vec![1.0, 2.0]], vec![0], 2).unwrap();
        let b = LabeledDataset::from_rows(&[vec![3.0, 4.0], vec![5.0, 6.0]], vec![1, 1], 2).unwrap();
        a.append(&b).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a.row(2), &[5.0, 6.0]);
        let s = a.select(&[2, 0]);
        assert_eq!(s.labels(), &[1, 0]);
        assert_eq!(s.row(1), &[1.0, 2.0]);
        assert_eq!(a.class_counts(), vec![1, 2]);
    }

    #[test]
    fn append_rejects_other_dimension() {
        let mut a = LabeledDataset::empty(2, 2);
        let b = LabeledDataset::empty(3, 2);
        assert!(matches!(a.append(&b), Err(Error::DimensionMismatch { .. })));
    }
}
