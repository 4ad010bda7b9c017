use std::collections::BTreeMap;

use rand::seq::index;

use crate::rng::RngStream;

use super::error::DataError;

#[derive(Clone, Debug, PartialEq)]
pub enum Labels {
    /// 0-based contiguous class ids.
    Classes(Vec<usize>),
    Targets(Vec<f64>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Classes(v) => v.len(),
            Labels::Targets(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    None,
    UnitInterval,
}

/// A row-major feature matrix with one label per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    cols: usize,
    labels: Labels,
    normalization: Normalization,
    class_values: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(features: Vec<f64>, cols: usize, labels: Labels) -> Result<Self, DataError> {
        if labels.is_empty() {
            return Err(DataError::Empty);
        }
        if cols == 0 || features.len() != cols * labels.len() {
            return Err(DataError::Shape(format!(
                "{} feature values do not form {} rows of {cols} columns",
                features.len(),
                labels.len()
            )));
        }
        Ok(Dataset { features, cols, labels, normalization: Normalization::None, class_values: None })
    }

    /// Builds a classification dataset from arbitrary label values, mapping
    /// them in ascending order onto `0, 1, …`.
    pub fn with_raw_classes(features: Vec<f64>, cols: usize, raw: &[f64]) -> Result<Self, DataError> {
        let (ids, values) = remap_labels(raw);
        let mut ds = Dataset::new(features, cols, Labels::Classes(ids))?;
        ds.class_values = Some(values);
        Ok(ds)
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.cols..(i + 1) * self.cols]
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn classes(&self) -> Option<&[usize]> {
        match &self.labels {
            Labels::Classes(c) => Some(c),
            Labels::Targets(_) => None,
        }
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.classes().map(|c| c.iter().max().map_or(0, |m| m + 1))
    }

    /// Original label value of each class id, when the labels were remapped.
    pub fn class_values(&self) -> Option<&[f64]> {
        self.class_values.as_deref()
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// A uniformly random subset of `k` rows, kept in their original order.
    pub fn subsample(&self, k: usize, rng: &mut RngStream) -> Result<Dataset, DataError> {
        if k == 0 || k > self.rows() {
            return Err(DataError::Shape(format!("cannot take {k} of {} rows", self.rows())));
        }
        let mut keep = index::sample(rng, self.rows(), k).into_vec();
        keep.sort_unstable();
        let features = keep.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        let labels = match &self.labels {
            Labels::Classes(c) => Labels::Classes(keep.iter().map(|&i| c[i]).collect()),
            Labels::Targets(t) => Labels::Targets(keep.iter().map(|&i| t[i]).collect()),
        };
        Ok(Dataset {
            features,
            cols: self.cols,
            labels,
            normalization: self.normalization,
            class_values: self.class_values.clone(),
        })
    }
}

/// Maps each distinct value to its rank among the distinct values.
pub(crate) fn remap_labels(raw: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let mut order: BTreeMap<u64, f64> = BTreeMap::new();
    for &v in raw {
        order.insert(ordered_bits(v), v);
    }
    let values: Vec<f64> = order.values().copied().collect();
    let id: BTreeMap<u64, usize> = order.keys().enumerate().map(|(i, &k)| (k, i)).collect();
    (raw.iter().map(|&v| id[&ordered_bits(v)]).collect(), values)
}

// Bit pattern whose unsigned order matches numeric order for finite values.
fn ordered_bits(v: f64) -> u64 {
    let v = if v == 0.0 { 0.0 } else { v };
    let b = v.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Maps each feature column affinely from `[min, max]` onto `[0, 1]`.
/// Constant columns become 0. Applying it twice changes nothing.
pub fn normalize_unit_interval(ds: &Dataset) -> Dataset {
    let cols = ds.cols;
    let rows = ds.rows();
    let mut out = ds.clone();
    for c in 0..cols {
        let (lo, hi) = (0..rows)
            .map(|r| ds.features[r * cols + c])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        for r in 0..rows {
            let v = &mut out.features[r * cols + c];
            *v = if hi > lo { (*v - lo) / (hi - lo) } else { 0.0 };
        }
    }
    out.normalization = Normalization::UnitInterval;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Purpose;

    #[test]
    fn affine_column_map() {
        let ds = Dataset::new(vec![-1.0, 7.0, 0.0, 7.0, 1.0, 7.0], 2, Labels::Targets(vec![0.0; 3])).unwrap();
        let n = normalize_unit_interval(&ds);
        assert_eq!(n.features(), &[0.0, 0.0, 0.5, 0.0, 1.0, 0.0]);
        assert_eq!(normalize_unit_interval(&n), n);
    }

    #[test]
    fn pixel_bytes_divide_by_255() {
        let px: Vec<f64> = (0..=255).map(f64::from).collect();
        let ds = Dataset::new(px.clone(), 1, Labels::Classes(vec![0; 256])).unwrap();
        let n = normalize_unit_interval(&ds);
        for (a, b) in n.features().iter().zip(&px) {
            assert_eq!(*a, b / 255.0);
        }
    }

    #[test]
    fn labels_remap_in_order() {
        let (ids, values) = remap_labels(&[7.0, -3.0, 7.0, 2.0]);
        assert_eq!(ids, vec![2, 0, 2, 1]);
        assert_eq!(values, vec![-3.0, 2.0, 7.0]);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(Dataset::new(vec![], 2, Labels::Classes(vec![])), Err(DataError::Empty)));
        assert!(Dataset::new(vec![1.0; 5], 2, Labels::Classes(vec![0, 1])).is_err());
    }

    #[test]
    fn subsample_keeps_rows_intact() {
        let ds = Dataset::new((0..20).map(f64::from).collect(), 2, Labels::Classes((0..10).collect())).unwrap();
        let s = ds.subsample(4, &mut RngStream::new(1, Purpose::DataGeneration)).unwrap();
        assert_eq!(s.rows(), 4);
        for (r, &c) in s.classes().unwrap().iter().enumerate() {
            assert_eq!(s.row(r), &[2.0 * c as f64, 2.0 * c as f64 + 1.0]);
        }
        assert!(ds.subsample(11, &mut RngStream::new(1, Purpose::DataGeneration)).is_err());
    }
}
