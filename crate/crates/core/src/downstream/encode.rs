use crate::error::{Error, Result};
use crate::tabular::{ColumnData, Dataset, Schema};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FeatureMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        FeatureMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureEncoding {
    Standardized {
        column: usize,
        mean: f64,
        scale: f64,
    },
    OneHot {
        column: usize,
        width: usize,
    },
}

impl FeatureEncoding {
    pub fn column(&self) -> usize {
        match self {
            FeatureEncoding::Standardized { column, .. }
            | FeatureEncoding::OneHot { column, .. } => *column,
        }
    }

    fn width(&self) -> usize {
        match self {
            FeatureEncoding::Standardized { .. } => 1,
            FeatureEncoding::OneHot { width, .. } => *width,
        }
    }
}

/// Feature layout learned from a training set: continuous columns standardized
/// with training statistics, categorical columns one-hot.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingMap {
    schema: Schema,
    features: Vec<FeatureEncoding>,
    width: usize,
}

impl EncodingMap {
    pub fn fit(d: &Dataset) -> Self {
        let schema = d.schema().clone();
        let features: Vec<FeatureEncoding> = schema
            .feature_indices()
            .into_iter()
            .map(|column| match d.column(column) {
                ColumnData::Continuous(v) => {
                    let (mean, scale) = standardization(v);
                    FeatureEncoding::Standardized {
                        column,
                        mean,
                        scale,
                    }
                }
                ColumnData::Categorical(_) => FeatureEncoding::OneHot {
                    column,
                    width: schema.column(column).n_categories(),
                },
            })
            .collect();
        let width = features.iter().map(FeatureEncoding::width).sum();
        EncodingMap {
            schema,
            features,
            width,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn features(&self) -> &[FeatureEncoding] {
        &self.features
    }

    pub fn n_classes(&self) -> usize {
        self.schema.target().n_categories()
    }

    /// Source dataset column of every encoded feature.
    pub fn source_columns(&self) -> Vec<usize> {
        self.features
            .iter()
            .flat_map(|f| std::iter::repeat_n(f.column(), f.width()))
            .collect()
    }

    pub fn transform(&self, d: &Dataset) -> Result<(FeatureMatrix, Vec<u32>)> {
        if d.schema() != &self.schema {
            return Err(Error::SchemaMismatch(
                "dataset schema differs from the encoding's training schema".into(),
            ));
        }
        let mut m = FeatureMatrix::zeros(d.n_rows(), self.width);
        let mut offset = 0;
        for f in &self.features {
            match (f, d.column(f.column())) {
                (FeatureEncoding::Standardized { mean, scale, .. }, ColumnData::Continuous(v)) => {
                    for (i, &x) in v.iter().enumerate() {
                        m.data[i * self.width + offset] = (x - mean) / scale;
                    }
                }
                (FeatureEncoding::OneHot { .. }, ColumnData::Categorical(v)) => {
                    for (i, &c) in v.iter().enumerate() {
                        m.data[i * self.width + offset + c as usize] = 1.0;
                    }
                }
                _ => unreachable!("schema equality implies matching storage"),
            }
            offset += f.width();
        }
        Ok((m, d.target_values().to_vec()))
    }
}

fn standardization(v: &[f64]) -> (f64, f64) {
    let first = v.first().copied().unwrap_or(0.0);
    if v.iter().all(|&x| x == first) {
        // constant column encodes to exact zeros
        return (first, 1.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt().max(1e-12))
}

/// Fits an encoding on `d` and applies it.
pub fn encode_features(d: &Dataset) -> (FeatureMatrix, Vec<u32>, EncodingMap) {
    let map = EncodingMap::fit(d);
    let (x, y) = map
        .transform(d)
        .expect("encoding fitted on the same schema");
    (x, y, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::ColumnSchema;

    fn data(x: Vec<f64>, flag: Vec<u32>, y: Vec<u32>) -> Dataset {
        let schema = Schema::new(
            vec![
                ColumnSchema::continuous("x"),
                ColumnSchema::categorical("flag", ["off", "on"]),
                ColumnSchema::categorical("y", ["0", "1"]),
            ],
            "y",
        )
        .unwrap();
        Dataset::new(
            schema,
            vec![
                ColumnData::Continuous(x),
                ColumnData::Categorical(flag),
                ColumnData::Categorical(y),
            ],
        )
        .unwrap()
    }

    #[test]
    fn width_counts_one_hot() {
        let (m, y, map) = encode_features(&data(vec![1.0, 3.0], vec![0, 1], vec![1, 0]));
        assert_eq!(m.cols, 3);
        assert_eq!(map.width(), 3);
        assert_eq!(m.row(0), &[-1.0, 1.0, 0.0]);
        assert_eq!(m.row(1), &[1.0, 0.0, 1.0]);
        assert_eq!(y, vec![1, 0]);
        assert_eq!(map.source_columns(), vec![0, 1, 1]);
    }

    #[test]
    fn constant_column_encodes_to_zero() {
        let (m, _, _) = encode_features(&data(vec![0.1; 3], vec![0, 1, 0], vec![0, 1, 0]));
        assert!((0..3).all(|i| m.get(i, 0) == 0.0));
    }

    #[test]
    fn test_set_uses_training_statistics() {
        let train = data(vec![0.0, 2.0, 4.0], vec![0, 1, 0], vec![0, 1, 0]);
        let shifted = data(vec![10.0, 12.0, 14.0], vec![0, 1, 0], vec![0, 1, 0]);
        let map = EncodingMap::fit(&train);
        let (m, _) = map.transform(&shifted).unwrap();
        let (own, _, _) = encode_features(&shifted);
        // train mean 2, sd sqrt(8/3)
        let sd = (8.0f64 / 3.0).sqrt();
        assert!((m.get(0, 0) - 8.0 / sd).abs() < 1e-12);
        assert_ne!(m.get(0, 0), own.get(0, 0));
    }
}
