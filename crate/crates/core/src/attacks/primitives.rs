use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::downstream::ImportanceRanking;
use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::tabular::{ColumnData, ColumnKind, Dataset, Schema};

pub const INCORRECT_SOURCE_LOW: f64 = -10.0;
pub const INCORRECT_SOURCE_HIGH: f64 = 10.0;
pub const INCORRECT_SOURCE_SIGMA: f64 = 0.1;

/// Row indices chosen for label flipping, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipIndexSet {
    pub indices: Vec<usize>,
}

fn check_ratio(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("ratio {r} outside [0, 1]")))
    }
}

/// `floor(r * n)`, guarded against products like 0.3 * 1000 landing a hair
/// below the integer.
fn flip_count(n: usize, r: f64) -> usize {
    ((r * n as f64 + 1e-9).floor() as usize).min(n)
}

/// Uniform sample without replacement of `floor(r * n)` row indices.
pub fn select_flip_indices(n: usize, r: f64, seed: Seed) -> Result<FlipIndexSet> {
    check_ratio(r)?;
    let count = flip_count(n, r);
    let mut rng = seed.rng("label_flip.indices");
    let mut indices = sample(&mut rng, n, count).into_vec();
    indices.sort_unstable();
    Ok(FlipIndexSet { indices })
}

/// Changes the target of exactly `floor(r * n)` rows. Binary labels are
/// inverted; multiclass labels move uniformly to one of the other classes.
pub fn label_flip(d: &Dataset, r: f64, seed: Seed) -> Result<Dataset> {
    let target = d.schema().target();
    if target.kind == ColumnKind::Continuous {
        return Err(Error::InvalidParameter(format!(
            "label flipping needs a categorical target, {:?} is continuous",
            target.name
        )));
    }
    let k = target.n_categories() as u32;
    let flip = select_flip_indices(d.n_rows(), r, seed)?;
    let mut y = d.target_values().to_vec();
    let mut rng = seed.rng("label_flip.reassign");
    for &i in &flip.indices {
        y[i] = if k == 2 {
            1 - y[i]
        } else {
            let u = rng.random_range(0..k - 1);
            if u >= y[i] {
                u + 1
            } else {
                u
            }
        };
    }
    d.with_column(d.schema().target_index(), ColumnData::Categorical(y))
}

/// Columns kept by FIA at retain ratio `r`: the target plus the top
/// `ceil(r * (d - 1))` features of `ranking`. Sorted by column index.
pub fn retained_columns(
    schema: &Schema,
    r: f64,
    ranking: &ImportanceRanking,
) -> Result<Vec<usize>> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "feature retain ratio must lie in (0, 1], got {r}"
        )));
    }
    let features = schema.feature_indices();
    let mut covered = vec![false; schema.len()];
    for name in ranking.names() {
        let idx = schema.index_of(name).map_err(|_| {
            Error::SchemaMismatch(format!("ranking names {name:?}, which is not a column"))
        })?;
        if idx == schema.target_index() || covered[idx] {
            return Err(Error::SchemaMismatch(format!(
                "ranking lists {name:?} more than once or ranks the target"
            )));
        }
        covered[idx] = true;
    }
    if ranking.len() != features.len() {
        return Err(Error::SchemaMismatch(format!(
            "ranking covers {} of {} feature columns",
            ranking.len(),
            features.len()
        )));
    }
    let keep = ((r * features.len() as f64 - 1e-9).ceil() as usize).clamp(1, features.len());
    let mut kept: Vec<usize> = ranking
        .names()
        .take(keep)
        .map(|n| schema.index_of(n).expect("checked above"))
        .collect();
    kept.push(schema.target_index());
    kept.sort_unstable();
    Ok(kept)
}

/// Constant column used to suppress column `idx`: 0.0 for continuous
/// columns, the modal category (lowest index on ties) otherwise.
pub fn suppression_fill(d: &Dataset, idx: usize, n: usize) -> ColumnData {
    match d.column(idx) {
        ColumnData::Continuous(_) => ColumnData::Continuous(vec![0.0; n]),
        ColumnData::Categorical(v) => {
            let mut counts = vec![0usize; d.schema().column(idx).n_categories()];
            for &c in v {
                counts[c as usize] += 1;
            }
            let mut mode = 0;
            for (c, &count) in counts.iter().enumerate() {
                if count > counts[mode] {
                    mode = c;
                }
            }
            ColumnData::Categorical(vec![mode as u32; n])
        }
    }
}

/// Keeps the most important features and the target, constant-fills the rest.
pub fn feature_importance_attack(
    d: &Dataset,
    r: f64,
    ranking: &ImportanceRanking,
) -> Result<Dataset> {
    let kept = retained_columns(d.schema(), r, ranking)?;
    let columns = (0..d.n_cols())
        .map(|c| {
            if kept.binary_search(&c).is_ok() {
                d.column(c).clone()
            } else {
                suppression_fill(d, c, d.n_rows())
            }
        })
        .collect();
    d.with_columns(columns)
}

/// Like `feature_importance_attack` but removes suppressed columns from the
/// schema.
pub fn feature_importance_drop(
    d: &Dataset,
    r: f64,
    ranking: &ImportanceRanking,
) -> Result<Dataset> {
    let kept = retained_columns(d.schema(), r, ranking)?;
    let dropped: Vec<usize> = (0..d.n_cols())
        .filter(|c| kept.binary_search(c).is_err())
        .collect();
    let schema = d.schema().without(&dropped)?;
    Dataset::new(schema, kept.iter().map(|&c| d.column(c).clone()).collect())
}

/// Re-expands a dataset with dropped columns to `original`'s schema, filling
/// each missing column the way `feature_importance_attack` would.
pub fn restore_suppressed(reduced: &Dataset, original: &Dataset) -> Result<Dataset> {
    let n = reduced.n_rows();
    let columns = original
        .schema()
        .columns()
        .iter()
        .enumerate()
        .map(|(c, col)| match reduced.schema().index_of(&col.name) {
            Ok(idx) => {
                if reduced.schema().column(idx) != col {
                    return Err(Error::SchemaMismatch(format!(
                        "column {:?} changed definition",
                        col.name
                    )));
                }
                Ok(reduced.column(idx).clone())
            }
            Err(_) => Ok(suppression_fill(original, c, n)),
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(original.schema().clone(), columns)
}

/// Data from the wrong source: continuous cells Uniform(-10, 10) plus
/// Normal(0, 0.1²), categorical cells (target included) uniform over their
/// categories.
pub fn incorrect_source(schema: &Schema, n: usize, seed: Seed) -> Result<Dataset> {
    if schema.is_empty() {
        return Err(Error::InvalidParameter(
            "incorrect source needs a non-empty schema".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "incorrect source needs n >= 1".into(),
        ));
    }
    let columns = schema
        .columns()
        .iter()
        .enumerate()
        .map(|(c, col)| {
            let mut rng = seed.derive_index(c as u64).rng("incorrect_source");
            match col.kind {
                ColumnKind::Continuous => ColumnData::Continuous(
                    (0..n)
                        .map(|_| {
                            let u = rng.random_range(INCORRECT_SOURCE_LOW..INCORRECT_SOURCE_HIGH);
                            let z: f64 = rng.sample(StandardNormal);
                            u + INCORRECT_SOURCE_SIGMA * z
                        })
                        .collect(),
                ),
                _ => {
                    let k = col.n_categories() as u32;
                    ColumnData::Categorical((0..n).map(|_| rng.random_range(0..k)).collect())
                }
            }
        })
        .collect();
    Dataset::new(schema.clone(), columns)
}

/// Multiplies every continuous cell by `s`.
pub fn scale_output(d: &Dataset, s: f64) -> Result<Dataset> {
    if !s.is_finite() || s == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "scale must be finite and non-zero, got {s}"
        )));
    }
    let columns = d
        .columns()
        .iter()
        .map(|c| match c {
            ColumnData::Continuous(v) => ColumnData::Continuous(v.iter().map(|x| x * s).collect()),
            other => other.clone(),
        })
        .collect();
    d.with_columns(columns)
}

/// Adds independent Normal(0, σ²) noise to every continuous cell. Each
/// cell's draw depends only on `(seed, row, column)`.
pub fn noise_inject(d: &Dataset, sigma: f64, seed: Seed) -> Result<Dataset> {
    let keys: Vec<u64> = (0..d.n_rows() as u64).collect();
    noise_inject_keyed(d, sigma, seed, &keys)
}

/// `noise_inject` with explicit per-row keys in place of row positions, so
/// that a permuted dataset carrying its original keys receives the same
/// noise per row.
pub fn noise_inject_keyed(
    d: &Dataset,
    sigma: f64,
    seed: Seed,
    row_keys: &[u64],
) -> Result<Dataset> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be finite and >= 0, got {sigma}"
        )));
    }
    if row_keys.len() != d.n_rows() {
        return Err(Error::InvalidParameter(format!(
            "{} row keys for {} rows",
            row_keys.len(),
            d.n_rows()
        )));
    }
    if sigma == 0.0 {
        return Ok(d.clone());
    }
    let columns = d
        .columns()
        .iter()
        .enumerate()
        .map(|(c, col)| match col {
            ColumnData::Continuous(v) => ColumnData::Continuous(
                v.iter()
                    .zip(row_keys)
                    .map(|(x, &key)| {
                        let z: f64 = seed
                            .cell_rng("noise_inject", key, c as u64)
                            .sample(StandardNormal);
                        x + sigma * z
                    })
                    .collect(),
            ),
            other => other.clone(),
        })
        .collect();
    d.with_columns(columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::ColumnSchema;

    fn labelled(labels: &[u32]) -> Dataset {
        let schema = Schema::new(
            vec![
                ColumnSchema::continuous("x"),
                ColumnSchema::categorical("y", ["0", "1"]),
            ],
            "y",
        )
        .unwrap();
        Dataset::new(
            schema,
            vec![
                ColumnData::Continuous((0..labels.len()).map(|i| i as f64).collect()),
                ColumnData::Categorical(labels.to_vec()),
            ],
        )
        .unwrap()
    }

    fn four_features() -> (Dataset, ImportanceRanking) {
        let schema = Schema::new(
            vec![
                ColumnSchema::continuous("f1"),
                ColumnSchema::continuous("f2"),
                ColumnSchema::categorical("f3", ["a", "b", "c"]),
                ColumnSchema::continuous("f4"),
                ColumnSchema::categorical("y", ["0", "1"]),
            ],
            "y",
        )
        .unwrap();
        let d = Dataset::new(
            schema,
            vec![
                ColumnData::Continuous(vec![1.0, 2.0, 3.0]),
                ColumnData::Continuous(vec![4.0, 5.0, 6.0]),
                ColumnData::Categorical(vec![2, 1, 2]),
                ColumnData::Continuous(vec![7.0, 8.0, 9.0]),
                ColumnData::Categorical(vec![0, 1, 1]),
            ],
        )
        .unwrap();
        let ranking = ImportanceRanking::new(vec![
            ("f1".into(), 0.4),
            ("f2".into(), 0.3),
            ("f3".into(), 0.2),
            ("f4".into(), 0.1),
        ])
        .unwrap();
        (d, ranking)
    }

    #[test]
    fn flip_examples() {
        let d = labelled(&[0, 1, 0, 1]);
        assert_eq!(label_flip(&d, 0.0, Seed(1)).unwrap(), d);
        assert_eq!(
            label_flip(&d, 1.0, Seed(1)).unwrap().target_values(),
            &[1, 0, 1, 0]
        );
        assert!(label_flip(&d, 1.5, Seed(1)).is_err());
    }

    #[test]
    fn flipped_rows_are_the_index_set() {
        let labels: Vec<u32> = (0..1000).map(|i| (i * 7 % 3 == 0) as u32).collect();
        let d = labelled(&labels);
        let out = label_flip(&d, 0.3, Seed(9)).unwrap();
        let changed: Vec<usize> = (0..1000)
            .filter(|&i| out.target_values()[i] != labels[i])
            .collect();
        assert_eq!(changed.len(), 300);
        assert_eq!(
            changed,
            select_flip_indices(1000, 0.3, Seed(9)).unwrap().indices
        );
        assert_eq!(out.column(0), d.column(0));
    }

    #[test]
    fn multiclass_flip_moves_to_another_class() {
        let schema = Schema::new(
            vec![ColumnSchema::categorical("y", ["a", "b", "c", "d"])],
            "y",
        )
        .unwrap();
        let y: Vec<u32> = (0..400).map(|i| i % 4).collect();
        let d = Dataset::new(schema, vec![ColumnData::Categorical(y.clone())]).unwrap();
        let out = label_flip(&d, 1.0, Seed(2)).unwrap();
        let mut hits = [0usize; 4];
        for (a, b) in y.iter().zip(out.target_values()) {
            assert_ne!(a, b);
            hits[*b as usize] += 1;
        }
        assert!(hits.iter().all(|&h| h > 60), "{hits:?}");
    }

    #[test]
    fn flip_index_sets() {
        let s = select_flip_indices(4, 0.5, Seed(3)).unwrap();
        assert_eq!(s.indices.len(), 2);
        assert!(s.indices.iter().all(|&i| i < 4));
        assert_eq!(s, select_flip_indices(4, 0.5, Seed(3)).unwrap());
    }

    #[test]
    fn flip_selection_is_uniform() {
        let mut hits = [0usize; 10];
        for seed in 0..10_000 {
            for i in select_flip_indices(10, 0.5, Seed(seed)).unwrap().indices {
                hits[i] += 1;
            }
        }
        for h in hits {
            assert!((4800..=5200).contains(&h), "{hits:?}");
        }
    }

    #[test]
    fn fia_examples() {
        let (d, ranking) = four_features();
        assert_eq!(feature_importance_attack(&d, 1.0, &ranking).unwrap(), d);
        let out = feature_importance_attack(&d, 0.5, &ranking).unwrap();
        assert_eq!(out.column(0), d.column(0));
        assert_eq!(out.column(1), d.column(1));
        assert_eq!(out.column(2), &ColumnData::Categorical(vec![2, 2, 2]));
        assert_eq!(out.column(3), &ColumnData::Continuous(vec![0.0; 3]));
        assert_eq!(out.column(4), d.column(4));
        assert!(feature_importance_attack(&d, 0.0, &ranking).is_err());
        let partial = ImportanceRanking::new(vec![("f1".into(), 1.0)]).unwrap();
        assert!(matches!(
            feature_importance_attack(&d, 0.5, &partial),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn fia_most_aggressive_keeps_one_feature() {
        let mut cols: Vec<ColumnSchema> = (0..10)
            .map(|i| ColumnSchema::continuous(format!("f{i}")))
            .collect();
        cols.push(ColumnSchema::categorical("y", ["0", "1"]));
        let schema = Schema::new(cols, "y").unwrap();
        let ranking = ImportanceRanking::new(
            (0..10)
                .map(|i| (format!("f{i}"), 1.0 / (i + 1) as f64))
                .collect(),
        )
        .unwrap();
        assert_eq!(
            retained_columns(&schema, 0.1, &ranking).unwrap(),
            vec![0, 10]
        );
        assert_eq!(
            retained_columns(&schema, 0.3, &ranking).unwrap(),
            vec![0, 1, 2, 10]
        );
    }

    #[test]
    fn fia_drop_and_restore() {
        let (d, ranking) = four_features();
        let dropped = feature_importance_drop(&d, 0.5, &ranking).unwrap();
        assert_eq!(
            dropped.schema().names().collect::<Vec<_>>(),
            vec!["f1", "f2", "y"]
        );
        let restored = restore_suppressed(&dropped, &d).unwrap();
        assert_eq!(
            restored,
            feature_importance_attack(&d, 0.5, &ranking).unwrap()
        );
    }

    #[test]
    fn incorrect_source_moments() {
        let schema = Schema::new(
            vec![
                ColumnSchema::continuous("x"),
                ColumnSchema::categorical("y", ["0", "1"]),
            ],
            "y",
        )
        .unwrap();
        let d = incorrect_source(&schema, 100_000, Seed(5)).unwrap();
        let x = d.column(0).as_continuous().unwrap();
        assert!(x.iter().all(|v| v.abs() <= 10.8));
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        assert!(mean.abs() < 0.15, "{mean}");
        let small = incorrect_source(&schema, 10_000, Seed(6)).unwrap();
        let ones = small.target_values().iter().filter(|&&c| c == 1).count() as f64 / 10_000.0;
        assert!((ones - 0.5).abs() < 0.02, "{ones}");
        assert!(incorrect_source(&schema, 0, Seed(0)).is_err());
    }

    #[test]
    fn scaling() {
        let d = labelled(&[0, 1]);
        let two = scale_output(&d, 2.0).unwrap();
        assert_eq!(two.column(0), &ColumnData::Continuous(vec![0.0, 2.0]));
        assert_eq!(two.column(1), d.column(1));
        let schema = d.schema().clone();
        let e = Dataset::new(
            schema,
            vec![
                ColumnData::Continuous(vec![1.0, -2.0]),
                ColumnData::Categorical(vec![0, 1]),
            ],
        )
        .unwrap();
        assert_eq!(
            scale_output(&e, 2.0).unwrap().column(0),
            &ColumnData::Continuous(vec![2.0, -4.0])
        );
        assert_eq!(
            scale_output(&scale_output(&e, 2.0).unwrap(), 0.5).unwrap(),
            e
        );
        assert_eq!(scale_output(&e, 1.0).unwrap(), e);
        assert!(scale_output(&e, f64::INFINITY).is_err());
        assert!(scale_output(&e, 0.0).is_err());
    }

    #[test]
    fn noise_examples() {
        let d = labelled(&vec![0; 100_000]);
        let zeros = d
            .with_column(0, ColumnData::Continuous(vec![0.0; 100_000]))
            .unwrap();
        assert_eq!(noise_inject(&zeros, 0.0, Seed(1)).unwrap(), zeros);
        let noisy = noise_inject(&zeros, 10.0, Seed(1)).unwrap();
        let v = noisy.column(0).as_continuous().unwrap();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
        assert!((sd - 10.0).abs() < 0.15, "{sd}");
        assert_eq!(noisy, noise_inject(&zeros, 10.0, Seed(1)).unwrap());
        assert_eq!(noisy.column(1), zeros.column(1));
        assert!(noise_inject(&zeros, -1.0, Seed(1)).is_err());
    }
}
