mod common;

use common::{logreg_gradient_error, mlp_gradient_error, random_dataset};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdgattack::downstream::{
    accuracy, feature_importances, predict, predict_proba, softmax, train, tstr, ClassifierConfig,
    ClassifierSuite,
};
use sdgattack::experiment::fixtures;
use sdgattack::tabular::{train_test_split, ColumnData, ColumnSchema, Dataset, Schema};
use sdgattack::Seed;

fn continuous_dataset(columns: Vec<(&str, Vec<f64>)>, y: Vec<u32>) -> Dataset {
    let mut schema: Vec<ColumnSchema> = columns
        .iter()
        .map(|(n, _)| ColumnSchema::continuous(*n))
        .collect();
    schema.push(ColumnSchema::categorical("y", ["0", "1"]));
    let mut data: Vec<ColumnData> = columns
        .into_iter()
        .map(|(_, v)| ColumnData::Continuous(v))
        .collect();
    data.push(ColumnData::Categorical(y));
    Dataset::new(Schema::new(schema, "y").unwrap(), data).unwrap()
}

fn training_accuracy(config: &ClassifierConfig, d: &Dataset) -> f64 {
    let model = train(config, d).unwrap();
    accuracy(&predict(&model, d).unwrap(), d.target_values()).unwrap()
}

#[test]
fn gradients_match_central_differences() {
    for seed in 0..30 {
        let lr = logreg_gradient_error(seed);
        let mlp = mlp_gradient_error(seed);
        assert!(lr < 1e-4, "logreg instance {seed}: {lr}");
        assert!(mlp < 1e-4, "mlp instance {seed}: {mlp}");
    }
}

#[test]
fn logreg_separates_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut a, mut b, mut y) = (vec![], vec![], vec![]);
    for i in 0..200 {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        // margin of at least 1 around the line a + b = 0
        let t: f64 = rng.random_range(-3.0..3.0);
        let off: f64 = rng.random_range(1.0..3.0);
        a.push(t + s * off);
        b.push(-t + s * off);
        y.push(u32::from(s > 0.0));
    }
    let d = continuous_dataset(vec![("a", a), ("b", b)], y);
    assert!(training_accuracy(&ClassifierConfig::logreg(), &d) >= 0.99);
}

#[test]
fn mlp_fits_xor_where_logreg_cannot() {
    let d = fixtures::xor(400, Seed(3));
    let mlp = ClassifierConfig {
        hidden_units: 8,
        ..ClassifierConfig::mlp()
    };
    let nonlinear = training_accuracy(&mlp, &d);
    let linear = training_accuracy(&ClassifierConfig::logreg(), &d);
    assert!(nonlinear >= 0.95, "mlp {nonlinear}");
    assert!(linear <= 0.65, "logreg {linear}");
}

#[test]
fn single_unlimited_tree_memorizes() {
    let d = random_dataset(5, 150, 4, 0, 3);
    let config = ClassifierConfig {
        trees: 1,
        max_depth: None,
        bootstrap: false,
        ..ClassifierConfig::random_forest()
    };
    let model = train(&config, &d).unwrap();
    assert_eq!(predict(&model, &d).unwrap(), d.target_values());
}

#[test]
fn training_is_deterministic() {
    let d = random_dataset(9, 120, 3, 1, 2);
    for config in [
        ClassifierConfig::logreg(),
        ClassifierConfig::mlp(),
        ClassifierConfig::random_forest(),
    ] {
        let config = config.with_seed(Seed(4));
        let a = train(&config, &d).unwrap();
        let b = train(&config, &d).unwrap();
        assert_eq!(a, b);
        assert_eq!(predict(&a, &d).unwrap(), predict(&b, &d).unwrap());
    }
}

#[test]
fn planted_feature_ranked_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let x1: Vec<f64> = (0..2000).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x2: Vec<f64> = (0..2000).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = x1.iter().map(|&v| u32::from(v > 0.0)).collect();
    let d = continuous_dataset(vec![("x1", x1), ("x2", x2)], y);
    let config = ClassifierConfig {
        trees: 50,
        ..ClassifierConfig::random_forest()
    };
    let ranking = feature_importances(&train(&config, &d).unwrap()).unwrap();
    assert_eq!(ranking.names().next(), Some("x1"));
    assert!(ranking.weight("x1").unwrap() >= 0.9);
    let total: f64 = ranking.entries().iter().map(|(_, w)| w).sum();
    assert!((total - 1.0).abs() < 1e-8);
    assert!(ranking.entries().iter().all(|(_, w)| *w >= 0.0));
}

#[test]
fn duplicated_signal_shares_importance() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let x1: Vec<f64> = (0..2000).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x3: Vec<f64> = (0..2000).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = x1.iter().map(|&v| u32::from(v > 0.0)).collect();
    let d = continuous_dataset(vec![("x1", x1.clone()), ("x2", x1), ("x3", x3)], y);
    let config = ClassifierConfig {
        trees: 50,
        ..ClassifierConfig::random_forest()
    };
    let ranking = feature_importances(&train(&config, &d).unwrap()).unwrap();
    assert!(ranking.weight("x1").unwrap() + ranking.weight("x2").unwrap() >= 0.9);
}

#[test]
fn permuting_a_feature_never_raises_its_importance() {
    let d = fixtures::planted_signal(2000, Seed(6));
    let config = ClassifierConfig {
        trees: 50,
        ..ClassifierConfig::random_forest()
    };
    let before = feature_importances(&train(&config, &d).unwrap()).unwrap();
    for c in d.schema().feature_indices() {
        let name = d.schema().column(c).name.clone();
        let mut rows: Vec<usize> = (0..d.n_rows()).collect();
        use rand::seq::SliceRandom;
        rows.shuffle(&mut ChaCha8Rng::seed_from_u64(c as u64));
        let shuffled = d
            .with_column(c, d.take_rows(&rows).column(c).clone())
            .unwrap();
        let after = feature_importances(&train(&config, &shuffled).unwrap()).unwrap();
        let (b, a) = (before.weight(&name).unwrap(), after.weight(&name).unwrap());
        assert!(a <= b + 0.02, "{name}: {b} -> {a}");
    }
}

#[test]
fn tstr_on_the_real_split_matches_train_on_real() {
    let d = fixtures::blobs(2000, Seed(2));
    let (train_set, test_set) = train_test_split(&d, 0.2, Seed(2)).unwrap();
    let suite = ClassifierSuite::default().reseeded(Seed(8));
    let report = tstr(&train_set, &test_set, &suite).unwrap();
    let direct = |config: &ClassifierConfig| {
        let model = train(config, &train_set).unwrap();
        accuracy(
            &predict(&model, &test_set).unwrap(),
            test_set.target_values(),
        )
        .unwrap()
    };
    assert!((report.acc_lr - direct(&suite.logreg)).abs() <= 0.02);
    assert!((report.acc_rf - direct(&suite.random_forest)).abs() <= 0.02);
    assert!((report.acc_mlp - direct(&suite.mlp)).abs() <= 0.02);
}

#[test]
fn single_class_training_is_degenerate() {
    let d = continuous_dataset(vec![("a", vec![1.0, 2.0, 3.0])], vec![1, 1, 1]);
    for config in [
        ClassifierConfig::logreg(),
        ClassifierConfig::mlp(),
        ClassifierConfig::random_forest(),
    ] {
        assert!(matches!(
            train(&config, &d),
            Err(sdgattack::Error::Degenerate(_))
        ));
    }
    let other = random_dataset(1, 10, 1, 0, 2);
    assert!(tstr(&other, &d, &ClassifierSuite::default()).is_err());
}

#[test]
fn probabilities_lie_on_the_simplex() {
    let d = random_dataset(13, 80, 2, 2, 3);
    for config in [
        ClassifierConfig::logreg(),
        ClassifierConfig::mlp(),
        ClassifierConfig::random_forest(),
    ] {
        let model = train(&config, &d).unwrap();
        for p in predict_proba(&model, &d).unwrap() {
            assert_eq!(p.len(), 3);
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
        }
        assert!(predict(&model, &d).unwrap().iter().all(|&c| c < 3));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn descent_never_increases_training_loss(seed in any::<u64>(), n_classes in 2usize..4) {
        let d = random_dataset(seed, 40, 3, 1, n_classes);
        for config in [ClassifierConfig::logreg(), ClassifierConfig { iterations: 200, ..ClassifierConfig::mlp() }] {
            let model = train(&config.with_seed(Seed(seed)), &d).unwrap();
            prop_assert!(model.loss_history.len() >= 2);
            for w in model.loss_history.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
        }
    }

    #[test]
    fn softmax_sums_to_one(z in prop::collection::vec(-1e6f64..1e6, 1..12)) {
        let mut p = z.clone();
        softmax(&mut p);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
        prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn forest_fit_is_reproducible(seed in any::<u64>()) {
        let d = random_dataset(seed, 60, 2, 1, 2);
        let config = ClassifierConfig { trees: 8, ..ClassifierConfig::random_forest() }.with_seed(Seed(seed));
        prop_assert_eq!(train(&config, &d).unwrap(), train(&config, &d).unwrap());
    }
}
