mod common;

use common::{assert_valid, continuous, ks_against_cdf, random_dataset};
use proptest::prelude::*;
use sdgattack::generators::{
    fit, log_likelihood, GeneratorConfig, GeneratorFamily, GeneratorModel,
};
use sdgattack::tabular::{ColumnData, ColumnSchema, Dataset, Schema};
use sdgattack::Seed;

fn gmm_config(components: usize, max_epochs: usize, seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        components,
        max_epochs,
        seed: Seed(seed),
        ..GeneratorConfig::new(GeneratorFamily::Gmm)
    }
}

fn gmm(model: &GeneratorModel) -> &sdgattack::generators::GmmModel {
    match model {
        GeneratorModel::Gmm(g) => g,
        _ => panic!("expected a gmm"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn em_log_is_non_decreasing(
        seed in any::<u64>(),
        rows in 20usize..150,
        n_cont in 1usize..4,
        n_cat in 0usize..3,
        k in 1usize..6,
    ) {
        let d = random_dataset(seed, rows, n_cont, n_cat, 2);
        let model = fit(&gmm_config(k, 60, seed), &d).unwrap();
        let log = model.fit_log().unwrap();
        prop_assert!(!log.is_empty());
        for w in log.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9, "log-likelihood fell from {} to {}", w[0], w[1]);
        }
    }

    #[test]
    fn weights_stay_on_the_simplex_after_every_step(seed in any::<u64>(), k in 1usize..6) {
        let d = random_dataset(seed, 80, 2, 1, 2);
        for epochs in 1..=8 {
            let model = fit(&gmm_config(k, epochs, seed), &d).unwrap();
            let w = &gmm(&model).weights;
            prop_assert_eq!(w.len(), k);
            prop_assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fewer_iterations_never_fit_better(seed in any::<u64>(), k in 1usize..6, n_cat in 0usize..3) {
        let d = random_dataset(seed, 120, 3, n_cat, 2);
        let short = fit(&gmm_config(k, 10, seed), &d).unwrap();
        let long = fit(&gmm_config(k, 100, seed), &d).unwrap();
        let (ls, ll) = (log_likelihood(gmm(&short), &d).unwrap(), log_likelihood(gmm(&long), &d).unwrap());
        prop_assert!(ls <= ll + 1e-9, "E=10 gave {ls}, E=100 gave {ll}");
    }

    #[test]
    fn samples_satisfy_the_training_schema(
        seed in any::<u64>(),
        family in prop::sample::select(vec![GeneratorFamily::Gmm, GeneratorFamily::GaussianCopula, GeneratorFamily::Histogram]),
        n_cont in 0usize..4,
        n_cat in 0usize..3,
        n_classes in 2usize..4,
        m in 1usize..200,
    ) {
        let d = random_dataset(seed, 60, n_cont, n_cat, n_classes);
        let config = GeneratorConfig { components: 3, ..gmm_config(3, 20, seed) };
        let model = fit(&GeneratorConfig { family, ..config }, &d).unwrap();
        let s = model.sample(m, Seed(seed ^ 5)).unwrap();
        prop_assert_eq!(s.n_rows(), m);
        prop_assert_eq!(s.schema(), d.schema());
        assert_valid(&s);
        prop_assert_eq!(model.sample(m, Seed(seed ^ 5)).unwrap(), s);
    }
}

/// Two continuous columns with different shapes plus a binary target.
fn skewed(rows: usize, seed: u64) -> Dataset {
    let d = random_dataset(seed, rows, 2, 1, 2);
    let a = continuous(&d, "x0");
    let b: Vec<f64> = continuous(&d, "x1")
        .iter()
        .map(|x| (x / 4.0).exp())
        .collect();
    let schema = Schema::new(
        vec![
            ColumnSchema::continuous("a"),
            ColumnSchema::continuous("b"),
            ColumnSchema::categorical("y", ["n", "p"]),
        ],
        "y",
    )
    .unwrap();
    Dataset::new(
        schema,
        vec![
            ColumnData::Continuous(a),
            ColumnData::Continuous(b),
            ColumnData::Categorical(d.target_values().to_vec()),
        ],
    )
    .unwrap()
}

fn assert_sampling_matches_marginals(model: &GeneratorModel) {
    let s = model.sample(100_000, Seed(99)).unwrap();
    for name in ["a", "b"] {
        let ks = ks_against_cdf(&continuous(&s, name), |x| {
            model.marginal_cdf(name, x).unwrap()
        });
        assert!(ks <= 0.01, "{:?} column {name}: KS {ks}", model.family());
    }
}

#[test]
fn gmm_samples_match_analytic_marginals() {
    let d = skewed(500, 4);
    assert_sampling_matches_marginals(&fit(&gmm_config(4, 50, 1), &d).unwrap());
}

#[test]
fn histogram_samples_match_analytic_marginals() {
    let d = skewed(500, 8);
    let config = GeneratorConfig {
        bins: 15,
        ..GeneratorConfig::new(GeneratorFamily::Histogram)
    };
    assert_sampling_matches_marginals(&fit(&config, &d).unwrap());
}

#[test]
fn copula_samples_match_fitted_marginals() {
    let d = skewed(400, 12);
    assert_sampling_matches_marginals(
        &fit(&GeneratorConfig::new(GeneratorFamily::GaussianCopula), &d).unwrap(),
    );
}

#[test]
fn sampling_zero_rows_is_an_error() {
    let d = random_dataset(1, 40, 2, 1, 2);
    for family in [
        GeneratorFamily::Gmm,
        GeneratorFamily::GaussianCopula,
        GeneratorFamily::Histogram,
    ] {
        let model = fit(
            &GeneratorConfig {
                family,
                components: 2,
                ..GeneratorConfig::default()
            },
            &d,
        )
        .unwrap();
        assert!(model.sample(0, Seed(0)).is_err());
        assert!(model.marginal_cdf("c0", 0.0).is_err());
    }
}
