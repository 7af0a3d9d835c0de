use std::collections::HashSet;

use partex_core::classifier::{
    classify_marginal, classify_simultaneous, classify_simultaneous_from, fit, predictive_log_prob,
    ClassifierModel,
};
use partex_core::urn::{urn_labels, Seed};
use partex_core::{Psi, Token};
use proptest::prelude::*;
use rand::seq::{index, SliceRandom};

type Rows = Vec<Vec<Token>>;

/// Per class, draws `train + test` urn rows per feature (one ψ per feature),
/// and holds out `test` random rows.
fn holdout(seed: u64, class_psis: &[&[f64]], train: usize, test: usize) -> (Rows, Vec<String>, Rows, Vec<String>) {
    let mut rng = Seed(seed).rng();
    let (mut xs, mut ys, mut ts, mut truth) = (vec![], vec![], vec![], vec![]);
    for (c, psis) in class_psis.iter().enumerate() {
        let columns: Vec<Vec<u64>> = psis
            .iter()
            .map(|&p| urn_labels(train + test, Psi::new(p).unwrap(), &mut rng))
            .collect();
        let held: HashSet<usize> = index::sample(&mut rng, train + test, test).into_iter().collect();
        for i in 0..train + test {
            let row: Vec<Token> = columns.iter().map(|col| Token::Int(col[i] as i64)).collect();
            let label = (c + 1).to_string();
            if held.contains(&i) {
                ts.push(row);
                truth.push(label);
            } else {
                xs.push(row);
                ys.push(label);
            }
        }
    }
    (xs, ys, ts, truth)
}

fn accuracy(labels: &[String], truth: &[String]) -> f64 {
    labels.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

#[test]
fn one_feature_fit_recovers_class_psis() {
    let (xs, ys, _, _) = holdout(111, &[&[10.0], &[100.0]], 5000, 0);
    let model = fit(&xs, &ys).unwrap();
    assert_eq!(model.classes(), &["1".to_owned(), "2".to_owned()]);
    assert_eq!(model.n_features(), 1);
    for (c, target) in [(0, 10.0), (1, 100.0)] {
        let fm = model.feature_model(c, 0);
        assert_eq!(fm.m(), 5000);
        let rel = (fm.psi_hat().get() - target).abs() / target;
        assert!(rel < 0.3, "class {c}: {}", fm.psi_hat());
        let total: f64 = fm
            .frequencies()
            .keys()
            .chain(std::iter::once(&Token::from("never seen")))
            .map(|t| predictive_log_prob(fm, t).exp())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn two_feature_fit() {
    let (xs, ys, _, _) = holdout(111, &[&[10.0, 50.0], &[100.0, 500.0]], 5000, 0);
    let model = fit(&xs, &ys).unwrap();
    assert_eq!(model.n_features(), 2);
    for c in 0..2 {
        for f in 0..2 {
            assert_eq!(model.feature_model(c, f).m(), 5000);
        }
    }
    assert!(model.feature_model(1, 1).psi_hat() > model.feature_model(0, 0).psi_hat());
}

#[test]
fn constant_classes_hit_the_boundary() {
    let xs: Rows = ["a", "a", "b", "b"].iter().map(|&t| vec![Token::from(t)]).collect();
    let err = fit(&xs, &["x", "x", "y", "y"]).unwrap_err().to_string();
    assert!(err.contains("\"x\"") && err.contains("feature 0"), "{err}");
}

#[test]
fn marginal_accuracy_at_scale() {
    let (xs, ys, ts, truth) = holdout(111, &[&[10.0], &[1000.0]], 10_000, 500);
    let model = fit(&xs, &ys).unwrap();
    let labels = classify_marginal(&model, &ts).unwrap();
    assert_eq!(labels.len(), 1000);
    let acc = accuracy(&labels, &truth);
    assert!(acc > 0.65, "{acc}");
}

#[test]
fn simultaneous_is_a_fixed_point_and_deterministic() {
    let (xs, ys, ts, _) = holdout(5, &[&[1.0, 5.0], &[10.0, 50.0]], 450, 50);
    let model = fit(&xs, &ys).unwrap();
    let first = classify_simultaneous(&model, &ts).unwrap();
    assert!(first.converged);
    assert_eq!(classify_simultaneous(&model, &ts).unwrap(), first);
    let again = classify_simultaneous_from(&model, &ts, &first.labels, 100).unwrap();
    assert_eq!(again.labels, first.labels);
    assert_eq!(again.sweeps, 1);
}

// Under the urn predictive rule a value seen once is less likely than an
// unseen one whenever ψ̂ > 1, so copies of a novel row can settle in
// different classes. See `duplicate_novel_rows_split` in the unit tests.
#[test]
#[ignore = "duplicates of novel rows can legitimately split across classes"]
fn duplicated_rows_share_labels() {
    for seed in 0..10 {
        let (xs, ys, ts, _) = holdout(seed, &[&[10.0], &[1000.0]], 1000, 50);
        let model = fit(&xs, &ys).unwrap();
        let mut doubled = ts.clone();
        doubled.extend(ts.iter().cloned());
        let out = classify_simultaneous(&model, &doubled).unwrap();
        let (a, b) = out.labels.split_at(ts.len());
        assert_eq!(a, b, "seed {seed}");
    }
}

#[test]
fn model_survives_json() {
    let (xs, ys, ts, _) = holdout(9, &[&[3.0, 30.0], &[20.0, 4.0]], 300, 40);
    let model = fit(&xs, &ys).unwrap();
    let back = ClassifierModel::from_json(&model.to_json()).unwrap();
    assert_eq!(back, model);
    assert_eq!(
        classify_simultaneous(&back, &ts).unwrap(),
        classify_simultaneous(&model, &ts).unwrap()
    );
}

fn small_model() -> ClassifierModel {
    let (xs, ys, _, _) = holdout(77, &[&[2.0, 8.0], &[15.0, 1.0], &[6.0, 6.0]], 200, 0);
    fit(&xs, &ys).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginal_labels_concatenate(
        left in prop::collection::vec((0i64..30, 0i64..30), 0..20),
        right in prop::collection::vec((0i64..30, 0i64..30), 0..20),
    ) {
        let model = small_model();
        let to_rows = |v: &[(i64, i64)]| -> Rows {
            v.iter().map(|&(a, b)| vec![Token::Int(a), Token::Int(b)]).collect()
        };
        let (l, r) = (to_rows(&left), to_rows(&right));
        let mut both = l.clone();
        both.extend(r.iter().cloned());
        let mut expected = classify_marginal(&model, &l).unwrap();
        expected.extend(classify_marginal(&model, &r).unwrap());
        prop_assert_eq!(classify_marginal(&model, &both).unwrap(), expected);
    }

    #[test]
    fn marginal_labels_follow_permutations(
        rows in prop::collection::vec((0i64..30, 0i64..30), 1..30),
        seed in any::<u64>(),
    ) {
        let model = small_model();
        let rows: Rows = rows.iter().map(|&(a, b)| vec![Token::Int(a), Token::Int(b)]).collect();
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.shuffle(&mut Seed(seed).rng());
        let permuted: Rows = order.iter().map(|&i| rows[i].clone()).collect();
        let base = classify_marginal(&model, &rows).unwrap();
        let moved = classify_marginal(&model, &permuted).unwrap();
        for (k, &i) in order.iter().enumerate() {
            prop_assert_eq!(&moved[k], &base[i]);
        }
    }
}
