use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use topoeeg::learn::*;
use topoeeg::Error;

fn example(features: Vec<f64>, label: usize) -> LabeledExample<f64> {
    LabeledExample { features, label, meta: ExampleMeta::default() }
}

fn dataset(ex: Vec<LabeledExample<f64>>, classes: usize) -> Dataset<f64> {
    Dataset::new(ex, (0..classes).map(|c| format!("c{c}")).collect()).unwrap()
}

/// Two Gaussian blobs in `dim` dimensions with means `-sep/2` and `+sep/2`.
fn blobs(n: usize, dim: usize, sep: f64, seed: u64) -> Dataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ex = (0..n)
        .map(|i| {
            let label = i % 2;
            let shift = if label == 0 { -sep / 2.0 } else { sep / 2.0 };
            let f = (0..dim)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z + shift
                })
                .collect();
            example(f, label)
        })
        .collect();
    dataset(ex, 2)
}

fn small_rf() -> RfParams {
    RfParams { trees: 25, ..RfParams::default() }
}

#[test]
fn rf_fits_separable_data() {
    let ex = (0..60).map(|i| example(vec![i as f64, ((i * 37) % 11) as f64], usize::from(i >= 30))).collect();
    let d = dataset(ex, 2);
    let m = rf_train(&d, &RfParams::default(), 4).unwrap();
    for e in &d.examples {
        assert_eq!(rf_predict(&m, &e.features).unwrap().0, e.label);
    }
}

#[test]
fn rf_is_deterministic_and_order_invariant() {
    let d = blobs(120, 6, 1.0, 1);
    let probe = blobs(50, 6, 1.0, 2);
    let mut shuffled = d.clone();
    shuffled.examples.shuffle(&mut ChaCha8Rng::seed_from_u64(99));
    let a = rf_train(&d, &small_rf(), 7).unwrap();
    let b = rf_train(&d, &small_rf(), 7).unwrap();
    let c = rf_train(&shuffled, &small_rf(), 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other = rf_train(&d, &small_rf(), 8).unwrap();
    assert_ne!(a, other);
    for e in &probe.examples {
        assert_eq!(rf_predict(&a, &e.features).unwrap(), rf_predict(&c, &e.features).unwrap());
    }
}

#[test]
fn rf_gaussian_holdout() {
    let train = blobs(1000, 10, 3.0, 10);
    let test = blobs(1000, 10, 3.0, 11);
    let m = rf_train(&train, &RfParams::default(), 5).unwrap();
    let right = test.examples.iter().filter(|e| rf_predict(&m, &e.features).unwrap().0 == e.label).count();
    assert!(right as f64 / 1000.0 >= 0.99, "{right}");
}

#[test]
fn rf_probabilities_and_tally() {
    let d = blobs(200, 4, 0.8, 3);
    let m = rf_train(&d, &small_rf(), 1).unwrap();
    for e in blobs(40, 4, 0.8, 4).examples {
        let (label, p) = rf_predict(&m, &e.features).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let mut tally = [0.0f64; 2];
        for t in &m.trees {
            let h = t.leaf_for(&e.features);
            let s: f64 = h.iter().sum();
            tally[0] += h[0] / s;
            tally[1] += h[1] / s;
        }
        let oracle = usize::from(tally[1] > tally[0]);
        assert_eq!(label, oracle);
    }
}

#[test]
fn knn_cases() {
    let d = blobs(80, 3, 1.0, 5);
    let m = KnnModel::fit(&d, 1).unwrap();
    for e in &d.examples {
        assert_eq!(knn_predict(&m, &e.features).unwrap(), e.label);
    }
    let two = dataset(vec![example(vec![-1.0], 1), example(vec![1.0], 0)], 2);
    let m = KnnModel::fit(&two, 2).unwrap();
    assert_eq!(knn_predict(&m, &[0.0]).unwrap(), 0);
    let two = dataset(vec![example(vec![-1.0], 0), example(vec![1.0], 1)], 2);
    assert_eq!(knn_predict(&KnnModel::fit(&two, 2).unwrap(), &[0.0]).unwrap(), 0);
}

#[test]
fn knn_matches_exhaustive_scan() {
    let d = blobs(150, 5, 0.5, 6);
    let m = KnnModel::fit(&d, 5).unwrap();
    for q in blobs(60, 5, 0.5, 7).examples {
        let mut dist: Vec<(f64, usize)> = d
            .examples
            .iter()
            .map(|e| (e.features.iter().zip(&q.features).map(|(a, b)| (a - b).powi(2)).sum::<f64>(), e.label))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ones = dist[..5].iter().filter(|x| x.1 == 1).count();
        assert_eq!(knn_predict(&m, &q.features).unwrap(), usize::from(ones >= 3));
    }
}

#[test]
fn gnb_cases() {
    let d = dataset(
        vec![example(vec![-2.0], 0), example(vec![-1.0], 0), example(vec![1.0], 1), example(vec![2.0], 1)],
        2,
    );
    let m = gnb(&d).unwrap();
    assert_eq!(gnb_predict(&m, &[-0.01]).unwrap(), 0);
    assert_eq!(gnb_predict(&m, &[0.01]).unwrap(), 1);
    let s = gnb_log_scores(&m, &[0.0]).unwrap();
    assert_eq!(s[0], s[1]);
    assert_eq!(gnb_predict(&m, &[0.0]).unwrap(), 0);

    let same = dataset(vec![example(vec![1.0], 0), example(vec![1.0], 1), example(vec![1.0], 1)], 2);
    assert_eq!(gnb_predict(&gnb(&same).unwrap(), &[5.0]).unwrap(), 1);
}

#[test]
fn gnb_matches_log_likelihood_oracle() {
    let d = blobs(100, 3, 1.0, 8);
    let m = gnb(&d).unwrap();
    for q in blobs(20, 3, 1.0, 9).examples {
        let mut best = (f64::NEG_INFINITY, 0);
        for c in 0..2 {
            let rows: Vec<&Vec<f64>> = d.examples.iter().filter(|e| e.label == c).map(|e| &e.features).collect();
            let n = rows.len() as f64;
            let mut ll = (n / 100.0).ln();
            for f in 0..3 {
                let mu = rows.iter().map(|r| r[f]).sum::<f64>() / n;
                let var = (rows.iter().map(|r| (r[f] - mu).powi(2)).sum::<f64>() / n).max(1e-9);
                ll += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (q.features[f] - mu).powi(2) / (2.0 * var);
            }
            if ll > best.0 {
                best = (ll, c);
            }
        }
        assert_eq!(gnb_predict(&m, &q.features).unwrap(), best.1);
    }
}

#[test]
fn classifiers_are_order_invariant() {
    let d = blobs(90, 4, 0.6, 12);
    let mut shuffled = d.clone();
    shuffled.examples.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    for spec in [ClassifierSpec::Knn { k: 5 }, ClassifierSpec::Gnb] {
        let a = train(&spec, &d, 0).unwrap();
        let b = train(&spec, &shuffled, 0).unwrap();
        for q in blobs(40, 4, 0.6, 13).examples {
            assert_eq!(a.predict(&q.features).unwrap(), b.predict(&q.features).unwrap());
        }
    }
}

#[test]
fn evaluate_separable() {
    let d = blobs(200, 3, 20.0, 14);
    for spec in [ClassifierSpec::RandomForest(small_rf()), ClassifierSpec::Knn { k: 5 }, ClassifierSpec::Gnb] {
        let r = evaluate(&d, &Protocol::default(), &spec, 3).unwrap();
        assert_eq!(r.mean_accuracy, 1.0);
        assert_eq!(r.std_accuracy, 0.0);
        assert_eq!(r.holdout_accuracy(), Some(1.0));
        assert_eq!(r.fold_accuracies.len(), 10);
        assert_eq!((r.n_train, r.n_test), (160, 40));
        assert_eq!(r.cv.macro_f1, 1.0);
    }
}

#[test]
fn evaluate_random_labels_near_chance() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut labels: Vec<usize> = (0..2000).map(|i| i % 2).collect();
    labels.shuffle(&mut rng);
    let ex = labels.into_iter().map(|l| example((0..4).map(|_| rng.random::<f64>()).collect(), l)).collect();
    let r = evaluate(&dataset(ex, 2), &Protocol::default(), &ClassifierSpec::Gnb, 2).unwrap();
    assert!((r.mean_accuracy - 0.5).abs() <= 0.05, "{}", r.mean_accuracy);
}

#[test]
fn evaluate_consistency_and_reproducibility() {
    let d = blobs(150, 4, 0.7, 16);
    let spec = ClassifierSpec::RandomForest(small_rf());
    let a = evaluate(&d, &Protocol::default(), &spec, 9).unwrap();
    let b = evaluate(&d, &Protocol::default(), &spec, 9).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    for m in [&a.cv, a.holdout.as_ref().unwrap()] {
        let total: usize = m.confusion.iter().flatten().sum();
        let trace: usize = (0..2).map(|c| m.confusion[c][c]).sum();
        assert_eq!(m.accuracy, trace as f64 / total as f64);
        let rows: Vec<usize> = m.confusion.iter().map(|r| r.iter().sum()).collect();
        assert_eq!(rows, m.support);
    }
    let cv = evaluate(&d, &Protocol::Cv { folds: 10 }, &spec, 9).unwrap();
    assert!(cv.holdout.is_none());
    assert_eq!(cv.cv.support.iter().sum::<usize>(), 150);
}

#[test]
fn single_class_fold_is_warned() {
    let mut ex: Vec<LabeledExample<f64>> = (0..20).map(|i| example(vec![i as f64], 0)).collect();
    ex.push(example(vec![100.0], 1));
    let r = evaluate(&dataset(ex, 2), &Protocol::Cv { folds: 10 }, &ClassifierSpec::RandomForest(small_rf()), 0).unwrap();
    assert!(!r.warnings.is_empty());
    assert!(r.warnings.iter().any(|w| w.contains("single class")));
}

#[test]
fn bad_protocols() {
    let d = blobs(10, 2, 1.0, 0);
    assert!(matches!(evaluate(&d, &Protocol::Cv { folds: 1 }, &ClassifierSpec::Gnb, 0), Err(Error::Parameter(_))));
    assert!(evaluate(&d, &Protocol::Cv { folds: 20 }, &ClassifierSpec::Gnb, 0).is_err());
    let single = dataset(vec![example(vec![1.0], 0), example(vec![2.0], 0)], 2);
    assert!(matches!(rf_train(&single, &small_rf(), 0), Err(Error::DegenerateTraining(_))));
}

#[test]
fn model_round_trip() {
    let d = blobs(60, 3, 1.0, 17);
    let probe = blobs(30, 3, 1.0, 18);
    for spec in [ClassifierSpec::RandomForest(small_rf()), ClassifierSpec::Knn { k: 3 }, ClassifierSpec::Gnb] {
        let m = train(&spec, &d, 4).unwrap();
        let mut buf = Vec::new();
        save_model(&m, &mut buf).unwrap();
        let back: Model<f64> = load_model(&mut buf.as_slice()).unwrap();
        assert_eq!(back, m);
        for q in &probe.examples {
            assert_eq!(back.predict(&q.features).unwrap(), m.predict(&q.features).unwrap());
        }
        buf[8] = 9;
        assert!(matches!(load_model::<f64>(&mut buf.as_slice()), Err(Error::Format(_))));
    }
    assert!(load_model::<f64>(&mut &b"garbage!"[..]).is_err());
}

proptest! {
    #[test]
    fn macro_f1_bounds(pairs in prop::collection::vec((0usize..3, 0usize..3), 1..60)) {
        let (t, p): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
        let m = Metrics::from_predictions(&t, &p, 3);
        prop_assert!(m.macro_f1 <= 1.0 + 1e-15);
        let diagonal = t == p;
        prop_assert_eq!(m.macro_f1 == 1.0, diagonal);
        let trace: usize = (0..3).map(|c| m.confusion[c][c]).sum();
        prop_assert_eq!(m.accuracy, trace as f64 / t.len() as f64);
    }
}
