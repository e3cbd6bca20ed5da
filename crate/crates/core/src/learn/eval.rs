use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{train, ClassifierSpec, Dataset, Model};

/// How examples are split for evaluation. Both shuffle first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    /// Hold out `1 - train_fraction`, run k-fold CV inside the training part,
    /// then score a model trained on the whole training part on the hold-out.
    SplitThenCv { train_fraction: f64, folds: usize },
    /// k-fold CV over all examples, no hold-out.
    Cv { folds: usize },
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol::SplitThenCv { train_fraction: 0.8, folds: 10 }
    }
}

impl Protocol {
    pub fn describe(&self) -> String {
        match *self {
            Protocol::SplitThenCv { train_fraction, folds } => format!(
                "seeded shuffle; {:.0}/{:.0} train/test split; {folds}-fold CV within the training portion; hold-out scored by a model fit on the full training portion",
                train_fraction * 100.0,
                (1.0 - train_fraction) * 100.0
            ),
            Protocol::Cv { folds } => format!("seeded shuffle; {folds}-fold CV over all examples"),
        }
    }

    pub fn folds(&self) -> usize {
        match *self {
            Protocol::SplitThenCv { folds, .. } | Protocol::Cv { folds } => folds,
        }
    }
}

/// Confusion matrix (rows true, columns predicted) and derived scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub confusion: Vec<Vec<usize>>,
    pub support: Vec<usize>,
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    /// Averages over classes that occur as truth or prediction.
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

impl Metrics {
    pub fn from_predictions(truth: &[usize], pred: &[usize], n_classes: usize) -> Self {
        let mut confusion = vec![vec![0usize; n_classes]; n_classes];
        for (&t, &p) in truth.iter().zip(pred) {
            confusion[t][p] += 1;
        }
        let support: Vec<usize> = confusion.iter().map(|r| r.iter().sum()).collect();
        let predicted: Vec<usize> = (0..n_classes).map(|c| confusion.iter().map(|r| r[c]).sum()).collect();
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision: Vec<f64> = (0..n_classes).map(|c| ratio(confusion[c][c], predicted[c])).collect();
        let recall: Vec<f64> = (0..n_classes).map(|c| ratio(confusion[c][c], support[c])).collect();
        let f1: Vec<f64> = precision
            .iter()
            .zip(&recall)
            .map(|(&p, &r)| if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) })
            .collect();
        let present: Vec<usize> = (0..n_classes).filter(|&c| support[c] + predicted[c] > 0).collect();
        let avg = |v: &[f64]| {
            if present.is_empty() {
                0.0
            } else {
                present.iter().map(|&c| v[c]).sum::<f64>() / present.len() as f64
            }
        };
        let trace: usize = (0..n_classes).map(|c| confusion[c][c]).sum();
        Self {
            accuracy: ratio(trace, truth.len()),
            macro_precision: avg(&precision),
            macro_recall: avg(&recall),
            macro_f1: avg(&f1),
            confusion,
            support,
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub protocol_description: String,
    pub classifier: ClassifierSpec,
    pub seed: u64,
    pub n_examples: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Population standard deviation over folds.
    pub std_accuracy: f64,
    /// Pooled over all CV folds.
    pub cv: Metrics,
    pub holdout: Option<Metrics>,
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn holdout_accuracy(&self) -> Option<f64> {
        self.holdout.as_ref().map(|m| m.accuracy)
    }
}

/// Independent seed for a labelled sub-task of a run.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng.next_u64()
}

const SHUFFLE_STREAM: u64 = u64::MAX;

/// The shuffled training and hold-out indices `evaluate` uses for `n`
/// examples. Without a hold-out the second list is empty.
pub fn split_indices(n: usize, protocol: &Protocol, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, SHUFFLE_STREAM)));
    match *protocol {
        Protocol::SplitThenCv { train_fraction, .. } => {
            if !(train_fraction > 0.0 && train_fraction < 1.0) {
                return Err(Error::param(format!("train fraction {train_fraction} outside (0, 1)")));
            }
            let n_train = (n as f64 * train_fraction).round() as usize;
            let test = order.split_off(n_train);
            Ok((order, test))
        }
        Protocol::Cv { .. } => Ok((order, Vec::new())),
    }
}

/// Runs `protocol` with `spec`. Deterministic in `(data, protocol, spec, seed)`.
pub fn evaluate<T: Scalar>(data: &Dataset<T>, protocol: &Protocol, spec: &ClassifierSpec, seed: u64) -> Result<EvalReport> {
    data.validate()?;
    let k = protocol.folds();
    if k < 2 {
        return Err(Error::param(format!("cross-validation needs >= 2 folds, got {k}")));
    }
    let (train_idx, test_idx) = split_indices(data.len(), protocol, seed)?;
    if train_idx.len() < k {
        return Err(Error::param(format!("{} training examples cannot form {k} folds", train_idx.len())));
    }
    if matches!(protocol, Protocol::SplitThenCv { .. }) && test_idx.is_empty() {
        return Err(Error::param("hold-out portion is empty"));
    }

    let bounds: Vec<(usize, usize)> = {
        let (n, base, extra) = (train_idx.len(), train_idx.len() / k, train_idx.len() % k);
        let mut start = 0;
        (0..k)
            .map(|f| {
                let len = base + usize::from(f < extra);
                let b = (start, start + len);
                start += len;
                debug_assert!(b.1 <= n);
                b
            })
            .collect()
    };
    let folds: Vec<Result<(Vec<usize>, Vec<usize>, Vec<String>)>> = bounds
        .par_iter()
        .enumerate()
        .map(|(f, &(lo, hi))| {
            let fit: Vec<usize> = train_idx[..lo].iter().chain(&train_idx[hi..]).copied().collect();
            let held = &train_idx[lo..hi];
            let (pred, mut warnings) = fit_predict(data, &fit, held, spec, derive_seed(seed, f as u64))?;
            warnings.iter_mut().for_each(|w| *w = format!("fold {f}: {w}"));
            if single_class(data, held) {
                warnings.push(format!("fold {f}: validation part has a single class"));
            }
            Ok((held.iter().map(|&i| data.examples[i].label).collect(), pred, warnings))
        })
        .collect();

    let mut warnings = Vec::new();
    let (mut truth, mut pred, mut fold_accuracies) = (Vec::new(), Vec::new(), Vec::new());
    for r in folds {
        let (t, p, w) = r?;
        fold_accuracies.push(t.iter().zip(&p).filter(|(a, b)| a == b).count() as f64 / t.len() as f64);
        truth.extend(t);
        pred.extend(p);
        warnings.extend(w);
    }
    let mean = fold_accuracies.iter().sum::<f64>() / k as f64;
    let std = (fold_accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / k as f64).sqrt();

    let holdout = if test_idx.is_empty() {
        None
    } else {
        let (p, w) = fit_predict(data, &train_idx, &test_idx, spec, derive_seed(seed, k as u64))?;
        warnings.extend(w.into_iter().map(|w| format!("hold-out: {w}")));
        let t: Vec<usize> = test_idx.iter().map(|&i| data.examples[i].label).collect();
        Some(Metrics::from_predictions(&t, &p, data.n_classes()))
    };

    Ok(EvalReport {
        protocol: *protocol,
        protocol_description: protocol.describe(),
        classifier: *spec,
        seed,
        n_examples: data.len(),
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        fold_accuracies,
        mean_accuracy: mean,
        std_accuracy: std,
        cv: Metrics::from_predictions(&truth, &pred, data.n_classes()),
        holdout,
        warnings,
    })
}

fn single_class<T: Scalar>(data: &Dataset<T>, idx: &[usize]) -> bool {
    idx.iter().all(|&i| data.examples[i].label == data.examples[idx[0]].label)
}

/// Trains on `fit` and predicts `query`. Single-class training data falls
/// back to predicting that class, with a warning.
fn fit_predict<T: Scalar>(
    data: &Dataset<T>,
    fit: &[usize],
    query: &[usize],
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<(Vec<usize>, Vec<String>)> {
    if single_class(data, fit) {
        let only = data.examples[fit[0]].label;
        return Ok((vec![only; query.len()], vec![format!("training part has a single class ({only}); predicting it constantly")]));
    }
    let model: Model<T> = train(spec, &data.subset(fit), seed)?;
    let pred = query.iter().map(|&i| model.predict(&data.examples[i].features)).collect::<Result<_>>()?;
    Ok((pred, Vec::new()))
}
