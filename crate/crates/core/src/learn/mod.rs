//! Classifiers, the evaluation protocol and affect-label binarization.

mod eval;
mod forest;
mod gnb;
mod knn;
mod labels;
mod persist;

pub use eval::{derive_seed, evaluate, split_indices, EvalReport, Metrics, Protocol};
pub use forest::{rf_predict, rf_train, ForestModel, Node, RfParams, Tree};
pub use gnb::{gnb, gnb_log_scores, gnb_predict, GnbModel, VARIANCE_FLOOR};
pub use knn::{knn_predict, KnnModel};
pub use labels::{binarize, class_name, composite_class, AffectDim};
pub use persist::{load_model, save_model, MODEL_FORMAT_VERSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Where a segment came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExampleMeta {
    pub subject: String,
    pub trial: usize,
    pub segment: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample<T> {
    pub features: Vec<T>,
    pub label: usize,
    pub meta: ExampleMeta,
}

/// Examples sharing one feature layout and class set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub examples: Vec<LabeledExample<T>>,
    pub class_names: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(examples: Vec<LabeledExample<T>>, class_names: Vec<String>) -> Result<Self> {
        let d = Self { examples, class_names };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_names.is_empty() {
            return Err(Error::param("dataset declares no classes"));
        }
        let width = self.width();
        for (i, e) in self.examples.iter().enumerate() {
            if e.features.len() != width {
                return Err(Error::Schema(format!("example {i} has {} features, expected {width}", e.features.len())));
            }
            if e.label >= self.class_names.len() {
                return Err(Error::Schema(format!("example {i} has undeclared label {}", e.label)));
            }
            if e.features.iter().any(|x| !x.is_finite()) {
                return Err(Error::DegenerateInput(format!("example {i} has a non-finite feature")));
            }
        }
        Ok(())
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn width(&self) -> usize {
        self.examples.first().map_or(0, |e| e.features.len())
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Copy restricted to the given example indices, in that order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self { examples: idx.iter().map(|&i| self.examples[i].clone()).collect(), class_names: self.class_names.clone() }
    }

    /// Per-class example counts.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes()];
        for e in &self.examples {
            c[e.label] += 1;
        }
        c
    }
}

/// Classifier and its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    RandomForest(RfParams),
    Knn { k: usize },
    Gnb,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        ClassifierSpec::RandomForest(RfParams::default())
    }
}

impl ClassifierSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::RandomForest(_) => "rf",
            ClassifierSpec::Knn { .. } => "knn",
            ClassifierSpec::Gnb => "gnb",
        }
    }
}

/// Any trained classifier.
#[derive(Debug, Clone, PartialEq)]
pub enum Model<T> {
    Forest(ForestModel<T>),
    Knn(KnnModel<T>),
    Gnb(GnbModel<T>),
}

pub fn train<T: Scalar>(spec: &ClassifierSpec, data: &Dataset<T>, seed: u64) -> Result<Model<T>> {
    Ok(match *spec {
        ClassifierSpec::RandomForest(p) => Model::Forest(rf_train(data, &p, seed)?),
        ClassifierSpec::Knn { k } => Model::Knn(KnnModel::fit(data, k)?),
        ClassifierSpec::Gnb => Model::Gnb(gnb(data)?),
    })
}

impl<T: Scalar> Model<T> {
    pub fn predict(&self, x: &[T]) -> Result<usize> {
        match self {
            Model::Forest(m) => rf_predict(m, x).map(|(l, _)| l),
            Model::Knn(m) => knn_predict(m, x),
            Model::Gnb(m) => gnb_predict(m, x),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Model::Forest(m) => m.n_classes,
            Model::Knn(m) => m.n_classes,
            Model::Gnb(m) => m.priors.len(),
        }
    }

    pub fn width(&self) -> usize {
        match self {
            Model::Forest(m) => m.width,
            Model::Knn(m) => m.width,
            Model::Gnb(m) => m.means.first().map_or(0, Vec::len),
        }
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax_low<V: PartialOrd + Copy>(xs: &[V]) -> usize {
    let mut best = 0;
    for (i, &v) in xs.iter().enumerate().skip(1) {
        if v > xs[best] {
            best = i;
        }
    }
    best
}

/// Stable canonical order of examples: by label, then features in total order.
/// Training on this order makes models independent of input order.
pub(crate) fn canonical_order<T: Scalar>(data: &Dataset<T>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ea, eb) = (&data.examples[a], &data.examples[b]);
        ea.label.cmp(&eb.label).then_with(|| {
            ea.features
                .iter()
                .zip(&eb.features)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    idx
}

pub(crate) fn check_query<T: Scalar>(x: &[T], width: usize) -> Result<()> {
    if x.len() != width {
        return Err(Error::Schema(format!("query has {} features, model expects {width}", x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("query has a non-finite feature".into()));
    }
    Ok(())
}
