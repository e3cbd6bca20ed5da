use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{argmax_low, canonical_order, check_query, Dataset};

/// Stored training set for Euclidean k-nearest-neighbour voting.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel<T> {
    pub k: usize,
    pub n_classes: usize,
    pub width: usize,
    pub points: Vec<Vec<T>>,
    pub labels: Vec<usize>,
}

impl<T: Scalar> KnnModel<T> {
    pub fn fit(data: &Dataset<T>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("kNN needs k >= 1"));
        }
        if data.is_empty() {
            return Err(Error::DegenerateTraining("kNN needs training examples".into()));
        }
        let order = canonical_order(data);
        Ok(Self {
            k,
            n_classes: data.n_classes(),
            width: data.width(),
            points: order.iter().map(|&i| data.examples[i].features.clone()).collect(),
            labels: order.iter().map(|&i| data.examples[i].label).collect(),
        })
    }
}

/// Majority label among the `k` nearest training points. Distance ties are
/// broken by canonical training order, vote ties by the lowest class id.
pub fn knn_predict<T: Scalar>(m: &KnnModel<T>, x: &[T]) -> Result<usize> {
    check_query(x, m.width)?;
    let mut d: Vec<(T, usize)> = m
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.iter().zip(x).map(|(&a, &b)| (a - b) * (a - b)).sum(), i))
        .collect();
    let k = m.k.min(d.len());
    let by = |a: &(T, usize), b: &(T, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k - 1, by);
    }
    let mut votes = vec![0usize; m.n_classes];
    for &(_, i) in &d[..k] {
        votes[m.labels[i]] += 1;
    }
    Ok(argmax_low(&votes))
}
