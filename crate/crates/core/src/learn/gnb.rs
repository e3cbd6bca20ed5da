use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{argmax_low, check_query, Dataset};

/// Lower bound on every per-class feature variance.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes: class priors and per-feature means and variances.
#[derive(Debug, Clone, PartialEq)]
pub struct GnbModel<T> {
    pub priors: Vec<T>,
    pub means: Vec<Vec<T>>,
    pub vars: Vec<Vec<T>>,
}

pub fn gnb<T: Scalar>(data: &Dataset<T>) -> Result<GnbModel<T>> {
    if data.is_empty() {
        return Err(Error::DegenerateTraining("naive Bayes needs training examples".into()));
    }
    let (nc, w) = (data.n_classes(), data.width());
    let counts = data.class_counts();
    let mut means = vec![vec![T::zero(); w]; nc];
    let mut vars = vec![vec![T::zero(); w]; nc];
    for e in &data.examples {
        for (m, &x) in means[e.label].iter_mut().zip(&e.features) {
            *m += x;
        }
    }
    for (c, m) in means.iter_mut().enumerate() {
        if counts[c] > 0 {
            let n = T::of_usize(counts[c]);
            m.iter_mut().for_each(|v| *v /= n);
        }
    }
    for e in &data.examples {
        for ((v, &m), &x) in vars[e.label].iter_mut().zip(&means[e.label]).zip(&e.features) {
            *v += (x - m) * (x - m);
        }
    }
    let floor = T::of(VARIANCE_FLOOR);
    for (c, v) in vars.iter_mut().enumerate() {
        let n = T::of_usize(counts[c].max(1));
        v.iter_mut().for_each(|s| *s = (*s / n).max(floor));
    }
    let total = T::of_usize(data.len());
    let priors = counts.iter().map(|&c| T::of_usize(c) / total).collect();
    Ok(GnbModel { priors, means, vars })
}

/// Per-class joint log-likelihood; absent classes score `-inf`.
pub fn gnb_log_scores<T: Scalar>(m: &GnbModel<T>, x: &[T]) -> Result<Vec<T>> {
    check_query(x, m.means.first().map_or(0, Vec::len))?;
    let two_pi = T::TAU();
    Ok((0..m.priors.len())
        .map(|c| {
            if m.priors[c] == T::zero() {
                return T::neg_infinity();
            }
            let mut s = m.priors[c].ln();
            for ((&xi, &mu), &var) in x.iter().zip(&m.means[c]).zip(&m.vars[c]) {
                s -= ((two_pi * var).ln() + (xi - mu) * (xi - mu) / var) / T::of(2.0);
            }
            s
        })
        .collect())
}

pub fn gnb_predict<T: Scalar>(m: &GnbModel<T>, x: &[T]) -> Result<usize> {
    Ok(argmax_low(&gnb_log_scores(m, x)?))
}
