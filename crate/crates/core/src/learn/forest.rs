use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{argmax_low, canonical_order, check_query, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfParams {
    pub trees: usize,
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features examined per split; `None` means `floor(sqrt(D))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for RfParams {
    fn default() -> Self {
        Self { trees: 100, max_depth: None, min_leaf: 1, max_features: None, bootstrap: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node<T> {
    /// `x[feature] <= threshold` goes left.
    Split { feature: usize, threshold: T, left: usize, right: usize },
    /// Training-sample class counts reaching this leaf.
    Leaf { hist: Vec<f64> },
}

/// Binary tree stored as a node arena rooted at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree<T> {
    pub nodes: Vec<Node<T>>,
}

impl<T: Scalar> Tree<T> {
    pub fn leaf_for(&self, x: &[T]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { hist } => return hist,
            }
        }
    }

    /// Internal nodes have both children and every leaf saw samples.
    pub fn is_well_formed(&self) -> bool {
        self.nodes.iter().all(|n| match n {
            Node::Split { left, right, .. } => *left < self.nodes.len() && *right < self.nodes.len(),
            Node::Leaf { hist } => hist.iter().sum::<f64>() > 0.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel<T> {
    pub trees: Vec<Tree<T>>,
    pub n_classes: usize,
    pub width: usize,
    pub seed: u64,
    pub params: RfParams,
}

/// Bootstrap-sampled CART trees with Gini splitting. Tree `t` draws from
/// ChaCha stream `t` of `seed`; training data is put in canonical order first
/// so the result does not depend on the input order.
pub fn rf_train<T: Scalar>(data: &Dataset<T>, p: &RfParams, seed: u64) -> Result<ForestModel<T>> {
    if p.trees == 0 || p.min_leaf == 0 || p.max_features == Some(0) {
        return Err(Error::param("forest needs trees >= 1, min_leaf >= 1, max_features >= 1"));
    }
    if data.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::DegenerateTraining("random forest needs at least two classes".into()));
    }
    let order = canonical_order(data);
    let xs: Vec<&[T]> = order.iter().map(|&i| data.examples[i].features.as_slice()).collect();
    let ys: Vec<usize> = order.iter().map(|&i| data.examples[i].label).collect();
    let width = data.width();
    let mtry = p.max_features.unwrap_or(((width as f64).sqrt().floor() as usize).max(1)).min(width.max(1));
    let builder = Builder { xs: &xs, ys: &ys, n_classes: data.n_classes(), width, mtry, p };
    let trees = (0..p.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            builder.grow(&mut rng)
        })
        .collect();
    Ok(ForestModel { trees, n_classes: data.n_classes(), width, seed, params: *p })
}

/// Label and class probabilities (mean of normalized leaf histograms).
/// Ties go to the lowest class id.
pub fn rf_predict<T: Scalar>(m: &ForestModel<T>, x: &[T]) -> Result<(usize, Vec<f64>)> {
    check_query(x, m.width)?;
    let mut prob = vec![0.0; m.n_classes];
    for t in &m.trees {
        let hist = t.leaf_for(x);
        let total: f64 = hist.iter().sum();
        for (p, h) in prob.iter_mut().zip(hist) {
            *p += h / total;
        }
    }
    let n = m.trees.len() as f64;
    prob.iter_mut().for_each(|p| *p /= n);
    Ok((argmax_low(&prob), prob))
}

struct Builder<'a, T> {
    xs: &'a [&'a [T]],
    ys: &'a [usize],
    n_classes: usize,
    width: usize,
    mtry: usize,
    p: &'a RfParams,
}

struct Best<T> {
    score: f64,
    feature: usize,
    threshold: T,
}

impl<T: Scalar> Builder<'_, T> {
    fn grow(&self, rng: &mut ChaCha8Rng) -> Tree<T> {
        let n = self.xs.len();
        let samples: Vec<usize> = if self.p.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
        let mut feats: Vec<usize> = (0..self.width).collect();
        let mut nodes = vec![Node::Leaf { hist: Vec::new() }];
        let mut stack = vec![(0usize, samples, 0usize)];
        while let Some((at, idx, depth)) = stack.pop() {
            let hist = self.histogram(&idx);
            let pure = hist.iter().filter(|&&c| c > 0.0).count() <= 1;
            let capped = self.p.max_depth.is_some_and(|d| depth >= d);
            let split = if pure || capped || idx.len() < 2 * self.p.min_leaf {
                None
            } else {
                self.best_split(&idx, &hist, &mut feats, rng)
            };
            match split {
                None => nodes[at] = Node::Leaf { hist },
                Some(b) => {
                    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.xs[i][b.feature] <= b.threshold);
                    let (li, ri) = (nodes.len(), nodes.len() + 1);
                    nodes.push(Node::Leaf { hist: Vec::new() });
                    nodes.push(Node::Leaf { hist: Vec::new() });
                    nodes[at] = Node::Split { feature: b.feature, threshold: b.threshold, left: li, right: ri };
                    stack.push((ri, r, depth + 1));
                    stack.push((li, l, depth + 1));
                }
            }
        }
        Tree { nodes }
    }

    fn histogram(&self, idx: &[usize]) -> Vec<f64> {
        let mut h = vec![0.0; self.n_classes];
        for &i in idx {
            h[self.ys[i]] += 1.0;
        }
        h
    }

    /// Visits features in a fresh random order until `mtry` non-constant
    /// ones were scored and a valid split exists.
    fn best_split(&self, idx: &[usize], hist: &[f64], feats: &mut [usize], rng: &mut ChaCha8Rng) -> Option<Best<T>> {
        let mut best: Option<Best<T>> = None;
        let mut scored = 0;
        let mut vals: Vec<(T, usize)> = Vec::with_capacity(idx.len());
        let total = idx.len() as f64;
        for k in 0..feats.len() {
            if scored >= self.mtry && best.is_some() {
                break;
            }
            let j = rng.random_range(k..feats.len());
            feats.swap(k, j);
            let f = feats[k];
            vals.clear();
            vals.extend(idx.iter().map(|&i| (self.xs[i][f], self.ys[i])));
            vals.sort_by(|a, b| a.0.total_cmp(&b.0));
            if vals[0].0 == vals[vals.len() - 1].0 {
                continue;
            }
            scored += 1;
            let mut left = vec![0.0; self.n_classes];
            let mut sq_left = 0.0;
            let mut sq_right: f64 = hist.iter().map(|c| c * c).sum();
            for s in 0..vals.len() - 1 {
                let c = vals[s].1;
                let right_c = hist[c] - left[c];
                sq_right += (right_c - 1.0) * (right_c - 1.0) - right_c * right_c;
                sq_left += (left[c] + 1.0) * (left[c] + 1.0) - left[c] * left[c];
                left[c] += 1.0;
                let nl = (s + 1) as f64;
                if vals[s].0 == vals[s + 1].0 || s + 1 < self.p.min_leaf || vals.len() - s - 1 < self.p.min_leaf {
                    continue;
                }
                let score = sq_left / nl + sq_right / (total - nl);
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let (a, b) = (vals[s].0, vals[s + 1].0);
                    let mut t = a + (b - a) / T::of(2.0);
                    if t >= b {
                        t = a;
                    }
                    best = Some(Best { score, feature: f, threshold: t });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::{ExampleMeta, LabeledExample};

    fn ds(rows: &[(Vec<f64>, usize)]) -> Dataset<f64> {
        let ex = rows
            .iter()
            .map(|(f, l)| LabeledExample { features: f.clone(), label: *l, meta: ExampleMeta::default() })
            .collect();
        Dataset::new(ex, vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn single_leaf_tree_returns_majority() {
        let t = Tree { nodes: vec![Node::Leaf { hist: vec![1.0, 3.0] }] };
        let m = ForestModel { trees: vec![t], n_classes: 2, width: 1, seed: 0, params: RfParams::default() };
        let (l, p) = rf_predict(&m, &[0.0]).unwrap();
        assert_eq!(l, 1);
        assert_eq!(p, vec![0.25, 0.75]);
    }

    #[test]
    fn single_class_rejected() {
        let d = ds(&[(vec![1.0], 0), (vec![2.0], 0)]);
        assert!(matches!(rf_train(&d, &RfParams::default(), 1), Err(Error::DegenerateTraining(_))));
    }

    #[test]
    fn trees_well_formed() {
        let rows: Vec<(Vec<f64>, usize)> = (0..40).map(|i| (vec![i as f64, (i * 7 % 5) as f64], usize::from(i >= 20))).collect();
        let m = rf_train(&ds(&rows), &RfParams { trees: 5, ..Default::default() }, 3).unwrap();
        assert!(m.trees.iter().all(Tree::is_well_formed));
    }
}
