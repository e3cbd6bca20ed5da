use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// A (birth, death) interval in homology dimension 0, 1 or 2.
///
/// Essential classes never die inside the filtration; their death is capped
/// at the filtration threshold and `essential` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair<T> {
    pub dim: usize,
    pub birth: T,
    pub death: T,
    pub essential: bool,
}

impl<T: Scalar> PersistencePair<T> {
    pub fn persistence(&self) -> T {
        self.death - self.birth
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then(self.birth.total_cmp(&other.birth))
            .then(self.death.total_cmp(&other.death))
            .then(self.essential.cmp(&other.essential))
    }
}

/// Persistence pairs grouped by homology dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram<T> {
    pairs: [Vec<PersistencePair<T>>; 3],
    threshold: T,
    point_count: usize,
}

impl<T: Scalar> PersistenceDiagram<T> {
    /// Groups and canonically sorts `pairs`. Pairs with `dim > 2` are ignored.
    pub fn new(pairs: impl IntoIterator<Item = PersistencePair<T>>, threshold: T, point_count: usize) -> Self {
        let mut grouped: [Vec<PersistencePair<T>>; 3] = Default::default();
        for p in pairs {
            if p.dim <= 2 {
                grouped[p.dim].push(p);
            }
        }
        for g in grouped.iter_mut() {
            g.sort_by(PersistencePair::canonical_cmp);
        }
        Self { pairs: grouped, threshold, point_count }
    }

    pub fn empty(threshold: T) -> Self {
        Self::new([], threshold, 0)
    }

    /// Pairs of one homology dimension, sorted by (birth, death).
    pub fn dim(&self, dim: usize) -> &[PersistencePair<T>] {
        self.pairs.get(dim).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = &PersistencePair<T>> {
        self.pairs.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.pairs.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    /// The finite pair of largest persistence in `dim`, if any.
    pub fn dominant(&self, dim: usize) -> Option<PersistencePair<T>> {
        self.dim(dim)
            .iter()
            .filter(|p| !p.essential)
            .copied()
            .max_by(|a, b| a.persistence().total_cmp(&b.persistence()))
    }

    /// Keeps only the listed homology dimensions.
    pub fn restricted(mut self, dims: &[usize]) -> Self {
        for (d, g) in self.pairs.iter_mut().enumerate() {
            if !dims.contains(&d) {
                g.clear();
            }
        }
        self
    }
}
