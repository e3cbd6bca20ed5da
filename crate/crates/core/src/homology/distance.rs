use crate::embedding::PointCloud;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Symmetric pairwise distance matrix with zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Builds from a full row-major `n x n` array, checking symmetry, the zero
    /// diagonal, nonnegativity and finiteness.
    pub fn from_full(n: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::param(format!(
                "distance matrix needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != T::zero() {
                return Err(Error::param(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let d = entries[i * n + j];
                if !d.is_finite() || d < T::zero() {
                    return Err(Error::param(format!("entry ({i},{j}) is not a finite nonnegative distance")));
                }
                if d != entries[j * n + i] {
                    return Err(Error::param(format!("asymmetric entries at ({i},{j})")));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Largest entry (the diameter of the point set).
    pub fn diameter(&self) -> T {
        self.entries.iter().copied().fold(T::zero(), T::max)
    }
}

/// Euclidean distance matrix of a point cloud.
pub fn distance_matrix<T: Scalar>(pc: &PointCloud<T>) -> DistanceMatrix<T> {
    let n = pc.len();
    let mut entries = vec![T::zero(); n * n];
    for i in 0..n {
        let p = pc.point(i);
        for j in (i + 1)..n {
            let q = pc.point(j);
            let d = p
                .iter()
                .zip(q)
                .map(|(&a, &b)| (a - b) * (a - b))
                .fold(T::zero(), |acc, x| acc + x)
                .sqrt();
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    DistanceMatrix { n, entries }
}

/// `min_i max_j d(i, j)`. Above this scale the Rips complex is a cone.
pub fn enclosing_radius<T: Scalar>(dm: &DistanceMatrix<T>) -> T {
    (0..dm.len())
        .map(|i| dm.row(i).iter().copied().fold(T::zero(), T::max))
        .fold(None, |acc: Option<T>, r| Some(acc.map_or(r, |a| a.min(r))))
        .unwrap_or_else(T::zero)
}
