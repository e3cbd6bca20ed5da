//! Phase-space reconstruction by delay coordinates, with AMI and FNN
//! diagnostics for choosing the lag and dimension.

mod ami;
mod fnn;

pub use ami::{ami_curve, ami_lag, DEFAULT_AMI_BINS};
pub use fnn::{fnn_dim, FnnThresholds};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signals::Segment;

/// Delay-embedding dimension and lag (in samples).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub dim: usize,
    pub lag: usize,
}

impl EmbeddingParams {
    pub fn new(dim: usize, lag: usize) -> Result<Self> {
        if dim == 0 || lag == 0 {
            return Err(Error::param(format!("embedding needs dim >= 1 and lag >= 1 (got d={dim}, lag={lag})")));
        }
        Ok(Self { dim, lag })
    }

    /// Samples spanned by one embedded point.
    pub fn span(&self) -> usize {
        (self.dim - 1) * self.lag
    }

    /// Number of points produced from `len` samples, if any.
    pub fn point_count(&self, len: usize) -> Option<usize> {
        len.checked_sub(self.span()).filter(|&m| m >= 1)
    }
}

/// Points of uniform dimension stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    coords: Vec<T>,
    dim: usize,
}

impl<T: Scalar> PointCloud<T> {
    /// `coords.len()` must be a positive multiple of `dim`; all finite.
    pub fn new(coords: Vec<T>, dim: usize) -> Result<Self> {
        if dim == 0 || coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::param(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("non-finite coordinate"));
        }
        Ok(Self { coords, dim })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::param("points have differing dimensions"));
        }
        Self::new(rows.into_iter().flatten().collect(), dim)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[T]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }
}

/// Delay embedding of raw samples: point `k` is
/// `(x[k], x[k + lag], ..., x[k + (dim - 1) * lag])`.
pub fn delay_embed_samples<T: Scalar>(samples: &[T], p: EmbeddingParams) -> Result<PointCloud<T>> {
    let m = p.point_count(samples.len()).ok_or_else(|| {
        Error::param(format!(
            "{} samples too short for dim {} lag {} (needs > {})",
            samples.len(),
            p.dim,
            p.lag,
            p.span()
        ))
    })?;
    let mut coords = Vec::with_capacity(m * p.dim);
    for k in 0..m {
        coords.extend((0..p.dim).map(|j| samples[k + j * p.lag]));
    }
    PointCloud::new(coords, p.dim)
}

pub fn delay_embed<T: Scalar>(seg: &Segment<T>, p: EmbeddingParams) -> Result<PointCloud<T>> {
    delay_embed_samples(&seg.samples, p)
}
