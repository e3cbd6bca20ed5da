use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::PersistenceDiagram;
use crate::scalar::Scalar;
use crate::signals::Band;

use super::{landscape_grid, landscape_of_pairs};

/// Landscape samples per band.
pub const DEFAULT_GRID: usize = 50;

/// Pointwise mean of the first landscapes of H0, H1 and H2 on a shared grid
/// over `[0, t_max]`.
pub fn band_features<T: Scalar>(diag: &PersistenceDiagram<T>, grid_len: usize, t_max: T) -> Result<Vec<T>> {
    let grid = landscape_grid(grid_len, t_max)?;
    let mut acc = vec![T::zero(); grid_len];
    for dim in 0..3 {
        for (a, v) in acc.iter_mut().zip(landscape_of_pairs(diag.dim(dim), 1, &grid)?) {
            *a += v;
        }
    }
    let three = T::of(3.0);
    Ok(acc.into_iter().map(|v| v / three).collect())
}

/// How the landscape range is chosen for each segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeMode {
    /// Each segment uses its own filtration threshold.
    PerSegment,
    /// One range for the whole experiment.
    Global,
}

/// 95th percentile (linear interpolation between order statistics) of the
/// training-split thresholds.
pub fn global_t_max<T: Scalar>(thresholds: &[T]) -> Result<T> {
    percentile(thresholds, 0.95)
}

pub fn percentile<T: Scalar>(xs: &[T], q: f64) -> Result<T> {
    if xs.is_empty() {
        return Err(Error::EmptyResult("percentile of an empty set".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param(format!("quantile {q} outside [0, 1]")));
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = T::of(pos - lo as f64);
    Ok(v[lo] + (v[hi] - v[lo]) * frac)
}

/// Origin of one feature column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureLabel {
    pub channel: String,
    pub band: Band,
    pub grid_index: usize,
}

impl std::fmt::Display for FeatureLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.channel, self.band, self.grid_index)
    }
}

/// Flat feature values with one label per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    pub values: Vec<T>,
    pub schema: Vec<FeatureLabel>,
}

impl<T> FeatureVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Concatenates per-(channel, band) vectors in channel order, then band
/// order, then grid order. Every cell must be present with a common length.
pub fn stack_features<T: Scalar>(
    cells: &HashMap<(String, Band), Vec<T>>,
    channels: &[String],
    bands: &[Band],
) -> Result<FeatureVector<T>> {
    let mut values = Vec::new();
    let mut schema = Vec::new();
    let mut width = None;
    for ch in channels {
        for &band in bands {
            let cell = cells
                .get(&(ch.clone(), band))
                .ok_or_else(|| Error::Schema(format!("missing features for channel {ch}, band {band}")))?;
            match width {
                None => width = Some(cell.len()),
                Some(w) if w != cell.len() => {
                    return Err(Error::Schema(format!(
                        "channel {ch}, band {band} has {} values, expected {w}",
                        cell.len()
                    )))
                }
                _ => {}
            }
            values.extend_from_slice(cell);
            schema.extend((0..cell.len()).map(|g| FeatureLabel { channel: ch.clone(), band, grid_index: g }));
        }
    }
    Ok(FeatureVector { values, schema })
}
