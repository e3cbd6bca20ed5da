//! Persistence landscapes and per-channel feature assembly.

mod features;

pub use features::{
    band_features, global_t_max, percentile, stack_features, FeatureLabel, FeatureVector, RangeMode, DEFAULT_GRID,
};

use crate::error::{Error, Result};
use crate::homology::{PersistenceDiagram, PersistencePair};
use crate::scalar::Scalar;

/// Tent function of the bar `(birth, death)`: rises with slope 1 from the
/// birth to the midpoint, falls back to 0 at the death.
#[inline]
pub fn tent<T: Scalar>(birth: T, death: T, t: T) -> T {
    let mid = (birth + death) / T::of(2.0);
    if t >= birth && t <= mid {
        t - birth
    } else if t > mid && t < death {
        death - t
    } else {
        T::zero()
    }
}

/// `k`-th landscape function of one homology dimension sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    pub dim: usize,
    pub k: usize,
}

/// `grid_len` evenly spaced points over `[0, t_max]`.
pub fn landscape_grid<T: Scalar>(grid_len: usize, t_max: T) -> Result<Vec<T>> {
    if grid_len < 2 {
        return Err(Error::param(format!("landscape grid needs >= 2 points, got {grid_len}")));
    }
    if !(t_max > T::zero()) || !t_max.is_finite() {
        return Err(Error::param(format!("landscape range {t_max} must be positive")));
    }
    let last = T::of_usize(grid_len - 1);
    Ok((0..grid_len).map(|g| T::of_usize(g) * t_max / last).collect())
}

/// k-th largest tent value at each grid point over the pairs of one dimension.
pub fn landscape_of_pairs<T: Scalar>(pairs: &[PersistencePair<T>], k: usize, grid: &[T]) -> Result<Vec<T>> {
    if k == 0 {
        return Err(Error::param("landscape level k starts at 1"));
    }
    let mut buf = Vec::with_capacity(pairs.len());
    Ok(grid
        .iter()
        .map(|&t| {
            if pairs.len() < k {
                return T::zero();
            }
            buf.clear();
            buf.extend(pairs.iter().map(|p| tent(p.birth, p.death, t)));
            let (_, kth, _) = buf.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
            *kth
        })
        .collect())
}

pub fn landscape<T: Scalar>(
    diag: &PersistenceDiagram<T>,
    dim: usize,
    k: usize,
    grid_len: usize,
    t_max: T,
) -> Result<Landscape<T>> {
    if dim > 2 {
        return Err(Error::param(format!("homology dimension {dim} not in 0..=2")));
    }
    let grid = landscape_grid(grid_len, t_max)?;
    let values = landscape_of_pairs(diag.dim(dim), k, &grid)?;
    Ok(Landscape { grid, values, dim, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bar(dim: usize, birth: f64, death: f64) -> PersistencePair<f64> {
        PersistencePair { dim, birth, death, essential: false }
    }

    fn diagram(bars: &[(f64, f64)]) -> PersistenceDiagram<f64> {
        PersistenceDiagram::new(bars.iter().map(|&(b, d)| bar(1, b, d)), 10.0, 0)
    }

    #[test]
    fn tent_values() {
        assert_eq!(tent(1.0, 3.0, 2.0), 1.0);
        assert_eq!(tent(1.0, 3.0, 1.0), 0.0);
        assert_eq!(tent(1.0, 3.0, 3.0), 0.0);
        assert_eq!(tent(1.0, 3.0, 1.5), 0.5);
        assert_eq!(tent(1.0, 3.0, 2.5), 0.5);
        assert_eq!(tent(0.0, 0.0, 0.0), 0.0);
        assert_eq!(tent(0.0, 0.0, 5.0), 0.0);
    }

    #[test]
    fn single_bar_sampled_exactly() {
        let l = landscape(&diagram(&[(1.0, 3.0)]), 1, 1, 9, 4.0).unwrap();
        assert_eq!(l.grid, vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]);
        assert_eq!(l.values, vec![0.0, 0.0, 0.0, 0.5, 1.0, 0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn overlapping_bars_by_level() {
        let d = diagram(&[(0.0, 2.0), (1.0, 3.0)]);
        let at = |k| landscape_of_pairs(d.dim(1), k, &[1.5]).unwrap()[0];
        assert_eq!(at(1), 0.5);
        assert_eq!(at(2), 0.5);
        assert_eq!(at(3), 0.0);
    }

    #[test]
    fn invalid_parameters() {
        let d = diagram(&[(0.0, 1.0)]);
        assert!(landscape(&d, 1, 0, 10, 1.0).is_err());
        assert!(landscape(&d, 1, 1, 1, 1.0).is_err());
        assert!(landscape(&d, 1, 1, 10, 0.0).is_err());
        assert!(landscape(&d, 3, 1, 10, 1.0).is_err());
    }

    #[test]
    fn empty_diagram_is_zero() {
        let l = landscape(&PersistenceDiagram::<f64>::empty(1.0), 0, 1, 5, 1.0).unwrap();
        assert!(l.values.iter().all(|&v| v == 0.0));
    }

    fn bars() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0f64..5.0, 0.0f64..3.0).prop_map(|(b, p)| (b, b + p)), 0..12)
    }

    proptest! {
        #[test]
        fn landscape_axioms(bs in bars(), extra in bars(), zero_at in 0.0f64..8.0) {
            let d = diagram(&bs);
            let grid = landscape_grid(60, 8.0).unwrap();
            let levels: Vec<Vec<f64>> = (1..=4).map(|k| landscape_of_pairs(d.dim(1), k, &grid).unwrap()).collect();
            let half_max = bs.iter().map(|(b, e)| (e - b) / 2.0).fold(0.0, f64::max);
            let step = grid[1] - grid[0];
            for k in 0..3 {
                for g in 0..grid.len() {
                    prop_assert!(levels[k][g] >= 0.0);
                    prop_assert!(levels[k][g] <= half_max);
                    prop_assert!(levels[k][g] >= levels[k + 1][g]);
                    if g + 1 < grid.len() {
                        prop_assert!((levels[k][g + 1] - levels[k][g]).abs() <= step + 1e-12);
                    }
                }
            }
            let mut with_zero = bs.clone();
            with_zero.push((zero_at, zero_at));
            let z = landscape_of_pairs(diagram(&with_zero).dim(1), 1, &grid).unwrap();
            prop_assert_eq!(&z, &levels[0]);

            let mut union = bs.clone();
            union.extend(extra.iter().copied());
            let u = landscape_of_pairs(diagram(&union).dim(1), 1, &grid).unwrap();
            let e = landscape_of_pairs(diagram(&extra).dim(1), 1, &grid).unwrap();
            for g in 0..grid.len() {
                prop_assert!(u[g] >= levels[0][g] && u[g] >= e[g]);
            }
        }
    }
}
