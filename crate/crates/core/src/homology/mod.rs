//! Vietoris-Rips persistent homology in dimensions 0 to 2.

mod cohomology;
mod diagram;
mod distance;
mod naive;
mod reduce;
mod rips;
mod union_find;

pub use cohomology::{rips_cohomology, COHOMOLOGY_MAX_POINTS};
pub use diagram::{PersistenceDiagram, PersistencePair};
pub use distance::{distance_matrix, enclosing_radius, DistanceMatrix};
pub use naive::{persistence_naive, NAIVE_MAX_POINTS};
pub use reduce::persistence;
pub use rips::{build_rips, build_rips_capped, Filtration, FiltrationSimplex, DEFAULT_SIMPLEX_CAP};
pub use union_find::UnionFind;

use crate::embedding::PointCloud;
use crate::error::Result;
use crate::scalar::Scalar;

/// Point cloud to diagram in one call: Euclidean metric, threshold
/// defaulting to the enclosing radius, computed by [`rips_cohomology`].
pub fn rips_persistence<T: Scalar>(
    pc: &PointCloud<T>,
    dims: &[usize],
    threshold: Option<T>,
    simplex_cap: usize,
) -> Result<PersistenceDiagram<T>> {
    let dm = distance_matrix(pc);
    let threshold = threshold.unwrap_or_else(|| enclosing_radius(&dm));
    rips_cohomology(&dm, dims, threshold, simplex_cap)
}
