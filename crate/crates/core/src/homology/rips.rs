use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::DistanceMatrix;

/// Default cap on the number of simplices a single filtration may hold.
pub const DEFAULT_SIMPLEX_CAP: usize = 5_000_000;

/// A simplex of dimension 0..=3 tagged with its filtration value (diameter).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiltrationSimplex<T> {
    verts: [u32; 4],
    len: u8,
    pub value: T,
}

impl<T: Scalar> FiltrationSimplex<T> {
    /// `vertices` must be strictly increasing and hold 1 to 4 entries.
    pub fn new(vertices: &[u32], value: T) -> Result<Self> {
        if vertices.is_empty() || vertices.len() > 4 {
            return Err(Error::param(format!("simplex with {} vertices", vertices.len())));
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("simplex vertices must be strictly increasing"));
        }
        let mut verts = [0u32; 4];
        verts[..vertices.len()].copy_from_slice(vertices);
        Ok(Self { verts, len: vertices.len() as u8, value })
    }

    #[inline]
    pub(crate) fn from_sorted(vertices: &[u32], value: T) -> Self {
        let mut verts = [0u32; 4];
        verts[..vertices.len()].copy_from_slice(vertices);
        Self { verts, len: vertices.len() as u8, value }
    }

    #[inline]
    pub fn vertices(&self) -> &[u32] {
        &self.verts[..self.len as usize]
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.len as usize - 1
    }

    /// Filtration order: value, then dimension, then lexicographic vertices.
    pub fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.len.cmp(&other.len))
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

/// Simplices of a Vietoris-Rips complex in reduction order.
#[derive(Debug, Clone)]
pub struct Filtration<T> {
    simplices: Vec<FiltrationSimplex<T>>,
    threshold: T,
    max_dim: usize,
    n_vertices: usize,
}

impl<T: Scalar> Filtration<T> {
    /// Assembles a filtration without checking its order; [`Filtration::validate`]
    /// (called by the persistence engines) reports violations.
    pub fn from_simplices(
        simplices: Vec<FiltrationSimplex<T>>,
        threshold: T,
        max_dim: usize,
        n_vertices: usize,
    ) -> Self {
        Self { simplices, threshold, max_dim, n_vertices }
    }

    pub fn simplices(&self) -> &[FiltrationSimplex<T>] {
        &self.simplices
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Number of simplices per dimension `0..=max_dim`.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.max_dim + 1];
        for s in &self.simplices {
            if s.dim() <= self.max_dim {
                c[s.dim()] += 1;
            }
        }
        c
    }

    /// Checks strict filtration order, vertex ranges, value bounds and that
    /// every simplex has exactly one vertex of each lower index set present.
    /// Face presence is checked by the engines during boundary lookup.
    pub fn validate(&self) -> Result<()> {
        for s in &self.simplices {
            if s.dim() > self.max_dim {
                return Err(Error::Internal(format!(
                    "simplex of dimension {} exceeds max_dim {}",
                    s.dim(),
                    self.max_dim
                )));
            }
            if s.vertices().iter().any(|&v| v as usize >= self.n_vertices) {
                return Err(Error::Internal("simplex vertex out of range".into()));
            }
            if s.vertices().windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Internal("simplex vertices not strictly increasing".into()));
            }
            if !(s.value >= T::zero()) || s.value > self.threshold {
                return Err(Error::Internal(format!("simplex value {} outside [0, threshold]", s.value)));
            }
        }
        for (i, w) in self.simplices.windows(2).enumerate() {
            if w[0].filtration_cmp(&w[1]) != Ordering::Less {
                return Err(Error::Internal(format!(
                    "filtration order broken at position {}: {:?} then {:?}",
                    i + 1,
                    w[0].vertices(),
                    w[1].vertices()
                )));
            }
        }
        Ok(())
    }
}

/// Builds the Rips filtration of every simplex of dimension `<= max_dim` with
/// diameter `<= threshold`, refusing to exceed `cap` simplices.
pub fn build_rips_capped<T: Scalar>(
    dm: &DistanceMatrix<T>,
    max_dim: usize,
    threshold: T,
    cap: usize,
) -> Result<Filtration<T>> {
    if max_dim > 3 {
        return Err(Error::param(format!("max_dim {max_dim} > 3")));
    }
    if !(threshold >= T::zero()) || !threshold.is_finite() {
        return Err(Error::param(format!("threshold {threshold} must be finite and >= 0")));
    }
    let n = dm.len();
    if n > u32::MAX as usize {
        return Err(Error::param("too many points"));
    }
    let guard = |count: usize| -> Result<()> {
        if count > cap {
            Err(Error::Resource { what: "Rips simplices".into(), count, cap })
        } else {
            Ok(())
        }
    };

    let mut out: Vec<FiltrationSimplex<T>> = Vec::new();
    guard(n)?;
    out.extend((0..n as u32).map(|v| FiltrationSimplex::from_sorted(&[v], T::zero())));

    if max_dim >= 1 && n > 1 {
        // Higher-indexed neighbours within the threshold, as bitsets.
        let words = n.div_ceil(64);
        let mut adj = vec![0u64; n * words];
        for i in 0..n {
            for j in (i + 1)..n {
                if dm.get(i, j) <= threshold {
                    adj[i * words + j / 64] |= 1 << (j % 64);
                }
            }
        }
        let neighbours = |i: usize| &adj[i * words..(i + 1) * words];

        let mut common = vec![0u64; words];
        let mut common3 = vec![0u64; words];
        for i in 0..n {
            for j in iter_bits(neighbours(i)) {
                let dij = dm.get(i, j);
                guard(out.len() + 1)?;
                out.push(FiltrationSimplex::from_sorted(&[i as u32, j as u32], dij));
                if max_dim < 2 {
                    continue;
                }
                for (c, (a, b)) in common.iter_mut().zip(neighbours(i).iter().zip(neighbours(j))) {
                    *c = a & b;
                }
                for k in iter_bits(&common) {
                    let dijk = dij.max(dm.get(i, k)).max(dm.get(j, k));
                    guard(out.len() + 1)?;
                    out.push(FiltrationSimplex::from_sorted(&[i as u32, j as u32, k as u32], dijk));
                    if max_dim < 3 {
                        continue;
                    }
                    for (c, (a, b)) in common3.iter_mut().zip(common.iter().zip(neighbours(k))) {
                        *c = a & b;
                    }
                    for l in iter_bits(&common3) {
                        let v = dijk.max(dm.get(i, l)).max(dm.get(j, l)).max(dm.get(k, l));
                        guard(out.len() + 1)?;
                        out.push(FiltrationSimplex::from_sorted(
                            &[i as u32, j as u32, k as u32, l as u32],
                            v,
                        ));
                    }
                }
            }
        }
    }

    out.sort_unstable_by(FiltrationSimplex::filtration_cmp);
    Ok(Filtration { simplices: out, threshold, max_dim, n_vertices: n })
}

/// [`build_rips_capped`] with the default simplex cap.
pub fn build_rips<T: Scalar>(dm: &DistanceMatrix<T>, max_dim: usize, threshold: T) -> Result<Filtration<T>> {
    build_rips_capped(dm, max_dim, threshold, DEFAULT_SIMPLEX_CAP)
}

fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(w, &bits)| {
        let mut b = bits;
        std::iter::from_fn(move || {
            if b == 0 {
                None
            } else {
                let t = b.trailing_zeros() as usize;
                b &= b - 1;
                Some(w * 64 + t)
            }
        })
    })
}
