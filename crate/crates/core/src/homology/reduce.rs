//! Optimized persistence: union-find for H0, sparse Z/2 column reduction with
//! clearing for H1 and H2.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::union_find::UnionFind;
use super::{Filtration, FiltrationSimplex, PersistenceDiagram, PersistencePair};

const NONE: u32 = u32::MAX;

/// Checks the requested homology dimensions against the filtration.
pub(crate) fn check_dims<T: Scalar>(filt: &Filtration<T>, dims: &[usize]) -> Result<usize> {
    let max = *dims
        .iter()
        .max()
        .ok_or_else(|| Error::param("no homology dimensions requested"))?;
    if max > 2 {
        return Err(Error::param(format!("homology dimension {max} not supported (0..=2)")));
    }
    if filt.max_dim() < max + 1 {
        return Err(Error::param(format!(
            "H{max} needs simplices up to dimension {}, filtration stops at {}",
            max + 1,
            filt.max_dim()
        )));
    }
    Ok(max)
}

/// Rank of a vertex set among same-dimension simplices (combinatorial number system).
pub(crate) struct Binomials {
    table: Vec<[u64; 5]>,
}

impl Binomials {
    pub(crate) fn new(n: usize) -> Self {
        let mut table = vec![[0u64; 5]; n + 1];
        for (v, row) in table.iter_mut().enumerate() {
            row[0] = 1;
            for k in 1..5 {
                // C(v, k) = C(v, k-1) * (v - k + 1) / k
                row[k] = if v + 1 > k { row[k - 1] * (v as u64 + 1 - k as u64) / k as u64 } else { 0 };
            }
        }
        Self { table }
    }

    #[inline]
    pub(crate) fn index(&self, verts: &[u32]) -> u64 {
        verts
            .iter()
            .enumerate()
            .map(|(i, &v)| self.table[v as usize][i + 1])
            .sum()
    }

    pub(crate) fn count(&self, n: usize, k: usize) -> u64 {
        self.table[n][k]
    }
}

enum RankLookup {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

impl RankLookup {
    fn get(&self, key: u64) -> Option<u32> {
        match self {
            RankLookup::Dense(v) => v.get(key as usize).copied().filter(|&r| r != NONE),
            RankLookup::Sparse(m) => m.get(&key).copied(),
        }
    }
}

const DENSE_LIMIT: u64 = 1 << 26;

/// Per-dimension views of a filtration: global positions ordered by rank and
/// a lookup from vertex set to rank.
pub(crate) struct Indexed<'a, T> {
    filt: &'a Filtration<T>,
    binom: Binomials,
    pub(crate) by_dim: Vec<Vec<u32>>,
    lookup: Vec<RankLookup>,
}

impl<'a, T: Scalar> Indexed<'a, T> {
    pub(crate) fn new(filt: &'a Filtration<T>, top: usize) -> Self {
        let n = filt.n_vertices();
        let binom = Binomials::new(n);
        let mut by_dim = vec![Vec::new(); top + 1];
        for (g, s) in filt.simplices().iter().enumerate() {
            if s.dim() <= top {
                by_dim[s.dim()].push(g as u32);
            }
        }
        let lookup = (0..top)
            .map(|k| {
                let space = binom.count(n, k + 1);
                if space <= DENSE_LIMIT {
                    let mut v = vec![NONE; space as usize];
                    for (r, &g) in by_dim[k].iter().enumerate() {
                        v[binom.index(filt.simplices()[g as usize].vertices()) as usize] = r as u32;
                    }
                    RankLookup::Dense(v)
                } else {
                    RankLookup::Sparse(
                        by_dim[k]
                            .iter()
                            .enumerate()
                            .map(|(r, &g)| (binom.index(filt.simplices()[g as usize].vertices()), r as u32))
                            .collect(),
                    )
                }
            })
            .collect();
        Self { filt, binom, by_dim, lookup }
    }

    #[inline]
    pub(crate) fn simplex(&self, dim: usize, rank: u32) -> &FiltrationSimplex<T> {
        &self.filt.simplices()[self.by_dim[dim][rank as usize] as usize]
    }

    /// Facet ranks of simplex `rank` in dimension `dim`, sorted descending.
    pub(crate) fn boundary(&self, dim: usize, rank: u32, out: &mut Vec<u32>) -> Result<()> {
        out.clear();
        let g = self.by_dim[dim][rank as usize];
        let verts = self.filt.simplices()[g as usize].vertices();
        let mut facet = [0u32; 3];
        for skip in 0..verts.len() {
            let mut m = 0;
            for (i, &v) in verts.iter().enumerate() {
                if i != skip {
                    facet[m] = v;
                    m += 1;
                }
            }
            let r = self
                .lookup[dim - 1]
                .get(self.binom.index(&facet[..m]))
                .ok_or_else(|| Error::Internal(format!("face {:?} of {:?} missing", &facet[..m], verts)))?;
            if self.by_dim[dim - 1][r as usize] >= g {
                return Err(Error::Internal(format!("face {:?} does not precede {:?}", &facet[..m], verts)));
            }
            out.push(r);
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        Ok(())
    }
}

/// Outcome of reducing one boundary matrix.
pub(crate) struct Reduction {
    /// (row rank, column rank) pivot pairs.
    pub(crate) pairs: Vec<(u32, u32)>,
    /// Columns that reduced to zero (cleared columns excluded).
    pub(crate) zero: Vec<bool>,
}

/// Symmetric difference of two descending-sorted columns.
#[inline]
fn add_columns(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Greater => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Less => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Left-to-right reduction of the boundary matrix from dimension `dim` to
/// `dim - 1`, skipping `cleared` columns.
fn reduce_boundary<T: Scalar>(ix: &Indexed<'_, T>, dim: usize, cleared: &[bool]) -> Result<Reduction> {
    let ncols = ix.by_dim[dim].len();
    let nrows = ix.by_dim[dim - 1].len();
    let mut pivot_slot = vec![NONE; nrows];
    let mut stored: Vec<Vec<u32>> = Vec::new();
    let mut pairs = Vec::new();
    let mut zero = vec![false; ncols];
    let mut work = Vec::with_capacity(16);
    let mut scratch = Vec::with_capacity(16);

    for j in 0..ncols {
        if cleared[j] {
            continue;
        }
        ix.boundary(dim, j as u32, &mut work)?;
        loop {
            let Some(&low) = work.first() else {
                zero[j] = true;
                break;
            };
            let slot = pivot_slot[low as usize];
            if slot == NONE {
                pivot_slot[low as usize] = stored.len() as u32;
                pairs.push((low, j as u32));
                stored.push(std::mem::take(&mut work));
                break;
            }
            add_columns(&work, &stored[slot as usize], &mut scratch);
            std::mem::swap(&mut work, &mut scratch);
        }
    }
    Ok(Reduction { pairs, zero })
}

/// Persistent homology of a Rips filtration in the requested dimensions.
///
/// H0 comes from union-find over edges in filtration order. Higher
/// dimensions come from boundary reduction over Z/2, processed from the top
/// dimension down so that pivot rows found in dimension `k + 1` clear the
/// corresponding columns in dimension `k`. Zero-length bars are dropped,
/// except the essential H0 classes; essential classes die at the threshold.
pub fn persistence<T: Scalar>(filt: &Filtration<T>, dims: &[usize]) -> Result<PersistenceDiagram<T>> {
    filt.validate()?;
    let top_h = check_dims(filt, dims)?;
    let cap = filt.threshold();
    let want = |d: usize| dims.contains(&d);
    let mut out = Vec::new();

    let ix = Indexed::new(filt, top_h + 1);
    let n_vertices = ix.by_dim[0].len();

    // H0 and edge positivity.
    let n_edges = ix.by_dim.get(1).map_or(0, Vec::len);
    let mut edge_positive = vec![false; n_edges];
    {
        let mut uf = UnionFind::new(filt.n_vertices());
        for r in 0..n_edges {
            let e = ix.simplex(1, r as u32);
            let v = e.vertices();
            if uf.union(v[0], v[1]) {
                if want(0) && e.value > T::zero() {
                    out.push(PersistencePair { dim: 0, birth: T::zero(), death: e.value, essential: false });
                }
            } else {
                edge_positive[r] = true;
            }
        }
        if want(0) {
            let mut roots: Vec<u32> = (0..n_vertices).map(|r| ix.simplex(0, r as u32).vertices()[0]).collect();
            for v in roots.iter_mut() {
                *v = uf.find(*v);
            }
            roots.sort_unstable();
            roots.dedup();
            out.extend(
                roots
                    .iter()
                    .map(|_| PersistencePair { dim: 0, birth: T::zero(), death: cap, essential: true }),
            );
        }
    }

    // cleared[k][r]: dimension-k simplex r is a pivot row of the reduced
    // dimension-(k+1) boundary.
    let mut cleared: Vec<Vec<bool>> = ix.by_dim.iter().map(|v| vec![false; v.len()]).collect();
    for k in (2..=top_h + 1).rev() {
        let red = reduce_boundary(&ix, k, &cleared[k])?;
        for &(row, col) in &red.pairs {
            cleared[k - 1][row as usize] = true;
            if want(k - 1) {
                let birth = ix.simplex(k - 1, row).value;
                let death = ix.simplex(k, col).value;
                if death > birth {
                    out.push(PersistencePair { dim: k - 1, birth, death, essential: false });
                }
            }
        }
        // Essential classes of dimension k: positive and never killed.
        if k <= top_h && want(k) {
            for (r, &z) in red.zero.iter().enumerate() {
                if z && !cleared[k][r] {
                    push_essential(&mut out, k, ix.simplex(k, r as u32).value, cap);
                }
            }
        }
    }
    if want(1) {
        for (r, &pos) in edge_positive.iter().enumerate() {
            if pos && !cleared[1][r] {
                push_essential(&mut out, 1, ix.simplex(1, r as u32).value, cap);
            }
        }
    }

    Ok(PersistenceDiagram::new(out, cap, filt.n_vertices()))
}

fn push_essential<T: Scalar>(out: &mut Vec<PersistencePair<T>>, dim: usize, birth: T, cap: T) {
    if cap > birth {
        out.push(PersistencePair { dim, birth, death: cap, essential: true });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_ranks_are_dense_and_unique() {
        let b = Binomials::new(6);
        let mut seen = std::collections::HashSet::new();
        for i in 0..6u32 {
            for j in (i + 1)..6 {
                for k in (j + 1)..6 {
                    let idx = b.index(&[i, j, k]);
                    assert!(idx < b.count(6, 3));
                    assert!(seen.insert(idx));
                }
            }
        }
        assert_eq!(seen.len(), 20);
    }

    #[test]
    fn column_addition_is_symmetric_difference() {
        let mut out = Vec::new();
        add_columns(&[9, 5, 2], &[7, 5, 1], &mut out);
        assert_eq!(out, vec![9, 7, 2, 1]);
    }
}
