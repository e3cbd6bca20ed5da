//! Rips persistence by cohomology reduction with clearing.
//!
//! Columns are simplices in reverse filtration order and rows their cofaces,
//! which are enumerated on demand from the adjacency bitsets. Top-dimensional
//! simplices (tetrahedra for H2) are never materialized, and clearing makes
//! most coboundary columns vanish without any additions.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::hash::{BuildHasherDefault, Hasher};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::union_find::UnionFind;
use super::{DistanceMatrix, PersistenceDiagram, PersistencePair};

/// Multiplicative hash for simplex codes, which are already unique integers.
#[derive(Default)]
struct CodeHasher(u64);

impl Hasher for CodeHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ u64::from(b)).wrapping_mul(0x100_0000_01b3);
        }
    }

    fn write_u64(&mut self, x: u64) {
        self.0 = (x ^ (x >> 29)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
}

type CodeMap<V> = HashMap<u64, V, BuildHasherDefault<CodeHasher>>;
type CodeSet = HashSet<u64, BuildHasherDefault<CodeHasher>>;

/// A simplex identified by its filtration value and a code that orders its
/// sorted vertex tuple lexicographically.
#[derive(Clone, Copy, Debug)]
struct Key<T> {
    value: T,
    code: u64,
}

impl<T: Scalar> Key<T> {
    #[inline]
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then(self.code.cmp(&other.code))
    }
}

/// Largest point count whose 4-vertex codes fit in a `u64`.
pub const COHOMOLOGY_MAX_POINTS: usize = u16::MAX as usize;

struct Complex<'a, T> {
    dm: &'a DistanceMatrix<T>,
    n: u64,
    words: usize,
    adj: Vec<u64>,
}

impl<T: Scalar> Complex<'_, T> {
    fn neighbours(&self, i: usize) -> &[u64] {
        &self.adj[i * self.words..(i + 1) * self.words]
    }

    fn code(&self, verts: &[usize]) -> u64 {
        verts.iter().fold(0u64, |acc, &v| acc * self.n + v as u64)
    }

    /// Cofaces of the simplex `verts` (sorted) with value `value`, ascending.
    fn coboundary(&self, verts: &[usize], value: T, out: &mut Vec<Key<T>>) {
        out.clear();
        let mut common = vec![!0u64; self.words];
        for &v in verts {
            for (c, a) in common.iter_mut().zip(self.neighbours(v)) {
                *c &= a;
            }
        }
        let mut buf = [0usize; 4];
        for (w, &bits) in common.iter().enumerate() {
            let mut b = bits;
            while b != 0 {
                let l = w * 64 + b.trailing_zeros() as usize;
                b &= b - 1;
                let mut val = value;
                for &v in verts {
                    val = val.max(self.dm.get(v, l));
                }
                let pos = verts.partition_point(|&v| v < l);
                buf[..pos].copy_from_slice(&verts[..pos]);
                buf[pos] = l;
                buf[pos + 1..=verts.len()].copy_from_slice(&verts[pos..]);
                out.push(Key { value: val, code: self.code(&buf[..=verts.len()]) });
            }
        }
        out.sort_unstable_by(Key::cmp);
    }
}

/// Symmetric difference of two ascending columns.
fn add<T: Scalar>(a: &[Key<T>], b: &[Key<T>], out: &mut Vec<Key<T>>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].code.cmp(&b[j].code) {
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
            _ => match a[i].cmp(&b[j]) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                _ => {
                    out.push(b[j]);
                    j += 1;
                }
            },
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Reduces the coboundary columns of `simplices` (given in filtration
/// order, processed in reverse). Returns the pivot codes, to be cleared in
/// the next dimension.
fn reduce<T: Scalar>(
    cx: &Complex<'_, T>,
    dim: usize,
    simplices: &[(Key<T>, [usize; 3])],
    cleared: &CodeSet,
    cap: T,
    want: bool,
    out: &mut Vec<PersistencePair<T>>,
) -> CodeSet {
    let mut reduced: CodeMap<Vec<Key<T>>> = CodeMap::default();
    let mut pivots = CodeSet::default();
    let (mut col, mut scratch) = (Vec::new(), Vec::new());
    for (key, verts) in simplices.iter().rev() {
        if cleared.contains(&key.code) {
            continue;
        }
        cx.coboundary(&verts[..=dim], key.value, &mut col);
        loop {
            let Some(&pivot) = col.first() else {
                if want && cap > key.value {
                    out.push(PersistencePair { dim, birth: key.value, death: cap, essential: true });
                }
                break;
            };
            match reduced.get(&pivot.code) {
                Some(other) => {
                    add(&col, other, &mut scratch);
                    std::mem::swap(&mut col, &mut scratch);
                }
                None => {
                    if want && pivot.value > key.value {
                        out.push(PersistencePair { dim, birth: key.value, death: pivot.value, essential: false });
                    }
                    pivots.insert(pivot.code);
                    reduced.insert(pivot.code, std::mem::take(&mut col));
                    break;
                }
            }
        }
    }
    pivots
}

/// Persistence diagram of the Rips filtration of `dm` up to `threshold`
/// in the requested dimensions (subset of 0..=2). Vertices, edges and
/// triangles count against `simplex_cap`; tetrahedra are never stored.
pub fn rips_cohomology<T: Scalar>(
    dm: &DistanceMatrix<T>,
    dims: &[usize],
    threshold: T,
    simplex_cap: usize,
) -> Result<PersistenceDiagram<T>> {
    let top = *dims.iter().max().ok_or_else(|| Error::param("no homology dimensions requested"))?;
    if top > 2 {
        return Err(Error::param(format!("homology dimension {top} not supported (0..=2)")));
    }
    if !(threshold >= T::zero()) || !threshold.is_finite() {
        return Err(Error::param(format!("threshold {threshold} must be finite and >= 0")));
    }
    let n = dm.len();
    if n > COHOMOLOGY_MAX_POINTS {
        return Err(Error::param(format!("{n} points exceed {COHOMOLOGY_MAX_POINTS}")));
    }
    let guard = |count: usize| -> Result<()> {
        if count > simplex_cap {
            Err(Error::Resource { what: "Rips simplices".into(), count, cap: simplex_cap })
        } else {
            Ok(())
        }
    };
    guard(n)?;
    let want = |d: usize| dims.contains(&d);

    let words = n.div_ceil(64).max(1);
    let mut adj = vec![0u64; n * words];
    let mut edges: Vec<(Key<T>, [usize; 3])> = Vec::new();
    let cx_code = |v: &[usize]| v.iter().fold(0u64, |acc, &x| acc * n as u64 + x as u64);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dm.get(i, j);
            if d <= threshold {
                adj[i * words + j / 64] |= 1 << (j % 64);
                adj[j * words + i / 64] |= 1 << (i % 64);
                edges.push((Key { value: d, code: cx_code(&[i, j]) }, [i, j, 0]));
            }
        }
    }
    guard(n + edges.len())?;
    edges.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let cx = Complex { dm, n: n as u64, words, adj };
    let mut out = Vec::new();

    // H0 by union-find; merging edges are cleared from the H1 columns.
    let mut uf = UnionFind::new(n);
    let mut cleared = CodeSet::default();
    for (key, v) in &edges {
        if uf.union(v[0] as u32, v[1] as u32) {
            cleared.insert(key.code);
            if want(0) && key.value > T::zero() {
                out.push(PersistencePair { dim: 0, birth: T::zero(), death: key.value, essential: false });
            }
        }
    }
    if want(0) {
        for _ in 0..uf.components() {
            out.push(PersistencePair { dim: 0, birth: T::zero(), death: threshold, essential: true });
        }
    }
    if top == 0 {
        return Ok(PersistenceDiagram::new(out, threshold, n));
    }

    let cleared = reduce(&cx, 1, &edges, &cleared, threshold, want(1), &mut out);
    if top == 2 {
        let mut tris: Vec<(Key<T>, [usize; 3])> = Vec::new();
        let mut common = vec![0u64; words];
        for (key, v) in &edges {
            let (i, j) = (v[0], v[1]);
            for (c, (a, b)) in common.iter_mut().zip(cx.neighbours(i).iter().zip(cx.neighbours(j))) {
                *c = a & b;
            }
            for (w, &bits) in common.iter().enumerate() {
                let mut b = bits;
                while b != 0 {
                    let k = w * 64 + b.trailing_zeros() as usize;
                    b &= b - 1;
                    if k > j {
                        let value = key.value.max(dm.get(i, k)).max(dm.get(j, k));
                        tris.push((Key { value, code: cx.code(&[i, j, k]) }, [i, j, k]));
                    }
                }
            }
            guard(n + edges.len() + tris.len())?;
        }
        tris.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        reduce(&cx, 2, &tris, &cleared, threshold, true, &mut out);
    }
    Ok(PersistenceDiagram::new(out, threshold, n))
}
