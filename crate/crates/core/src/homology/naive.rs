//! Textbook persistence: one dense Z/2 boundary matrix over the whole
//! filtration, reduced left to right with no shortcuts. Used as an oracle.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::reduce::check_dims;
use super::{Filtration, PersistenceDiagram, PersistencePair};

/// Largest point count accepted by [`persistence_naive`].
pub const NAIVE_MAX_POINTS: usize = 25;

/// Same contract as [`super::persistence`], computed the slow way.
pub fn persistence_naive<T: Scalar>(filt: &Filtration<T>, dims: &[usize]) -> Result<PersistenceDiagram<T>> {
    if filt.n_vertices() > NAIVE_MAX_POINTS {
        return Err(Error::param(format!(
            "naive reduction limited to {NAIVE_MAX_POINTS} points, got {}",
            filt.n_vertices()
        )));
    }
    filt.validate()?;
    let top_h = check_dims(filt, dims)?;
    let simplices: Vec<_> = filt.simplices().iter().filter(|s| s.dim() <= top_h + 1).collect();
    let m = simplices.len();
    let words = m.div_ceil(64).max(1);

    let position: HashMap<&[u32], usize> = simplices.iter().enumerate().map(|(i, s)| (s.vertices(), i)).collect();

    // Dense columns as bitsets over rows 0..m.
    let mut columns = vec![vec![0u64; words]; m];
    for (j, s) in simplices.iter().enumerate() {
        let v = s.vertices();
        if v.len() < 2 {
            continue;
        }
        for skip in 0..v.len() {
            let face: Vec<u32> = v.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &x)| x).collect();
            let i = *position
                .get(face.as_slice())
                .ok_or_else(|| Error::Internal(format!("face {face:?} missing")))?;
            if i >= j {
                return Err(Error::Internal(format!("face {face:?} does not precede {v:?}")));
            }
            columns[j][i / 64] ^= 1 << (i % 64);
        }
    }

    let low = |col: &[u64]| -> Option<usize> {
        col.iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(wi, &w)| wi * 64 + 63 - w.leading_zeros() as usize)
    };

    // lows[j] = low(R_j) once column j has been reduced.
    let mut lows: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        loop {
            let Some(l) = low(&columns[j]) else { break };
            let Some(prev) = (0..j).find(|&k| lows[k] == Some(l)) else { break };
            let (head, tail) = columns.split_at_mut(j);
            for (a, b) in tail[0].iter_mut().zip(&head[prev]) {
                *a ^= b;
            }
        }
        lows[j] = low(&columns[j]);
    }

    let cap = filt.threshold();
    let mut is_low = vec![false; m];
    let mut out = Vec::new();
    for j in 0..m {
        if let Some(i) = lows[j] {
            is_low[i] = true;
            let (b, d) = (simplices[i], simplices[j]);
            if dims.contains(&b.dim()) && d.value > b.value {
                out.push(PersistencePair { dim: b.dim(), birth: b.value, death: d.value, essential: false });
            }
        }
    }
    for j in 0..m {
        let s = simplices[j];
        if lows[j].is_none() && !is_low[j] && s.dim() <= top_h && dims.contains(&s.dim()) {
            if s.dim() == 0 || cap > s.value {
                out.push(PersistencePair { dim: s.dim(), birth: s.value, death: cap, essential: true });
            }
        }
    }
    Ok(PersistenceDiagram::new(out, cap, filt.n_vertices()))
}
