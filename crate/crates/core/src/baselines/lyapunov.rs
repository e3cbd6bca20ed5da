use serde::{Deserialize, Serialize};

use crate::embedding::{delay_embed_samples, EmbeddingParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Neighbour distances at or below this fraction of the series' standard
/// deviation count as coincident.
pub const NOISE_FLOOR: f64 = 1e-9;

/// Settings of the nearest-neighbour divergence estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LyapunovParams {
    /// Temporal exclusion for neighbours; `None` uses the embedding span.
    pub theiler: Option<usize>,
    /// Steps over which divergence is followed and fitted.
    pub horizon: usize,
}

impl Default for LyapunovParams {
    fn default() -> Self {
        Self { theiler: None, horizon: 10 }
    }
}

/// Mean log-divergence curve `y[k]` for `k = 0..=horizon`.
pub fn divergence_curve<T: Scalar>(xs: &[T], p: EmbeddingParams, lp: &LyapunovParams) -> Result<Vec<T>> {
    if lp.horizon == 0 {
        return Err(Error::param("divergence horizon must be >= 1"));
    }
    let pc = delay_embed_samples(xs, p)?;
    let w = lp.theiler.unwrap_or(p.span()).max(1);
    let usable = pc.len().saturating_sub(lp.horizon);
    // Distances at rounding level carry no divergence information; periodic
    // signals otherwise pair up points whose separation is pure float noise.
    let floor = crate::scalar::std_dev(xs) * T::of(NOISE_FLOOR);
    let dist = |i: usize, j: usize| -> T {
        let s: T = pc.point(i).iter().zip(pc.point(j)).map(|(&a, &b)| (a - b) * (a - b)).sum();
        s.sqrt()
    };
    let mut pairs = Vec::new();
    for i in 0..usable {
        let mut best: Option<(T, usize)> = None;
        for j in 0..usable {
            if i.abs_diff(j) <= w {
                continue;
            }
            let d = dist(i, j);
            if d > floor && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, j));
            }
        }
        if let Some((_, j)) = best {
            pairs.push((i, j));
        }
    }
    if pairs.is_empty() {
        return Err(Error::DegenerateInput("no nearest neighbours outside the exclusion window".into()));
    }
    let mut curve = Vec::with_capacity(lp.horizon + 1);
    for k in 0..=lp.horizon {
        let (mut acc, mut cnt) = (T::zero(), 0usize);
        for &(i, j) in &pairs {
            let d = dist(i + k, j + k);
            if d > floor {
                acc += d.ln();
                cnt += 1;
            }
        }
        if cnt == 0 {
            return Err(Error::DegenerateInput(format!("all trajectories coincide at step {k}")));
        }
        curve.push(acc / T::of_usize(cnt));
    }
    Ok(curve)
}

/// Largest Lyapunov exponent in nats per sample: least-squares slope of the
/// mean log-divergence curve.
pub fn lyapunov_largest<T: Scalar>(xs: &[T], p: EmbeddingParams, lp: &LyapunovParams) -> Result<T> {
    if crate::scalar::std_dev(xs) == T::zero() {
        return Err(Error::DegenerateInput("constant series has no divergence".into()));
    }
    Ok(slope(&divergence_curve(xs, p, lp)?))
}

fn slope<T: Scalar>(ys: &[T]) -> T {
    let n = T::of_usize(ys.len());
    let xbar = T::of_usize(ys.len() - 1) / T::of(2.0);
    let ybar = ys.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (k, &y) in ys.iter().enumerate() {
        let dx = T::of_usize(k) - xbar;
        sxy += dx * (y - ybar);
        sxx += dx * dx;
    }
    sxy / sxx
}
