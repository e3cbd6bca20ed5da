use crate::error::{Error, Result};
use crate::scalar::{std_dev, Scalar};
use crate::signals::TimeSeries;

/// Kennel false-nearest-neighbour tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FnnThresholds {
    /// Distance-ratio tolerance.
    pub r_tol: f64,
    /// Attractor-size tolerance, in units of the series standard deviation.
    pub a_tol: f64,
    /// Fraction below which a dimension is accepted.
    pub accept: f64,
}

impl Default for FnnThresholds {
    fn default() -> Self {
        Self { r_tol: 15.0, a_tol: 2.0, accept: 0.05 }
    }
}

/// Fraction of false nearest neighbours for `d = 1..=max_dim` and the
/// smallest `d` whose fraction is below the acceptance level (else `max_dim`).
///
/// Neighbours are found by exhaustive search; exact duplicates (distance 0)
/// are not used as neighbours.
pub fn fnn_dim<T: Scalar>(
    ts: &TimeSeries<T>,
    lag: usize,
    max_dim: usize,
    th: FnnThresholds,
) -> Result<(usize, Vec<T>)> {
    let x = ts.samples();
    if max_dim < 2 || lag == 0 {
        return Err(Error::param(format!("FNN needs max_dim >= 2 and lag >= 1 (got {max_dim}, {lag})")));
    }
    if x.len() < max_dim * lag + 2 {
        return Err(Error::param(format!(
            "series of {} samples too short for FNN up to d={max_dim} at lag {lag}",
            x.len()
        )));
    }
    let attractor = std_dev(x);
    if !(attractor > T::zero()) {
        return Err(Error::DegenerateInput("constant series".into()));
    }
    let (r_tol, a_tol) = (T::of(th.r_tol), T::of(th.a_tol));

    let mut fractions = Vec::with_capacity(max_dim);
    for d in 1..=max_dim {
        // Points need coordinate index d*lag for the extension test.
        let m = x.len() - d * lag;
        let mut false_count = 0usize;
        let mut tested = 0usize;
        for i in 0..m {
            let mut best = T::infinity();
            let mut best_j = usize::MAX;
            for j in 0..m {
                if j == i {
                    continue;
                }
                let mut s = T::zero();
                for k in 0..d {
                    let diff = x[i + k * lag] - x[j + k * lag];
                    s += diff * diff;
                }
                if s > T::zero() && s < best {
                    best = s;
                    best_j = j;
                }
            }
            if best_j == usize::MAX {
                continue;
            }
            tested += 1;
            let r = best.sqrt();
            let extra = (x[i + d * lag] - x[best_j + d * lag]).abs();
            let grows = extra / r > r_tol;
            let escapes = (best + extra * extra).sqrt() / attractor > a_tol;
            if grows || escapes {
                false_count += 1;
            }
        }
        fractions.push(if tested == 0 { T::zero() } else { T::of_usize(false_count) / T::of_usize(tested) });
    }
    let accept = T::of(th.accept);
    let chosen = fractions.iter().position(|&f| f < accept).map_or(max_dim, |i| i + 1);
    Ok((chosen, fractions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{ami_lag, DEFAULT_AMI_BINS};
    use crate::signals::synth::{lorenz_x, LorenzParams};
    use crate::signals::SourceTag;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn sine_unfolds_in_two_dimensions() {
        let xs: Vec<f64> = (0..1024).map(|k| (2.0 * std::f64::consts::PI * k as f64 / 64.0).sin()).collect();
        let ts = TimeSeries::new(xs, 128.0, SourceTag::default()).unwrap();
        let (_, fr) = fnn_dim(&ts, 16, 4, FnnThresholds::default()).unwrap();
        assert!(fr[1] < 0.05, "{fr:?}");
    }

    #[test]
    fn white_noise_is_mostly_false_at_d1() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let ts = TimeSeries::new(xs, 128.0, SourceTag::default()).unwrap();
        let (_, fr) = fnn_dim(&ts, 1, 3, FnnThresholds::default()).unwrap();
        assert!(fr[0] > 0.5, "{fr:?}");
    }

    #[test]
    fn lorenz_needs_few_dimensions() {
        let ts = lorenz_x::<f64>(&LorenzParams { steps: 5000, ..Default::default() }).unwrap();
        let (lag, _) = ami_lag(&ts, 60, DEFAULT_AMI_BINS).unwrap();
        let (d, fr) = fnn_dim(&ts, lag, 8, FnnThresholds::default()).unwrap();
        assert!(d <= 5, "lag {lag} d {d} {fr:?}");
    }

    #[test]
    fn too_short() {
        let ts = TimeSeries::new(vec![0.0f64, 1.0, 0.5, 0.2], 1.0, SourceTag::default()).unwrap();
        assert!(matches!(fnn_dim(&ts, 2, 3, FnnThresholds::default()), Err(Error::Parameter(_))));
    }
}
