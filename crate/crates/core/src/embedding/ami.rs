use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signals::TimeSeries;

pub const DEFAULT_AMI_BINS: usize = 16;

/// Average mutual information (nats) between `x[i]` and `x[i + lag]` for
/// lags `1..=max_lag`, from equal-width histograms over the observed range.
pub fn ami_curve<T: Scalar>(samples: &[T], max_lag: usize, bins: usize) -> Result<Vec<T>> {
    let n = samples.len();
    if bins < 2 {
        return Err(Error::param(format!("AMI needs >= 2 bins, got {bins}")));
    }
    if max_lag == 0 || 2 * max_lag >= n {
        return Err(Error::param(format!("max_lag {max_lag} must be in 1..{}", n.div_ceil(2))));
    }
    let lo = samples.iter().copied().fold(T::infinity(), T::min);
    let hi = samples.iter().copied().fold(T::neg_infinity(), T::max);
    if !(hi > lo) {
        return Err(Error::DegenerateInput("constant series has zero-entropy histogram".into()));
    }
    let (nb, range) = (T::of_usize(bins), hi - lo);
    let bin_of: Vec<usize> = samples
        .iter()
        .map(|&x| ((x - lo) * nb / range).to_usize().unwrap_or(0).min(bins - 1))
        .collect();

    let mut joint = vec![0u32; bins * bins];
    let mut px = vec![0u32; bins];
    let mut py = vec![0u32; bins];
    let curve = (1..=max_lag)
        .map(|lag| {
            joint.iter_mut().for_each(|c| *c = 0);
            px.iter_mut().for_each(|c| *c = 0);
            py.iter_mut().for_each(|c| *c = 0);
            let pairs = n - lag;
            for i in 0..pairs {
                let (a, b) = (bin_of[i], bin_of[i + lag]);
                joint[a * bins + b] += 1;
                px[a] += 1;
                py[b] += 1;
            }
            let total = T::of_usize(pairs);
            let mut mi = T::zero();
            for a in 0..bins {
                for b in 0..bins {
                    let c = joint[a * bins + b];
                    if c > 0 {
                        let c = T::of(c as f64);
                        let ratio = c * total / (T::of(px[a] as f64) * T::of(py[b] as f64));
                        mi += c / total * ratio.ln();
                    }
                }
            }
            mi
        })
        .collect();
    Ok(curve)
}

/// Lag at the first local minimum of the AMI curve (global minimum if the
/// curve has no interior local minimum), plus the curve itself.
pub fn ami_lag<T: Scalar>(ts: &TimeSeries<T>, max_lag: usize, bins: usize) -> Result<(usize, Vec<T>)> {
    let curve = ami_curve(ts.samples(), max_lag, bins)?;
    let local = (1..curve.len().saturating_sub(1)).find(|&i| curve[i] < curve[i - 1] && curve[i] <= curve[i + 1]);
    let idx = local.unwrap_or_else(|| {
        curve
            .iter()
            .enumerate()
            .fold((0, T::infinity()), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) })
            .0
    });
    Ok((idx + 1, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::SourceTag;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(xs: Vec<f64>) -> TimeSeries<f64> {
        TimeSeries::new(xs, 128.0, SourceTag::default()).unwrap()
    }

    #[test]
    fn uniform_noise_has_small_ami() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let (_, curve) = ami_lag(&series(xs), 20, DEFAULT_AMI_BINS).unwrap();
        // Bias of the plug-in estimator is about (bins-1)^2 / (2N) = 0.011 nats.
        assert!(curve.iter().all(|&v| v < 0.05), "{curve:?}");
    }

    /// Reference values from an independent numpy histogram estimator.
    /// Equal-width binning of an exact sine makes the curve jagged: the first
    /// local minimum is at lag 2 and the broad minimum spans the quarter period.
    #[test]
    fn sine_curve_matches_reference() {
        let xs: Vec<f64> = (0..4096).map(|k| (2.0 * std::f64::consts::PI * k as f64 / 128.0).sin()).collect();
        let (lag, curve) = ami_lag(&series(xs), 60, DEFAULT_AMI_BINS).unwrap();
        for (l, want) in [
            (1, 1.987013949310205),
            (2, 1.8187817668965587),
            (3, 1.8223419633473892),
            (26, 1.205058734577239),
            (32, 1.3335608898786175),
        ] {
            assert!((curve[l - 1] - want).abs() < 1e-9, "lag {l}: {}", curve[l - 1]);
        }
        assert_eq!(lag, 2);
        let global = (0..curve.len()).min_by(|&a, &b| curve[a].total_cmp(&curve[b])).unwrap() + 1;
        assert!((26..=38).contains(&global), "{global}");
    }

    #[test]
    fn constant_series_is_degenerate() {
        let err = ami_lag(&series(vec![3.0; 100]), 10, 16).unwrap_err();
        assert!(matches!(err, Error::DegenerateInput(_)));
    }

    #[test]
    fn bad_parameters() {
        let ts = series((0..100).map(f64::from).collect());
        assert!(ami_lag(&ts, 50, 16).is_err());
        assert!(ami_lag(&ts, 10, 1).is_err());
    }

    #[test]
    fn time_reversal_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..2000)
            .map(|k| (k as f64 * 0.21).sin() + 0.3 * rng.random::<f64>())
            .collect();
        let mut rev = xs.clone();
        rev.reverse();
        let a = ami_curve(&xs, 40, 16).unwrap();
        let b = ami_curve(&rev, 40, 16).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
        }
    }
}
