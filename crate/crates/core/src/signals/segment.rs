use crate::error::{Error, Result};
use crate::scalar::{mean, std_dev, Scalar};

use super::{Segment, TimeSeries};

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// `(window_len, stride)` in samples for a window of `window_s` seconds.
pub fn window_geometry(window_s: f64, overlap_frac: f64, rate_hz: f64) -> Result<(usize, usize)> {
    if !(0.0..1.0).contains(&overlap_frac) {
        return Err(Error::param(format!("overlap {overlap_frac} must be in [0, 1)")));
    }
    if !(window_s > 0.0) || !window_s.is_finite() {
        return Err(Error::param(format!("window length {window_s} s must be positive")));
    }
    let window_len = round_half_up(window_s * rate_hz);
    if window_len == 0 {
        return Err(Error::param("window shorter than one sample"));
    }
    let stride = round_half_up(window_len as f64 * (1.0 - overlap_frac));
    if stride == 0 {
        return Err(Error::param(format!("overlap {overlap_frac} leaves a zero stride")));
    }
    Ok((window_len, stride))
}

/// Sliding windows in temporal order. Trailing samples that do not fill a
/// whole window are dropped.
pub fn segment<T: Scalar>(ts: &TimeSeries<T>, window_s: f64, overlap_frac: f64) -> Result<Vec<Segment<T>>> {
    let (window_len, stride) = window_geometry(window_s, overlap_frac, ts.rate_hz().as_f64())?;
    let w = ts.len();
    if window_len > w {
        return Err(Error::EmptyResult(format!(
            "window of {window_len} samples longer than series of {w} ({})",
            ts.meta()
        )));
    }
    let count = (w - window_len) / stride + 1;
    Ok((0..count)
        .map(|i| {
            let start = i * stride;
            Segment {
                band: None,
                samples: ts.samples()[start..start + window_len].to_vec(),
                start_index: start,
                window_len,
                meta: ts.meta().clone(),
            }
        })
        .collect())
}

/// Per-segment standardisation to zero mean and unit variance; constant
/// segments are only centred.
pub fn zscore<T: Scalar>(seg: &mut Segment<T>) {
    let m = mean(&seg.samples);
    let s = std_dev(&seg.samples);
    for x in seg.samples.iter_mut() {
        *x -= m;
        if s > T::zero() {
            *x /= s;
        }
    }
}
