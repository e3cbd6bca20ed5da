use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{Band, BandSet, BandTable, TimeSeries};

/// Order of the low-pass prototype; the band-pass has twice this order.
const PROTOTYPE_ORDER: usize = 2;

/// Impulse-response decay level that defines the padding length.
const DECAY_LEVEL: f64 = 1e-3;

/// Butterworth band-pass as a cascade of biquads, designed by bilinear
/// transform with pre-warped edges.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterworthBandpass {
    /// `[b0, b1, b2, a1, a2]` per section, `a0 = 1`.
    sections: Vec<[f64; 5]>,
    lo_hz: f64,
    hi_hz: f64,
    rate_hz: f64,
    pad_len: usize,
}

impl ButterworthBandpass {
    /// Fourth-order band-pass between `lo_hz` and `hi_hz`.
    pub fn design(lo_hz: f64, hi_hz: f64, rate_hz: f64) -> Result<Self> {
        let nyquist = rate_hz / 2.0;
        if !(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < nyquist) {
            return Err(Error::param(format!(
                "band-pass edges must satisfy 0 < lo < hi < {nyquist} Hz (got {lo_hz}..{hi_hz})"
            )));
        }
        let fs2 = 2.0 * rate_hz;
        let w_lo = fs2 * (PI * lo_hz / rate_hz).tan();
        let w_hi = fs2 * (PI * hi_hz / rate_hz).tan();
        let bw = w_hi - w_lo;
        let w0_sq = w_lo * w_hi;

        // Each upper-half-plane prototype pole maps to two band-pass poles;
        // reflecting them into the upper half plane gives one pole per
        // conjugate pair.
        let n = PROTOTYPE_ORDER;
        let mut poles = Vec::with_capacity(n);
        for k in 0..n / 2 {
            let theta = PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
            let p = Complex64::from_polar(1.0, theta) * (bw / 2.0);
            let disc = (p * p - w0_sq).sqrt();
            for s in [p + disc, p - disc] {
                poles.push(if s.im < 0.0 { s.conj() } else { s });
            }
        }

        let mut sections: Vec<[f64; 5]> = poles
            .iter()
            .map(|&s| {
                let z = (fs2 + s) / (fs2 - s);
                // Zeros at z = 1 and z = -1.
                [1.0, 0.0, -1.0, -2.0 * z.re, z.norm_sqr()]
            })
            .collect();

        let mut filt = Self { sections: Vec::new(), lo_hz, hi_hz, rate_hz, pad_len: 0 };
        // Unit gain at the centre frequency.
        let centre = (w0_sq.sqrt() / fs2).atan() * rate_hz / PI;
        filt.sections = sections.clone();
        let g = filt.response(centre);
        sections[0][0] /= g;
        sections[0][2] /= g;
        filt.sections = sections;
        let r_max = filt
            .sections
            .iter()
            .map(|s| s[4].sqrt())
            .fold(0.0, f64::max);
        filt.pad_len = (DECAY_LEVEL.ln() / r_max.ln()).ceil() as usize;
        Ok(filt)
    }

    pub fn edges(&self) -> (f64, f64) {
        (self.lo_hz, self.hi_hz)
    }

    /// Samples of reflection padding applied at each end.
    pub fn pad_len(&self) -> usize {
        self.pad_len
    }

    /// Single-pass magnitude response at `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / self.rate_hz;
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        self.sections
            .iter()
            .map(|s| ((s[0] + s[1] * z1 + s[2] * z2) / (1.0 + s[3] * z1 + s[4] * z2)).norm())
            .product()
    }

    /// Magnitude response of the forward-backward application.
    pub fn zero_phase_response(&self, freq_hz: f64) -> f64 {
        self.response(freq_hz).powi(2)
    }

    /// Steady-state section states for a unit-step input (transposed direct form II).
    fn step_states(&self) -> Vec<[f64; 2]> {
        let mut gain = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let (b0, b1, b2, a1, a2) = (s[0], s[1], s[2], s[3], s[4]);
                let y = gain * (b0 + b1 + b2) / (1.0 + a1 + a2);
                let z2 = gain * b2 - a2 * y;
                let z1 = gain * b1 - a1 * y + z2;
                gain = y;
                [z1, z2]
            })
            .collect()
    }

    fn run<T: Scalar>(&self, x: &mut [T], init: &[[f64; 2]]) {
        let x0 = x[0];
        for (s, zi) in self.sections.iter().zip(init) {
            let [b0, b1, b2, a1, a2] = s.map(T::of);
            let (mut z1, mut z2) = (T::of(zi[0]) * x0, T::of(zi[1]) * x0);
            for v in x.iter_mut() {
                let input = *v;
                let y = b0 * input + z1;
                z1 = b1 * input - a1 * y + z2;
                z2 = b2 * input - a2 * y;
                *v = y;
            }
        }
    }

    /// Zero-phase filtering: odd reflection padding, steady-state initial
    /// conditions, then forward and backward passes.
    pub fn filtfilt<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let n = x.len();
        if n < 2 {
            return x.to_vec();
        }
        let pad = self.pad_len.min(n - 1);
        let two = T::of(2.0);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| two * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| two * x[n - 1] - x[n - 1 - i]));

        let zi = self.step_states();
        self.run(&mut ext, &zi);
        ext.reverse();
        self.run(&mut ext, &zi);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Zero-phase fourth-order Butterworth band-pass of a series.
pub fn bandpass<T: Scalar>(ts: &TimeSeries<T>, lo_hz: f64, hi_hz: f64) -> Result<TimeSeries<T>> {
    let f = ButterworthBandpass::design(lo_hz, hi_hz, ts.rate_hz().as_f64())?;
    ts.with_samples(f.filtfilt(ts.samples()))
}

/// Minimum sampling rate accepted by [`band_decompose`].
pub const MIN_DECOMPOSE_RATE_HZ: f64 = 100.0;

/// Splits a series into the four rhythm bands of `table`.
pub fn band_decompose<T: Scalar>(ts: &TimeSeries<T>, table: &BandTable) -> Result<BandSet<T>> {
    let rate = ts.rate_hz().as_f64();
    if rate < MIN_DECOMPOSE_RATE_HZ {
        return Err(Error::param(format!(
            "band decomposition needs >= {MIN_DECOMPOSE_RATE_HZ} Hz sampling, got {rate}"
        )));
    }
    let [t, a, b, g] = Band::ALL.map(|band| {
        let (lo, hi) = table.edges(band);
        bandpass(ts, lo, hi)
    });
    BandSet::new([t?, a?, b?, g?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::SourceTag;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Analog Butterworth band-pass magnitude at the pre-warped frequency; the
    /// bilinear transform maps it exactly onto the digital response.
    fn oracle_response(lo: f64, hi: f64, rate: f64, f: f64) -> f64 {
        let warp = |x: f64| 2.0 * rate * (PI * x / rate).tan();
        let (wl, wh, w) = (warp(lo), warp(hi), warp(f));
        let x = (w * w - wl * wh) / (w * (wh - wl));
        1.0 / (1.0 + x.powi(2 * PROTOTYPE_ORDER as i32)).sqrt()
    }

    fn sine(freq: f64, rate: f64, len: usize) -> TimeSeries<f64> {
        let xs = (0..len).map(|k| (2.0 * PI * freq * k as f64 / rate).sin()).collect();
        TimeSeries::new(xs, rate, SourceTag::default()).unwrap()
    }

    fn rms(xs: &[f64]) -> f64 {
        (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt()
    }

    #[test]
    fn response_matches_analog_prototype() {
        for &(lo, hi) in &[(4.0, 8.0), (8.0, 13.0), (13.0, 30.0), (30.0, 45.0)] {
            let f = ButterworthBandpass::design(lo, hi, 128.0).unwrap();
            for k in 1..64 {
                let freq = k as f64;
                let got = f.response(freq);
                let want = oracle_response(lo, hi, 128.0, freq);
                assert!((got - want).abs() < 1e-9, "{lo}-{hi} @ {freq}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn passband_and_stopband_limits() {
        for &(lo, hi) in &[(4.0, 8.0), (8.0, 13.0), (13.0, 30.0), (30.0, 45.0)] {
            let f = ButterworthBandpass::design(lo, hi, 128.0).unwrap();
            let centre_db = 20.0 * f.zero_phase_response((lo * hi as f64).sqrt()).log10();
            assert!(centre_db.abs() <= 1.0, "{centre_db}");
            let below = 20.0 * f.zero_phase_response(lo / 2.0).log10();
            assert!(below <= -20.0, "{lo}-{hi}: {below} dB an octave below");
            if hi * 2.0 < 64.0 {
                let above = 20.0 * f.zero_phase_response(hi * 2.0).log10();
                assert!(above <= -20.0, "{lo}-{hi}: {above} dB an octave above");
            }
        }
    }

    #[test]
    fn ten_hz_sine_passes_alpha() {
        let ts = sine(10.0, 128.0, 128 * 8);
        let out = bandpass(&ts, 8.0, 13.0).unwrap();
        let ratio = rms(out.samples()) / rms(ts.samples());
        let expected = oracle_response(8.0, 13.0, 128.0, 10.0).powi(2);
        assert!(expected >= 0.90);
        assert!(ratio >= 0.90, "{ratio}");
        assert!((ratio - expected).abs() < 0.02, "{ratio} vs {expected}");
    }

    #[test]
    fn ten_hz_sine_blocked_by_gamma_band() {
        let ts = sine(10.0, 128.0, 128 * 8);
        let out = bandpass(&ts, 30.0, 45.0).unwrap();
        let ratio = rms(out.samples()) / rms(ts.samples());
        assert!(oracle_response(30.0, 45.0, 128.0, 10.0).powi(2) <= 0.05);
        assert!(ratio <= 0.05, "{ratio}");
    }

    #[test]
    fn zero_in_zero_out() {
        let ts = TimeSeries::new(vec![0.0f64; 300], 128.0, SourceTag::default()).unwrap();
        assert!(bandpass(&ts, 8.0, 13.0).unwrap().samples().iter().all(|&x| x == 0.0));
        let bands = band_decompose(&ts, &BandTable::default()).unwrap();
        for (_, b) in bands.iter() {
            assert!(b.samples().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
        let (a, b) = (1.7, -0.4);
        let f = ButterworthBandpass::design(8.0, 13.0, 128.0).unwrap();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let lhs = f.filtfilt(&combo);
        let fx = f.filtfilt(&x);
        let fy = f.filtfilt(&y);
        let scale = lhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for i in 0..500 {
            let rhs = a * fx[i] + b * fy[i];
            assert!((lhs[i] - rhs).abs() <= 1e-9 * scale, "{i}");
        }
    }

    #[test]
    fn band_energy_lands_in_the_right_band() {
        for (freq, band) in [(6.0, Band::Theta), (20.0, Band::Beta)] {
            let ts = sine(freq, 128.0, 128 * 10);
            let bands = band_decompose(&ts, &BandTable::default()).unwrap();
            let energies: Vec<f64> = bands.iter().map(|(_, s)| rms(s.samples())).collect();
            let best = (0..4).max_by(|&i, &j| energies[i].total_cmp(&energies[j])).unwrap();
            assert_eq!(best, band.index(), "{freq} Hz: {energies:?}");
        }
    }

    #[test]
    fn rejects_bad_edges_and_rates() {
        assert!(ButterworthBandpass::design(0.0, 10.0, 128.0).is_err());
        assert!(ButterworthBandpass::design(10.0, 8.0, 128.0).is_err());
        assert!(ButterworthBandpass::design(30.0, 64.0, 128.0).is_err());
        let ts = sine(10.0, 64.0, 256);
        assert!(band_decompose(&ts, &BandTable::default()).is_err());
    }

    #[test]
    fn zero_phase_keeps_peak_alignment() {
        let ts = sine(10.0, 128.0, 128 * 4);
        let out = bandpass(&ts, 8.0, 13.0).unwrap();
        // Cross-correlation at lag 0 beats lags +-1 for a zero-phase filter.
        let corr = |lag: isize| -> f64 {
            (200..300).map(|i| ts.samples()[i] * out.samples()[(i as isize + lag) as usize]).sum()
        };
        assert!(corr(0) > corr(1) && corr(0) > corr(-1));
    }
}
