//! Deterministic synthetic signals.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{SourceTag, TimeSeries};

/// Lorenz system settings; the series is the x component sampled every `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub dt: f64,
    pub steps: usize,
    /// Integration steps discarded before recording.
    pub transient: usize,
    pub initial: [f64; 3],
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            dt: 0.01,
            steps: 5000,
            transient: 0,
            initial: [1.0, 1.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthKind {
    Sine { freq_hz: f64, amplitude: f64, phase: f64 },
    NoisySine { freq_hz: f64, amplitude: f64, noise_std: f64 },
    WhiteNoise { std: f64 },
    LorenzX(LorenzParams),
}

/// Generates `len` samples at `rate_hz` (the Lorenz kind uses `1/dt` and its
/// own step count instead).
pub fn synth<T: Scalar>(kind: &SynthKind, rate_hz: f64, len: usize, seed: u64) -> Result<TimeSeries<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let check_freq = |f: f64| {
        if !(f > 0.0 && f < rate_hz / 2.0) {
            Err(Error::param(format!("frequency {f} Hz outside (0, {})", rate_hz / 2.0)))
        } else {
            Ok(())
        }
    };
    if !(rate_hz > 0.0) {
        return Err(Error::param("sampling rate must be positive"));
    }
    let samples: Vec<f64> = match *kind {
        SynthKind::Sine { freq_hz, amplitude, phase } => {
            check_freq(freq_hz)?;
            (0..len)
                .map(|k| amplitude * (2.0 * PI * freq_hz * k as f64 / rate_hz + phase).sin())
                .collect()
        }
        SynthKind::NoisySine { freq_hz, amplitude, noise_std } => {
            check_freq(freq_hz)?;
            if !(noise_std >= 0.0) {
                return Err(Error::param("noise_std must be >= 0"));
            }
            let phase = rng.random::<f64>() * 2.0 * PI;
            (0..len)
                .map(|k| {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    amplitude * (2.0 * PI * freq_hz * k as f64 / rate_hz + phase).sin() + noise_std * n
                })
                .collect()
        }
        SynthKind::WhiteNoise { std } => {
            if !(std >= 0.0) {
                return Err(Error::param("std must be >= 0"));
            }
            (0..len).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); std * z }).collect()
        }
        SynthKind::LorenzX(p) => return lorenz_x(&p),
    };
    TimeSeries::new(samples.into_iter().map(T::of).collect(), T::of(rate_hz), SourceTag::default())
}

/// Lorenz x component integrated with classical fourth-order Runge-Kutta.
pub fn lorenz_x<T: Scalar>(p: &LorenzParams) -> Result<TimeSeries<T>> {
    if !(p.dt > 0.0) || p.steps < 2 {
        return Err(Error::param("Lorenz integration needs dt > 0 and >= 2 steps"));
    }
    let f = |s: [f64; 3]| {
        [
            p.sigma * (s[1] - s[0]),
            s[0] * (p.rho - s[2]) - s[1],
            s[0] * s[1] - p.beta * s[2],
        ]
    };
    let axpy = |a: [f64; 3], h: f64, b: [f64; 3]| [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]];
    let mut s = p.initial;
    let mut out = Vec::with_capacity(p.steps);
    for step in 0..(p.transient + p.steps) {
        if step >= p.transient {
            out.push(T::of(s[0]));
        }
        let k1 = f(s);
        let k2 = f(axpy(s, p.dt / 2.0, k1));
        let k3 = f(axpy(s, p.dt / 2.0, k2));
        let k4 = f(axpy(s, p.dt, k3));
        for i in 0..3 {
            s[i] += p.dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    TimeSeries::new(out, T::of(1.0 / p.dt), SourceTag::default())
}

/// Random-phase surrogate with the power spectrum of `samples` smoothed over
/// `2 * smooth_bins + 1` neighbouring bins (0 keeps the exact spectrum).
/// DC and Nyquist bins keep their original values.
pub fn phase_randomized<T: Scalar>(samples: &[T], smooth_bins: usize, seed: u64) -> Vec<T> {
    let n = samples.len();
    if n < 3 {
        return samples.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planner = FftPlanner::<f64>::new();
    let mut spec: Vec<Complex64> = samples.iter().map(|x| Complex64::new(x.as_f64(), 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut spec);

    let half = (n - 1) / 2; // bins 1..=half have distinct mirrors
    let power: Vec<f64> = spec[1..=half].iter().map(|c| c.norm_sqr()).collect();
    let smoothed: Vec<f64> = (0..half)
        .map(|i| {
            let lo = i.saturating_sub(smooth_bins);
            let hi = (i + smooth_bins).min(half - 1);
            power[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    for k in 1..=half {
        let phase = rng.random::<f64>() * 2.0 * PI;
        let c = Complex64::from_polar(smoothed[k - 1].sqrt(), phase);
        spec[k] = c;
        spec[n - k] = c.conj();
    }
    planner.plan_fft_inverse(n).process(&mut spec);
    spec.iter().map(|c| T::of(c.re / n as f64)).collect()
}
