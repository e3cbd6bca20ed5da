use crate::error::{Error, Result};
use crate::learn::derive_seed;
use crate::signals::io::{Matrix, Recording};
use crate::signals::synth::{phase_randomized, synth, SynthKind};

use super::config::SyntheticSpec;

/// Label score for a set class bit; clear bits score 2.
pub const HIGH_SCORE: f64 = 8.0;
pub const LOW_SCORE: f64 = 2.0;

pub fn channel_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("ch{i:02}")).collect()
}

/// One recording per (subject, class, trial), subjects outermost. Every
/// channel gets its own noise stream.
pub fn synthetic_recordings(spec: &SyntheticSpec, seed: u64) -> Result<Vec<Recording>> {
    let len = (spec.trial_s * spec.rate_hz).round() as usize;
    if len < 3 {
        return Err(Error::param(format!("synthetic trial of {len} samples is too short")));
    }
    let smooth_bins = (spec.smooth_hz * len as f64 / spec.rate_hz).round() as usize;
    let names = channel_names(spec.channels);
    let mut out = Vec::with_capacity(spec.subjects * spec.classes * spec.trials_per_class);
    let mut unit = 0u64;
    for s in 0..spec.subjects {
        for class in 0..spec.classes {
            let freq_hz = if class & 2 != 0 { spec.alt_freq_hz } else { spec.freq_hz };
            let amplitude = if class & 4 != 0 { 2.0 * spec.amplitude } else { spec.amplitude };
            let kind = SynthKind::NoisySine { freq_hz, amplitude, noise_std: spec.noise_std };
            for t in 0..spec.trials_per_class {
                let mut data = Vec::with_capacity(spec.channels * len);
                for _ in 0..spec.channels {
                    let x = synth::<f64>(&kind, spec.rate_hz, len, derive_seed(seed, 2 * unit))?.into_samples();
                    let x = if class & 1 != 0 { phase_randomized(&x, smooth_bins, derive_seed(seed, 2 * unit + 1)) } else { x };
                    data.extend(x.into_iter().map(|v| v as f32));
                    unit += 1;
                }
                let mut rec = Recording::new(
                    names.clone(),
                    spec.rate_hz,
                    format!("s{:02}", s + 1),
                    format!("c{class}-t{:02}", t + 1),
                    Matrix::new(spec.channels, len, data)?,
                )?;
                for (bit, key) in ["valence", "arousal", "dominance"].into_iter().enumerate() {
                    let score = if class >> bit & 1 != 0 { HIGH_SCORE } else { LOW_SCORE };
                    rec.labels.insert(key.to_string(), score);
                }
                out.push(rec);
            }
        }
    }
    Ok(out)
}
