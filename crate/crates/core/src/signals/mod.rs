//! Time series ingestion, band-pass filtering, band decomposition,
//! segmentation and synthetic signal generation.

mod filter;
pub mod io;
mod segment;
pub mod synth;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use filter::{band_decompose, bandpass, ButterworthBandpass};
pub use segment::{segment, window_geometry, zscore};

/// Where a series came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceTag {
    pub subject: String,
    pub trial: String,
    pub channel: String,
}

impl SourceTag {
    pub fn new(subject: impl Into<String>, trial: impl Into<String>, channel: impl Into<String>) -> Self {
        Self { subject: subject.into(), trial: trial.into(), channel: channel.into() }
    }
}

impl std::fmt::Display for SourceTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "subject {}, trial {}, channel {}", self.subject, self.trial, self.channel)
    }
}

/// A uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    samples: Vec<T>,
    rate_hz: T,
    meta: SourceTag,
}

impl<T: Scalar> TimeSeries<T> {
    /// Requires at least two finite samples and a positive rate.
    pub fn new(samples: Vec<T>, rate_hz: T, meta: SourceTag) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::param(format!("time series needs >= 2 samples, got {}", samples.len())));
        }
        if !(rate_hz > T::zero()) || !rate_hz.is_finite() {
            return Err(Error::param(format!("sampling rate {rate_hz} must be positive")));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::param(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, rate_hz, meta })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn rate_hz(&self) -> T {
        self.rate_hz
    }

    pub fn meta(&self) -> &SourceTag {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> T {
        T::of_usize(self.samples.len()) / self.rate_hz
    }

    /// Same rate and provenance, new samples (which must be finite).
    pub fn with_samples(&self, samples: Vec<T>) -> Result<Self> {
        Self::new(samples, self.rate_hz, self.meta.clone())
    }
}

/// The four analysed rhythm bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Theta,
    Alpha,
    Beta,
    Gamma,
}

impl Band {
    pub const ALL: [Band; 4] = [Band::Theta, Band::Alpha, Band::Beta, Band::Gamma];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Band::Theta => "theta",
            Band::Alpha => "alpha",
            Band::Beta => "beta",
            Band::Gamma => "gamma",
        }
    }

    pub fn parse(s: &str) -> Result<Band> {
        match s.to_ascii_lowercase().as_str() {
            "theta" | "θ" => Ok(Band::Theta),
            "alpha" | "α" => Ok(Band::Alpha),
            "beta" | "β" => Ok(Band::Beta),
            "gamma" | "γ" => Ok(Band::Gamma),
            other => Err(Error::param(format!("unknown band `{other}`"))),
        }
    }
}

impl std::fmt::Display for Band {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Pass-band edges in Hz for each rhythm band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandTable {
    pub theta: [f64; 2],
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub gamma: [f64; 2],
}

impl Default for BandTable {
    fn default() -> Self {
        Self { theta: [4.0, 8.0], alpha: [8.0, 13.0], beta: [13.0, 30.0], gamma: [30.0, 45.0] }
    }
}

impl BandTable {
    pub fn edges(&self, band: Band) -> (f64, f64) {
        let e = match band {
            Band::Theta => self.theta,
            Band::Alpha => self.alpha,
            Band::Beta => self.beta,
            Band::Gamma => self.gamma,
        };
        (e[0], e[1])
    }

    /// Highest upper edge over all bands.
    pub fn max_edge(&self) -> f64 {
        Band::ALL.iter().map(|&b| self.edges(b).1).fold(0.0, f64::max)
    }
}

/// One filtered copy of a series per rhythm band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSet<T> {
    bands: [TimeSeries<T>; 4],
}

impl<T: Scalar> BandSet<T> {
    /// The four series must share length and rate; order is theta, alpha, beta, gamma.
    pub fn new(bands: [TimeSeries<T>; 4]) -> Result<Self> {
        let (len, rate) = (bands[0].len(), bands[0].rate_hz());
        if bands.iter().any(|b| b.len() != len || b.rate_hz() != rate) {
            return Err(Error::param("band series must share length and rate"));
        }
        Ok(Self { bands })
    }

    pub fn get(&self, band: Band) -> &TimeSeries<T> {
        &self.bands[band.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Band, &TimeSeries<T>)> {
        Band::ALL.iter().map(move |&b| (b, &self.bands[b.index()]))
    }
}

/// A window cut from a (possibly band-filtered) series.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<T> {
    pub band: Option<Band>,
    pub samples: Vec<T>,
    pub start_index: usize,
    pub window_len: usize,
    pub meta: SourceTag,
}

impl<T: Scalar> Segment<T> {
    /// A whole sample vector as one segment starting at 0.
    pub fn from_samples(samples: Vec<T>) -> Self {
        let window_len = samples.len();
        Self { band: None, samples, start_index: 0, window_len, meta: SourceTag::default() }
    }
}
