//! Classical nonlinear descriptors used as comparison features.

mod entropy;
mod lyapunov;
mod recurrence;

pub use entropy::{approx_entropy, fuzzy_entropy, sample_entropy, EntropyParams, Tolerance};
pub use lyapunov::{divergence_curve, lyapunov_largest, LyapunovParams, NOISE_FLOOR};
pub use recurrence::{poincare_sd, recurrence_rate};

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Descriptor {
    SampleEntropy,
    ApproxEntropy,
    FuzzyEntropy,
    RecurrenceRate,
    /// Yields two values, SD1 then SD2.
    Poincare,
    Lyapunov,
}

impl Descriptor {
    pub const ALL: [Descriptor; 6] = [
        Descriptor::SampleEntropy,
        Descriptor::ApproxEntropy,
        Descriptor::FuzzyEntropy,
        Descriptor::RecurrenceRate,
        Descriptor::Poincare,
        Descriptor::Lyapunov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Descriptor::SampleEntropy => "sampen",
            Descriptor::ApproxEntropy => "apen",
            Descriptor::FuzzyEntropy => "fuzzyen",
            Descriptor::RecurrenceRate => "rr",
            Descriptor::Poincare => "poincare",
            Descriptor::Lyapunov => "lyapunov",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(format!("unknown descriptor {s:?}")))
    }

    /// Column names this descriptor contributes.
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Descriptor::Poincare => &["sd1", "sd2"],
            Descriptor::SampleEntropy => &["sampen"],
            Descriptor::ApproxEntropy => &["apen"],
            Descriptor::FuzzyEntropy => &["fuzzyen"],
            Descriptor::RecurrenceRate => &["rr"],
            Descriptor::Lyapunov => &["lyapunov"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineParams {
    pub entropy: EntropyParams,
    pub embedding: EmbeddingParams,
    pub recurrence_eps: Tolerance,
    pub lyapunov: LyapunovParams,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            entropy: EntropyParams::default(),
            embedding: EmbeddingParams { dim: 3, lag: 2 },
            recurrence_eps: Tolerance::default(),
            lyapunov: LyapunovParams::default(),
        }
    }
}

/// Values of the selected descriptors for one segment, in the given order.
pub fn descriptor_values<T: Scalar>(xs: &[T], set: &[Descriptor], p: &BaselineParams) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(set.len() + 1);
    for &d in set {
        match d {
            Descriptor::SampleEntropy => out.push(sample_entropy(xs, &p.entropy)?),
            Descriptor::ApproxEntropy => out.push(approx_entropy(xs, &p.entropy)?),
            Descriptor::FuzzyEntropy => out.push(fuzzy_entropy(xs, &p.entropy)?),
            Descriptor::RecurrenceRate => out.push(recurrence_rate(xs, p.embedding, p.recurrence_eps)?),
            Descriptor::Poincare => {
                let (a, b) = poincare_sd(xs)?;
                out.extend([a, b]);
            }
            Descriptor::Lyapunov => out.push(lyapunov_largest(xs, p.embedding, &p.lyapunov)?),
        }
    }
    if let Some(bad) = out.iter().find(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput(format!("descriptor produced {bad}")));
    }
    Ok(out)
}
