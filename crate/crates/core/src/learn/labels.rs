use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affect dimensions in bit order: valence is bit 0, arousal bit 1,
/// dominance bit 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffectDim {
    Valence,
    Arousal,
    Dominance,
}

impl AffectDim {
    pub const ALL: [AffectDim; 3] = [AffectDim::Valence, AffectDim::Arousal, AffectDim::Dominance];

    pub fn letter(self) -> char {
        match self {
            AffectDim::Valence => 'V',
            AffectDim::Arousal => 'A',
            AffectDim::Dominance => 'D',
        }
    }
}

/// High iff the score is strictly above the threshold.
pub fn binarize(score: f64, threshold: f64) -> bool {
    score > threshold
}

/// Bit-packed class over the first `scores.len()` dimensions (V, A, D).
pub fn composite_class(scores: &[f64], threshold: f64) -> Result<usize> {
    if scores.is_empty() || scores.len() > 3 {
        return Err(Error::param(format!("expected 1 to 3 affect scores, got {}", scores.len())));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::DegenerateInput("non-finite affect score".into()));
    }
    Ok(scores.iter().enumerate().map(|(i, &s)| usize::from(binarize(s, threshold)) << i).sum())
}

/// Name such as `LV-HA-LD` for a class packed over `dims` dimensions.
pub fn class_name(class: usize, dims: usize) -> String {
    AffectDim::ALL[..dims.min(3)]
        .iter()
        .enumerate()
        .map(|(i, d)| format!("{}{}", if class >> i & 1 == 1 { 'H' } else { 'L' }, d.letter()))
        .collect::<Vec<_>>()
        .join("-")
}
