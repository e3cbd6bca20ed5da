use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{std_dev, Scalar};

/// Match radius, either relative to the series' standard deviation or fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    SigmaFraction(f64),
    Absolute(f64),
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::SigmaFraction(0.2)
    }
}

impl Tolerance {
    /// Resolves to a radius. A sigma-relative radius of a constant series is
    /// an error; an absolute radius is always usable.
    pub fn radius<T: Scalar>(&self, xs: &[T]) -> Result<T> {
        match *self {
            Tolerance::SigmaFraction(f) => {
                if !(f > 0.0) || !f.is_finite() {
                    return Err(Error::param(format!("tolerance fraction {f} must be positive")));
                }
                let sd = std_dev(xs);
                if !(sd > T::zero()) {
                    return Err(Error::DegenerateInput("constant series has no sigma-relative tolerance".into()));
                }
                Ok(sd * T::of(f))
            }
            Tolerance::Absolute(r) => {
                if !(r >= 0.0) || !r.is_finite() {
                    return Err(Error::param(format!("tolerance {r} must be non-negative")));
                }
                Ok(T::of(r))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyParams {
    pub m: usize,
    pub r: Tolerance,
    /// Exponent of the fuzzy membership function.
    pub fuzzy_n: f64,
}

impl Default for EntropyParams {
    fn default() -> Self {
        Self { m: 2, r: Tolerance::default(), fuzzy_n: 2.0 }
    }
}

fn check_len(xs: &[impl Sized], m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::param("template length m must be >= 1"));
    }
    if xs.len() <= m + 1 {
        return Err(Error::param(format!("{} samples too short for template length {m}", xs.len())));
    }
    Ok(())
}

#[inline]
fn within<T: Scalar>(xs: &[T], i: usize, j: usize, len: usize, r: T) -> bool {
    (0..len).all(|k| (xs[i + k] - xs[j + k]).abs() <= r)
}

/// Sample entropy `-ln(A/B)`: `B` counts pairs of length-`m` templates within
/// `r` (Chebyshev), `A` the same pairs extended to `m + 1`. Both use the first
/// `N - m` templates and exclude self-matches.
pub fn sample_entropy<T: Scalar>(xs: &[T], p: &EntropyParams) -> Result<T> {
    check_len(xs, p.m)?;
    let r = p.r.radius(xs)?;
    let n = xs.len() - p.m;
    let (mut a, mut b) = (0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            if within(xs, i, j, p.m, r) {
                b += 1;
                if (xs[i + p.m] - xs[j + p.m]).abs() <= r {
                    a += 1;
                }
            }
        }
    }
    if a == 0 || b == 0 {
        return Err(Error::DegenerateInput(format!("no template matches of length {} (sample entropy undefined)", p.m + 1)));
    }
    Ok(-(T::of(a as f64) / T::of(b as f64)).ln())
}

fn apen_phi<T: Scalar>(xs: &[T], len: usize, r: T) -> T {
    let n = xs.len() - len + 1;
    let total = T::of_usize(n);
    let mut acc = T::zero();
    for i in 0..n {
        let c = (0..n).filter(|&j| within(xs, i, j, len, r)).count();
        acc += (T::of_usize(c) / total).ln();
    }
    acc / total
}

/// Approximate entropy `phi(m) - phi(m + 1)`, self-matches included.
pub fn approx_entropy<T: Scalar>(xs: &[T], p: &EntropyParams) -> Result<T> {
    check_len(xs, p.m)?;
    let r = p.r.radius(xs)?;
    Ok(apen_phi(xs, p.m, r) - apen_phi(xs, p.m + 1, r))
}

fn fuzzy_phi<T: Scalar>(xs: &[T], len: usize, count: usize, r: T, n: T) -> T {
    let templates: Vec<T> = (0..count)
        .flat_map(|i| {
            let w = &xs[i..i + len];
            let mu = w.iter().copied().sum::<T>() / T::of_usize(len);
            w.iter().map(move |&x| x - mu)
        })
        .collect();
    let row = |i: usize| &templates[i * len..(i + 1) * len];
    let mut acc = T::zero();
    for i in 0..count {
        let mut s = T::zero();
        for j in 0..count {
            if j == i {
                continue;
            }
            let d = row(i).iter().zip(row(j)).map(|(&a, &b)| (a - b).abs()).fold(T::zero(), T::max);
            s += membership(d, r, n);
        }
        acc += s / T::of_usize(count - 1);
    }
    acc / T::of_usize(count)
}

#[inline]
fn membership<T: Scalar>(d: T, r: T, n: T) -> T {
    if r > T::zero() {
        (-(d / r).powf(n)).exp()
    } else if d > T::zero() {
        T::zero()
    } else {
        T::one()
    }
}

/// Fuzzy entropy `ln phi(m) - ln phi(m + 1)` with membership
/// `exp(-(d / r)^n)` over baseline-removed templates (`N - m` of each length).
pub fn fuzzy_entropy<T: Scalar>(xs: &[T], p: &EntropyParams) -> Result<T> {
    check_len(xs, p.m)?;
    if !(p.fuzzy_n > 0.0) {
        return Err(Error::param(format!("fuzzy exponent {} must be positive", p.fuzzy_n)));
    }
    let r = p.r.radius(xs)?;
    let count = xs.len() - p.m;
    let n = T::of(p.fuzzy_n);
    let a = fuzzy_phi(xs, p.m, count, r, n);
    let b = fuzzy_phi(xs, p.m + 1, count, r, n);
    if !(a > T::zero() && b > T::zero()) {
        return Err(Error::DegenerateInput("fuzzy similarity vanished".into()));
    }
    Ok(a.ln() - b.ln())
}
