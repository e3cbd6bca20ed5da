use crate::embedding::{delay_embed_samples, EmbeddingParams};
use crate::error::Result;
use crate::scalar::Scalar;

use super::entropy::Tolerance;

/// Fraction of embedded point pairs `i < j` with Euclidean distance `<= eps`.
/// A sigma-relative `eps` of a constant series is 0, so identical points
/// still count as recurrent.
pub fn recurrence_rate<T: Scalar>(xs: &[T], p: EmbeddingParams, eps: Tolerance) -> Result<T> {
    let pc = delay_embed_samples(xs, p)?;
    let eps = match eps {
        Tolerance::SigmaFraction(_) if crate::scalar::std_dev(xs) == T::zero() => T::zero(),
        t => t.radius(xs)?,
    };
    let n = pc.len();
    if n < 2 {
        return Ok(T::one());
    }
    let eps2 = eps * eps;
    let mut hits = 0u64;
    for i in 0..n {
        let a = pc.point(i);
        for j in i + 1..n {
            let d2: T = a.iter().zip(pc.point(j)).map(|(&x, &y)| (x - y) * (x - y)).sum();
            if d2 <= eps2 {
                hits += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(T::of(hits as f64 / pairs))
}

/// SD1/SD2 of the return map `(x[n], x[n + 1])`: population standard
/// deviations across and along the identity line.
pub fn poincare_sd<T: Scalar>(xs: &[T]) -> Result<(T, T)> {
    if xs.len() < 2 {
        return Err(crate::error::Error::param("Poincare plot needs >= 2 samples"));
    }
    let h = T::SQRT_2().recip();
    let c = xs[0];
    let across: Vec<T> = xs.windows(2).map(|w| (w[1] - w[0]) * h).collect();
    let along: Vec<T> = xs.windows(2).map(|w| ((w[1] - c) + (w[0] - c)) * h).collect();
    Ok((spread(&across), spread(&along)))
}

/// Population standard deviation after subtracting the first value, so that
/// equal values give exactly zero.
fn spread<T: Scalar>(v: &[T]) -> T {
    let c: Vec<T> = v.iter().map(|&x| x - v[0]).collect();
    crate::scalar::std_dev(&c)
}
