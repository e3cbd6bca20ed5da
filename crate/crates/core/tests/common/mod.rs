//! Naive oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use topoeeg::baselines::NOISE_FLOOR;
use topoeeg::embedding::EmbeddingParams;
use topoeeg::signals::synth::{synth, SynthKind};

pub fn noise(len: usize, seed: u64) -> Vec<f64> {
    synth::<f64>(&SynthKind::WhiteNoise { std: 1.0 }, 128.0, len, seed).unwrap().samples().to_vec()
}

pub fn sine(len: usize) -> Vec<f64> {
    let k = SynthKind::Sine { freq_hz: 10.0, amplitude: 1.0, phase: 0.0 };
    synth::<f64>(&k, 128.0, len, 0).unwrap().samples().to_vec()
}

pub fn sigma(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

pub fn templates(xs: &[f64], len: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count).map(|i| xs[i..i + len].to_vec()).collect()
}

pub fn cheb(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn sampen_oracle(xs: &[f64], m: usize, r: f64) -> f64 {
    let n = xs.len() - m;
    let (tm, tm1) = (templates(xs, m, n), templates(xs, m + 1, n));
    let (mut a, mut b) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                b += f64::from(cheb(&tm[i], &tm[j]) <= r);
                a += f64::from(cheb(&tm1[i], &tm1[j]) <= r);
            }
        }
    }
    -(a / b).ln()
}

pub fn apen_oracle(xs: &[f64], m: usize, r: f64) -> f64 {
    let phi = |len: usize| {
        let n = xs.len() - len + 1;
        let t = templates(xs, len, n);
        let s: f64 = (0..n)
            .map(|i| ((0..n).filter(|&j| cheb(&t[i], &t[j]) <= r).count() as f64 / n as f64).ln())
            .sum();
        s / n as f64
    };
    phi(m) - phi(m + 1)
}

pub fn fuzzy_oracle(xs: &[f64], m: usize, r: f64, pow: f64) -> f64 {
    let count = xs.len() - m;
    let phi = |len: usize| {
        let t: Vec<Vec<f64>> = templates(xs, len, count)
            .into_iter()
            .map(|w| {
                let mu = w.iter().sum::<f64>() / len as f64;
                w.iter().map(|x| x - mu).collect()
            })
            .collect();
        let mut acc = 0.0;
        for i in 0..count {
            let mut s = 0.0;
            for j in 0..count {
                if j != i {
                    s += (-(cheb(&t[i], &t[j]) / r).powf(pow)).exp();
                }
            }
            acc += s / (count - 1) as f64;
        }
        acc / count as f64
    };
    phi(m).ln() - phi(m + 1).ln()
}

pub fn pairwise_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let s: f64 = v.iter().flat_map(|a| v.iter().map(move |b| (a - b) * (a - b))).sum();
    (s / (2.0 * n * n)).sqrt()
}

/// Poincare SD1/SD2 straight from the definition: rotate successive pairs
/// by 45 degrees, shift by the first value, population std of each axis.
pub fn poincare_oracle(xs: &[f64]) -> (f64, f64) {
    let h = 1.0 / 2f64.sqrt();
    let c = xs[0];
    let mut across = Vec::new();
    let mut along = Vec::new();
    for k in 1..xs.len() {
        across.push((xs[k] - xs[k - 1]) * h);
        along.push(((xs[k] - c) + (xs[k - 1] - c)) * h);
    }
    let sd = |v: &[f64]| {
        let c: Vec<f64> = v.iter().map(|x| x - v[0]).collect();
        sigma(&c)
    };
    (sd(&across), sd(&along))
}

/// Recurrence rate by counting close pairs of embedded points.
pub fn recurrence_oracle(xs: &[f64], e: EmbeddingParams, eps: f64) -> f64 {
    let n = xs.len() - e.span();
    let pt = |i: usize| -> Vec<f64> { (0..e.dim).map(|c| xs[i + c * e.lag]).collect() };
    let mut hits = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let d2: f64 = pt(i).iter().zip(pt(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            hits += usize::from(d2 <= eps * eps);
        }
    }
    hits as f64 / (n * (n - 1) / 2) as f64
}

pub fn lyapunov_oracle(xs: &[f64], e: EmbeddingParams, horizon: usize) -> f64 {
    let m = xs.len() - e.span();
    let pt = |i: usize| -> Vec<f64> { (0..e.dim).map(|c| xs[i + c * e.lag]).collect() };
    let dist = |i: usize, j: usize| -> f64 {
        pt(i).iter().zip(pt(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    };
    let usable = m - horizon;
    let floor = sigma(xs) * NOISE_FLOOR;
    let w = e.span().max(1);
    let nn: Vec<(usize, usize)> = (0..usable)
        .filter_map(|i| {
            (0..usable)
                .filter(|&j| i.abs_diff(j) > w && dist(i, j) > floor)
                .min_by(|&a, &b| dist(i, a).total_cmp(&dist(i, b)))
                .map(|j| (i, j))
        })
        .collect();
    let y: Vec<f64> = (0..=horizon)
        .map(|k| {
            let ls: Vec<f64> = nn.iter().map(|&(i, j)| dist(i + k, j + k)).filter(|&d| d > floor).map(f64::ln).collect();
            ls.iter().sum::<f64>() / ls.len() as f64
        })
        .collect();
    let xbar = horizon as f64 / 2.0;
    let ybar = y.iter().sum::<f64>() / y.len() as f64;
    let sxy: f64 = y.iter().enumerate().map(|(k, v)| (k as f64 - xbar) * (v - ybar)).sum();
    let sxx: f64 = (0..=horizon).map(|k| (k as f64 - xbar).powi(2)).sum();
    sxy / sxx
}

