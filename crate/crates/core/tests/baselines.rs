use proptest::prelude::*;
use topoeeg::baselines::*;
use topoeeg::embedding::EmbeddingParams;
use topoeeg::signals::synth::{lorenz_x, LorenzParams};
use topoeeg::Error;

mod common;
use common::*;

fn p() -> EntropyParams {
    EntropyParams::default()
}

#[test]
fn entropy_family_matches_oracles_on_200_samples() {
    for seed in 0..4 {
        let xs = noise(200, seed);
        let r = 0.2 * sigma(&xs);
        assert_eq!(sample_entropy(&xs, &p()).unwrap(), sampen_oracle(&xs, 2, r));
        assert_eq!(approx_entropy(&xs, &p()).unwrap(), apen_oracle(&xs, 2, r));
        assert_eq!(fuzzy_entropy(&xs, &p()).unwrap(), fuzzy_oracle(&xs, 2, r, 2.0));
    }
}

#[test]
fn alternating_series_has_zero_sample_entropy() {
    let xs: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
    assert_eq!(sample_entropy(&xs, &p()).unwrap(), 0.0);
}

#[test]
fn white_noise_sample_entropy_range() {
    let v = sample_entropy(&noise(1000, 7), &p()).unwrap();
    assert!((1.5..=3.0).contains(&v), "{v}");
}

#[test]
fn constant_series() {
    let xs = vec![3.0f64; 100];
    for f in [sample_entropy::<f64>, approx_entropy, fuzzy_entropy] {
        assert!(matches!(f(&xs, &p()), Err(Error::DegenerateInput(_))));
    }
    let abs = EntropyParams { r: Tolerance::Absolute(0.1), ..p() };
    assert_eq!(approx_entropy(&xs, &abs).unwrap(), 0.0);
    assert_eq!(fuzzy_entropy(&xs, &abs).unwrap(), 0.0);
    assert_eq!(sample_entropy(&xs, &abs).unwrap(), 0.0);
}

#[test]
fn sine_is_more_regular_than_noise() {
    let s = approx_entropy(&sine(1000), &p()).unwrap();
    let n = approx_entropy(&noise(1000, 3), &p()).unwrap();
    assert!(s < n, "{s} vs {n}");
    let ramp: Vec<f64> = (0..300).map(|i| i as f64 + 0.3 * noise(300, 1)[i]).collect();
    assert!(fuzzy_entropy(&ramp, &p()).unwrap().is_finite());
}

#[test]
fn short_input_rejected() {
    assert!(matches!(sample_entropy(&[1.0f64, 2.0, 3.0], &p()), Err(Error::Parameter(_))));
}

#[test]
fn recurrence_cases() {
    let e = EmbeddingParams::new(2, 1).unwrap();
    assert_eq!(recurrence_rate(&[2.0f64; 50], e, Tolerance::default()).unwrap(), 1.0);
    let mut two = vec![0.0f64; 50];
    two.extend(vec![100.0; 50]);
    let rr = recurrence_rate(&two, e, Tolerance::Absolute(1.0)).unwrap();
    assert!((rr - 0.5).abs() < 0.02, "{rr}");
    let ramp: Vec<f64> = (0..50).map(f64::from).collect();
    assert_eq!(recurrence_rate(&ramp, e, Tolerance::Absolute(0.5)).unwrap(), 0.0);
}

#[test]
fn recurrence_matches_pair_count() {
    let xs = noise(200, 11);
    let e = EmbeddingParams::new(3, 2).unwrap();
    let eps = 0.2 * sigma(&xs);
    let pts: Vec<[f64; 3]> = (0..196).map(|k| [xs[k], xs[k + 2], xs[k + 4]]).collect();
    let mut hits = 0usize;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d2: f64 = (0..3).map(|c| (pts[i][c] - pts[j][c]) * (pts[i][c] - pts[j][c])).sum();
            hits += usize::from(d2 <= eps * eps);
        }
    }
    let pairs = pts.len() * (pts.len() - 1) / 2;
    assert_eq!(recurrence_rate(&xs, e, Tolerance::default()).unwrap(), hits as f64 / pairs as f64);
}

#[test]
fn poincare_cases() {
    assert_eq!(poincare_sd(&[1.5f64; 20]).unwrap(), (0.0, 0.0));
    let ramp: Vec<f64> = (0..64).map(|i| 0.5 * i as f64).collect();
    assert_eq!(poincare_sd(&ramp).unwrap().0, 0.0);
    let xs = noise(200, 5);
    let (sd1, sd2) = poincare_sd(&xs).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let d: Vec<f64> = xs.windows(2).map(|w| (w[1] - w[0]) * h).collect();
    let s: Vec<f64> = xs.windows(2).map(|w| (w[1] + w[0]) * h).collect();
    assert!((sd1 - pairwise_sd(&d)).abs() < 1e-12);
    assert!((sd2 - pairwise_sd(&s)).abs() < 1e-12);
    assert!(sd1 > 0.0 && sd2 > 0.0);
}

#[test]
fn lyapunov_matches_oracle() {
    let xs = noise(200, 9);
    let e = EmbeddingParams::new(3, 2).unwrap();
    let got = lyapunov_largest(&xs, e, &LyapunovParams::default()).unwrap();
    assert_eq!(got, lyapunov_oracle(&xs, e, 10));
}

#[test]
fn lyapunov_sine_and_lorenz() {
    let e = EmbeddingParams::new(3, 3).unwrap();
    let s = lyapunov_largest(&sine(1000), e, &LyapunovParams::default()).unwrap();
    assert!(s <= 0.01, "sine {s}");
    let lp = LorenzParams { steps: 3000, transient: 1000, ..LorenzParams::default() };
    let lz = lorenz_x::<f64>(&lp).unwrap();
    let e = EmbeddingParams::new(3, 10).unwrap();
    let l = lyapunov_largest(lz.samples(), e, &LyapunovParams { theiler: Some(50), horizon: 30 }).unwrap();
    assert!(l > 0.0, "lorenz {l}");
    assert!(matches!(lyapunov_largest(&[1.0f64; 100], e, &LyapunovParams::default()), Err(Error::DegenerateInput(_))));
}

#[test]
fn descriptor_vector_layout() {
    let xs = noise(256, 2);
    let v = descriptor_values(&xs, &Descriptor::ALL, &BaselineParams::default()).unwrap();
    assert_eq!(v.len(), 7);
    assert!(v.iter().all(|x| x.is_finite()));
    let labels: usize = Descriptor::ALL.iter().map(|d| d.labels().len()).sum();
    assert_eq!(labels, 7);
    assert_eq!(Descriptor::parse("ApEn").unwrap(), Descriptor::ApproxEntropy);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn shift_and_scale_invariance(
        ints in prop::collection::vec(-40i32..40, 120),
        shift in -1000i32..1000,
        scale_exp in -3i32..4,
    ) {
        let xs: Vec<f64> = ints.iter().map(|&i| f64::from(i)).collect();
        prop_assume!(sigma(&xs) > 0.0);
        let shifted: Vec<f64> = xs.iter().map(|x| x + f64::from(shift)).collect();
        let scaled: Vec<f64> = xs.iter().map(|x| x * 2f64.powi(scale_exp)).collect();
        let par = BaselineParams::default();
        let set = [Descriptor::SampleEntropy, Descriptor::ApproxEntropy, Descriptor::FuzzyEntropy];
        let base = descriptor_values(&xs, &set, &par);
        if let Ok(base) = base {
            for other in [&shifted, &scaled] {
                let v = descriptor_values(other, &set, &par).unwrap();
                for (a, b) in base.iter().zip(&v) {
                    prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{} vs {}", a, b);
                }
            }
        }
        let rest = [Descriptor::RecurrenceRate, Descriptor::Poincare, Descriptor::Lyapunov];
        let a = descriptor_values(&xs, &rest, &par).unwrap();
        let b = descriptor_values(&shifted, &rest, &par).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{} vs {}", x, y);
        }
    }
}

#[test]
fn every_descriptor_matches_its_oracle_exactly() {
    let e = EmbeddingParams::new(3, 2).unwrap();
    for seed in 20..24 {
        let xs = noise(200, seed);
        assert_eq!(poincare_sd(&xs).unwrap(), poincare_oracle(&xs));
        assert_eq!(recurrence_rate(&xs, e, Tolerance::default()).unwrap(), recurrence_oracle(&xs, e, 0.2 * sigma(&xs)));
        assert_eq!(lyapunov_largest(&xs, e, &LyapunovParams::default()).unwrap(), lyapunov_oracle(&xs, e, 10));
    }
}
