//! Reference implementations shared by the integration tests.

#![allow(dead_code)]

use mer_core::seed;
use mer_core::stats::{bootstrap_mean_ci, Alternative, HolmResult};
use rand::Rng;
use rand_distr::StandardNormal;

/// Direct O(N²) sample entropy.
pub fn sampen_oracle(x: &[f64], m: usize, r: f64) -> (u64, u64) {
    let n = x.len();
    let matches = |i: usize, j: usize, len: usize| (0..len).all(|k| (x[i + k] - x[j + k]).abs() <= r);
    let (mut a, mut b) = (0, 0);
    for i in 0..n - m {
        for j in i + 1..n - m {
            if matches(i, j, m) {
                b += 1;
                if matches(i, j, m + 1) {
                    a += 1;
                }
            }
        }
    }
    (a, b)
}

/// Direct evaluation of Phi^m - Phi^{m+1}.
pub fn apen_oracle(x: &[f64], m: usize, r: f64) -> f64 {
    let phi = |len: usize| {
        let count = x.len() - len + 1;
        (0..count)
            .map(|i| {
                let c = (0..count)
                    .filter(|&j| (0..len).all(|k| (x[i + k] - x[j + k]).abs() <= r))
                    .count();
                (c as f64 / count as f64).ln()
            })
            .sum::<f64>()
            / count as f64
    };
    phi(m) - phi(m + 1)
}

/// Signed-rank p-value by walking all `2^n` sign vectors.
pub fn wilcoxon_enumerated_p(ranks: &[f64], w_plus: f64, alt: Alternative) -> f64 {
    let n = ranks.len();
    let doubled: Vec<i64> = ranks.iter().map(|r| (2.0 * r).round() as i64).collect();
    let total: i64 = doubled.iter().sum();
    let obs = (2.0 * w_plus).round() as i64;
    let mut hits = 0u64;
    for signs in 0u32..(1 << n) {
        let s: i64 = (0..n).filter(|&i| signs >> i & 1 == 1).map(|i| doubled[i]).sum();
        let hit = match alt {
            Alternative::TwoSided => (2 * s - total).abs() >= (2 * obs - total).abs(),
            Alternative::Greater => s >= obs,
            Alternative::Less => s <= obs,
        };
        hits += hit as u64;
    }
    hits as f64 / (1u64 << n) as f64
}

/// Holm output: bounded by [p, 1], order-preserving, monotone rejections.
pub fn check_holm_properties(p: &[f64], h: &HolmResult) {
    for i in 0..p.len() {
        assert!(h.corrected[i] >= p[i] && h.corrected[i] <= 1.0, "{p:?} -> {:?}", h.corrected);
        for j in 0..p.len() {
            if p[i] <= p[j] {
                assert!(h.corrected[i] <= h.corrected[j], "{p:?} -> {:?}", h.corrected);
                if h.reject[j] {
                    assert!(h.reject[i], "{p:?}");
                }
            }
        }
    }
}

/// Share of `trials` 95% percentile intervals for the mean of `n` standard
/// normal draws that contain 0.
pub fn bootstrap_coverage(trials: usize, n: usize, resamples: usize, seed_value: u64) -> f64 {
    let mut rng = seed::rng(seed_value);
    let mut covered = 0;
    for t in 0..trials {
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let ci = bootstrap_mean_ci(&x, resamples, 0.95, seed::derive_seed(seed_value, &[t as u64])).unwrap();
        covered += (ci.lo <= 0.0 && 0.0 <= ci.hi) as usize;
    }
    covered as f64 / trials as f64
}
