//! Paired Wilcoxon signed-rank test, Holm step-down correction and
//! percentile bootstrap intervals.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("all paired differences are zero")]
    AllZero,
    #[error("need at least {needed} nonzero differences, got {got}")]
    TooFewDifferences { needed: usize, got: usize },
    #[error("p-value {0} outside [0, 1]")]
    InvalidP(f64),
    #[error("need at least {needed} observations, got {got}")]
    TooSmall { needed: usize, got: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("metric undefined on {redraws} consecutive resamples")]
    ResamplesExhausted { redraws: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// Differences tend to be positive.
    Greater,
    Less,
}

/// Largest number of nonzero differences tested exactly.
pub const EXACT_MAX_N: usize = 25;
pub const MIN_NONZERO: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `min(W+, W-)`.
    pub w: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Nonzero differences used.
    pub n: usize,
    pub p: f64,
    pub exact: bool,
}

/// Midranks (1-based) of `values`.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Test `reference - alternative` for a zero median difference.
pub fn wilcoxon_signed_rank(
    reference: &[f64],
    alternative: &[f64],
    alt: Alternative,
) -> Result<WilcoxonResult, StatsError> {
    if reference.len() != alternative.len() {
        return Err(StatsError::LengthMismatch(reference.len(), alternative.len()));
    }
    let d: Vec<f64> = reference.iter().zip(alternative).map(|(a, b)| a - b).collect();
    wilcoxon_differences(&d, alt)
}

/// Signed-rank test on paired differences. Zero differences are dropped;
/// exact null distribution up to [`EXACT_MAX_N`] nonzero differences,
/// tie- and continuity-corrected normal approximation above.
pub fn wilcoxon_differences(d: &[f64], alt: Alternative) -> Result<WilcoxonResult, StatsError> {
    let nz: Vec<f64> = d.iter().copied().filter(|&v| v != 0.0).collect();
    if nz.is_empty() {
        return Err(StatsError::AllZero);
    }
    if nz.len() < MIN_NONZERO {
        return Err(StatsError::TooFewDifferences {
            needed: MIN_NONZERO,
            got: nz.len(),
        });
    }
    let abs: Vec<f64> = nz.iter().map(|v| v.abs()).collect();
    let ranks = midranks(&abs);
    let w_plus: f64 = nz.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let total = (nz.len() * (nz.len() + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let exact = nz.len() <= EXACT_MAX_N;
    let p = if exact {
        exact_p(&ranks, w_plus, alt)
    } else {
        normal_p(&ranks, w_plus, alt)
    };
    Ok(WilcoxonResult {
        w: w_plus.min(w_minus),
        w_plus,
        w_minus,
        n: nz.len(),
        p,
        exact,
    })
}

/// Exact p-value over all `2^n` sign assignments, counted by a dynamic
/// programme over doubled (integer) midranks.
pub fn exact_p(ranks: &[f64], w_plus: f64, alt: Alternative) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let obs = (2.0 * w_plus).round() as i64;
    let total = total as i64;
    let hits: u64 = counts
        .iter()
        .enumerate()
        .filter(|&(s, _)| {
            let s = s as i64;
            match alt {
                Alternative::TwoSided => (2 * s - total).abs() >= (2 * obs - total).abs(),
                Alternative::Greater => s >= obs,
                Alternative::Less => s <= obs,
            }
        })
        .map(|(_, &c)| c)
        .sum();
    hits as f64 / 2f64.powi(ranks.len() as i32)
}

/// Normal approximation with tie correction and a 0.5 continuity
/// correction towards the mean.
pub fn normal_p(ranks: &[f64], w_plus: f64, alt: Alternative) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&r| r == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let sd = (n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0).sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let d = w_plus - mean;
    match alt {
        Alternative::TwoSided => {
            let z = (d.abs() - 0.5).max(0.0) / sd;
            (2.0 * std_normal.cdf(-z)).min(1.0)
        }
        Alternative::Greater => std_normal.cdf(-(d - 0.5) / sd),
        Alternative::Less => std_normal.cdf((d + 0.5) / sd),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolmResult {
    pub corrected: Vec<f64>,
    pub reject: Vec<bool>,
}

/// Holm step-down adjusted p-values, in input order. A hypothesis is
/// rejected when its adjusted p is below `alpha`.
pub fn holm_bonferroni(p_values: &[f64], alpha: f64) -> Result<HolmResult, StatsError> {
    if let Some(&bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(StatsError::InvalidP(bad));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let mut corrected = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max(((m - rank) as f64 * p_values[i]).min(1.0));
        corrected[i] = running;
    }
    let reject = corrected.iter().map(|&p| p < alpha).collect();
    Ok(HolmResult { corrected, reject })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    /// Metric on the original sample.
    pub estimate: f64,
    /// Mean of the resampled metric values.
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub n_resamples: usize,
    /// Resamples discarded because the metric was undefined on them.
    pub redraws: usize,
}

pub const MIN_BOOTSTRAP_N: usize = 10;

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile bootstrap of `metric` over `n` rows resampled with
/// replacement. `metric` gets the resampled row indices and returns `None`
/// when undefined; such resamples are redrawn and counted.
pub fn bootstrap_ci<F>(
    n: usize,
    n_resamples: usize,
    level: f64,
    seed_value: u64,
    mut metric: F,
) -> Result<BootstrapCi, StatsError>
where
    F: FnMut(&[usize]) -> Option<f64>,
{
    if n < MIN_BOOTSTRAP_N {
        return Err(StatsError::TooSmall {
            needed: MIN_BOOTSTRAP_N,
            got: n,
        });
    }
    if n_resamples == 0 || !(level > 0.0 && level < 1.0) {
        return Err(StatsError::Invalid(format!(
            "need n_resamples > 0 and level in (0, 1), got {n_resamples}, {level}"
        )));
    }
    let all: Vec<usize> = (0..n).collect();
    let estimate = metric(&all).unwrap_or(f64::NAN);
    let mut rng = seed::rng(seed_value);
    let mut idx = vec![0usize; n];
    let mut values = Vec::with_capacity(n_resamples);
    let (mut redraws, mut streak) = (0usize, 0usize);
    let max_streak = 100 * n_resamples.max(10);
    while values.len() < n_resamples {
        for slot in idx.iter_mut() {
            *slot = rng.gen_range(0..n);
        }
        match metric(&idx) {
            Some(v) => {
                values.push(v);
                streak = 0;
            }
            None => {
                redraws += 1;
                streak += 1;
                if streak >= max_streak {
                    return Err(StatsError::ResamplesExhausted { redraws: streak });
                }
            }
        }
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok(BootstrapCi {
        estimate,
        mean,
        lo: quantile_sorted(&values, tail),
        hi: quantile_sorted(&values, 1.0 - tail),
        n_resamples,
        redraws,
    })
}

/// Bootstrap interval for the mean of `values`.
pub fn bootstrap_mean_ci(values: &[f64], n_resamples: usize, level: f64, seed_value: u64) -> Result<BootstrapCi, StatsError> {
    bootstrap_ci(values.len(), n_resamples, level, seed_value, |idx| {
        Some(idx.iter().map(|&i| values[i]).sum::<f64>() / idx.len() as f64)
    })
}
