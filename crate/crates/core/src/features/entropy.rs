//! Amplitude, ordinal and template-matching entropies.

use std::collections::HashMap;

use super::embed::std_dev;
use super::FeatureError;

/// Equal-width histogram over `[min, max]`; the maximum falls into the last
/// bin. A constant signal puts everything in one bin.
pub fn histogram(x: &[f64], bins: usize) -> Vec<usize> {
    let mut counts = vec![0usize; bins];
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    for &v in x {
        let b = if span > 0.0 {
            (((v - lo) / span) * bins as f64) as usize
        } else {
            0
        };
        counts[b.min(bins - 1)] += 1;
    }
    counts
}

fn probabilities(counts: &[usize]) -> impl Iterator<Item = f64> + '_ {
    let total: usize = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(move |&c| c as f64 / total as f64)
}

/// Shannon entropy of the amplitude histogram, in bits.
pub fn shannon_entropy(segment: &[f64], bins: usize) -> Result<f64, FeatureError> {
    check_bins(bins)?;
    check_nonempty(segment)?;
    let counts = histogram(segment, bins);
    Ok(-probabilities(&counts).map(|p| p * p.log2()).sum::<f64>() + 0.0)
}

/// Tsallis entropy `(1 - sum p^q) / (q - 1)` over the same histogram as
/// [`shannon_entropy`].
pub fn tsallis_entropy(segment: &[f64], q: f64, bins: usize) -> Result<f64, FeatureError> {
    if q == 1.0 || !q.is_finite() {
        return Err(FeatureError::Parameter(format!(
            "Tsallis index q = {q} is not allowed (q = 1 is the Shannon limit)"
        )));
    }
    check_bins(bins)?;
    check_nonempty(segment)?;
    let counts = histogram(segment, bins);
    let s: f64 = probabilities(&counts).map(|p| p.powf(q)).sum();
    Ok((1.0 - s) / (q - 1.0) + 0.0)
}

fn check_bins(bins: usize) -> Result<(), FeatureError> {
    if bins < 2 {
        return Err(FeatureError::Parameter(format!("need at least 2 histogram bins, got {bins}")));
    }
    Ok(())
}

fn check_nonempty(x: &[f64]) -> Result<(), FeatureError> {
    if x.is_empty() {
        return Err(FeatureError::TooShort {
            what: "entropy input",
            needed: 1,
            got: 0,
        });
    }
    Ok(())
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Rank pattern of `order` samples spaced `delay` apart; ties keep index order.
pub fn ordinal_pattern(x: &[f64], start: usize, order: usize, delay: usize) -> Vec<u8> {
    let mut idx: Vec<u8> = (0..order as u8).collect();
    idx.sort_by(|&a, &b| {
        x[start + a as usize * delay].total_cmp(&x[start + b as usize * delay])
    });
    idx
}

/// Permutation entropy in bits (not normalised).
pub fn permutation_entropy(segment: &[f64], order: usize, delay: usize) -> Result<f64, FeatureError> {
    if !(2..=10).contains(&order) || delay == 0 {
        return Err(FeatureError::Parameter(format!(
            "permutation order {order} must be in 2..=10 and delay {delay} >= 1"
        )));
    }
    let needed = factorial(order) * 10;
    if segment.len() < needed {
        return Err(FeatureError::TooShort {
            what: "permutation entropy input",
            needed,
            got: segment.len(),
        });
    }
    let count = segment.len() - (order - 1) * delay;
    let mut freq: HashMap<Vec<u8>, usize> = HashMap::new();
    for i in 0..count {
        *freq.entry(ordinal_pattern(segment, i, order, delay)).or_insert(0) += 1;
    }
    // Sorted so that the summation order does not depend on hashing.
    let mut counts: Vec<usize> = freq.into_values().collect();
    counts.sort_unstable();
    Ok(-probabilities(&counts).map(|p| p * p.log2()).sum::<f64>() + 0.0)
}

pub const MIN_TEMPLATE_LEN: usize = 200;

/// Pairwise template matches under the Chebyshev distance.
///
/// Templates of length `m` start at `0..=n-m`. For each template `i` the
/// result holds the number of other templates `j` within `r` at length `m`
/// and, when both can be extended, at length `m + 1`. Candidates are found by
/// sorting on the first coordinate and sweeping a window of width `r`.
struct TemplateMatches {
    at_m: Vec<u32>,
    at_m1: Vec<u32>,
}

fn template_matches(x: &[f64], m: usize, r: f64) -> TemplateMatches {
    let n = x.len();
    let nt = n - m + 1;
    let mut order: Vec<usize> = (0..nt).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut at_m = vec![0u32; nt];
    let mut at_m1 = vec![0u32; nt];
    for (pos, &i) in order.iter().enumerate() {
        let xi = x[i];
        for &j in &order[pos + 1..] {
            if x[j] - xi > r {
                break;
            }
            if (1..m).all(|k| (x[i + k] - x[j + k]).abs() <= r) {
                at_m[i] += 1;
                at_m[j] += 1;
                if i + m < n && j + m < n && (x[i + m] - x[j + m]).abs() <= r {
                    at_m1[i] += 1;
                    at_m1[j] += 1;
                }
            }
        }
    }
    TemplateMatches { at_m, at_m1 }
}

fn check_template_input(x: &[f64], m: usize) -> Result<(), FeatureError> {
    if m == 0 {
        return Err(FeatureError::Parameter("template length m must be >= 1".into()));
    }
    if x.len() < MIN_TEMPLATE_LEN.max(m + 2) {
        return Err(FeatureError::TooShort {
            what: "template entropy input",
            needed: MIN_TEMPLATE_LEN.max(m + 2),
            got: x.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleEntropy {
    /// Matching template pairs at length m + 1.
    pub a: u64,
    /// Matching template pairs at length m.
    pub b: u64,
    /// `-ln(A/B)`, or `None` when A or B is zero.
    pub value: Option<f64>,
}

/// Sample entropy with tolerance `r_frac` × population standard deviation.
/// Both template lengths use the first `N - m` start positions and exclude
/// self-matches.
pub fn sample_entropy(segment: &[f64], m: usize, r_frac: f64) -> Result<SampleEntropy, FeatureError> {
    check_template_input(segment, m)?;
    let r = r_frac * std_dev(segment);
    let n = segment.len();
    let tm = template_matches(segment, m, r);
    // Drop the last length-m template so both counts use N - m templates.
    let last = n - m;
    let b_twice: u64 = tm.at_m[..last].iter().map(|&c| c as u64).sum::<u64>();
    // Pairs with the dropped template appear once, in the partner's row.
    let b = (b_twice - last_template_pairs(segment, m, r, last)) / 2;
    let a = tm.at_m1.iter().map(|&c| c as u64).sum::<u64>() / 2;
    let value = (a > 0 && b > 0).then(|| -((a as f64) / (b as f64)).ln() + 0.0);
    Ok(SampleEntropy { a, b, value })
}

fn last_template_pairs(x: &[f64], m: usize, r: f64, last: usize) -> u64 {
    (0..last)
        .filter(|&j| (0..m).all(|k| (x[last + k] - x[j + k]).abs() <= r))
        .count() as u64
}

/// Approximate entropy `Phi^m(r) - Phi^{m+1}(r)`, self-matches included.
pub fn approximate_entropy(segment: &[f64], m: usize, r_frac: f64) -> Result<f64, FeatureError> {
    check_template_input(segment, m)?;
    let r = r_frac * std_dev(segment);
    let n = segment.len();
    let tm = template_matches(segment, m, r);
    let phi = |counts: &[u32]| -> f64 {
        let total = counts.len() as f64;
        counts.iter().map(|&c| ((c as f64 + 1.0) / total).ln()).sum::<f64>() / total
    };
    let phi_m = phi(&tm.at_m);
    let phi_m1 = phi(&tm.at_m1[..n - m]);
    Ok(phi_m - phi_m1 + 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shannon_cases() {
        assert_eq!(shannon_entropy(&[0.0, 1.0, 2.0, 3.0], 4).unwrap(), 2.0);
        assert_eq!(shannon_entropy(&[5.0; 50], 16).unwrap(), 0.0);
        // {1/2, 1/4, 1/4}
        assert_eq!(shannon_entropy(&[0.0, 0.0, 1.0, 2.0], 3).unwrap(), 1.5);
        assert!(shannon_entropy(&[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn tsallis_cases() {
        assert_eq!(tsallis_entropy(&[0.0, 1.0, 2.0, 3.0], 2.0, 4).unwrap(), 0.75);
        assert_eq!(tsallis_entropy(&[5.0; 50], 2.0, 16).unwrap(), 0.0);
        assert!(tsallis_entropy(&[0.0, 1.0], 1.0, 4).is_err());
        let x: Vec<f64> = (0..8).map(f64::from).collect();
        let s = tsallis_entropy(&x, 1.0001, 8).unwrap();
        assert!((s / 8f64.ln() - 1.0).abs() < 0.005);
    }

    #[test]
    fn permutation_cases() {
        let ramp: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(permutation_entropy(&ramp, 3, 1).unwrap(), 0.0);
        // 0, 2, 1, 3, 2, 4, ... alternates patterns (0,2,1) and (1,0,2).
        let zz: Vec<f64> = (0..102).map(|i| (i / 2 + 2 * (i % 2)) as f64).collect();
        assert_eq!(permutation_entropy(&zz, 3, 1).unwrap(), 1.0);
        assert!(permutation_entropy(&ramp[..59], 3, 1).is_err());
    }

    #[test]
    fn ties_break_by_index() {
        assert_eq!(ordinal_pattern(&[1.0, 1.0, 0.0], 0, 3, 1), vec![2, 0, 1]);
    }

    #[test]
    fn constant_template_entropies() {
        let x = vec![3.0; 300];
        let s = sample_entropy(&x, 2, 0.2).unwrap();
        assert_eq!(s.a, s.b);
        assert_eq!(s.value, Some(0.0));
        assert_eq!(approximate_entropy(&x, 2, 0.2).unwrap(), 0.0);
    }
}
