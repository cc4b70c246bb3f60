//! Scaling descriptors: rescaled-range Hurst exponent, Higuchi and Katz
//! fractal dimensions.

use super::lyapunov::slope;
use super::FeatureError;

pub const MIN_HURST_LEN: usize = 512;
/// Smallest block size used by the rescaled-range fit.
pub const HURST_MIN_BLOCK: usize = 16;
const HURST_SIZES: usize = 20;

/// Logarithmically spaced, de-duplicated block sizes in `[lo, hi]`.
fn log_sizes(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp().round() as usize)
        .collect();
    out.dedup();
    out
}

/// Mean R/S over non-overlapping blocks of length `n`; `None` if every
/// block is constant.
fn mean_rescaled_range(x: &[f64], n: usize) -> Option<f64> {
    let mut total = 0.0;
    let mut used = 0usize;
    for block in x.chunks_exact(n) {
        let m = block.iter().sum::<f64>() / n as f64;
        let (mut cum, mut lo, mut hi, mut ss) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &v in block {
            let d = v - m;
            cum += d;
            lo = lo.min(cum);
            hi = hi.max(cum);
            ss += d * d;
        }
        let s = (ss / n as f64).sqrt();
        if s > 0.0 {
            total += (hi - lo) / s;
            used += 1;
        }
    }
    (used > 0).then(|| total / used as f64)
}

/// Hurst exponent: slope of `ln E[R/S]` against `ln n` for block sizes
/// from 16 to N/4.
pub fn hurst_rs(segment: &[f64]) -> Result<f64, FeatureError> {
    if segment.len() < MIN_HURST_LEN {
        return Err(FeatureError::TooShort {
            what: "rescaled-range input",
            needed: MIN_HURST_LEN,
            got: segment.len(),
        });
    }
    let sizes = log_sizes(HURST_MIN_BLOCK, segment.len() / 4, HURST_SIZES);
    let mut xs = Vec::with_capacity(sizes.len());
    let mut ys = Vec::with_capacity(sizes.len());
    for n in sizes {
        let rs = mean_rescaled_range(segment, n).ok_or(FeatureError::Undefined("zero within-block variance"))?;
        if rs > 0.0 {
            xs.push((n as f64).ln());
            ys.push(rs.ln());
        }
    }
    if xs.len() < 2 {
        return Err(FeatureError::Undefined("zero within-block variance"));
    }
    Ok(slope(&xs, &ys))
}

/// Higuchi curve lengths `L(k)` for k = 1..=k_max.
pub fn higuchi_lengths(x: &[f64], k_max: usize) -> Vec<f64> {
    let n = x.len();
    (1..=k_max)
        .map(|k| {
            let mut acc = 0.0;
            for m in 0..k {
                let steps = (n - 1 - m) / k;
                if steps == 0 {
                    continue;
                }
                let mut len = 0.0;
                for i in 1..=steps {
                    len += (x[m + i * k] - x[m + (i - 1) * k]).abs();
                }
                acc += len * (n - 1) as f64 / (steps * k) as f64 / k as f64;
            }
            acc / k as f64
        })
        .collect()
}

/// Higuchi fractal dimension: negative slope of `ln L(k)` against `ln k`.
pub fn higuchi_fd(segment: &[f64], k_max: usize) -> Result<f64, FeatureError> {
    if k_max < 2 {
        return Err(FeatureError::Parameter(format!("k_max {k_max} must be >= 2")));
    }
    if segment.len() < 10 * k_max {
        return Err(FeatureError::TooShort {
            what: "Higuchi input",
            needed: 10 * k_max,
            got: segment.len(),
        });
    }
    let lengths = higuchi_lengths(segment, k_max);
    let (xs, ys): (Vec<f64>, Vec<f64>) = lengths
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0.0)
        .map(|(i, &l)| (((i + 1) as f64).ln(), l.ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(FeatureError::Undefined("zero curve length at every scale"));
    }
    Ok(-slope(&xs, &ys))
}

/// Katz fractal dimension `log(n) / (log(n) + log(d / L))` with L the summed
/// absolute amplitude steps, d the largest excursion from the first sample
/// and n the number of steps. `None` for a constant signal.
pub fn katz_fd(segment: &[f64]) -> Result<Option<f64>, FeatureError> {
    if segment.len() < 3 {
        return Err(FeatureError::TooShort {
            what: "Katz input",
            needed: 3,
            got: segment.len(),
        });
    }
    let total: f64 = segment.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let first = segment[0];
    let diameter = segment.iter().map(|v| (v - first).abs()).fold(0.0, f64::max);
    if total == 0.0 || diameter == 0.0 {
        return Ok(None);
    }
    let n = (segment.len() - 1) as f64;
    Ok(Some(n.ln() / (n.ln() + (diameter / total).ln())))
}
