//! Envelope-threshold artifact detection and PCHIP repair.

use super::hilbert::hilbert_envelope;
use super::pchip::pchip_interpolate;
use super::{PreprocessConfig, PreprocessError};

pub const HISTOGRAM_BINS: usize = 256;
pub const HISTOGRAM_UPPER_PERCENTILE: f64 = 99.9;
/// Half-width, in bins, of the log-count quadratic fit around the mode.
pub const MODE_FIT_HALF_WIDTH: usize = 24;
const MODE_FIT_ITERATIONS: usize = 3;
pub const MIN_NOISE_LEN: usize = 1000;
/// Clean samples used as interpolation anchors on each side of a flagged run.
pub const PCHIP_ANCHORS: usize = 5;
pub const MAX_ARTIFACT_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEstimate {
    /// Gaussian-equivalent background sigma: the Rayleigh mode of the envelope.
    pub sigma: f64,
    /// All mass fell into a single histogram bin.
    pub degenerate: bool,
}

/// Value at percentile `p` (0..=100) by linear interpolation between order
/// statistics.
pub(crate) fn percentile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let rank = p / 100.0 * (v.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (rank - lo as f64)
}

/// Weighted least-squares quadratic `y = c0 + c1 x + c2 x^2`.
fn fit_quadratic(x: &[f64], y: &[f64], w: &[f64]) -> Option<[f64; 3]> {
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        let p = [1.0, xi, xi * xi];
        for a in 0..3 {
            r[a] += wi * p[a] * yi;
            for b in 0..3 {
                m[a][b] += wi * p[a] * p[b];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut c = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * c[k]).sum();
        c[row] = (r[row] - s) / m[row][row];
    }
    Some(c)
}

/// Background noise level from the mode of the envelope histogram.
///
/// The histogram spans `[0, p99.9]` with 256 bins. The mode is seeded by the
/// argmax of a moving average of the counts and refined by the vertex of a
/// count-weighted quadratic fitted to log-counts around it.
pub fn estimate_noise_sigma(envelope: &[f64]) -> Result<NoiseEstimate, PreprocessError> {
    if envelope.len() < MIN_NOISE_LEN {
        return Err(PreprocessError::TooShort {
            what: "noise estimation input",
            needed: MIN_NOISE_LEN,
            got: envelope.len(),
        });
    }
    let upper = percentile(envelope, HISTOGRAM_UPPER_PERCENTILE);
    if !(upper > 0.0) {
        return Ok(NoiseEstimate { sigma: 0.0, degenerate: true });
    }
    let width = upper / HISTOGRAM_BINS as f64;
    let mut counts = vec![0usize; HISTOGRAM_BINS];
    let mut sums = vec![0.0; HISTOGRAM_BINS];
    for &e in envelope {
        if e <= upper {
            let b = ((e / width) as usize).min(HISTOGRAM_BINS - 1);
            counts[b] += 1;
            sums[b] += e;
        }
    }
    let occupied: Vec<usize> = (0..HISTOGRAM_BINS).filter(|&b| counts[b] > 0).collect();
    if occupied.len() == 1 {
        let b = occupied[0];
        return Ok(NoiseEstimate {
            sigma: sums[b] / counts[b] as f64,
            degenerate: true,
        });
    }

    let half = MODE_FIT_HALF_WIDTH;
    let smoothed: Vec<f64> = (0..HISTOGRAM_BINS)
        .map(|b| {
            let lo = b.saturating_sub(half);
            let hi = (b + half).min(HISTOGRAM_BINS - 1);
            counts[lo..=hi].iter().sum::<usize>() as f64 / (2 * half + 1) as f64
        })
        .collect();
    let mut mode = smoothed
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i as f64)
        .unwrap_or(0.0);

    for _ in 0..MODE_FIT_ITERATIONS {
        let centre = mode.round() as usize;
        let lo = centre.saturating_sub(half);
        let hi = (centre + half).min(HISTOGRAM_BINS - 1);
        let xs: Vec<f64> = (lo..=hi).map(|b| b as f64 - centre as f64).collect();
        let ys: Vec<f64> = (lo..=hi).map(|b| (counts[b] as f64).max(0.5).ln()).collect();
        let ws: Vec<f64> = (lo..=hi).map(|b| (counts[b] as f64).max(1.0)).collect();
        let Some([_, c1, c2]) = fit_quadratic(&xs, &ys, &ws) else { break };
        if !(c2 < 0.0) {
            break;
        }
        let vertex = (-c1 / (2.0 * c2)).clamp(lo as f64 - centre as f64, hi as f64 - centre as f64);
        let next = centre as f64 + vertex;
        let converged = (next - mode).abs() < 1e-6;
        mode = next;
        if converged {
            break;
        }
    }
    Ok(NoiseEstimate {
        sigma: (mode + 0.5) * width,
        degenerate: false,
    })
}

/// Output of [`detect_and_repair`].
#[derive(Debug, Clone, PartialEq)]
pub struct Repair {
    pub signal: Vec<f64>,
    pub mask: Vec<bool>,
    pub noise: NoiseEstimate,
    pub threshold: f64,
}

impl Repair {
    pub fn flagged(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn artifact_fraction(&self) -> f64 {
        if self.mask.is_empty() {
            0.0
        } else {
            self.flagged() as f64 / self.mask.len() as f64
        }
    }
}

fn dilate(mask: &[bool], guard: usize) -> Vec<bool> {
    let n = mask.len();
    let mut out = vec![false; n];
    // Difference array over [i - guard, i + guard].
    let mut diff = vec![0i32; n + 1];
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        diff[i.saturating_sub(guard)] += 1;
        diff[(i + guard + 1).min(n)] -= 1;
    }
    let mut acc = 0;
    for i in 0..n {
        acc += diff[i];
        out[i] = acc > 0;
    }
    out
}

/// Maximal runs of `true` as half-open ranges.
pub(crate) fn runs(mask: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &m) in mask.iter().enumerate() {
        match (m, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, mask.len()));
    }
    out
}

/// Flag samples whose envelope exceeds `artifact_sigma_mult` × the
/// background sigma, widen the flags by the guard interval and replace each
/// flagged run by PCHIP through the neighbouring clean samples. Runs touching
/// either end of the signal are held at the nearest clean value.
pub fn detect_and_repair(signal: &[f64], fs: f64, config: &PreprocessConfig) -> Result<Repair, PreprocessError> {
    let envelope = hilbert_envelope(signal)?;
    let noise = estimate_noise_sigma(&envelope)?;
    let threshold = config.artifact_sigma_mult * noise.sigma;
    let raw: Vec<bool> = envelope.iter().map(|&e| e > threshold).collect();
    let guard = (config.guard_ms * 1e-3 * fs).round() as usize;
    let mask = dilate(&raw, guard);

    let flagged = mask.iter().filter(|&&m| m).count();
    let fraction = flagged as f64 / signal.len() as f64;
    if fraction > MAX_ARTIFACT_FRACTION {
        return Err(PreprocessError::ArtifactRejected {
            fraction,
            sigma: noise.sigma,
            threshold,
        });
    }

    let mut repaired = signal.to_vec();
    let n = signal.len();
    for (s, e) in runs(&mask) {
        let left: Vec<usize> = (s.saturating_sub(PCHIP_ANCHORS)..s).filter(|&i| !mask[i]).collect();
        let right: Vec<usize> = (e..(e + PCHIP_ANCHORS).min(n)).filter(|&i| !mask[i]).collect();
        // Anchors must be contiguous with the run.
        let left: Vec<usize> = contiguous_tail(&left, s);
        let right: Vec<usize> = contiguous_head(&right, e);
        match (left.is_empty(), right.is_empty()) {
            (false, false) => {
                let idx: Vec<usize> = left.iter().chain(&right).copied().collect();
                let kx: Vec<f64> = idx.iter().map(|&i| i as f64).collect();
                let ky: Vec<f64> = idx.iter().map(|&i| signal[i]).collect();
                let q: Vec<f64> = (s..e).map(|i| i as f64).collect();
                let vals = pchip_interpolate(&kx, &ky, &q)?;
                repaired[s..e].copy_from_slice(&vals);
            }
            (true, false) => repaired[s..e].fill(signal[right[0]]),
            (false, true) => repaired[s..e].fill(signal[*left.last().unwrap()]),
            (true, true) => repaired[s..e].fill(0.0),
        }
    }
    Ok(Repair {
        signal: repaired,
        mask,
        noise,
        threshold,
    })
}

fn contiguous_tail(idx: &[usize], end: usize) -> Vec<usize> {
    let mut out: Vec<usize> = idx
        .iter()
        .rev()
        .enumerate()
        .take_while(|(k, &i)| i + k + 1 == end)
        .map(|(_, &i)| i)
        .collect();
    out.reverse();
    out
}

fn contiguous_head(idx: &[usize], start: usize) -> Vec<usize> {
    idx.iter()
        .enumerate()
        .take_while(|(k, &i)| i == start + k)
        .map(|(_, &i)| i)
        .collect()
}
