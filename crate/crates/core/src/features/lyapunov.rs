//! Largest Lyapunov exponent from nearest-neighbour divergence (Rosenstein).

use super::embed::{decimate, delay_embed, stride_for};
use super::FeatureError;

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovParams {
    pub m: usize,
    pub tau: usize,
    /// Neighbours closer in time than this many points are ignored.
    pub theiler: usize,
    /// Inclusive range of divergence steps used for the slope fit.
    pub fit_start: usize,
    pub fit_end: usize,
    pub max_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    /// Nats per (possibly decimated) sample.
    pub lambda: f64,
    /// `<ln d(t)>` for t = 0..=fit_end; `NaN` where no pair survived.
    pub divergence: Vec<f64>,
    pub stride: usize,
}

impl LyapunovEstimate {
    /// Exponent in nats per second for an input sampled at `fs`.
    pub fn per_second(&self, fs: f64) -> f64 {
        self.lambda * fs / self.stride as f64
    }
}

pub const MIN_LYAPUNOV_POINTS: usize = 500;

pub(crate) fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn lle_rosenstein(segment: &[f64], params: &LyapunovParams) -> Result<LyapunovEstimate, FeatureError> {
    if params.fit_end <= params.fit_start {
        return Err(FeatureError::Parameter(format!(
            "fit range {}..={} must contain at least two steps",
            params.fit_start, params.fit_end
        )));
    }
    let stride = stride_for(segment.len(), params.max_points);
    let x = decimate(segment, stride);
    let emb = delay_embed(&x, params.m, params.tau)?;
    let n = emb.len();
    if n < MIN_LYAPUNOV_POINTS {
        return Err(FeatureError::TooShort {
            what: "Lyapunov embedding",
            needed: MIN_LYAPUNOV_POINTS,
            got: n,
        });
    }
    let horizon = params.fit_end;
    // Only points that can be followed for the whole horizon take part.
    let usable = n.saturating_sub(horizon);
    let mut neighbour = vec![None; usable];
    for (i, slot) in neighbour.iter_mut().enumerate() {
        let pi = emb.point(i);
        let mut best = f64::INFINITY;
        for j in 0..usable {
            if i.abs_diff(j) <= params.theiler {
                continue;
            }
            let d: f64 = pi.iter().zip(emb.point(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best {
                best = d;
                *slot = Some(j);
            }
        }
    }

    let mut sums = vec![0.0; horizon + 1];
    let mut counts = vec![0usize; horizon + 1];
    for (i, j) in neighbour.iter().enumerate() {
        let Some(j) = *j else { continue };
        for t in 0..=horizon {
            let d: f64 = emb
                .point(i + t)
                .iter()
                .zip(emb.point(j + t))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if d > 0.0 {
                sums[t] += d.ln();
                counts[t] += 1;
            }
        }
    }
    let divergence: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect();
    let (ts, ys): (Vec<f64>, Vec<f64>) = (params.fit_start..=params.fit_end)
        .filter(|&t| divergence[t].is_finite())
        .map(|t| (t as f64, divergence[t]))
        .unzip();
    if ts.len() < 2 {
        return Err(FeatureError::Undefined("no valid neighbour pairs for divergence fit"));
    }
    Ok(LyapunovEstimate {
        lambda: slope(&ts, &ys),
        divergence,
        stride,
    })
}
