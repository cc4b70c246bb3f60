//! Delay embedding and the helpers that choose its parameters.

use super::FeatureError;

/// Delay-embedded trajectory stored row-major, `dim` coordinates per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Embedding {
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Population standard deviation of all coordinates pooled.
    pub fn coordinate_std(&self) -> f64 {
        std_dev(&self.data)
    }
}

/// Point `i` is `(x[i], x[i + tau], ..., x[i + (m - 1) tau])`.
pub fn delay_embed(signal: &[f64], m: usize, tau: usize) -> Result<Embedding, FeatureError> {
    if m == 0 || tau == 0 {
        return Err(FeatureError::Parameter(format!("embedding needs m >= 1 and tau >= 1, got m={m}, tau={tau}")));
    }
    let span = (m - 1) * tau + 1;
    if signal.len() < span {
        return Err(FeatureError::TooShort {
            what: "delay embedding",
            needed: span,
            got: signal.len(),
        });
    }
    let count = signal.len() - (m - 1) * tau;
    let mut data = Vec::with_capacity(count * m);
    for i in 0..count {
        data.extend((0..m).map(|k| signal[i + k * tau]));
    }
    Ok(Embedding { dim: m, data })
}

/// Every `stride`-th sample, starting at the first.
pub fn decimate(signal: &[f64], stride: usize) -> Vec<f64> {
    signal.iter().step_by(stride.max(1)).copied().collect()
}

/// Smallest stride that leaves at most `max_points` samples.
pub fn stride_for(len: usize, max_points: usize) -> usize {
    len.div_ceil(max_points.max(1)).max(1)
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub(crate) fn std_dev(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

/// First lag at which the sample autocorrelation is <= 0, capped at `cap`.
pub fn first_acf_zero(signal: &[f64], cap: usize) -> usize {
    let n = signal.len();
    let m = mean(signal);
    let c: Vec<f64> = signal.iter().map(|v| v - m).collect();
    let c0: f64 = c.iter().map(|v| v * v).sum();
    if c0 == 0.0 {
        return 1;
    }
    for lag in 1..cap.min(n.saturating_sub(1)).max(1) {
        let r: f64 = c[..n - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum();
        if r <= 0.0 {
            return lag;
        }
    }
    cap.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embeds_pairs() {
        let e = delay_embed(&[1.0, 2.0, 3.0, 4.0, 5.0], 2, 1).unwrap();
        let pts: Vec<Vec<f64>> = e.points().map(|p| p.to_vec()).collect();
        assert_eq!(pts, vec![vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 4.0], vec![4.0, 5.0]]);
    }

    #[test]
    fn m1_is_identity() {
        let x = [3.0, 1.0, 2.0];
        assert_eq!(delay_embed(&x, 1, 5).unwrap().data, x.to_vec());
    }

    #[test]
    fn point_count_formula() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let e = delay_embed(&x, 3, 4).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.point(1), &[1.0, 5.0, 9.0]);
        assert!(matches!(delay_embed(&x, 3, 5), Err(FeatureError::TooShort { needed: 11, .. })));
    }

    #[test]
    fn sine_acf_zero_at_quarter_period() {
        let x: Vec<f64> = (0..4000).map(|i| (std::f64::consts::TAU * i as f64 / 100.0).sin()).collect();
        // The sampled ACF at lag 25 is zero only up to edge terms.
        assert!((25..=26).contains(&first_acf_zero(&x, 200)));
        assert_eq!(first_acf_zero(&x, 10), 10);
    }

    #[test]
    fn stride() {
        assert_eq!(stride_for(40_000, 2000), 20);
        assert_eq!(stride_for(40_001, 2000), 21);
        assert_eq!(stride_for(500, 2000), 1);
        assert_eq!(decimate(&[0.0, 1.0, 2.0, 3.0, 4.0], 2), vec![0.0, 2.0, 4.0]);
    }
}
