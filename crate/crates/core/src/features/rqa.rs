//! Recurrence quantification: recurrence rate, determinism and mean
//! diagonal line length.

use super::embed::{decimate, delay_embed, stride_for, Embedding};
use super::{EmbeddingParams, FeatureError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RqaMetrics {
    /// Recurrence points over the full N×N matrix, main diagonal included.
    pub rr: f64,
    /// Share of off-diagonal recurrence points lying on diagonal lines of
    /// length >= l_min.
    pub det: f64,
    /// Mean length of diagonal lines >= l_min; `None` when there are none.
    pub l_avg: Option<f64>,
    pub n_points: usize,
    pub stride: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Metrics of the recurrence plot `R[i][j] = ||x_i - x_j|| <= epsilon`.
///
/// Diagonal lines are read off the upper triangle and doubled, which is
/// exact because the matrix is symmetric. The main diagonal counts towards
/// RR but not towards the line statistics. Diagonals shorter than `l_min`
/// cannot hold a line and are left out of the DET denominator.
pub fn rqa_from_embedding(points: &Embedding, epsilon: f64, l_min: usize) -> RqaMetrics {
    let n = points.len();
    let eps2 = epsilon * epsilon;
    let mut recurrent_off = 0u64;
    let mut recurrent_eligible = 0u64;
    let mut line_points = 0u64;
    let mut line_count = 0u64;
    let close_run = |run: u64, line_points: &mut u64, line_count: &mut u64| {
        if run as usize >= l_min {
            *line_points += run;
            *line_count += 1;
        }
    };
    for k in 1..n {
        let eligible = n - k >= l_min;
        let mut run = 0u64;
        for i in 0..n - k {
            if sq_dist(points.point(i), points.point(i + k)) <= eps2 {
                run += 1;
                recurrent_off += 1;
                recurrent_eligible += eligible as u64;
            } else if run > 0 {
                close_run(run, &mut line_points, &mut line_count);
                run = 0;
            }
        }
        if run > 0 {
            close_run(run, &mut line_points, &mut line_count);
        }
    }
    let total = (n as u64) + 2 * recurrent_off;
    let rr = total as f64 / (n as f64 * n as f64);
    let det = if recurrent_eligible == 0 {
        0.0
    } else {
        line_points as f64 / recurrent_eligible as f64
    };
    let l_avg = (line_count > 0).then(|| line_points as f64 / line_count as f64);
    RqaMetrics {
        rr,
        det,
        l_avg,
        n_points: n,
        stride: 1,
    }
}

/// Decimate to at most `max_points` samples, embed and compute RQA.
pub fn rqa_metrics(segment: &[f64], params: &EmbeddingParams) -> Result<RqaMetrics, FeatureError> {
    params.validate()?;
    let stride = stride_for(segment.len(), params.max_points);
    let x = decimate(segment, stride);
    let emb = delay_embed(&x, params.m, params.tau)?;
    Ok(RqaMetrics {
        stride,
        ..rqa_from_embedding(&emb, params.epsilon, params.l_min)
    })
}
