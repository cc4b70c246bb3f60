//! Monotone piecewise cubic Hermite interpolation (Fritsch–Carlson).

use super::PreprocessError;

fn slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (d0, d1) = (delta[k - 1], delta[k]);
        if d0 == 0.0 || d1 == 0.0 || d0.signum() != d1.signum() {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
        }
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

// One-sided three-point estimate, limited to keep the end intervals monotone.
fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Interpolate `query_x` through the knots. Knot abscissae must be strictly
/// increasing and queries must lie inside the knot range.
pub fn pchip_interpolate(knots_x: &[f64], knots_y: &[f64], query_x: &[f64]) -> Result<Vec<f64>, PreprocessError> {
    if knots_x.len() != knots_y.len() {
        return Err(PreprocessError::Interpolation(format!(
            "{} knot abscissae but {} ordinates",
            knots_x.len(),
            knots_y.len()
        )));
    }
    if knots_x.len() < 2 {
        return Err(PreprocessError::Interpolation("need at least 2 knots".into()));
    }
    if let Some(i) = knots_x.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(PreprocessError::Interpolation(format!(
            "knot abscissae not strictly increasing at index {}",
            i + 1
        )));
    }
    let (lo, hi) = (knots_x[0], knots_x[knots_x.len() - 1]);
    if let Some(&q) = query_x.iter().find(|&&q| !(q >= lo && q <= hi)) {
        return Err(PreprocessError::Interpolation(format!(
            "query {q} outside knot range [{lo}, {hi}]"
        )));
    }
    let d = slopes(knots_x, knots_y);
    let last = knots_x.len() - 2;
    Ok(query_x
        .iter()
        .map(|&q| {
            let k = knots_x.partition_point(|&x| x <= q).saturating_sub(1).min(last);
            let h = knots_x[k + 1] - knots_x[k];
            let t = (q - knots_x[k]) / h;
            let t2 = t * t;
            let t3 = t2 * t;
            let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
            let h10 = t3 - 2.0 * t2 + t;
            let h01 = -2.0 * t3 + 3.0 * t2;
            let h11 = t3 - t2;
            h00 * knots_y[k] + h10 * h * d[k] + h01 * knots_y[k + 1] + h11 * h * d[k + 1]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_knots() {
        let x = [0.0, 1.0, 2.5, 4.0];
        let y = [1.0, -2.0, 0.5, 3.0];
        assert_eq!(pchip_interpolate(&x, &y, &x).unwrap(), y.to_vec());
    }

    #[test]
    fn linear_data_is_exact() {
        let x: Vec<f64> = (0..6).map(|i| i as f64 * 1.5).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let q: Vec<f64> = x.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        for (v, qx) in pchip_interpolate(&x, &y, &q).unwrap().iter().zip(&q) {
            assert!((v - (2.0 * qx + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert!(pchip_interpolate(&[0.0, 0.0], &[1.0, 2.0], &[0.0]).is_err());
        assert!(pchip_interpolate(&[0.0, 1.0], &[1.0, 2.0], &[1.5]).is_err());
        assert!(pchip_interpolate(&[0.0], &[1.0], &[0.0]).is_err());
    }

    proptest! {
        #[test]
        fn monotone_knots_give_monotone_output(steps in prop::collection::vec((0.1f64..3.0, 0.0f64..5.0), 2..12)) {
            let mut x = vec![0.0];
            let mut y = vec![0.0];
            for (dx, dy) in &steps {
                x.push(x.last().unwrap() + dx);
                y.push(y.last().unwrap() + dy);
            }
            let hi = *x.last().unwrap();
            let q: Vec<f64> = (0..=400).map(|i| (hi * i as f64 / 400.0).min(hi)).collect();
            let out = pchip_interpolate(&x, &y, &q).unwrap();
            for w in out.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-9);
            }
            for v in &out {
                prop_assert!(*v >= -1e-9 && *v <= y.last().unwrap() + 1e-9);
            }
        }
    }
}
