//! Butterworth band-pass design and forward-backward filtering.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::PreprocessError;

/// One biquad, transposed direct form II. `a[0]` is implicitly 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        (self.b[0] + self.b[1] * z1 + self.b[2] * z2) / (1.0 + self.a[0] * z1 + self.a[1] * z2)
    }
}

/// Cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos {
    pub sections: Vec<Biquad>,
}

impl Sos {
    /// Complex frequency response at `freq_hz`.
    pub fn response(&self, freq_hz: f64, fs: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz / fs;
        self.sections.iter().map(|s| s.response(w)).product()
    }

    /// Denominator order of the cascade.
    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }

    /// Initial states giving the steady-state response to a unit step.
    fn step_zi(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let g = s.dc_gain();
                let zi = [scale * (g - s.b[0]), scale * (s.b[2] - s.a[1] * g)];
                scale *= g;
                zi
            })
            .collect()
    }

    /// Causal filtering with the given initial states.
    pub fn filter_with_state(&self, x: &[f64], zi: &mut [[f64; 2]]) -> Vec<f64> {
        let mut y = x.to_vec();
        for (s, z) in self.sections.iter().zip(zi.iter_mut()) {
            let [b0, b1, b2] = s.b;
            let [a1, a2] = s.a;
            let (mut z1, mut z2) = (z[0], z[1]);
            for v in y.iter_mut() {
                let xin = *v;
                let out = b0 * xin + z1;
                z1 = b1 * xin - a1 * out + z2;
                z2 = b2 * xin - a2 * out;
                *v = out;
            }
            *z = [z1, z2];
        }
        y
    }

    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut zi = vec![[0.0; 2]; self.sections.len()];
        self.filter_with_state(x, &mut zi)
    }

    /// Padding used by [`Sos::filtfilt`]: 3 × (order + 1) samples.
    pub fn padlen(&self) -> usize {
        3 * (self.order() + 1)
    }

    /// Zero-phase forward-backward filtering with odd reflection padding
    /// and step-response initial conditions.
    pub fn filtfilt(&self, x: &[f64]) -> Result<Vec<f64>, PreprocessError> {
        let pad = self.padlen();
        if x.len() <= pad {
            return Err(PreprocessError::TooShort {
                what: "zero-phase filter input",
                needed: pad + 1,
                got: x.len(),
            });
        }
        let n = x.len();
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

        let zi = self.step_zi();
        let mut state: Vec<[f64; 2]> = zi.iter().map(|z| [z[0] * ext[0], z[1] * ext[0]]).collect();
        let mut y = self.filter_with_state(&ext, &mut state);
        y.reverse();
        let mut state: Vec<[f64; 2]> = zi.iter().map(|z| [z[0] * y[0], z[1] * y[0]]).collect();
        let mut y = self.filter_with_state(&y, &mut state);
        y.reverse();
        Ok(y[pad..pad + n].to_vec())
    }
}

/// Digital Butterworth band-pass of prototype order `order` (the cascade has
/// `2 * order` poles). Band edges are the -3 dB points.
pub fn butter_bandpass(order: usize, low_hz: f64, high_hz: f64, fs: f64) -> Result<Sos, PreprocessError> {
    if order < 2 || order % 2 != 0 {
        return Err(PreprocessError::Config(format!("filter order {order} must be even and >= 2")));
    }
    if !(low_hz > 0.0 && low_hz < high_hz && high_hz < fs / 2.0) {
        return Err(PreprocessError::Config(format!(
            "band [{low_hz}, {high_hz}] Hz must satisfy 0 < low < high < fs/2 = {}",
            fs / 2.0
        )));
    }
    // Prewarped analog edges.
    let k = 2.0 * fs;
    let w_lo = k * (PI * low_hz / fs).tan();
    let w_hi = k * (PI * high_hz / fs).tan();
    let bw = w_hi - w_lo;
    let w0_sq = w_lo * w_hi;

    let mut sections = Vec::with_capacity(order);
    for i in 0..order / 2 {
        let theta = PI * (2 * i + order + 1) as f64 / (2 * order) as f64;
        let p = Complex64::from_polar(1.0, theta);
        // Lowpass-to-bandpass: s^2 - p*bw*s + w0^2 = 0.
        let pb = p * bw;
        let disc = (pb * pb - 4.0 * w0_sq).sqrt();
        for s in [(pb + disc) / 2.0, (pb - disc) / 2.0] {
            let z = (k + s) / (k - s);
            sections.push(Biquad {
                b: [1.0, 0.0, -1.0],
                a: [-2.0 * z.re, z.norm_sqr()],
            });
        }
    }
    let mut sos = Sos { sections };
    // Unit gain at the digital image of the analog centre frequency.
    let center_hz = fs / PI * (w0_sq.sqrt() / k).atan();
    let g = sos.response(center_hz, fs).norm();
    for c in sos.sections[0].b.iter_mut() {
        *c /= g;
    }
    Ok(sos)
}
