//! Analytic-signal envelope via the FFT.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::PreprocessError;

pub const MIN_ENVELOPE_LEN: usize = 16;

/// Magnitude of the analytic signal: negative frequencies zeroed, positive
/// frequencies doubled, DC and Nyquist kept.
pub fn hilbert_envelope(signal: &[f64]) -> Result<Vec<f64>, PreprocessError> {
    let n = signal.len();
    if n < MIN_ENVELOPE_LEN {
        return Err(PreprocessError::TooShort {
            what: "envelope input",
            needed: MIN_ENVELOPE_LEN,
            got: n,
        });
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fwd.process(&mut buf);
    let half = n / 2;
    for (k, v) in buf.iter_mut().enumerate() {
        let h = if k == 0 || (n % 2 == 0 && k == half) {
            1.0
        } else if k <= (n - 1) / 2 {
            2.0
        } else {
            0.0
        };
        *v *= h;
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(buf.iter().map(|c| c.norm() * scale).collect())
}
