//! Recording preprocessing: crop, zero-phase band-pass, envelope-based
//! artifact repair, z-score normalization and overlapped segmentation.

mod artifact;
mod filter;
mod hilbert;
mod pchip;

pub use artifact::{
    detect_and_repair, estimate_noise_sigma, NoiseEstimate, Repair, HISTOGRAM_BINS, MAX_ARTIFACT_FRACTION,
    PCHIP_ANCHORS,
};
pub use filter::{butter_bandpass, Biquad, Sos};
pub use hilbert::hilbert_envelope;
pub use pchip::pchip_interpolate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::recording::{Label, Recording, RecordingId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreprocessError {
    #[error("invalid preprocessing configuration: {0}")]
    Config(String),
    #[error("{what} too short: need {needed} samples, got {got}")]
    TooShort {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("crop interval {index} ({start_s} s, {end_s} s): {reason}")]
    Crop {
        index: usize,
        start_s: f64,
        end_s: f64,
        reason: &'static str,
    },
    #[error("crop leaves no samples")]
    EmptyCrop,
    #[error("signal is constant, cannot normalize")]
    ConstantSignal,
    #[error("interpolation: {0}")]
    Interpolation(String),
    #[error(
        "recording rejected: {:.1}% of samples flagged as artifact (sigma {sigma:.4}, threshold {threshold:.4})",
        100.0 * fraction
    )]
    ArtifactRejected { fraction: f64, sigma: f64, threshold: f64 },
}

/// A closed-open time interval `[start_s, end_s)` to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CropInterval {
    pub start_s: f64,
    pub end_s: f64,
}

impl From<(f64, f64)> for CropInterval {
    fn from((start_s, end_s): (f64, f64)) -> Self {
        Self { start_s, end_s }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    /// Butterworth prototype order; the band-pass cascade has twice as many poles.
    pub filter_order: usize,
    pub artifact_sigma_mult: f64,
    pub guard_ms: f64,
    pub window_s: f64,
    pub overlap_s: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            band_low_hz: 300.0,
            band_high_hz: 5000.0,
            filter_order: 4,
            artifact_sigma_mult: 8.0,
            guard_ms: 2.0,
            window_s: 2.0,
            overlap_s: 0.5,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self, fs: f64) -> Result<(), PreprocessError> {
        let err = |m: String| Err(PreprocessError::Config(m));
        if !(fs > 0.0) {
            return err(format!("sampling rate {fs} must be positive"));
        }
        if !(self.band_low_hz > 0.0 && self.band_low_hz < self.band_high_hz && self.band_high_hz < fs / 2.0) {
            return err(format!(
                "band [{}, {}] Hz must satisfy 0 < low < high < fs/2 = {}",
                self.band_low_hz,
                self.band_high_hz,
                fs / 2.0
            ));
        }
        if self.filter_order < 2 || self.filter_order % 2 != 0 {
            return err(format!("filter order {} must be even and >= 2", self.filter_order));
        }
        if !(self.window_s > self.overlap_s && self.overlap_s > 0.0) {
            return err(format!(
                "need window_s > overlap_s > 0, got {} and {}",
                self.window_s, self.overlap_s
            ));
        }
        if !(self.artifact_sigma_mult > 0.0) || !(self.guard_ms >= 0.0) {
            return err("artifact threshold must be positive and guard non-negative".into());
        }
        Ok(())
    }

    pub fn hop_s(&self) -> f64 {
        self.window_s - self.overlap_s
    }

    pub fn window_len(&self, fs: f64) -> usize {
        (self.window_s * fs).round() as usize
    }

    pub fn hop_len(&self, fs: f64) -> usize {
        (self.hop_s() * fs).round() as usize
    }
}

/// Keep the given intervals, in order, and concatenate them.
pub fn crop(recording: &Recording, intervals: &[CropInterval]) -> Result<Recording, PreprocessError> {
    if intervals.is_empty() {
        return Err(PreprocessError::EmptyCrop);
    }
    let n = recording.samples.len();
    let duration = recording.duration_s();
    let tol = 0.5 / recording.fs;
    let mut kept = Vec::new();
    let mut prev_end = 0usize;
    for (index, iv) in intervals.iter().enumerate() {
        let bad = |reason| PreprocessError::Crop {
            index,
            start_s: iv.start_s,
            end_s: iv.end_s,
            reason,
        };
        if !(iv.start_s < iv.end_s) {
            return Err(bad("interval is empty or descending"));
        }
        if iv.start_s < -tol || iv.end_s > duration + tol {
            return Err(bad("interval outside recording"));
        }
        let s = ((iv.start_s * recording.fs).round().max(0.0) as usize).min(n);
        let e = ((iv.end_s * recording.fs).round() as usize).min(n);
        if index > 0 && s < prev_end {
            return Err(bad("intervals overlap or are not ascending"));
        }
        prev_end = e;
        kept.extend_from_slice(&recording.samples[s..e]);
    }
    if kept.is_empty() {
        return Err(PreprocessError::EmptyCrop);
    }
    Ok(Recording {
        samples: kept,
        ..recording.clone()
    })
}

pub fn bandpass_zero_phase(signal: &[f64], fs: f64, config: &PreprocessConfig) -> Result<Vec<f64>, PreprocessError> {
    let sos = butter_bandpass(config.filter_order, config.band_low_hz, config.band_high_hz, fs)?;
    sos.filtfilt(signal)
}

/// Population z-score.
pub fn zscore(signal: &[f64]) -> Result<Vec<f64>, PreprocessError> {
    let n = signal.len() as f64;
    let mean = signal.iter().sum::<f64>() / n;
    let var = signal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if signal.is_empty() || !(sd > 0.0) || sd <= 1e-12 * mean.abs() {
        return Err(PreprocessError::ConstantSignal);
    }
    Ok(signal.iter().map(|v| (v - mean) / sd).collect())
}

/// One labelled analysis window.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentWindow {
    pub samples: Vec<f64>,
    pub source: RecordingId,
    /// Position of the window within its recording.
    pub index: usize,
    pub start_s: f64,
    pub fs: f64,
    pub label: Label,
    pub artifact_fraction: f64,
}

/// A recording after filtering, repair and normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedRecording {
    pub recording: Recording,
    pub artifact_mask: Vec<bool>,
    pub noise_sigma: f64,
}

impl ProcessedRecording {
    pub fn interpolated_samples(&self) -> usize {
        self.artifact_mask.iter().filter(|&&m| m).count()
    }
}

/// Window start offsets (in samples) for a signal of `n` samples.
pub fn window_starts(n: usize, fs: f64, config: &PreprocessConfig) -> Vec<usize> {
    let w = config.window_len(fs);
    let h = config.hop_len(fs).max(1);
    if n < w {
        return Vec::new();
    }
    (0..=(n - w) / h).map(|k| k * h).collect()
}

/// Split a recording into overlapping windows that inherit its label.
/// `mask` (if given) supplies per-sample artifact flags.
pub fn segment(
    recording: &Recording,
    mask: Option<&[bool]>,
    config: &PreprocessConfig,
) -> Result<Vec<SegmentWindow>, PreprocessError> {
    let fs = recording.fs;
    let w = config.window_len(fs);
    if recording.samples.len() < w {
        return Err(PreprocessError::TooShort {
            what: "recording for one window",
            needed: w,
            got: recording.samples.len(),
        });
    }
    Ok(window_starts(recording.samples.len(), fs, config)
        .into_iter()
        .enumerate()
        .map(|(index, s)| {
            let flagged = mask.map_or(0, |m| m[s..s + w].iter().filter(|&&f| f).count());
            SegmentWindow {
                samples: recording.samples[s..s + w].to_vec(),
                source: recording.id.clone(),
                index,
                start_s: s as f64 / fs,
                fs,
                label: recording.label,
                artifact_fraction: flagged as f64 / w as f64,
            }
        })
        .collect())
}

/// Crop (if intervals are given), band-pass, repair and z-score one recording.
pub fn preprocess_recording(
    recording: &Recording,
    crop_intervals: &[CropInterval],
    config: &PreprocessConfig,
) -> Result<ProcessedRecording, PreprocessError> {
    config.validate(recording.fs)?;
    let cropped;
    let source = if crop_intervals.is_empty() {
        recording
    } else {
        cropped = crop(recording, crop_intervals)?;
        &cropped
    };
    let filtered = bandpass_zero_phase(&source.samples, source.fs, config)?;
    let repair = detect_and_repair(&filtered, source.fs, config)?;
    let normalized = zscore(&repair.signal)?;
    Ok(ProcessedRecording {
        recording: Recording {
            samples: normalized,
            ..source.clone()
        },
        artifact_mask: repair.mask,
        noise_sigma: repair.noise.sigma,
    })
}
