//! Deterministic synthetic signals: oracle inputs for the feature
//! estimators and a two-class surrogate microelectrode corpus.
//!
//! Every generator is a pure function of its parameters and seed; the
//! random stream is ChaCha8 (see [`crate::seed`]).

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::recording::{Label, Recording, RecordingId};
use crate::seed::{self, derive_seed, tag};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("unknown test signal kind {0:?}")]
    UnknownKind(String),
    #[error("invalid synthesis parameters: {0}")]
    Invalid(String),
}

/// Oracle test signals.
#[derive(Debug, Clone, PartialEq)]
pub enum TestSignal {
    Sine { freq_hz: f64, fs: f64, duration_s: f64, amplitude: f64 },
    GaussianNoise { n: usize, sd: f64 },
    Ramp { n: usize, slope: f64 },
    LogisticMap { r: f64, x0: f64, n: usize },
    RandomWalk { n: usize },
}

impl TestSignal {
    /// Default parameters for a kind name with `n` samples.
    pub fn from_name(kind: &str, n: usize) -> Result<Self, SynthError> {
        Ok(match kind {
            "sine" => TestSignal::Sine {
                freq_hz: 1000.0,
                fs: 20_000.0,
                duration_s: n as f64 / 20_000.0,
                amplitude: 1.0,
            },
            "gaussian_noise" => TestSignal::GaussianNoise { n, sd: 1.0 },
            "ramp" => TestSignal::Ramp { n, slope: 1.0 },
            "logistic_map" => TestSignal::LogisticMap { r: 4.0, x0: 0.2, n },
            "random_walk" => TestSignal::RandomWalk { n },
            other => return Err(SynthError::UnknownKind(other.to_string())),
        })
    }
}

pub fn gaussian(n: usize, rng: &mut seed::Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z
        })
        .collect()
}

pub fn gen_test_signal(signal: &TestSignal, seed_value: u64) -> Result<Vec<f64>, SynthError> {
    let mut rng = seed::rng(seed_value);
    Ok(match *signal {
        TestSignal::Sine {
            freq_hz,
            fs,
            duration_s,
            amplitude,
        } => {
            if !(fs > 0.0 && duration_s > 0.0) {
                return Err(SynthError::Invalid(format!("sine needs fs > 0 and duration > 0, got {fs}, {duration_s}")));
            }
            let n = (duration_s * fs).round() as usize;
            (0..n)
                .map(|i| amplitude * (2.0 * PI * freq_hz * i as f64 / fs).sin())
                .collect()
        }
        TestSignal::GaussianNoise { n, sd } => gaussian(n, &mut rng).into_iter().map(|z| sd * z).collect(),
        TestSignal::Ramp { n, slope } => (0..n).map(|i| slope * i as f64).collect(),
        TestSignal::LogisticMap { r, x0, n } => {
            if !(0.0..=4.0).contains(&r) || !(x0 > 0.0 && x0 < 1.0) {
                return Err(SynthError::Invalid(format!("logistic map needs r in [0,4], x0 in (0,1); got {r}, {x0}")));
            }
            let mut x = x0;
            (0..n)
                .map(|_| {
                    let v = x;
                    x = r * x * (1.0 - x);
                    v
                })
                .collect()
        }
        TestSignal::RandomWalk { n } => gaussian(n, &mut rng)
            .into_iter()
            .scan(0.0, |acc, z| {
                *acc += z;
                Some(*acc)
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Background {
    White,
    Pink,
}

impl FromStr for Background {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "white" => Ok(Background::White),
            "pink" => Ok(Background::Pink),
            other => Err(format!("unknown background {other:?}")),
        }
    }
}

/// Parameters of one surrogate recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSpec {
    pub class_label: Label,
    pub firing_rate_hz: f64,
    /// Peak spike amplitude in multiples of the background SD.
    pub spike_amplitude_sigma: f64,
    /// Share of spikes emitted inside bursts.
    pub burst_fraction: f64,
    pub background: Background,
    pub duration_s: f64,
    pub fs: f64,
    pub seed: u64,
}

pub const SPIKE_WIDTH_S: f64 = 1e-3;
pub const BURST_SIZE: usize = 4;
pub const BURST_ISI_S: f64 = 4e-3;

impl SurrogateSpec {
    /// Defaults for a class: inside 60 Hz / 6 SD / 40% bursts, outside
    /// 15 Hz / 3 SD / no bursts.
    pub fn for_class(label: Label, duration_s: f64, fs: f64, seed: u64) -> Self {
        let (rate, amp, burst) = match label {
            Label::InsideStn => (60.0, 6.0, 0.4),
            Label::OutsideStn => (15.0, 3.0, 0.0),
        };
        Self {
            class_label: label,
            firing_rate_hz: rate,
            spike_amplitude_sigma: amp,
            burst_fraction: burst,
            background: Background::White,
            duration_s,
            fs,
            seed,
        }
    }

    pub fn validate(&self, min_duration_s: f64) -> Result<(), SynthError> {
        if !(self.firing_rate_hz >= 0.0)
            || !(self.fs > 0.0)
            || !(self.duration_s >= min_duration_s)
            || !(0.0..=1.0).contains(&self.burst_fraction)
            || !(self.spike_amplitude_sigma >= 0.0)
        {
            return Err(SynthError::Invalid(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.duration_s * self.fs).round() as usize
    }
}

/// Biphasic spike of unit peak magnitude spanning `SPIKE_WIDTH_S`.
pub fn spike_template(fs: f64) -> Vec<f64> {
    let len = ((SPIKE_WIDTH_S * fs).round() as usize).max(2);
    let raw: Vec<f64> = (0..len)
        .map(|i| {
            let t = (i as f64 + 0.5) / len as f64;
            -(2.0 * PI * t).sin() * (PI * t).sin()
        })
        .collect();
    let peak = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    raw.into_iter().map(|v| v / peak).collect()
}

/// Spike onset sample indices: a Poisson count at `firing_rate_hz`, with
/// `burst_fraction` of the spikes grouped into bursts of four.
pub fn spike_times(spec: &SurrogateSpec) -> Vec<usize> {
    let mut rng = seed::rng(derive_seed(spec.seed, &[tag("spikes")]));
    let n = spec.n_samples();
    let width = (SPIKE_WIDTH_S * spec.fs).round() as usize;
    let mean = spec.firing_rate_hz * spec.duration_s;
    let count = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize
    } else {
        0
    };
    let last_start = n.saturating_sub(width + 1);
    let mut times = Vec::with_capacity(count);
    let in_bursts = ((spec.burst_fraction * count as f64).round() as usize).min(count);
    let isi = (BURST_ISI_S * spec.fs).round() as usize;
    let mut placed = 0;
    while placed < in_bursts {
        let size = BURST_SIZE.min(in_bursts - placed);
        let span = (size - 1) * isi;
        let start = rng.gen_range(0..=last_start.saturating_sub(span));
        times.extend((0..size).map(|k| start + k * isi));
        placed += size;
    }
    times.extend((in_bursts..count).map(|_| rng.gen_range(0..=last_start)));
    times.sort_unstable();
    times
}

/// Band occupied by the surrogate background, matching the analysis band so
/// that spike amplitudes are relative to the SD seen after filtering.
pub const BACKGROUND_BAND_HZ: (f64, f64) = (300.0, 5000.0);

/// Band-limited background noise with unit SD: flat spectrum for
/// [`Background::White`], 1/f power for [`Background::Pink`].
pub fn background_noise(kind: Background, n: usize, fs: f64, rng: &mut seed::Rng) -> Vec<f64> {
    let white = gaussian(n, rng);
    if n < 2 {
        return white;
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = white.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let (lo, hi) = BACKGROUND_BAND_HZ;
    for (k, b) in buf.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 * fs / n as f64;
        if f < lo || f > hi {
            *b = Complex64::new(0.0, 0.0);
        } else if kind == Background::Pink {
            *b /= f.sqrt();
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let x: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let mean = x.iter().sum::<f64>() / n as f64;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    x.into_iter().map(|v| (v - mean) / sd).collect()
}

/// One surrogate recording: spikes added to unit-SD background.
pub fn gen_surrogate_mer(spec: &SurrogateSpec, id: RecordingId) -> Result<Recording, SynthError> {
    spec.validate(0.0)?;
    let n = spec.n_samples();
    let mut rng = seed::rng(derive_seed(spec.seed, &[tag("background")]));
    let mut samples = background_noise(spec.background, n, spec.fs, &mut rng);
    let template = spike_template(spec.fs);
    for t in spike_times(spec) {
        for (k, w) in template.iter().enumerate() {
            if let Some(s) = samples.get_mut(t + k) {
                *s += spec.spike_amplitude_sigma * w;
            }
        }
    }
    Ok(Recording {
        id,
        samples,
        fs: spec.fs,
        label: spec.class_label,
    })
}

/// Layout of a surrogate corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub n_inside: usize,
    pub n_outside: usize,
    pub duration_s: f64,
    pub fs: f64,
    pub background: Background,
    pub patients: usize,
    /// Overrides for the class defaults.
    pub inside: Option<ClassOverride>,
    pub outside: Option<ClassOverride>,
    pub heterogeneity: Heterogeneity,
}

/// Spread of per-recording parameters around the class defaults. Without
/// it every recording of a class is drawn from one process and the classes
/// separate perfectly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Heterogeneity {
    /// SD of the natural log of the firing rate.
    pub rate_log_sd: f64,
    /// SD of the natural log of the spike amplitude.
    pub amplitude_log_sd: f64,
    /// SD of the burst fraction, clipped to [0, 1] after the draw.
    pub burst_sd: f64,
    /// Share of recordings generated from the other class's parameters
    /// while keeping their own label, as at a nucleus border.
    pub border_fraction: f64,
}

impl Heterogeneity {
    pub const NONE: Heterogeneity = Heterogeneity {
        rate_log_sd: 0.0,
        amplitude_log_sd: 0.0,
        burst_sd: 0.0,
        border_fraction: 0.0,
    };
}

impl Default for Heterogeneity {
    fn default() -> Self {
        Self {
            rate_log_sd: 0.4,
            amplitude_log_sd: 0.25,
            burst_sd: 0.12,
            border_fraction: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassOverride {
    pub firing_rate_hz: Option<f64>,
    pub spike_amplitude_sigma: Option<f64>,
    pub burst_fraction: Option<f64>,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            n_inside: 200,
            n_outside: 540,
            duration_s: 8.0,
            fs: 20_000.0,
            background: Background::White,
            patients: 3,
            inside: None,
            outside: None,
            heterogeneity: Heterogeneity::default(),
        }
    }
}

/// A planned corpus entry: metadata and the spec that generates it.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub id: RecordingId,
    pub spec: SurrogateSpec,
}

impl CorpusSpec {
    pub fn len(&self) -> usize {
        self.n_inside + self.n_outside
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn class_defaults(&self, label: Label, seed_value: u64) -> SurrogateSpec {
        let mut spec = SurrogateSpec::for_class(label, self.duration_s, self.fs, seed_value);
        spec.background = self.background;
        let ov = match label {
            Label::InsideStn => self.inside.as_ref(),
            Label::OutsideStn => self.outside.as_ref(),
        };
        if let Some(ov) = ov {
            spec.firing_rate_hz = ov.firing_rate_hz.unwrap_or(spec.firing_rate_hz);
            spec.spike_amplitude_sigma = ov.spike_amplitude_sigma.unwrap_or(spec.spike_amplitude_sigma);
            spec.burst_fraction = ov.burst_fraction.unwrap_or(spec.burst_fraction);
        }
        spec
    }

    /// Whether the `j`-th recording of a class is a border recording; exactly
    /// `floor(n * border_fraction)` of the first `n` are.
    pub fn is_border(&self, j: usize) -> bool {
        let f = self.heterogeneity.border_fraction.clamp(0.0, 1.0);
        ((j + 1) as f64 * f).floor() > (j as f64 * f).floor()
    }

    /// Parameters of one recording labelled `label`: class defaults (of the
    /// other class for a border recording), then log-normal rate and
    /// amplitude spread and Gaussian burst spread.
    pub fn recording_spec(&self, label: Label, border: bool, seed_value: u64) -> SurrogateSpec {
        let h = &self.heterogeneity;
        let mut rng = seed::rng(derive_seed(seed_value, &[tag("heterogeneity")]));
        let source = match (label, border) {
            (l, false) => l,
            (Label::InsideStn, true) => Label::OutsideStn,
            (Label::OutsideStn, true) => Label::InsideStn,
        };
        let mut spec = self.class_defaults(source, seed_value);
        spec.class_label = label;
        let z: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        spec.firing_rate_hz *= (h.rate_log_sd * z[0]).exp();
        spec.spike_amplitude_sigma *= (h.amplitude_log_sd * z[1]).exp();
        spec.burst_fraction = (spec.burst_fraction + h.burst_sd * z[2]).clamp(0.0, 1.0);
        spec
    }

    /// Deterministic corpus plan. Recordings are spread over patients,
    /// hemispheres and depth steps of 0.5 mm; labels interleave so that
    /// any prefix keeps roughly the class ratio.
    pub fn plan(&self, master_seed: u64) -> Vec<CorpusEntry> {
        let total = self.len();
        let patients = self.patients.max(1);
        let mut labels = Vec::with_capacity(total);
        let (mut ins, mut outs) = (0usize, 0usize);
        for k in 0..total {
            // Bresenham-style interleave.
            let want_inside = (k + 1) * self.n_inside / total.max(1);
            if ins < want_inside && ins < self.n_inside {
                labels.push(Label::InsideStn);
                ins += 1;
            } else if outs < self.n_outside {
                labels.push(Label::OutsideStn);
                outs += 1;
            } else {
                labels.push(Label::InsideStn);
                ins += 1;
            }
        }
        let mut class_index = [0usize; 2];
        labels
            .into_iter()
            .enumerate()
            .map(|(k, label)| {
                let seed_k = derive_seed(master_seed, &[tag("surrogate"), k as u64]);
                let j = class_index[label.is_positive() as usize];
                class_index[label.is_positive() as usize] += 1;
                let spec = self.recording_spec(label, self.is_border(j), seed_k);
                let patient = k % patients;
                let step = k / (2 * patients);
                let id = RecordingId {
                    patient_id: format!("P{:02}", patient + 1),
                    hemisphere: if (k / patients) % 2 == 0 { "L" } else { "R" }.to_string(),
                    trajectory_id: "C".to_string(),
                    channel_id: "0".to_string(),
                    depth_mm: -10.0 + 0.5 * step as f64,
                };
                CorpusEntry { id, spec }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_period() {
        let x = gen_test_signal(&TestSignal::from_name("sine", 20_000).unwrap(), 0).unwrap();
        assert_eq!(x.len(), 20_000);
        for i in 0..200 {
            assert!((x[i] - x[i + 20]).abs() < 1e-9);
        }
    }

    #[test]
    fn logistic_orbit_stays_in_unit_interval() {
        let x = gen_test_signal(&TestSignal::LogisticMap { r: 4.0, x0: 0.2, n: 2000 }, 0).unwrap();
        assert!(x.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn noise_is_seeded() {
        let s = TestSignal::GaussianNoise { n: 100, sd: 1.0 };
        assert_eq!(gen_test_signal(&s, 9).unwrap(), gen_test_signal(&s, 9).unwrap());
        assert_ne!(gen_test_signal(&s, 9).unwrap(), gen_test_signal(&s, 10).unwrap());
    }

    #[test]
    fn unknown_kind() {
        assert_eq!(
            TestSignal::from_name("chirp", 10),
            Err(SynthError::UnknownKind("chirp".into()))
        );
    }

    #[test]
    fn template_is_biphasic_unit_peak() {
        let t = spike_template(20_000.0);
        assert_eq!(t.len(), 20);
        let max = t.iter().cloned().fold(f64::MIN, f64::max);
        let min = t.iter().cloned().fold(f64::MAX, f64::min);
        assert!(min < -0.5 && max > 0.5);
        assert!((max.max(-min) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corpus_plan_counts() {
        let plan = CorpusSpec::default().plan(1);
        assert_eq!(plan.len(), 740);
        let inside = plan.iter().filter(|e| e.spec.class_label == Label::InsideStn).count();
        assert_eq!(inside, 200);
        let keys: std::collections::HashSet<String> = plan.iter().map(|e| e.id.key()).collect();
        assert_eq!(keys.len(), 740);
    }

    #[test]
    fn backgrounds_have_unit_sd() {
        let mut rng = seed::rng(3);
        for kind in [Background::White, Background::Pink] {
            let x = background_noise(kind, 4096, 20_000.0, &mut rng);
            let sd = (x.iter().map(|v| v * v).sum::<f64>() / 4096.0).sqrt();
            assert!((sd - 1.0).abs() < 1e-9);
        }
    }
}
