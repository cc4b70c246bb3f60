//! Recording manifest and the surrogate corpus writer.
//!
//! A manifest is a TOML file with one `[[recording]]` table per recording:
//!
//! ```toml
//! [[recording]]
//! edf = "edf/rec_0000.edf"
//! signal = 0
//! patient = "P01"
//! hemisphere = "L"
//! trajectory = "C"
//! channel = "0"
//! depth_mm = -10.0
//! label = "inside"
//! crop = [[0.0, 8.0]]
//! ```
//!
//! Relative `edf` paths resolve against the manifest's directory.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::edf::{self, EdfHeader, SignalHeader};
use crate::preprocess::CropInterval;
use crate::recording::{Label, Recording, RecordingId};
use crate::synth::{gen_surrogate_mer, CorpusSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub edf: PathBuf,
    #[serde(default)]
    pub signal: usize,
    pub patient: String,
    pub hemisphere: String,
    pub trajectory: String,
    pub channel: String,
    pub depth_mm: f64,
    pub label: Label,
    /// Intervals to keep, in seconds; empty keeps everything.
    #[serde(default)]
    pub crop: Vec<[f64; 2]>,
}

impl ManifestEntry {
    pub fn recording_id(&self) -> RecordingId {
        RecordingId {
            patient_id: self.patient.clone(),
            hemisphere: self.hemisphere.clone(),
            trajectory_id: self.trajectory.clone(),
            channel_id: self.channel.clone(),
            depth_mm: self.depth_mm,
        }
    }

    pub fn crop_intervals(&self) -> Vec<CropInterval> {
        self.crop.iter().map(|&[a, b]| CropInterval::from((a, b))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// Seed the corpus was generated with, if synthetic. Kept as text
    /// because TOML integers are signed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_seed: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, rename = "recording")]
    pub recordings: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let m: Manifest = toml::from_str(&text).map_err(|e| PipelineError::Config(format!("manifest {}: {e}", path.display())))?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        let text = toml::to_string(self).map_err(|e| PipelineError::Config(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| PipelineError::io(path, e))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let mut keys = std::collections::HashSet::new();
        for (i, e) in self.recordings.iter().enumerate() {
            if !keys.insert(e.recording_id().key()) {
                return Err(PipelineError::Config(format!(
                    "manifest entry {i}: duplicate recording {}",
                    e.recording_id().key()
                )));
            }
            if e.crop.iter().any(|[a, b]| !(a.is_finite() && b.is_finite() && b > a)) {
                return Err(PipelineError::Config(format!("manifest entry {i}: malformed crop interval")));
            }
        }
        Ok(())
    }

    /// Load the recording of entry `entry`, resolving its EDF path against `base`.
    pub fn load_recording(entry: &ManifestEntry, base: &Path) -> Result<Recording, PipelineError> {
        let path = if entry.edf.is_absolute() {
            entry.edf.clone()
        } else {
            base.join(&entry.edf)
        };
        let file = edf::read_edf_file(&path).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
        let samples = file.signals.get(entry.signal).cloned().ok_or_else(|| {
            PipelineError::Data(format!(
                "{}: signal {} requested, file has {}",
                path.display(),
                entry.signal,
                file.signals.len()
            ))
        })?;
        Ok(Recording {
            id: entry.recording_id(),
            samples,
            fs: file.header.sample_rate(entry.signal),
            label: entry.label,
        })
    }
}

/// Physical range symmetric about zero, wide enough for `samples`, written
/// as an integer so that it fits the 8-character header field.
fn physical_bound(samples: &[f64]) -> f64 {
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (peak * 1.01).ceil().max(1.0)
}

/// Single-signal EDF image of a recording, in 1 s data records.
pub fn recording_to_edf(rec: &Recording) -> Result<Vec<u8>, PipelineError> {
    let fs = rec.fs.round() as usize;
    if fs == 0 || rec.samples.len() % fs != 0 {
        return Err(PipelineError::Data(format!(
            "recording {} is not a whole number of seconds at {} Hz",
            rec.id.key(),
            rec.fs
        )));
    }
    let bound = physical_bound(&rec.samples);
    let signal = SignalHeader {
        label: format!("MER {}", rec.id.channel_id),
        transducer: "microelectrode".into(),
        physical_dim: "uV".into(),
        physical_min: -bound,
        physical_max: bound,
        digital_min: -32768,
        digital_max: 32767,
        prefiltering: String::new(),
        samples_per_record: fs,
    };
    let header = EdfHeader::new(&rec.id.patient_id, &rec.id.key(), rec.samples.len() / fs, 1.0, vec![signal]);
    edf::write_edf(&header, std::slice::from_ref(&rec.samples)).map_err(|e| PipelineError::Data(e.to_string()))
}

/// Generate a surrogate corpus into `dir` (`edf/rec_NNNN.edf` plus
/// `manifest.toml`) and return its manifest.
pub fn write_surrogate_corpus(dir: &Path, spec: &CorpusSpec, seed: u64) -> Result<Manifest, PipelineError> {
    let edf_dir = dir.join("edf");
    std::fs::create_dir_all(&edf_dir).map_err(|e| PipelineError::io(&edf_dir, e))?;
    let plan = spec.plan(seed);
    let entries: Vec<ManifestEntry> = plan
        .par_iter()
        .enumerate()
        .map(|(k, entry)| {
            let rec = gen_surrogate_mer(&entry.spec, entry.id.clone()).map_err(|e| PipelineError::Config(e.to_string()))?;
            let bytes = recording_to_edf(&rec)?;
            let rel = PathBuf::from("edf").join(format!("rec_{k:04}.edf"));
            let path = dir.join(&rel);
            std::fs::write(&path, bytes).map_err(|e| PipelineError::io(&path, e))?;
            Ok(ManifestEntry {
                edf: rel,
                signal: 0,
                patient: rec.id.patient_id.clone(),
                hemisphere: rec.id.hemisphere.clone(),
                trajectory: rec.id.trajectory_id.clone(),
                channel: rec.id.channel_id.clone(),
                depth_mm: rec.id.depth_mm,
                label: rec.label,
                crop: Vec::new(),
            })
        })
        .collect::<Result<_, PipelineError>>()?;
    let manifest = Manifest {
        generator_seed: Some(seed.to_string()),
        generator: Some("surrogate MER, ChaCha8".into()),
        recordings: entries,
    };
    manifest.save(&dir.join("manifest.toml"))?;
    Ok(manifest)
}
