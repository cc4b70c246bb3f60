//! Manifest ingestion: load, preprocess, segment and (optionally) extract
//! features. Recordings are processed independently in parallel; samples
//! are dropped as soon as a recording's windows are done.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::{Manifest, ManifestEntry};
use super::PipelineError;
use crate::features::{extract_features, FeatureConfig, N_FEATURES};
use crate::ml::Dataset;
use crate::preprocess::{preprocess_recording, segment, PreprocessConfig, PreprocessError};
use crate::recording::Label;

/// One analysis window, without its samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub row_id: usize,
    pub recording: String,
    pub patient: String,
    pub window: usize,
    pub start_s: f64,
    pub label: Label,
    pub artifact_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRecording {
    pub recording: String,
    pub reason: String,
}

/// Window accounting for one ingestion.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IngestSummary {
    pub recordings_total: usize,
    pub recordings_used: usize,
    pub rejected: Vec<RejectedRecording>,
    pub windows_total: usize,
    pub windows_inside: usize,
    pub windows_outside: usize,
    pub samples_total: usize,
    pub samples_interpolated: usize,
    pub interpolated_fraction: f64,
    /// Windows with at least one imputed feature.
    pub windows_with_imputed_features: usize,
}

/// Window index plus, when features were extracted, one row of 13 values
/// and an undefined-feature bitmask per window.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub rows: Vec<WindowRow>,
    pub values: Vec<[f64; N_FEATURES]>,
    pub undefined: Vec<u16>,
    pub summary: IngestSummary,
}

impl FeatureTable {
    pub fn has_features(&self) -> bool {
        !self.rows.is_empty() && self.values.len() == self.rows.len()
    }

    /// All 13 columns; labels `true` for InsideSTN; groups are recording keys.
    pub fn dataset(&self) -> Result<Dataset, PipelineError> {
        if !self.has_features() {
            return Err(PipelineError::Data("feature table has no feature values".into()));
        }
        Dataset::new(
            self.values.iter().map(|v| v.to_vec()).collect(),
            self.rows.iter().map(|r| r.label.is_positive()).collect(),
            self.rows.iter().map(|r| r.recording.clone()).collect(),
            self.rows.iter().map(|r| r.row_id).collect(),
        )
        .map_err(PipelineError::from)
    }
}

enum Outcome {
    Used {
        windows: Vec<(WindowRow, Option<([f64; N_FEATURES], u16)>)>,
        samples: usize,
        interpolated: usize,
    },
    Rejected(String),
}

fn process(entry: &ManifestEntry, base: &Path, pre: &PreprocessConfig, feat: Option<&FeatureConfig>) -> Result<Outcome, PipelineError> {
    let rec = Manifest::load_recording(entry, base)?;
    let key = rec.id.key();
    let processed = match preprocess_recording(&rec, &entry.crop_intervals(), pre) {
        Ok(p) => p,
        Err(e @ (PreprocessError::ArtifactRejected { .. } | PreprocessError::ConstantSignal | PreprocessError::TooShort { .. })) => {
            return Ok(Outcome::Rejected(e.to_string()))
        }
        Err(e @ PreprocessError::Config(_)) => return Err(PipelineError::Config(format!("{key}: {e}"))),
        Err(e) => return Err(PipelineError::Data(format!("{key}: {e}"))),
    };
    drop(rec);
    let windows = match segment(&processed.recording, Some(&processed.artifact_mask), pre) {
        Ok(w) => w,
        Err(e @ PreprocessError::TooShort { .. }) => return Ok(Outcome::Rejected(e.to_string())),
        Err(e) => return Err(PipelineError::Data(format!("{key}: {e}"))),
    };
    let rows = windows
        .iter()
        .map(|w| {
            let row = WindowRow {
                row_id: 0,
                recording: key.clone(),
                patient: w.source.patient_id.clone(),
                window: w.index,
                start_s: w.start_s,
                label: w.label,
                artifact_fraction: w.artifact_fraction,
            };
            let values = match feat {
                Some(cfg) => {
                    let fv = extract_features(&w.samples, cfg)
                        .map_err(|e| PipelineError::Data(format!("{key} window {}: {e}", w.index)))?;
                    Some((fv.values(), fv.undefined))
                }
                None => None,
            };
            Ok((row, values))
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    Ok(Outcome::Used {
        windows: rows,
        samples: processed.recording.samples.len(),
        interpolated: processed.interpolated_samples(),
    })
}

/// Ingest every manifest entry. Rows are numbered in manifest order, so the
/// table does not depend on scheduling. Pass `features = None` for the
/// window index alone.
pub fn build_feature_table(
    manifest: &Manifest,
    base: &Path,
    pre: &PreprocessConfig,
    features: Option<&FeatureConfig>,
) -> Result<FeatureTable, PipelineError> {
    if manifest.recordings.is_empty() {
        return Err(PipelineError::Data("manifest lists no recordings".into()));
    }
    let outcomes: Vec<Outcome> = manifest
        .recordings
        .par_iter()
        .map(|e| process(e, base, pre, features))
        .collect::<Result<_, _>>()?;
    let mut table = FeatureTable::default();
    let s = &mut table.summary;
    s.recordings_total = manifest.recordings.len();
    for (entry, outcome) in manifest.recordings.iter().zip(outcomes) {
        match outcome {
            Outcome::Rejected(reason) => {
                log::warn!("rejected {}: {reason}", entry.recording_id().key());
                s.rejected.push(RejectedRecording {
                    recording: entry.recording_id().key(),
                    reason,
                });
            }
            Outcome::Used {
                windows,
                samples,
                interpolated,
            } => {
                s.recordings_used += 1;
                s.samples_total += samples;
                s.samples_interpolated += interpolated;
                for (mut row, values) in windows {
                    row.row_id = table.rows.len();
                    if row.label.is_positive() {
                        s.windows_inside += 1;
                    } else {
                        s.windows_outside += 1;
                    }
                    if let Some((v, u)) = values {
                        table.values.push(v);
                        table.undefined.push(u);
                        s.windows_with_imputed_features += (u != 0) as usize;
                    }
                    table.rows.push(row);
                }
            }
        }
    }
    s.windows_total = table.rows.len();
    s.interpolated_fraction = if s.samples_total > 0 {
        s.samples_interpolated as f64 / s.samples_total as f64
    } else {
        0.0
    };
    if table.rows.is_empty() {
        return Err(PipelineError::Data("no analysis windows survived ingestion".into()));
    }
    Ok(table)
}
