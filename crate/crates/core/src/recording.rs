//! Recording data model shared by ingestion, preprocessing and synthesis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Anatomical label of a depth step. `InsideStn` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "inside")]
    InsideStn,
    #[serde(rename = "outside")]
    OutsideStn,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::InsideStn
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::InsideStn => "inside",
            Label::OutsideStn => "outside",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inside" | "inside_stn" | "1" => Ok(Label::InsideStn),
            "outside" | "outside_stn" | "0" => Ok(Label::OutsideStn),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Identifies where a recording came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingId {
    pub patient_id: String,
    pub hemisphere: String,
    pub trajectory_id: String,
    pub channel_id: String,
    pub depth_mm: f64,
}

impl RecordingId {
    /// Stable textual key, used for grouping and file names.
    pub fn key(&self) -> String {
        format!(
            "{}_{}_{}_{}_{:+.2}",
            self.patient_id, self.hemisphere, self.trajectory_id, self.channel_id, self.depth_mm
        )
    }
}

/// One channel at one depth step.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub id: RecordingId,
    /// Samples in microvolts.
    pub samples: Vec<f64>,
    pub fs: f64,
    pub label: Label,
}

impl Recording {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }
}
