//! Nonlinear-feature classification of microelectrode recordings.
//!
//! The crate covers the whole path from EDF ingestion to the statistically
//! validated choice of feature group and classifier:
//!
//! * [`edf`]: baseline EDF reader/writer.
//! * [`preprocess`]: band-pass, artifact repair, normalization, windowing.
//! * [`features`]: recurrence, nonlinear-dynamics and entropy descriptors.
//! * [`synth`]: oracle signals and a two-class surrogate corpus.
//! * [`ml`]: classifiers, stratified folds and evaluation metrics.
//! * [`stats`]: Wilcoxon signed-rank, Holm correction, bootstrap intervals.
//! * [`pipeline`]: the end-to-end protocol and its reports.

pub mod edf;
pub mod features;
pub mod ml;
pub mod pipeline;
pub mod preprocess;
pub mod recording;
pub mod seed;
pub mod stats;
pub mod synth;

pub use recording::{Label, Recording, RecordingId};
