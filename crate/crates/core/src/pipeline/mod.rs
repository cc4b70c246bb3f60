//! The end-to-end protocol: ingestion, hold-out split, cross-validation
//! grid over feature groups and classifiers, two-stage paired selection,
//! hold-out evaluation and report emission.
//!
//! Every stage is a deterministic function of the [`RunConfig`] and its
//! master seed. Stages exchange data through files in the output
//! directory (see [`report`] for the file set), so they can run one at a
//! time from the CLI or back to back through [`run_all`].

mod config;
mod grid;
mod groups;
mod holdout;
mod ingest;
mod manifest;
pub mod report;
mod select;
mod split;

pub use config::RunConfig;
pub use grid::{run_cv_grid, EvalRecord};
pub use groups::{enumerate_feature_groups, FeatureGroup};
pub use holdout::{assert_disjoint, final_holdout_eval, HoldoutMetric, HoldoutReport};
pub use ingest::{build_feature_table, FeatureTable, IngestSummary, RejectedRecording, WindowRow};
pub use manifest::{recording_to_edf, write_surrogate_corpus, Manifest, ManifestEntry};
pub use select::{select_classifier, select_feature_group, ComparisonReport, ComparisonRow, Selection};
pub use split::{split_holdout, HoldoutSplit};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ml::MlError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("leakage: {0}")]
    Leakage(String),
    #[error("statistical degeneracy: {0}")]
    Degenerate(String),
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code: 2 configuration, 3 data, 4 statistical degeneracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Data(_) | PipelineError::Io { .. } | PipelineError::Leakage(_) => 3,
            PipelineError::Degenerate(_) => 4,
        }
    }
}

impl From<MlError> for PipelineError {
    fn from(e: MlError) -> Self {
        match e {
            MlError::Spec(_) => PipelineError::Config(e.to_string()),
            _ => PipelineError::Data(e.to_string()),
        }
    }
}

/// Outcome of [`run_all`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: IngestSummary,
    pub selection: Selection,
    pub holdout: HoldoutReport,
    pub n_eval_records: usize,
}

impl RunConfig {
    /// The configured manifest, or the one `synth` writes under the output
    /// directory.
    pub fn manifest_path(&self) -> PathBuf {
        self.manifest
            .clone()
            .unwrap_or_else(|| self.output_dir.join(report::CORPUS_DIR).join("manifest.toml"))
    }
}

fn load_manifest(config: &RunConfig) -> Result<(Manifest, PathBuf), PipelineError> {
    let path = config.manifest_path();
    if !path.exists() {
        return Err(PipelineError::Data(format!(
            "manifest {} not found (run `synth` or set `manifest`)",
            path.display()
        )));
    }
    let m = Manifest::load(&path)?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    Ok((m, base))
}

/// Generate the surrogate corpus under the output directory.
pub fn stage_synth(config: &RunConfig) -> Result<Manifest, PipelineError> {
    let dir = config.output_dir.join(report::CORPUS_DIR);
    write_surrogate_corpus(&dir, &config.synth, config.corpus_seed())
}

/// Preprocess and segment; writes the window index and ingestion summary.
pub fn stage_ingest(config: &RunConfig) -> Result<IngestSummary, PipelineError> {
    let (manifest, base) = load_manifest(config)?;
    report::ensure_dir(&config.output_dir)?;
    let table = build_feature_table(&manifest, &base, &config.preprocess, None)?;
    report::write_windows(&config.output_dir, &table)?;
    report::write_json(&config.output_dir, report::INGEST_SUMMARY, &table.summary)?;
    Ok(table.summary)
}

/// Extract features for every window. Windows are re-derived from the
/// recordings; an existing window index must agree with them.
pub fn stage_features(config: &RunConfig) -> Result<FeatureTable, PipelineError> {
    let (manifest, base) = load_manifest(config)?;
    let out = &config.output_dir;
    report::ensure_dir(out)?;
    let table = build_feature_table(&manifest, &base, &config.preprocess, Some(&config.features))?;
    if out.join(report::WINDOWS).exists() && report::read_windows(out)? != table.rows {
        return Err(PipelineError::Data(format!(
            "{} does not match the manifest and preprocessing settings; rerun ingest",
            out.join(report::WINDOWS).display()
        )));
    }
    report::write_windows(out, &table)?;
    report::write_json(out, report::INGEST_SUMMARY, &table.summary)?;
    report::write_features(out, &table)?;
    Ok(table)
}

/// Hold-out split and cross-validation grid.
pub fn stage_cv(config: &RunConfig) -> Result<Vec<EvalRecord>, PipelineError> {
    let out = &config.output_dir;
    let data = report::read_features(out)?.dataset()?;
    let split = split_holdout(&data, config.train_fraction, config.split_seed(), config.grouped_split)?;
    let train = data.subset(&split.train);
    let folds = grid::cv_folds(&train, config.k_folds, config.fold_seed())?;
    report::write_split(out, &data, &split, Some(&folds))?;
    let records = run_cv_grid(&train, &enumerate_feature_groups(), &config.roster(), config.k_folds, config.fold_seed())?;
    report::write_eval_records(out, &records)?;
    Ok(records)
}

/// Both selection stages from the written ledger.
pub fn stage_select(config: &RunConfig) -> Result<Selection, PipelineError> {
    let records = report::read_eval_records(&config.output_dir)?;
    let selection = select_all(&records, config)?;
    report::write_selection(&config.output_dir, &selection, config.alpha)?;
    Ok(selection)
}

/// Retrain the selected pipeline and evaluate it on the hold-out rows.
pub fn stage_holdout(config: &RunConfig) -> Result<HoldoutReport, PipelineError> {
    let out = &config.output_dir;
    let data = report::read_features(out)?.dataset()?;
    let split = report::read_split(out, &data)?;
    let selection: Selection = report::read_json(out, report::SELECTION)?;
    run_holdout(&data, &split, &selection, config, out)
}

/// Summary text and the run manifest, from the files of earlier stages.
pub fn stage_report(config: &RunConfig) -> Result<(), PipelineError> {
    let out = &config.output_dir;
    let summary: IngestSummary = report::read_json(out, report::INGEST_SUMMARY)?;
    let selection: Selection = report::read_json(out, report::SELECTION)?;
    let holdout: HoldoutReport = report::read_json(out, report::HOLDOUT_JSON)?;
    let n_records = report::read_eval_records(out)?.len();
    report::write_summary(out, config, &summary, &selection, &holdout, n_records)?;
    report::write_run_manifest(out, config, &config.manifest_path(), Some(&summary))
}

/// Run the whole protocol. Without a manifest in `config`, a surrogate
/// corpus is generated into `<output_dir>/corpus` first.
pub fn run_all(config: &RunConfig) -> Result<RunOutcome, PipelineError> {
    report::ensure_dir(&config.output_dir)?;
    if config.manifest.is_none() {
        stage_synth(config)?;
    }
    // A window index from an earlier run is superseded, not checked.
    let stale = config.output_dir.join(report::WINDOWS);
    if stale.exists() {
        std::fs::remove_file(&stale).map_err(|e| PipelineError::io(&stale, e))?;
    }
    let table = stage_features(config)?;
    let records = stage_cv(config)?;
    let selection = stage_select(config)?;
    let holdout = stage_holdout(config)?;
    stage_report(config)?;
    Ok(RunOutcome {
        summary: table.summary,
        selection,
        holdout,
        n_eval_records: records.len(),
    })
}

/// Both selection stages over a complete ledger.
pub fn select_all(records: &[EvalRecord], config: &RunConfig) -> Result<Selection, PipelineError> {
    let roster = config.roster();
    let combos = enumerate_feature_groups();
    grid::check_complete(records, &combos, &roster, config.k_folds)?;
    let stage1 = select_feature_group(records, &combos, config.alpha)?;
    let stage2 = select_classifier(records, stage1.winner, &roster, config.alpha)?;
    Ok(Selection {
        feature_group: stage1.winner,
        model: stage2.best,
        stage1: stage1.report,
        stage2: stage2.report,
        stage2_folds: stage2.folds,
    })
}

/// Retrain the selected pipeline on the training split, evaluate it on the
/// hold-out rows and write the model and hold-out reports.
pub fn run_holdout(
    data: &crate::ml::Dataset,
    split: &HoldoutSplit,
    selection: &Selection,
    config: &RunConfig,
    out: &Path,
) -> Result<HoldoutReport, PipelineError> {
    let spec = config
        .roster()
        .into_iter()
        .find(|s| s.kind == selection.model)
        .ok_or_else(|| PipelineError::Config(format!("selected model {} is not in the roster", selection.model)))?;
    let train = data.subset(&split.train);
    let test = data.subset(&split.test);
    let (report, model) = final_holdout_eval(
        &spec,
        selection.feature_group,
        &train,
        &test,
        config.bootstrap_resamples,
        config.ci_level,
        config.bootstrap_seed(),
    )?;
    model
        .save(&out.join(report::MODEL_FILE))
        .map_err(|e| PipelineError::Data(e.to_string()))?;
    report::write_holdout(out, &report)?;
    Ok(report)
}
