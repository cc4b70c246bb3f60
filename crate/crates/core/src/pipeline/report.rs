//! Output files. Everything except `run_manifest.json` is a deterministic
//! function of the configuration and master seed; the run manifest holds
//! the only timestamp.
//!
//! | file | written by |
//! |---|---|
//! | `corpus/manifest.toml`, `corpus/edf/*.edf` | synth |
//! | `windows.csv`, `ingest_summary.json` | ingest |
//! | `features.csv` | features |
//! | `split.csv`, `eval_records.csv` | cv |
//! | `selection.json`, `stage1_feature_groups.{csv,txt}`, `stage2_classifiers.{csv,txt}`, `stage2_fold_metrics.csv` | select |
//! | `model.json`, `holdout.{csv,txt,json}`, `roc_points.csv` | holdout |
//! | `summary.txt`, `run_manifest.json` | report |
//!
//! Floats in CSV files use the shortest representation that parses back
//! to the same value.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::grid::EvalRecord;
use super::holdout::HoldoutReport;
use super::ingest::{FeatureTable, IngestSummary, WindowRow};
use super::select::{ComparisonReport, Selection};
use super::split::HoldoutSplit;
use super::{PipelineError, RunConfig};
use crate::features::{FEATURE_NAMES, N_FEATURES};
use crate::ml::{Dataset, Metric, MetricSet, UndefinedMetrics};
use crate::recording::Label;

pub const CORPUS_DIR: &str = "corpus";
pub const WINDOWS: &str = "windows.csv";
pub const INGEST_SUMMARY: &str = "ingest_summary.json";
pub const FEATURES: &str = "features.csv";
pub const SPLIT: &str = "split.csv";
pub const EVAL_RECORDS: &str = "eval_records.csv";
pub const SELECTION: &str = "selection.json";
pub const STAGE1_CSV: &str = "stage1_feature_groups.csv";
pub const STAGE1_TXT: &str = "stage1_feature_groups.txt";
pub const STAGE2_CSV: &str = "stage2_classifiers.csv";
pub const STAGE2_TXT: &str = "stage2_classifiers.txt";
pub const STAGE2_FOLDS: &str = "stage2_fold_metrics.csv";
pub const MODEL_FILE: &str = "model.json";
pub const HOLDOUT_CSV: &str = "holdout.csv";
pub const HOLDOUT_TXT: &str = "holdout.txt";
pub const HOLDOUT_JSON: &str = "holdout.json";
pub const ROC_POINTS: &str = "roc_points.csv";
pub const SUMMARY: &str = "summary.txt";
pub const RUN_MANIFEST: &str = "run_manifest.json";

/// Files whose bytes depend only on configuration and seed.
pub const DETERMINISTIC_FILES: [&str; 18] = [
    WINDOWS,
    INGEST_SUMMARY,
    FEATURES,
    SPLIT,
    EVAL_RECORDS,
    SELECTION,
    STAGE1_CSV,
    STAGE1_TXT,
    STAGE2_CSV,
    STAGE2_TXT,
    STAGE2_FOLDS,
    MODEL_FILE,
    HOLDOUT_CSV,
    HOLDOUT_TXT,
    HOLDOUT_JSON,
    ROC_POINTS,
    SUMMARY,
    "corpus/manifest.toml",
];

pub fn ensure_dir(dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))
}

fn csv_err(path: &Path, e: csv::Error) -> PipelineError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => PipelineError::io(path, io),
        other => PipelineError::Data(format!("{}: {other:?}", path.display())),
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| PipelineError::io(path, e))
}

fn read_csv(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>, PipelineError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let got = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(PipelineError::Data(format!("{}: unexpected columns", path.display())));
    }
    r.records().map(|rec| rec.map_err(|e| csv_err(path, e))).collect()
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<T, PipelineError> {
    let line = rec.position().map_or(0, |p| p.line());
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| PipelineError::Data(format!("{} line {line}: bad value in column {}", path.display(), i + 1)))
}

fn text(path: &Path, contents: &str) -> Result<(), PipelineError> {
    std::fs::write(path, contents).map_err(|e| PipelineError::io(path, e))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), PipelineError> {
    let path = dir.join(name);
    let mut s = serde_json::to_string_pretty(value).map_err(|e| PipelineError::Data(e.to_string()))?;
    s.push('\n');
    text(&path, &s)
}

pub fn read_json<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T, PipelineError> {
    let path = dir.join(name);
    let s = std::fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
    serde_json::from_str(&s).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
}

const WINDOW_COLUMNS: [&str; 7] = ["row_id", "recording", "patient", "window", "start_s", "label", "artifact_fraction"];

fn window_fields(r: &WindowRow) -> Vec<String> {
    vec![
        r.row_id.to_string(),
        r.recording.clone(),
        r.patient.clone(),
        r.window.to_string(),
        r.start_s.to_string(),
        r.label.as_str().to_string(),
        r.artifact_fraction.to_string(),
    ]
}

fn parse_window(path: &Path, rec: &csv::StringRecord) -> Result<WindowRow, PipelineError> {
    Ok(WindowRow {
        row_id: field(path, rec, 0)?,
        recording: field(path, rec, 1)?,
        patient: field(path, rec, 2)?,
        window: field(path, rec, 3)?,
        start_s: field(path, rec, 4)?,
        label: field::<Label>(path, rec, 5)?,
        artifact_fraction: field(path, rec, 6)?,
    })
}

pub fn write_windows(dir: &Path, table: &FeatureTable) -> Result<(), PipelineError> {
    write_csv(&dir.join(WINDOWS), &WINDOW_COLUMNS, table.rows.iter().map(window_fields))
}

pub fn read_windows(dir: &Path) -> Result<Vec<WindowRow>, PipelineError> {
    let path = dir.join(WINDOWS);
    read_csv(&path, &WINDOW_COLUMNS)?.iter().map(|r| parse_window(&path, r)).collect()
}

fn feature_columns() -> Vec<&'static str> {
    let mut c = WINDOW_COLUMNS.to_vec();
    c.extend(FEATURE_NAMES);
    c.push("undefined_mask");
    c
}

pub fn write_features(dir: &Path, table: &FeatureTable) -> Result<(), PipelineError> {
    if !table.has_features() {
        return Err(PipelineError::Data("no feature values to write".into()));
    }
    let rows = table.rows.iter().zip(&table.values).zip(&table.undefined).map(|((r, v), u)| {
        let mut f = window_fields(r);
        f.extend(v.iter().map(f64::to_string));
        f.push(u.to_string());
        f
    });
    write_csv(&dir.join(FEATURES), &feature_columns(), rows)
}

/// Feature matrix as written by [`write_features`]; the summary is loaded
/// from `ingest_summary.json` when present.
pub fn read_features(dir: &Path) -> Result<FeatureTable, PipelineError> {
    let path = dir.join(FEATURES);
    let mut table = FeatureTable::default();
    for rec in read_csv(&path, &feature_columns())? {
        table.rows.push(parse_window(&path, &rec)?);
        let mut v = [0.0; N_FEATURES];
        for (j, slot) in v.iter_mut().enumerate() {
            *slot = field(&path, &rec, WINDOW_COLUMNS.len() + j)?;
        }
        table.values.push(v);
        table.undefined.push(field(&path, &rec, WINDOW_COLUMNS.len() + N_FEATURES)?);
    }
    if dir.join(INGEST_SUMMARY).exists() {
        table.summary = read_json(dir, INGEST_SUMMARY)?;
    }
    Ok(table)
}

const SPLIT_COLUMNS: [&str; 5] = ["row_id", "recording", "label", "set", "fold"];

/// `folds` gives the CV fold of each training row, in `split.train` order.
pub fn write_split(dir: &Path, data: &Dataset, split: &HoldoutSplit, folds: Option<&[usize]>) -> Result<(), PipelineError> {
    let mut rows: Vec<(usize, Vec<String>)> = Vec::with_capacity(data.len());
    for (side, idx) in [("train", &split.train), ("test", &split.test)] {
        for (j, &i) in idx.iter().enumerate() {
            let fold = match (side, folds) {
                ("train", Some(f)) => f[j].to_string(),
                _ => String::new(),
            };
            let label = if data.labels[i] { Label::InsideStn } else { Label::OutsideStn };
            rows.push((
                data.row_ids[i],
                vec![
                    data.row_ids[i].to_string(),
                    data.groups[i].clone(),
                    label.as_str().into(),
                    side.into(),
                    fold,
                ],
            ));
        }
    }
    rows.sort_by_key(|r| r.0);
    write_csv(&dir.join(SPLIT), &SPLIT_COLUMNS, rows.into_iter().map(|r| r.1))
}

/// Split of `data` as recorded in `split.csv`, matched by row id.
pub fn read_split(dir: &Path, data: &Dataset) -> Result<HoldoutSplit, PipelineError> {
    let path = dir.join(SPLIT);
    let position: std::collections::HashMap<usize, usize> = data.row_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut split = HoldoutSplit {
        train: Vec::new(),
        test: Vec::new(),
    };
    for rec in read_csv(&path, &SPLIT_COLUMNS)? {
        let id: usize = field(&path, &rec, 0)?;
        let i = *position
            .get(&id)
            .ok_or_else(|| PipelineError::Data(format!("{}: row {id} not in the feature matrix", path.display())))?;
        match rec.get(3) {
            Some("train") => split.train.push(i),
            Some("test") => split.test.push(i),
            _ => return Err(PipelineError::Data(format!("{}: row {id} has no set", path.display()))),
        }
    }
    if split.train.len() + split.test.len() != data.len() {
        return Err(PipelineError::Data(format!("{} does not cover the feature matrix", path.display())));
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

const METRIC_COLUMNS: [&str; 8] = [
    "accuracy",
    "precision",
    "recall",
    "f1",
    "roc_auc",
    "precision_undefined",
    "recall_undefined",
    "roc_auc_undefined",
];

fn metric_fields(m: &MetricSet) -> Vec<String> {
    let flag = |b: bool| (b as u8).to_string();
    vec![
        m.accuracy.to_string(),
        m.precision.to_string(),
        m.recall.to_string(),
        m.f1.to_string(),
        m.roc_auc.to_string(),
        flag(m.undefined.precision),
        flag(m.undefined.recall),
        flag(m.undefined.roc_auc),
    ]
}

fn parse_metrics(path: &Path, rec: &csv::StringRecord, at: usize) -> Result<MetricSet, PipelineError> {
    let flag = |i: usize| field::<u8>(path, rec, at + i).map(|v| v != 0);
    Ok(MetricSet {
        accuracy: field(path, rec, at)?,
        precision: field(path, rec, at + 1)?,
        recall: field(path, rec, at + 2)?,
        f1: field(path, rec, at + 3)?,
        roc_auc: field(path, rec, at + 4)?,
        undefined: UndefinedMetrics {
            precision: flag(5)?,
            recall: flag(6)?,
            roc_auc: flag(7)?,
        },
    })
}

fn eval_columns() -> Vec<&'static str> {
    let mut c = vec!["combo", "model", "fold", "n_train", "n_test"];
    c.extend(METRIC_COLUMNS);
    c
}

pub fn write_eval_records(dir: &Path, records: &[EvalRecord]) -> Result<(), PipelineError> {
    let rows = records.iter().map(|r| {
        let mut f = vec![
            r.combo.name(),
            r.model.name().into(),
            r.fold.to_string(),
            r.n_train.to_string(),
            r.n_test.to_string(),
        ];
        f.extend(metric_fields(&r.metrics));
        f
    });
    write_csv(&dir.join(EVAL_RECORDS), &eval_columns(), rows)
}

pub fn read_eval_records(dir: &Path) -> Result<Vec<EvalRecord>, PipelineError> {
    let path = dir.join(EVAL_RECORDS);
    read_csv(&path, &eval_columns())?
        .iter()
        .map(|rec| {
            Ok(EvalRecord {
                combo: field(&path, rec, 0)?,
                model: field(&path, rec, 1)?,
                fold: field(&path, rec, 2)?,
                n_train: field(&path, rec, 3)?,
                n_test: field(&path, rec, 4)?,
                metrics: parse_metrics(&path, rec, 5)?,
            })
        })
        .collect()
}

const COMPARISON_COLUMNS: [&str; 14] = [
    "reference",
    "alternative",
    "metric",
    "mean_reference",
    "mean_alternative",
    "n_pairs",
    "n_nonzero",
    "w",
    "w_plus",
    "w_minus",
    "exact",
    "p",
    "p_holm",
    "significant",
];

fn write_comparison_csv(path: &Path, report: &ComparisonReport) -> Result<(), PipelineError> {
    let rows = report.rows.iter().map(|r| {
        vec![
            report.reference.clone(),
            r.alternative.clone(),
            r.metric.name().into(),
            r.mean_reference.to_string(),
            r.mean_alternative.to_string(),
            report.n_pairs.to_string(),
            r.n_nonzero.to_string(),
            r.w.to_string(),
            r.w_plus.to_string(),
            r.w_minus.to_string(),
            (r.exact as u8).to_string(),
            r.p.to_string(),
            r.p_holm.to_string(),
            (r.significant as u8).to_string(),
        ]
    });
    write_csv(path, &COMPARISON_COLUMNS, rows)
}

/// Fixed-width comparison table; `*` marks Holm-corrected p below `alpha`.
pub fn comparison_text(title: &str, unit: &str, report: &ComparisonReport, alpha: f64) -> String {
    let n_alt = report.rows.len() / Metric::ALL.len().max(1);
    let mut s = String::new();
    let _ = writeln!(s, "{title}");
    let _ = writeln!(
        s,
        "reference {} vs {n_alt} alternatives, {} paired {unit} each",
        report.reference, report.n_pairs
    );
    let _ = writeln!(
        s,
        "two-sided Wilcoxon signed-rank; Holm-Bonferroni per metric across alternatives; * corrected p < {alpha}"
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "selection score (mean of mean F1 and mean ROC AUC)");
    for (name, score) in &report.scores {
        let mark = if *name == report.reference { "  <- reference" } else { "" };
        let _ = writeln!(s, "  {name:<14}{score:.4}{mark}");
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<14}{:<11}{:>9}{:>9}{:>6}{:>9}{:>11}{:>11}",
        "alternative", "metric", "mean_ref", "mean_alt", "n_nz", "W", "p", "p_holm"
    );
    for r in &report.rows {
        let mark = if r.significant { " *" } else { "" };
        let note = if r.degenerate.is_some() { " (degenerate)" } else { "" };
        let _ = writeln!(
            s,
            "{:<14}{:<11}{:>9.4}{:>9.4}{:>6}{:>9.1}{:>11.3e}{:>11.3e}{mark}{note}",
            r.alternative,
            r.metric.name(),
            r.mean_reference,
            r.mean_alternative,
            r.n_nonzero,
            r.w,
            r.p,
            r.p_holm
        );
    }
    s
}

pub fn write_selection(dir: &Path, selection: &Selection, alpha: f64) -> Result<(), PipelineError> {
    write_json(dir, SELECTION, selection)?;
    write_comparison_csv(&dir.join(STAGE1_CSV), &selection.stage1)?;
    write_comparison_csv(&dir.join(STAGE2_CSV), &selection.stage2)?;
    text(
        &dir.join(STAGE1_TXT),
        &comparison_text("Stage 1: feature-group comparison", "(model, fold) values", &selection.stage1, alpha),
    )?;
    text(
        &dir.join(STAGE2_TXT),
        &comparison_text(
            &format!("Stage 2: classifier comparison within {}", selection.feature_group),
            "folds",
            &selection.stage2,
            alpha,
        ),
    )?;
    let mut header = vec!["model", "fold"];
    header.extend(METRIC_COLUMNS);
    let rows = selection.stage2_folds.iter().map(|f| {
        let mut r = vec![f.model.name().to_string(), f.fold.to_string()];
        r.extend(metric_fields(&f.metrics));
        r
    });
    write_csv(&dir.join(STAGE2_FOLDS), &header, rows)
}

fn percent(q: f64) -> String {
    let p = 100.0 * q;
    if (p - p.round()).abs() < 1e-9 {
        format!("{}%", p.round())
    } else {
        format!("{p:.1}%")
    }
}

pub fn holdout_text(r: &HoldoutReport) -> String {
    let tail = (1.0 - r.ci_level) / 2.0;
    let (lo, hi) = (percent(tail), percent(1.0 - tail));
    let mut s = String::new();
    let _ = writeln!(s, "Hold-out evaluation: {} on {}", r.model, r.feature_group);
    let _ = writeln!(
        s,
        "retrained on {} training rows; {} test rows ({} InsideSTN, positive class)",
        r.n_train, r.n_test, r.n_test_positive
    );
    let n = r.intervals.iter().find_map(|m| m.ci.as_ref()).map_or(0, |c| c.n_resamples);
    let _ = writeln!(s, "percentile bootstrap over test rows, {n} resamples");
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<11}{:>9}{:>9}{:>9}{:>9}", "metric", "value", "mean", lo, hi);
    for m in &r.intervals {
        match &m.ci {
            Some(ci) => {
                let _ = writeln!(
                    s,
                    "{:<11}{:>9.4}{:>9.4}{:>9.4}{:>9.4}",
                    m.metric.name(),
                    m.estimate,
                    ci.mean,
                    ci.lo,
                    ci.hi
                );
            }
            None => {
                let _ = writeln!(s, "{:<11}{:>9.4}  undefined on the hold-out set", m.metric.name(), m.estimate);
            }
        }
    }
    s
}

pub fn write_holdout(dir: &Path, report: &HoldoutReport) -> Result<(), PipelineError> {
    write_json(dir, HOLDOUT_JSON, report)?;
    text(&dir.join(HOLDOUT_TXT), &holdout_text(report))?;
    let rows = report.intervals.iter().map(|m| {
        let opt = |f: fn(&crate::stats::BootstrapCi) -> f64| m.ci.as_ref().map_or(String::new(), |c| f(c).to_string());
        vec![
            m.metric.name().to_string(),
            m.estimate.to_string(),
            (m.undefined as u8).to_string(),
            opt(|c| c.mean),
            opt(|c| c.lo),
            opt(|c| c.hi),
            m.ci.as_ref().map_or(String::new(), |c| c.redraws.to_string()),
        ]
    });
    write_csv(
        &dir.join(HOLDOUT_CSV),
        &["metric", "value", "undefined", "mean", "ci_lo", "ci_hi", "redraws"],
        rows,
    )?;
    write_csv(
        &dir.join(ROC_POINTS),
        &["fpr", "tpr", "threshold"],
        report.roc.iter().map(|&(f, t, th)| vec![f.to_string(), t.to_string(), th.to_string()]),
    )
}

/// Plain-text overview of a finished run.
pub fn write_summary(
    dir: &Path,
    config: &RunConfig,
    summary: &IngestSummary,
    selection: &Selection,
    holdout: &HoldoutReport,
    n_records: usize,
) -> Result<(), PipelineError> {
    let mut s = String::new();
    let _ = writeln!(s, "stnmer run summary (master seed {})", config.master_seed);
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "recordings: {} listed, {} used, {} rejected",
        summary.recordings_total,
        summary.recordings_used,
        summary.rejected.len()
    );
    let _ = writeln!(
        s,
        "windows: {} ({} InsideSTN, {} OutsideSTN)",
        summary.windows_total, summary.windows_inside, summary.windows_outside
    );
    let _ = writeln!(
        s,
        "interpolated samples: {} of {} ({:.4}%)",
        summary.samples_interpolated,
        summary.samples_total,
        100.0 * summary.interpolated_fraction
    );
    let _ = writeln!(s, "windows with an imputed feature: {}", summary.windows_with_imputed_features);
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "cross-validation: {} records ({} folds), shared fold assignment",
        n_records, config.k_folds
    );
    let _ = writeln!(s, "selected feature group: {}", selection.feature_group);
    let _ = writeln!(s, "selected classifier: {}", selection.model);
    let _ = writeln!(s);
    s.push_str(&holdout_text(holdout));
    if !config.grouped_split {
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "note: the hold-out split is stratified at the window level. Windows of one recording overlap and"
        );
        let _ = writeln!(
            s,
            "can fall on both sides, so hold-out scores are optimistic; set grouped_split = true to keep recordings whole."
        );
    }
    text(&dir.join(SUMMARY), &s)
}

/// Choices in effect, recorded in the run manifest.
pub fn design_decisions(config: &RunConfig) -> Vec<String> {
    vec![
        "positive class: InsideSTN".into(),
        if config.grouped_split {
            "hold-out split: stratified, whole recordings assigned to one side".into()
        } else {
            "hold-out split: stratified per class at window level, round(n_class * train_fraction) to training".into()
        },
        "folds: stratified, computed once on the training split and shared by every (group, model) cell".into(),
        "classification threshold: predicted probability > 0.5".into(),
        "undefined metrics in CV: precision, recall and F1 set to 0, ROC AUC to 0.5, flagged in eval_records.csv".into(),
        "reference selection: highest mean of mean F1 and mean ROC AUC, ties to the earlier candidate".into(),
        "stage 1 pooling: per-fold values of all models concatenated per feature group, paired on (model, fold)".into(),
        "tests: two-sided Wilcoxon signed-rank, exact for up to 25 nonzero differences".into(),
        "Holm family: one per metric, across the alternatives of a stage".into(),
        "degenerate comparison (all differences zero or fewer than 5 nonzero): p = 1, not significant".into(),
        "hold-out intervals: percentile bootstrap over test rows; resamples with an undefined metric are redrawn".into(),
        "KNN: features standardized with training-row statistics".into(),
    ]
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    created_unix_s: u64,
    manifest: &'a Path,
    master_seed: u64,
    seeds: Seeds,
    config: &'a RunConfig,
    design_decisions: Vec<String>,
    ingest: Option<&'a IngestSummary>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Seeds {
    corpus: u64,
    split: u64,
    folds: u64,
    bootstrap: u64,
    models: Vec<(String, u64)>,
}

pub fn write_run_manifest(dir: &Path, config: &RunConfig, manifest: &Path, summary: Option<&IngestSummary>) -> Result<(), PipelineError> {
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let mut files: Vec<String> = DETERMINISTIC_FILES
        .iter()
        .filter(|f| dir.join(f).exists())
        .map(|f| f.to_string())
        .collect();
    files.sort();
    let m = RunManifest {
        tool: "stnmer",
        version: env!("CARGO_PKG_VERSION"),
        created_unix_s: created,
        manifest,
        master_seed: config.master_seed,
        seeds: Seeds {
            corpus: config.corpus_seed(),
            split: config.split_seed(),
            folds: config.fold_seed(),
            bootstrap: config.bootstrap_seed(),
            models: config.roster().iter().map(|s| (s.kind.name().to_string(), s.seed)).collect(),
        },
        config,
        design_decisions: design_decisions(config),
        ingest: summary,
        files,
    };
    write_json(dir, RUN_MANIFEST, &m)
}

/// Paths of the deterministic outputs present in `dir`.
pub fn deterministic_outputs(dir: &Path) -> Vec<PathBuf> {
    DETERMINISTIC_FILES.iter().map(|f| dir.join(f)).filter(|p| p.exists()).collect()
}
