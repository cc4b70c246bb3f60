//! Two-stage selection: feature group on pooled per-fold metrics, then
//! classifier within the winning group. Each stage compares a reference
//! (highest mean of F1 and ROC AUC) against every alternative with paired
//! Wilcoxon tests, Holm-corrected per metric across the alternatives.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::grid::EvalRecord;
use super::{FeatureGroup, PipelineError};
use crate::ml::{Metric, MetricSet, ModelKind, ModelSpec};
use crate::stats::{holm_bonferroni, wilcoxon_differences, Alternative, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub alternative: String,
    pub metric: Metric,
    pub mean_reference: f64,
    pub mean_alternative: f64,
    /// Nonzero paired differences.
    pub n_nonzero: usize,
    pub w: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub exact: bool,
    pub p: f64,
    pub p_holm: f64,
    pub significant: bool,
    /// Set when the test could not run; `p` is then 1.
    pub degenerate: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub reference: String,
    /// Paired observations per comparison.
    pub n_pairs: usize,
    /// Selection score (mean of mean F1 and mean ROC AUC) per candidate, in
    /// candidate order.
    pub scores: Vec<(String, f64)>,
    /// Alternative-major, metrics in report order.
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn row(&self, alternative: &str, metric: Metric) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.alternative == alternative && r.metric == metric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1 {
    pub winner: FeatureGroup,
    pub report: ComparisonReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub model: ModelKind,
    pub fold: usize,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2 {
    pub best: ModelKind,
    pub report: ComparisonReport,
    /// Per-fold metrics of every model within the winning group.
    pub folds: Vec<FoldMetrics>,
}

/// Outcome of both stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub feature_group: FeatureGroup,
    pub model: ModelKind,
    pub stage1: ComparisonReport,
    pub stage2: ComparisonReport,
    pub stage2_folds: Vec<FoldMetrics>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn selection_score(sets: &[&MetricSet]) -> f64 {
    let f1: Vec<f64> = sets.iter().map(|m| m.f1).collect();
    let auc: Vec<f64> = sets.iter().map(|m| m.roc_auc).collect();
    (mean(&f1) + mean(&auc)) / 2.0
}

/// Compare the best-scoring candidate against the rest. Candidates hold
/// fold-aligned metric vectors; ties in score go to the earlier candidate.
fn compare(candidates: &[(String, Vec<&MetricSet>)], alpha: f64) -> Result<(usize, ComparisonReport), PipelineError> {
    let n_pairs = candidates[0].1.len();
    if n_pairs == 0 || candidates.iter().any(|(_, v)| v.len() != n_pairs) {
        return Err(PipelineError::Data("candidates have unequal or empty per-fold vectors".into()));
    }
    let scores: Vec<(String, f64)> = candidates.iter().map(|(n, v)| (n.clone(), selection_score(v))).collect();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.1 > scores[best].1 {
            best = i;
        }
    }
    let reference = &candidates[best].1;
    let mut rows = Vec::new();
    for (i, (name, alt)) in candidates.iter().enumerate() {
        if i == best {
            continue;
        }
        for metric in Metric::ALL {
            let r: Vec<f64> = reference.iter().map(|m| metric.get(m)).collect();
            let a: Vec<f64> = alt.iter().map(|m| metric.get(m)).collect();
            let d: Vec<f64> = r.iter().zip(&a).map(|(x, y)| x - y).collect();
            let mut row = ComparisonRow {
                alternative: name.clone(),
                metric,
                mean_reference: mean(&r),
                mean_alternative: mean(&a),
                n_nonzero: d.iter().filter(|&&x| x != 0.0).count(),
                w: 0.0,
                w_plus: 0.0,
                w_minus: 0.0,
                exact: false,
                p: 1.0,
                p_holm: 1.0,
                significant: false,
                degenerate: None,
            };
            match wilcoxon_differences(&d, Alternative::TwoSided) {
                Ok(t) => {
                    row.w = t.w;
                    row.w_plus = t.w_plus;
                    row.w_minus = t.w_minus;
                    row.exact = t.exact;
                    row.p = t.p;
                }
                Err(e @ (StatsError::AllZero | StatsError::TooFewDifferences { .. })) => row.degenerate = Some(e.to_string()),
                Err(e) => return Err(PipelineError::Data(format!("{name} {}: {e}", metric.name()))),
            }
            rows.push(row);
        }
    }
    if rows.iter().all(|r| r.degenerate.is_some()) {
        return Err(PipelineError::Degenerate(format!(
            "every comparison against {} is degenerate ({}); no winner declared",
            candidates[best].0,
            rows.first().and_then(|r| r.degenerate.clone()).unwrap_or_default()
        )));
    }
    for metric in Metric::ALL {
        let idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].metric == metric).collect();
        let p: Vec<f64> = idx.iter().map(|&i| rows[i].p).collect();
        let holm = holm_bonferroni(&p, alpha).map_err(|e| PipelineError::Data(e.to_string()))?;
        for (j, &i) in idx.iter().enumerate() {
            rows[i].p_holm = holm.corrected[j];
            rows[i].significant = holm.reject[j] && rows[i].degenerate.is_none();
        }
    }
    Ok((
        best,
        ComparisonReport {
            reference: candidates[best].0.clone(),
            n_pairs,
            scores,
            rows,
        },
    ))
}

/// Stage 1. Per-fold values of all models are pooled per group, paired on
/// (model, fold).
pub fn select_feature_group(records: &[EvalRecord], combos: &[FeatureGroup], alpha: f64) -> Result<Stage1, PipelineError> {
    if combos.len() < 2 {
        return Err(PipelineError::Config("need at least two feature groups to compare".into()));
    }
    let candidates: Vec<(String, Vec<&MetricSet>)> = combos
        .iter()
        .map(|&c| {
            let pooled: BTreeMap<(ModelKind, usize), &MetricSet> = records
                .iter()
                .filter(|r| r.combo == c)
                .map(|r| ((r.model, r.fold), &r.metrics))
                .collect();
            (c.name(), pooled.into_values().collect())
        })
        .collect();
    let (best, report) = compare(&candidates, alpha)?;
    Ok(Stage1 {
        winner: combos[best],
        report,
    })
}

/// Stage 2, within the winning group, paired on fold.
pub fn select_classifier(records: &[EvalRecord], winner: FeatureGroup, roster: &[ModelSpec], alpha: f64) -> Result<Stage2, PipelineError> {
    if roster.len() < 2 {
        return Err(PipelineError::Config("need at least two models to compare".into()));
    }
    let mut folds = Vec::new();
    let candidates: Vec<(String, Vec<&MetricSet>)> = roster
        .iter()
        .map(|spec| {
            let per_fold: BTreeMap<usize, &MetricSet> = records
                .iter()
                .filter(|r| r.combo == winner && r.model == spec.kind)
                .map(|r| (r.fold, &r.metrics))
                .collect();
            folds.extend(per_fold.iter().map(|(&fold, &m)| FoldMetrics {
                model: spec.kind,
                fold,
                metrics: *m,
            }));
            (spec.kind.name().to_string(), per_fold.into_values().collect())
        })
        .collect();
    let (best, report) = compare(&candidates, alpha)?;
    Ok(Stage2 {
        best: roster[best].kind,
        report,
        folds,
    })
}
