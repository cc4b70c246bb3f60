//! Cross-validation grid over (feature group, model, fold).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::holdout::assert_disjoint;
use super::{FeatureGroup, PipelineError};
use crate::ml::{self, compute_metrics, Dataset, MetricSet, ModelKind, ModelSpec};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub combo: FeatureGroup,
    pub model: ModelKind,
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: MetricSet,
}

/// Fold of every training row. Computed once and shared by all cells, so
/// paired comparisons are fold-aligned.
pub fn cv_folds(train: &Dataset, k: usize, seed_value: u64) -> Result<Vec<usize>, PipelineError> {
    Ok(ml::stratified_kfold(&train.labels, k, seed_value)?)
}

fn run_cell(data: &Dataset, folds: &[usize], spec: &ModelSpec, fold: usize) -> Result<(MetricSet, usize, usize), PipelineError> {
    let (tr, te): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| folds[i] != fold);
    let train = data.subset(&tr);
    let test = data.subset(&te);
    assert_disjoint(&train.row_ids, &test.row_ids)?;
    let spec = ModelSpec {
        seed: derive_seed(spec.seed, &[fold as u64]),
        ..spec.clone()
    };
    let model = ml::train(&spec, &train)?;
    let scores = model.predict_proba(&test.features)?;
    let predictions: Vec<bool> = scores.iter().map(|&p| p > 0.5).collect();
    let metrics = compute_metrics(&test.labels, &predictions, &scores)?;
    Ok((metrics, train.len(), test.len()))
}

/// One [`EvalRecord`] per (combo, model, fold), ordered by combo, then
/// roster position, then fold. Any failing cell aborts the grid.
pub fn run_cv_grid(
    train: &Dataset,
    combos: &[FeatureGroup],
    roster: &[ModelSpec],
    k: usize,
    fold_seed: u64,
) -> Result<Vec<EvalRecord>, PipelineError> {
    let folds = cv_folds(train, k, fold_seed)?;
    let views: Vec<Dataset> = combos.iter().map(|c| train.select_columns(&c.columns())).collect();
    let cells: Vec<(usize, usize, usize)> = (0..combos.len())
        .flat_map(|c| (0..roster.len()).flat_map(move |m| (0..k).map(move |f| (c, m, f))))
        .collect();
    cells
        .par_iter()
        .map(|&(c, m, fold)| {
            let (metrics, n_train, n_test) = run_cell(&views[c], &folds, &roster[m], fold).map_err(|e| {
                let cell = format!("cell ({}, {}, fold {fold})", combos[c], roster[m].kind);
                match e {
                    PipelineError::Config(s) => PipelineError::Config(format!("{cell}: {s}")),
                    PipelineError::Leakage(s) => PipelineError::Leakage(format!("{cell}: {s}")),
                    other => PipelineError::Data(format!("{cell}: {other}")),
                }
            })?;
            log::debug!("{} {} fold {fold}: f1 {:.4}", combos[c], roster[m].kind, metrics.f1);
            Ok(EvalRecord {
                combo: combos[c],
                model: roster[m].kind,
                fold,
                n_train,
                n_test,
                metrics,
            })
        })
        .collect()
}

/// Every (combo, model, fold) present exactly once.
pub fn check_complete(records: &[EvalRecord], combos: &[FeatureGroup], roster: &[ModelSpec], k: usize) -> Result<(), PipelineError> {
    let expected = combos.len() * roster.len() * k;
    let mut seen = std::collections::HashSet::new();
    for r in records {
        let known = combos.contains(&r.combo) && roster.iter().any(|s| s.kind == r.model) && r.fold < k;
        if !known || !seen.insert((r.combo, r.model, r.fold)) {
            return Err(PipelineError::Data(format!(
                "ledger has an unexpected or duplicate record ({}, {}, fold {})",
                r.combo, r.model, r.fold
            )));
        }
    }
    if seen.len() != expected {
        return Err(PipelineError::Data(format!(
            "incomplete ledger: {} of {expected} records",
            seen.len()
        )));
    }
    Ok(())
}
