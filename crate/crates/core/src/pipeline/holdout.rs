//! Final retrain and hold-out evaluation with bootstrap intervals.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{FeatureGroup, PipelineError};
use crate::ml::{self, compute_metrics, roc_curve, Dataset, Metric, MetricSet, ModelKind, ModelSpec, TrainedModel};
use crate::seed::{derive_seed, tag};
use crate::stats::{bootstrap_ci, BootstrapCi};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutMetric {
    pub metric: Metric,
    /// Value on the full hold-out set.
    pub estimate: f64,
    pub undefined: bool,
    /// Absent when the metric is undefined on the full hold-out set.
    pub ci: Option<BootstrapCi>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutReport {
    pub model: ModelKind,
    pub feature_group: FeatureGroup,
    pub n_train: usize,
    pub n_test: usize,
    pub n_test_positive: usize,
    pub ci_level: f64,
    pub metrics: MetricSet,
    pub intervals: Vec<HoldoutMetric>,
    /// (false positive rate, true positive rate, threshold); kept out of
    /// JSON because the end thresholds are infinite.
    #[serde(skip)]
    pub roc: Vec<(f64, f64, f64)>,
}

impl HoldoutReport {
    pub fn interval(&self, metric: Metric) -> Option<&HoldoutMetric> {
        self.intervals.iter().find(|m| m.metric == metric)
    }
}

/// Fails when any row id appears on both sides.
pub fn assert_disjoint(train_ids: &[usize], test_ids: &[usize]) -> Result<(), PipelineError> {
    let train: HashSet<usize> = train_ids.iter().copied().collect();
    let mut shared: Vec<usize> = test_ids.iter().copied().filter(|id| train.contains(id)).collect();
    if shared.is_empty() {
        return Ok(());
    }
    shared.sort_unstable();
    shared.dedup();
    Err(PipelineError::Leakage(format!(
        "{} row id(s) in both training and test sets, first {}",
        shared.len(),
        shared[0]
    )))
}

/// Train `spec` on every training row (columns of `group` only) and score
/// the untouched test rows. Intervals resample test rows; the seed for
/// metric `m` is derived from `seed_value` and the metric name.
pub fn final_holdout_eval(
    spec: &ModelSpec,
    group: FeatureGroup,
    train: &Dataset,
    test: &Dataset,
    n_resamples: usize,
    ci_level: f64,
    seed_value: u64,
) -> Result<(HoldoutReport, TrainedModel), PipelineError> {
    assert_disjoint(&train.row_ids, &test.row_ids)?;
    let cols = group.columns();
    let train_g = train.select_columns(&cols);
    let test_g = test.select_columns(&cols);
    let model = ml::train(spec, &train_g)?;
    let scores = model.predict_proba(&test_g.features)?;
    let predictions: Vec<bool> = scores.iter().map(|&p| p > 0.5).collect();
    let labels = &test_g.labels;
    let metrics = compute_metrics(labels, &predictions, &scores)?;

    let mut intervals = Vec::new();
    let (mut l, mut p, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for metric in Metric::ALL {
        let undefined = metric.is_undefined(&metrics);
        let ci = if undefined {
            None
        } else {
            let seed_m = derive_seed(seed_value, &[tag(metric.name())]);
            let ci = bootstrap_ci(labels.len(), n_resamples, ci_level, seed_m, |idx| {
                l.clear();
                p.clear();
                s.clear();
                for &i in idx {
                    l.push(labels[i]);
                    p.push(predictions[i]);
                    s.push(scores[i]);
                }
                let m = compute_metrics(&l, &p, &s).ok()?;
                (!metric.is_undefined(&m)).then(|| metric.get(&m))
            })
            .map_err(|e| PipelineError::Data(format!("bootstrap {}: {e}", metric.name())))?;
            Some(ci)
        };
        intervals.push(HoldoutMetric {
            metric,
            estimate: metric.get(&metrics),
            undefined,
            ci,
        });
    }
    let report = HoldoutReport {
        model: spec.kind,
        feature_group: group,
        n_train: train.len(),
        n_test: test.len(),
        n_test_positive: test.n_positive(),
        ci_level,
        metrics,
        intervals,
        roc: roc_curve(labels, &scores),
    };
    Ok((report, model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjointness() {
        assert!(assert_disjoint(&[1, 2, 3], &[4, 5]).is_ok());
        let e = assert_disjoint(&[1, 2, 3], &[3, 4]).unwrap_err();
        assert!(matches!(e, PipelineError::Leakage(_)));
        assert_eq!(e.exit_code(), 3);
    }
}
