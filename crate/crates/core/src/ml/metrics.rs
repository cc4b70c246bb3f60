//! Confusion-matrix metrics and rank-based ROC AUC. The positive class is
//! always InsideSTN (`true`).

use serde::{Deserialize, Serialize};

use super::MlError;
use crate::stats::midranks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(labels: &[bool], predictions: &[bool]) -> Self {
        let mut c = Confusion::default();
        for (&l, &p) in labels.iter().zip(predictions) {
            match (l, p) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        c
    }
}

/// Which metrics had no defined value and were set to 0 (0.5 for AUC).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UndefinedMetrics {
    /// No predicted positives.
    pub precision: bool,
    /// No actual positives.
    pub recall: bool,
    /// Only one class present.
    pub roc_auc: bool,
}

impl UndefinedMetrics {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.roc_auc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub roc_auc: f64,
    pub undefined: UndefinedMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    RocAuc,
    Accuracy,
    Precision,
    Recall,
    F1,
}

impl Metric {
    /// Report order.
    pub const ALL: [Metric; 5] = [Metric::RocAuc, Metric::Accuracy, Metric::Precision, Metric::Recall, Metric::F1];

    pub fn name(self) -> &'static str {
        match self {
            Metric::RocAuc => "roc_auc",
            Metric::Accuracy => "accuracy",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::F1 => "f1",
        }
    }

    pub fn get(self, m: &MetricSet) -> f64 {
        match self {
            Metric::RocAuc => m.roc_auc,
            Metric::Accuracy => m.accuracy,
            Metric::Precision => m.precision,
            Metric::Recall => m.recall,
            Metric::F1 => m.f1,
        }
    }

    /// Whether this metric's value in `m` is a placeholder.
    pub fn is_undefined(self, m: &MetricSet) -> bool {
        match self {
            Metric::RocAuc => m.undefined.roc_auc,
            Metric::Precision => m.undefined.precision,
            Metric::Recall => m.undefined.recall,
            Metric::F1 => m.undefined.precision || m.undefined.recall,
            Metric::Accuracy => false,
        }
    }
}

/// AUC as the Mann–Whitney statistic `U / (n+ n-)`, ties counted one half.
/// `None` when a class is absent.
pub fn roc_auc(labels: &[bool], scores: &[f64]) -> Option<f64> {
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let ranks = midranks(scores);
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// ROC curve vertices from (0, 0) to (1, 1), one per distinct score
/// threshold, highest threshold first.
pub fn roc_curve(labels: &[bool], scores: &[f64]) -> Vec<(f64, f64, f64)> {
    let n_pos = labels.iter().filter(|&&l| l).count().max(1) as f64;
    let n_neg = labels.iter().filter(|&&l| !l).count().max(1) as f64;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0, f64::INFINITY)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n_neg, tp as f64 / n_pos, s));
    }
    if points.last().is_some_and(|&(f, t, _)| (f, t) != (1.0, 1.0)) {
        points.push((1.0, 1.0, f64::NEG_INFINITY));
    }
    points
}

pub fn compute_metrics(labels: &[bool], predictions: &[bool], scores: &[f64]) -> Result<MetricSet, MlError> {
    if labels.len() != predictions.len() || labels.len() != scores.len() {
        return Err(MlError::Dimension(format!(
            "{} labels, {} predictions, {} scores",
            labels.len(),
            predictions.len(),
            scores.len()
        )));
    }
    if labels.is_empty() {
        return Err(MlError::Data("no rows to score".into()));
    }
    let c = Confusion::from_predictions(labels, predictions);
    let mut undefined = UndefinedMetrics::default();
    let accuracy = (c.tp + c.tn) as f64 / labels.len() as f64;
    let precision = if c.tp + c.fp == 0 {
        undefined.precision = true;
        0.0
    } else {
        c.tp as f64 / (c.tp + c.fp) as f64
    };
    let recall = if c.tp + c.fn_ == 0 {
        undefined.recall = true;
        0.0
    } else {
        c.tp as f64 / (c.tp + c.fn_) as f64
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let roc_auc = roc_auc(labels, scores).unwrap_or_else(|| {
        undefined.roc_auc = true;
        0.5
    });
    Ok(MetricSet {
        accuracy,
        precision,
        recall,
        f1,
        roc_auc,
        undefined,
    })
}
