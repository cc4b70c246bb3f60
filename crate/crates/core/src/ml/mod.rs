//! Classifiers, stratified folds and evaluation metrics.
//!
//! Five model kinds are available: a single CART tree, Random Forest,
//! Extra Trees, k-nearest neighbours and Gaussian naive Bayes. Every model
//! is a deterministic function of its [`ModelSpec`] (including the seed)
//! and the training rows.

mod metrics;
mod tree;

pub use metrics::{compute_metrics, roc_auc, roc_curve, Confusion, Metric, MetricSet, UndefinedMetrics};
pub use tree::{fit_forest, fit_tree, forest_proba, Node, Splitter, Tree, TreeParams};

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("training data contains a single class")]
    SingleClass,
    #[error("class {class} has {count} rows, fewer than k = {k}")]
    TooFewForFolds { class: bool, count: usize, k: usize },
    #[error("invalid model specification: {0}")]
    Spec(String),
    #[error("model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file format: {0}")]
    Format(String),
}

/// Feature matrix with binary labels (`true` = InsideSTN) and, per row, the
/// key of the source recording and a stable row id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
    pub groups: Vec<String>,
    pub row_ids: Vec<usize>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<bool>, groups: Vec<String>, row_ids: Vec<usize>) -> Result<Self, MlError> {
        let d = Self {
            features,
            labels,
            groups,
            row_ids,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), MlError> {
        let n = self.labels.len();
        if self.features.len() != n || self.groups.len() != n || self.row_ids.len() != n {
            return Err(MlError::Dimension(format!(
                "{} feature rows, {} labels, {} groups, {} row ids",
                self.features.len(),
                n,
                self.groups.len(),
                self.row_ids.len()
            )));
        }
        let d = self.n_features();
        if let Some(i) = self.features.iter().position(|r| r.len() != d) {
            return Err(MlError::Dimension(format!("row {i} has {} features, expected {d}", self.features[i].len())));
        }
        if let Some(i) = self.features.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(MlError::Data(format!("row {i} has a non-finite feature")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: rows.iter().map(|&r| self.features[r].clone()).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            groups: rows.iter().map(|&r| self.groups[r].clone()).collect(),
            row_ids: rows.iter().map(|&r| self.row_ids[r]).collect(),
        }
    }

    pub fn select_columns(&self, columns: &[usize]) -> Dataset {
        Dataset {
            features: self.features.iter().map(|r| columns.iter().map(|&c| r[c]).collect()).collect(),
            ..self.clone()
        }
    }
}

/// Fold index per row. Each class is shuffled and dealt round-robin, the
/// negatives continuing where the positives stopped, so fold sizes and
/// per-fold class counts each differ by at most one.
pub fn stratified_kfold(labels: &[bool], k: usize, seed_value: u64) -> Result<Vec<usize>, MlError> {
    if k < 2 {
        return Err(MlError::Spec(format!("cross-validation needs k >= 2, got {k}")));
    }
    let mut rng = seed::rng(seed_value);
    let mut folds = vec![0usize; labels.len()];
    let mut position = 0usize;
    for class in [true, false] {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if rows.len() < k {
            return Err(MlError::TooFewForFolds {
                class,
                count: rows.len(),
                k,
            });
        }
        rows.shuffle(&mut rng);
        for r in rows {
            folds[r] = position % k;
            position += 1;
        }
    }
    Ok(folds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    DecisionTree,
    RandomForest,
    ExtraTrees,
    #[serde(rename = "KNN")]
    Knn,
    #[serde(rename = "GaussianNB")]
    GaussianNb,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::DecisionTree,
        ModelKind::RandomForest,
        ModelKind::ExtraTrees,
        ModelKind::Knn,
        ModelKind::GaussianNb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::DecisionTree => "DecisionTree",
            ModelKind::RandomForest => "RandomForest",
            ModelKind::ExtraTrees => "ExtraTrees",
            ModelKind::Knn => "KNN",
            ModelKind::GaussianNb => "GaussianNB",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown model kind {s:?}"))
    }
}

/// Candidate features per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    #[default]
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((d as f64).sqrt() as usize).max(1),
            MaxFeatures::All => d,
            MaxFeatures::Count(c) => c.clamp(1, d.max(1)),
        }
    }
}

/// Model kind plus hyperparameters. Fields irrelevant to a kind are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Ensembles only; a single tree considers every feature.
    pub max_features: MaxFeatures,
    pub k_neighbors: usize,
    /// Naive Bayes variance floor as a fraction of the largest feature variance.
    pub var_smoothing: f64,
    pub seed: u64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self::new(ModelKind::ExtraTrees, 0)
    }
}

impl ModelSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        Self {
            kind,
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::Sqrt,
            k_neighbors: 5,
            var_smoothing: 1e-9,
            seed,
        }
    }

    /// The default roster, one spec per kind.
    pub fn roster(seed_value: u64) -> Vec<ModelSpec> {
        ModelKind::ALL
            .into_iter()
            .map(|k| ModelSpec::new(k, seed::derive_seed(seed_value, &[seed::tag(k.name())])))
            .collect()
    }

    pub fn validate(&self) -> Result<(), MlError> {
        let bad = |msg: String| Err(MlError::Spec(msg));
        if self.n_trees == 0 || self.n_trees > 10_000 {
            return bad(format!("n_trees {} outside 1..=10000", self.n_trees));
        }
        if self.min_samples_split < 2 {
            return bad(format!("min_samples_split {} < 2", self.min_samples_split));
        }
        if self.max_depth == Some(0) {
            return bad("max_depth must be >= 1".into());
        }
        if self.k_neighbors == 0 {
            return bad("k_neighbors must be >= 1".into());
        }
        if !(self.var_smoothing >= 0.0 && self.var_smoothing < 1.0) {
            return bad(format!("var_smoothing {} outside [0, 1)", self.var_smoothing));
        }
        Ok(())
    }

    fn tree_params(&self, d: usize, ensemble: bool) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            max_features: ensemble.then(|| self.max_features.resolve(d)),
            splitter: if self.kind == ModelKind::ExtraTrees {
                Splitter::Random
            } else {
                Splitter::Best
            },
        }
    }
}

/// Per-feature standardisation fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Population SD; constant columns get scale 1.
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let scale = (0..d)
            .map(|j| {
                let sd = (x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    /// Indexed by class: 0 = negative, 1 = positive.
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

impl GaussianNb {
    fn fit(x: &[Vec<f64>], y: &[bool], var_smoothing: f64) -> Self {
        let d = x[0].len();
        let n = x.len() as f64;
        let all_var = |j: usize| {
            let m = x.iter().map(|r| r[j]).sum::<f64>() / n;
            x.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n
        };
        let floor = var_smoothing * (0..d).map(all_var).fold(0.0, f64::max);
        let stats = |class: bool| {
            let rows: Vec<&Vec<f64>> = x.iter().zip(y).filter(|(_, &l)| l == class).map(|(r, _)| r).collect();
            let c = rows.len() as f64;
            let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / c).collect();
            let var: Vec<f64> = (0..d)
                .map(|j| rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / c + floor)
                .collect();
            (c, mean, var)
        };
        let (c0, m0, v0) = stats(false);
        let (c1, m1, v1) = stats(true);
        Self {
            log_prior: [(c0 / n).ln(), (c1 / n).ln()],
            mean: [m0, m1],
            var: [v0, v1],
        }
    }

    fn proba(&self, row: &[f64]) -> f64 {
        let ll = |c: usize| {
            self.log_prior[c]
                + row
                    .iter()
                    .zip(self.mean[c].iter().zip(&self.var[c]))
                    .map(|(x, (m, v))| {
                        // Zero variance with no floor: exact match only.
                        if *v == 0.0 {
                            return if x == m { 0.0 } else { f64::NEG_INFINITY };
                        }
                        -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m) * (x - m) / v)
                    })
                    .sum::<f64>()
        };
        let (l0, l1) = (ll(0), ll(1));
        let top = l0.max(l1);
        if top == f64::NEG_INFINITY {
            return 0.5;
        }
        let (e0, e1) = ((l0 - top).exp(), (l1 - top).exp());
        e1 / (e0 + e1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub scaler: Standardizer,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
}

impl Knn {
    /// Positive share among the k nearest training rows (Euclidean distance
    /// after standardisation; distance ties go to the earlier row).
    fn proba(&self, row: &[f64]) -> f64 {
        let q = self.scaler.transform(row);
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
        }
        d[..k].iter().filter(|(_, i)| self.y[*i]).count() as f64 / k as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Tree(Tree),
    Forest(Vec<Tree>),
    Knn(Knn),
    GaussianNb(GaussianNb),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub n_features: usize,
    pub model: Model,
}

pub fn train(spec: &ModelSpec, data: &Dataset) -> Result<TrainedModel, MlError> {
    spec.validate()?;
    data.validate()?;
    let pos = data.n_positive();
    if pos == 0 || pos == data.len() {
        return Err(MlError::SingleClass);
    }
    let (x, y) = (&data.features, &data.labels);
    let d = data.n_features();
    let model = match spec.kind {
        ModelKind::DecisionTree => {
            let rows: Vec<usize> = (0..y.len()).collect();
            Model::Tree(fit_tree(x, y, &rows, spec.tree_params(d, false), spec.seed))
        }
        ModelKind::RandomForest => Model::Forest(fit_forest(x, y, spec.n_trees, true, spec.tree_params(d, true), spec.seed)),
        ModelKind::ExtraTrees => Model::Forest(fit_forest(x, y, spec.n_trees, false, spec.tree_params(d, true), spec.seed)),
        ModelKind::Knn => {
            let scaler = Standardizer::fit(x);
            Model::Knn(Knn {
                k: spec.k_neighbors,
                x: x.iter().map(|r| scaler.transform(r)).collect(),
                y: y.clone(),
                scaler,
            })
        }
        ModelKind::GaussianNb => Model::GaussianNb(GaussianNb::fit(x, y, spec.var_smoothing)),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        n_features: d,
        model,
    })
}

impl TrainedModel {
    /// Positive-class probability per row.
    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, MlError> {
        if let Some(r) = rows.iter().find(|r| r.len() != self.n_features) {
            return Err(MlError::Dimension(format!(
                "model expects {} features, got {}",
                self.n_features,
                r.len()
            )));
        }
        Ok(rows
            .iter()
            .map(|r| match &self.model {
                Model::Tree(t) => t.leaf_value(r),
                Model::Forest(trees) => forest_proba(trees, r),
                Model::Knn(k) => k.proba(r),
                Model::GaussianNb(nb) => nb.proba(r),
            })
            .collect())
    }

    /// Labels at threshold 0.5; exactly 0.5 goes to the negative class.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<bool>, MlError> {
        Ok(self.predict_proba(rows)?.into_iter().map(|p| p > 0.5).collect())
    }

    pub fn save(&self, path: &Path) -> Result<(), MlError> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        let json = serde_json::to_string(&file).map_err(|e| MlError::Format(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, MlError> {
        let text = std::fs::read_to_string(path)?;
        let file: ModelFile = serde_json::from_str(&text).map_err(|e| MlError::Format(e.to_string()))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_FORMAT_VERSION {
            return Err(MlError::Format(format!(
                "expected {MODEL_FORMAT} v{MODEL_FORMAT_VERSION}, found {} v{}",
                file.format, file.version
            )));
        }
        Ok(file.model)
    }
}

pub const MODEL_FORMAT: &str = "stnmer-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// On-disk model: JSON object `{format, version, model}`.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: TrainedModel,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, seed_value: u64) -> Dataset {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = seed::rng(seed_value);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let pos = i % 3 == 0;
            let shift = if pos { 1.5 } else { -1.5 };
            features.push(
                (0..4)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        shift + z
                    })
                    .collect(),
            );
            labels.push(pos);
        }
        Dataset::new(features, labels, vec!["g".into(); n], (0..n).collect()).unwrap()
    }

    #[test]
    fn fold_shape() {
        let labels: Vec<bool> = (0..100).map(|i| i < 27).collect();
        let folds = stratified_kfold(&labels, 10, 4).unwrap();
        for f in 0..10 {
            let rows: Vec<usize> = (0..100).filter(|&i| folds[i] == f).collect();
            assert_eq!(rows.len(), 10);
            let pos = rows.iter().filter(|&&i| labels[i]).count();
            assert!(pos == 2 || pos == 3);
        }
        assert!(stratified_kfold(&labels, 1, 0).is_err());
        assert!(matches!(stratified_kfold(&labels[..30], 10, 0), Err(MlError::TooFewForFolds { class: false, count: 3, .. })));
    }

    #[test]
    fn knn_one_memorises() {
        let d = toy(90, 1);
        let spec = ModelSpec {
            k_neighbors: 1,
            ..ModelSpec::new(ModelKind::Knn, 0)
        };
        let m = train(&spec, &d).unwrap();
        assert_eq!(m.predict(&d.features).unwrap(), d.labels);
    }

    #[test]
    fn all_kinds_train_and_roundtrip() {
        let d = toy(120, 2);
        let dir = tempfile::tempdir().unwrap();
        for spec in ModelSpec::roster(5) {
            let m = train(&spec, &d).unwrap();
            let p = m.predict_proba(&d.features).unwrap();
            assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
            let path = dir.path().join(format!("{}.json", spec.kind));
            m.save(&path).unwrap();
            let back = TrainedModel::load(&path).unwrap();
            assert_eq!(back.predict_proba(&d.features).unwrap(), p);
            assert!(m.predict_proba(&[vec![0.0; 3]]).is_err());
        }
    }

    #[test]
    fn single_class_rejected() {
        let mut d = toy(30, 3);
        d.labels = vec![false; 30];
        assert!(matches!(train(&ModelSpec::default(), &d), Err(MlError::SingleClass)));
    }

    #[test]
    fn naive_bayes_symmetric_point() {
        let x = vec![vec![-1.0], vec![-3.0], vec![1.0], vec![3.0]];
        let d = Dataset::new(x, vec![false, false, true, true], vec!["g".into(); 4], (0..4).collect()).unwrap();
        let m = train(&ModelSpec::new(ModelKind::GaussianNb, 0), &d).unwrap();
        assert!((m.predict_proba(&[vec![0.0]]).unwrap()[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn retraining_is_deterministic() {
        let d = toy(150, 4);
        for spec in ModelSpec::roster(9) {
            let a = train(&spec, &d).unwrap().predict_proba(&d.features).unwrap();
            let b = train(&spec, &d).unwrap().predict_proba(&d.features).unwrap();
            assert_eq!(a, b);
        }
    }
}
