//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::features::FeatureConfig;
use crate::ml::{ModelKind, ModelSpec};
use crate::preprocess::PreprocessConfig;
use crate::seed::{derive_seed, tag};
use crate::synth::CorpusSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Recording manifest; `None` generates a surrogate corpus.
    pub manifest: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub master_seed: u64,
    pub k_folds: usize,
    pub train_fraction: f64,
    pub alpha: f64,
    pub bootstrap_resamples: usize,
    pub ci_level: f64,
    /// Keep all windows of a recording on one side of the hold-out split.
    pub grouped_split: bool,
    pub preprocess: PreprocessConfig,
    pub features: FeatureConfig,
    /// Classifier roster; empty means one default spec per kind.
    pub models: Vec<ModelSpec>,
    pub synth: CorpusSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            output_dir: PathBuf::from("stnmer-out"),
            master_seed: 42,
            k_folds: 10,
            train_fraction: 0.8,
            alpha: 0.05,
            bootstrap_resamples: 1000,
            ci_level: 0.95,
            grouped_split: false,
            preprocess: PreprocessConfig::default(),
            features: FeatureConfig::default(),
            models: Vec::new(),
            synth: CorpusSpec::default(),
        }
    }
}

impl RunConfig {
    /// Parse a TOML config. Relative paths resolve against `base`. Model
    /// entries without an explicit `seed` get one derived from the master seed.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut raw: toml::Value = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        let mut unseeded = Vec::new();
        if let Some(models) = raw.get_mut("models").and_then(|m| m.as_array_mut()) {
            for (i, m) in models.iter_mut().enumerate() {
                if let Some(t) = m.as_table_mut() {
                    if !t.contains_key("seed") {
                        unseeded.push(i);
                        t.insert("seed".into(), toml::Value::Integer(0));
                    }
                }
            }
        }
        let mut cfg: RunConfig = raw.try_into().map_err(|e: toml::de::Error| PipelineError::Config(e.to_string()))?;
        for i in unseeded {
            let kind = cfg.models[i].kind;
            cfg.models[i].seed = cfg.model_seed(kind);
        }
        if let Some(m) = &cfg.manifest {
            if m.is_relative() {
                cfg.manifest = Some(base.join(m));
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if !(self.train_fraction > 0.5 && self.train_fraction < 0.95) {
            return bad(format!("train_fraction {} outside (0.5, 0.95)", self.train_fraction));
        }
        if self.k_folds < 2 {
            return bad(format!("k_folds {} < 2", self.k_folds));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} outside (0, 1)", self.alpha));
        }
        if self.bootstrap_resamples == 0 {
            return bad("bootstrap_resamples must be positive".into());
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return bad(format!("ci_level {} outside (0, 1)", self.ci_level));
        }
        let roster = self.roster();
        for spec in &roster {
            spec.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        for (i, a) in roster.iter().enumerate() {
            if roster[..i].iter().any(|b| b.kind == a.kind) {
                return bad(format!("model kind {} listed twice", a.kind));
            }
        }
        if roster.len() < 2 {
            return bad("the roster needs at least two models to compare".into());
        }
        if self.manifest.is_none() && self.synth.n_inside + self.synth.n_outside == 0 {
            return bad("no manifest and an empty surrogate corpus".into());
        }
        Ok(())
    }

    fn model_seed(&self, kind: ModelKind) -> u64 {
        derive_seed(self.master_seed, &[tag("model"), tag(kind.name())])
    }

    /// Models in evaluation order, seeds filled in.
    pub fn roster(&self) -> Vec<ModelSpec> {
        if self.models.is_empty() {
            ModelKind::ALL
                .into_iter()
                .map(|k| ModelSpec::new(k, self.model_seed(k)))
                .collect()
        } else {
            self.models.clone()
        }
    }

    /// Set the master seed and re-derive every seed that came from it.
    pub fn set_master_seed(&mut self, seed: u64) {
        let derived: Vec<bool> = self.models.iter().map(|m| m.seed == self.model_seed(m.kind)).collect();
        self.master_seed = seed;
        for (m, d) in self.models.iter_mut().zip(derived) {
            if d {
                m.seed = derive_seed(seed, &[tag("model"), tag(m.kind.name())]);
            }
        }
    }

    pub fn corpus_seed(&self) -> u64 {
        derive_seed(self.master_seed, &[tag("corpus")])
    }

    pub fn split_seed(&self) -> u64 {
        derive_seed(self.master_seed, &[tag("split")])
    }

    pub fn fold_seed(&self) -> u64 {
        derive_seed(self.master_seed, &[tag("folds")])
    }

    pub fn bootstrap_seed(&self) -> u64 {
        derive_seed(self.master_seed, &[tag("bootstrap")])
    }
}
