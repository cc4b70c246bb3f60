//! The 13 per-window descriptors, grouped into recurrence (RQA), nonlinear
//! dynamics (NL) and entropy (ENT) domains.

mod embed;
mod entropy;
mod fractal;
mod lyapunov;
mod lz;
mod rqa;

pub use embed::{decimate, delay_embed, first_acf_zero, stride_for, Embedding};
pub use entropy::{
    approximate_entropy, histogram, ordinal_pattern, permutation_entropy, sample_entropy, shannon_entropy,
    tsallis_entropy, SampleEntropy,
};
pub use fractal::{higuchi_fd, higuchi_lengths, hurst_rs, katz_fd};
pub use lyapunov::{lle_rosenstein, LyapunovEstimate, LyapunovParams};
pub use lz::{binarize_median, lz76_phrase_count, lz_complexity, normalized_lz};
pub use rqa::{rqa_from_embedding, rqa_metrics, RqaMetrics};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("{what} too short: need {needed} samples, got {got}")]
    TooShort {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("undefined: {0}")]
    Undefined(&'static str),
}

/// Delay-embedding and recurrence parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingParams {
    pub m: usize,
    pub tau: usize,
    /// Recurrence threshold, in signal units.
    pub epsilon: f64,
    pub l_min: usize,
    /// Cap on samples kept by stride decimation before embedding.
    pub max_points: usize,
}

impl EmbeddingParams {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.m < 2 || self.tau < 1 || !(self.epsilon > 0.0) || self.l_min < 2 || self.max_points < 100 {
            return Err(FeatureError::Parameter(format!(
                "need m >= 2, tau >= 1, epsilon > 0, l_min >= 2, max_points >= 100; got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Feature domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Domain {
    #[serde(rename = "RQA")]
    Rqa,
    #[serde(rename = "ENT")]
    Ent,
    #[serde(rename = "NL")]
    Nl,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Rqa, Domain::Ent, Domain::Nl];

    pub fn short(self) -> &'static str {
        match self {
            Domain::Rqa => "R",
            Domain::Ent => "E",
            Domain::Nl => "N",
        }
    }

    /// Column indices of this domain in [`FeatureVector::values`].
    pub fn columns(self) -> std::ops::Range<usize> {
        match self {
            Domain::Rqa => 0..3,
            Domain::Nl => 3..8,
            Domain::Ent => 8..13,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Rqa => "RQA",
            Domain::Ent => "ENT",
            Domain::Nl => "NL",
        })
    }
}

impl FromStr for Domain {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "R" | "RQA" => Ok(Domain::Rqa),
            "E" | "ENT" => Ok(Domain::Ent),
            "N" | "NL" => Ok(Domain::Nl),
            other => Err(format!("unknown feature domain {other:?}")),
        }
    }
}

pub const FEATURE_NAMES: [&str; 13] = [
    "rr", "det", "l_avg", "lle", "hurst", "hfd", "kfd", "lzc", "shannon", "perm_ent", "samp_en", "ap_en", "tsallis",
];

pub const N_FEATURES: usize = 13;

// Bit positions in `FeatureVector::undefined`.
pub const FLAG_L_AVG: u16 = 1 << 2;
pub const FLAG_LLE: u16 = 1 << 3;
pub const FLAG_HFD: u16 = 1 << 5;
pub const FLAG_KFD: u16 = 1 << 6;
pub const FLAG_SAMP_EN: u16 = 1 << 10;

/// Extraction parameters. `tau = None` picks the first zero of the
/// autocorrelation of the decimated window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub embedding_dim: usize,
    pub tau: Option<usize>,
    pub tau_cap: usize,
    /// Recurrence threshold as a fraction of the embedded-coordinate SD.
    pub epsilon_frac: f64,
    pub l_min: usize,
    /// Decimation cap for RQA and Lyapunov estimation.
    pub max_points: usize,
    pub lle_fit_start: usize,
    pub lle_fit_end: usize,
    /// `None` uses `tau * embedding_dim`.
    pub lle_theiler: Option<usize>,
    pub hfd_k_max: usize,
    pub hist_bins: usize,
    pub tsallis_q: f64,
    pub perm_order: usize,
    pub perm_delay: usize,
    pub sampen_m: usize,
    /// Tolerance as a fraction of the window SD (SampEn and ApEn).
    pub sampen_r: f64,
    /// Decimation cap for SampEn and ApEn.
    pub entropy_max_points: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            embedding_dim: 3,
            tau: None,
            tau_cap: 50,
            epsilon_frac: 0.6,
            l_min: 2,
            max_points: 2000,
            lle_fit_start: 1,
            lle_fit_end: 20,
            lle_theiler: None,
            hfd_k_max: 64,
            hist_bins: 16,
            tsallis_q: 2.0,
            perm_order: 3,
            perm_delay: 1,
            sampen_m: 2,
            sampen_r: 0.2,
            entropy_max_points: 4000,
        }
    }
}

/// Per-window extraction details that are not features themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionMeta {
    pub tau: usize,
    pub epsilon: f64,
    pub rqa_stride: usize,
    pub entropy_stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub rr: f64,
    pub det: f64,
    pub l_avg: f64,
    /// Nats per decimated sample.
    pub lle: f64,
    pub hurst: f64,
    pub hfd: f64,
    pub kfd: f64,
    pub lzc: f64,
    pub shannon: f64,
    pub perm_ent: f64,
    pub samp_en: f64,
    pub ap_en: f64,
    pub tsallis: f64,
    /// Bitmask of features that were undefined and imputed.
    pub undefined: u16,
    pub meta: ExtractionMeta,
}

impl FeatureVector {
    pub fn values(&self) -> [f64; N_FEATURES] {
        [
            self.rr,
            self.det,
            self.l_avg,
            self.lle,
            self.hurst,
            self.hfd,
            self.kfd,
            self.lzc,
            self.shannon,
            self.perm_ent,
            self.samp_en,
            self.ap_en,
            self.tsallis,
        ]
    }

    pub fn domain_values(&self, domain: Domain) -> Vec<f64> {
        self.values()[domain.columns()].to_vec()
    }
}

/// Compute all 13 descriptors of one window. Undefined values are imputed
/// (SampEn <- ln B, l_avg <- 0, KFD <- 1, HFD <- 1, LLE <- 0) and flagged.
pub fn extract_features(window: &[f64], config: &FeatureConfig) -> Result<FeatureVector, FeatureError> {
    let mut undefined = 0u16;

    // Recurrence and Lyapunov work on the decimated window.
    let rqa_stride = stride_for(window.len(), config.max_points);
    let reduced = decimate(window, rqa_stride);
    let m = config.embedding_dim;
    let tau = config
        .tau
        .unwrap_or_else(|| first_acf_zero(&reduced, config.tau_cap))
        .max(1);
    let emb = delay_embed(&reduced, m, tau)?;
    let epsilon = {
        let e = config.epsilon_frac * emb.coordinate_std();
        if e > 0.0 {
            e
        } else {
            f64::EPSILON
        }
    };
    let rqa = rqa_from_embedding(&emb, epsilon, config.l_min);
    let l_avg = rqa.l_avg.unwrap_or_else(|| {
        undefined |= FLAG_L_AVG;
        0.0
    });

    let lle_params = LyapunovParams {
        m,
        tau,
        theiler: config.lle_theiler.unwrap_or(tau * m),
        fit_start: config.lle_fit_start,
        fit_end: config.lle_fit_end,
        max_points: config.max_points,
    };
    let lle = match lle_rosenstein(window, &lle_params) {
        Ok(est) => est.lambda,
        Err(FeatureError::Undefined(_)) => {
            undefined |= FLAG_LLE;
            0.0
        }
        Err(e) => return Err(e),
    };

    let hurst = hurst_rs(window)?;
    let hfd = match higuchi_fd(window, config.hfd_k_max) {
        Ok(v) => v,
        Err(FeatureError::Undefined(_)) => {
            undefined |= FLAG_HFD;
            1.0
        }
        Err(e) => return Err(e),
    };
    let kfd = katz_fd(window)?.unwrap_or_else(|| {
        undefined |= FLAG_KFD;
        1.0
    });
    let lzc = lz_complexity(window)?;

    let shannon = shannon_entropy(window, config.hist_bins)?;
    let perm_ent = permutation_entropy(window, config.perm_order, config.perm_delay)?;
    let tsallis = tsallis_entropy(window, config.tsallis_q, config.hist_bins)?;

    let entropy_stride = stride_for(window.len(), config.entropy_max_points);
    let thinned = decimate(window, entropy_stride);
    let se = sample_entropy(&thinned, config.sampen_m, config.sampen_r)?;
    let samp_en = se.value.unwrap_or_else(|| {
        undefined |= FLAG_SAMP_EN;
        if se.b > 0 {
            (se.b as f64).ln()
        } else {
            let t = (thinned.len() - config.sampen_m) as f64;
            (t * (t - 1.0) / 2.0).ln()
        }
    });
    let ap_en = approximate_entropy(&thinned, config.sampen_m, config.sampen_r)?;

    Ok(FeatureVector {
        rr: rqa.rr,
        det: rqa.det,
        l_avg,
        lle,
        hurst,
        hfd,
        kfd,
        lzc,
        shannon,
        perm_ent,
        samp_en,
        ap_en,
        tsallis,
        undefined,
        meta: ExtractionMeta {
            tau,
            epsilon,
            rqa_stride,
            entropy_stride,
        },
    })
}
