//! Sentence-level reward metrics.
//!
//! Two interchangeable kernels compute every metric:
//!
//! * [`Kernel::Portable`] keys n-grams by their token strings and mirrors the
//!   reference scorers step for step.
//! * [`Kernel::Optimized`] hash-conses n-grams into integer ids against the
//!   frozen [`DocFreqTable`] and reuses per-thread buffers.
//!
//! Both accumulate floating point terms in the same order (first occurrence of
//! each n-gram in the candidate), so their outputs are bit-identical.
//!
//! CIDEr-family vectors weight an n-gram by its raw count times
//! `ln|I| - ln(max(df, 1))`. The cosine at each order is invariant to scaling a
//! vector, so this equals the normalized term frequency of [`tfidf`] for CIDEr;
//! the clipped dot product of CIDEr-D and CIDEr-R is defined on raw counts.

mod df;
mod kernel;
mod penalty;
mod portable;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use df::{build_df, tfidf, DocFreqTable, TfIdfVector};

use crate::corpus::{check_order, TokenSequence};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};

/// Environment variable selecting the metric kernel (`portable` or `optimized`).
pub const KERNEL_ENV: &str = "EOS_SCST_KERNEL";

pub const DEFAULT_N: usize = 4;
pub const DEFAULT_SIGMA: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EosMode {
    With,
    Without,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    Cider,
    CiderD,
    CiderR,
    Bleu,
}

impl Metric {
    pub fn is_cider_family(self) -> bool {
        !matches!(self, Metric::Bleu)
    }

    /// Name used in signatures.
    pub fn signature_name(self) -> &'static str {
        match self {
            Metric::Cider => "Cider",
            Metric::CiderD => "Cider-D",
            Metric::CiderR => "Cider-R",
            Metric::Bleu => "BLEU",
        }
    }
}

/// CIDEr-R penalty weights. The two coefficients are exponents of a weighted
/// geometric mean of the repetition and length penalties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiderRParams {
    pub repeat_coeff: f64,
    pub length_coeff: f64,
    pub alpha: f64,
}

impl Default for CiderRParams {
    fn default() -> Self {
        CiderRParams {
            repeat_coeff: 0.8,
            length_coeff: 0.2,
            alpha: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    pub metric: Metric,
    pub n_max: usize,
    /// Gaussian length penalty scale (CIDEr-D).
    pub sigma: f64,
    pub cider_r: CiderRParams,
}

impl MetricParams {
    pub fn cider(n_max: usize) -> Self {
        MetricParams {
            metric: Metric::Cider,
            n_max,
            sigma: DEFAULT_SIGMA,
            cider_r: CiderRParams::default(),
        }
    }

    pub fn cider_d(n_max: usize, sigma: f64) -> Self {
        MetricParams {
            metric: Metric::CiderD,
            sigma,
            ..Self::cider(n_max)
        }
    }

    pub fn cider_r(n_max: usize, cider_r: CiderRParams) -> Self {
        MetricParams {
            metric: Metric::CiderR,
            cider_r,
            ..Self::cider(n_max)
        }
    }

    pub fn bleu(n_max: usize) -> Self {
        MetricParams {
            metric: Metric::Bleu,
            ..Self::cider(n_max)
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.n_max)?;
        if self.metric == Metric::CiderD && !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidConfig(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.metric == Metric::CiderR {
            let p = self.cider_r;
            let positive = |x: f64| x.is_finite() && x > 0.0;
            if !(positive(p.repeat_coeff) && positive(p.length_coeff) && positive(p.alpha)) {
                return Err(Error::InvalidConfig("CIDEr-R coefficients must be positive".into()));
            }
            if (p.repeat_coeff + p.length_coeff - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(
                    "CIDEr-R repeat_coeff and length_coeff must sum to 1".into(),
                ));
            }
        }
        Ok(())
    }
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams::cider_d(DEFAULT_N, DEFAULT_SIGMA)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    Portable,
    #[default]
    Optimized,
}

impl Kernel {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "portable" => Ok(Kernel::Portable),
            "optimized" | "fast" => Ok(Kernel::Optimized),
            other => Err(Error::InvalidConfig(format!("unknown kernel `{other}`"))),
        }
    }

    /// Reads [`KERNEL_ENV`]; unset means the optimized kernel.
    pub fn from_env() -> Result<Self> {
        match std::env::var(KERNEL_ENV) {
            Ok(v) => Kernel::parse(&v),
            Err(_) => Ok(Kernel::default()),
        }
    }
}

fn check_table(df: &DocFreqTable, params: &MetricParams) {
    assert!(
        df.n_max() >= params.n_max,
        "document frequencies built up to order {} but the metric needs {}",
        df.n_max(),
        params.n_max
    );
}

/// CIDEr: mean over orders of tf-idf cosine similarity, averaged over references, times 10.
pub fn cider(candidate: &TokenSequence, refs: &[TokenSequence], df: &DocFreqTable, params: &MetricParams) -> f64 {
    check_table(df, params);
    portable::cider_family(Metric::Cider, candidate, refs, df, params)
}

/// CIDEr-D: CIDEr with candidate weights clipped by reference weights and a
/// Gaussian penalty on the length difference.
pub fn cider_d(candidate: &TokenSequence, refs: &[TokenSequence], df: &DocFreqTable, params: &MetricParams) -> f64 {
    check_table(df, params);
    portable::cider_family(Metric::CiderD, candidate, refs, df, params)
}

/// CIDEr-R: clipped CIDEr with a repetition penalty and a relative length penalty.
pub fn cider_r(candidate: &TokenSequence, refs: &[TokenSequence], df: &DocFreqTable, params: &MetricParams) -> f64 {
    check_table(df, params);
    portable::cider_family(Metric::CiderR, candidate, refs, df, params)
}

/// Smoothed sentence BLEU-n with "closest" reference length.
pub fn bleu(candidate: &TokenSequence, refs: &[TokenSequence], params: &MetricParams) -> f64 {
    portable::bleu(candidate, refs, params.n_max)
}

/// A validated metric bound to its document frequencies and kernel.
#[derive(Debug, Clone)]
pub struct Scorer {
    params: MetricParams,
    df: Option<Arc<DocFreqTable>>,
    kernel: Kernel,
}

impl Scorer {
    pub fn new(params: MetricParams, df: Option<Arc<DocFreqTable>>, kernel: Kernel) -> Result<Self> {
        params.validate()?;
        if params.metric.is_cider_family() {
            let table = df
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("CIDEr metrics need document frequencies".into()))?;
            if table.n_max() < params.n_max {
                return Err(Error::InvalidConfig(format!(
                    "document frequencies cover orders up to {} but the metric uses {}",
                    table.n_max(),
                    params.n_max
                )));
            }
        }
        Ok(Scorer { params, df, kernel })
    }

    pub fn params(&self) -> &MetricParams {
        &self.params
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn df(&self) -> Option<&DocFreqTable> {
        self.df.as_deref()
    }

    pub fn score(&self, candidate: &TokenSequence, refs: &[TokenSequence]) -> f64 {
        let m = self.params.metric;
        match (self.kernel, m) {
            (Kernel::Portable, Metric::Bleu) => portable::bleu(candidate, refs, self.params.n_max),
            (Kernel::Optimized, Metric::Bleu) => kernel::bleu(candidate, refs, self.params.n_max),
            (Kernel::Portable, _) => {
                portable::cider_family(m, candidate, refs, self.table(), &self.params)
            }
            (Kernel::Optimized, _) => {
                kernel::cider_family(m, candidate, refs, self.table(), &self.params)
            }
        }
    }

    /// Scores `(candidate, refs)` pairs; output order follows input order.
    pub fn score_batch(&self, pairs: &[(&TokenSequence, &[TokenSequence])], exec: Execution) -> Vec<f64> {
        map_indexed(exec, pairs.len(), |i| self.score(pairs[i].0, pairs[i].1))
    }

    fn table(&self) -> &DocFreqTable {
        self.df.as_deref().expect("checked in Scorer::new")
    }
}
