//! SCST configuration classes, batch validation and advantage computation.
//!
//! An [`ScstEngine`] is built once from an [`ScstConfig`] and, for corpus
//! initialization, a training [`Corpus`]. It is immutable afterwards and can
//! be shared across threads; every call to
//! [`compute_advantages`](ScstEngine::compute_advantages) is independent.

use std::sync::Arc;

use crate::corpus::{Corpus, TokenSequence, DEFAULT_EOS};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::metrics::{build_df, DocFreqTable, EosMode, Kernel, Metric, MetricParams, Scorer};
use crate::signature;

/// Where the EOS token is used: document-frequency construction and reward
/// computation. The two off-diagonal cells need [`ScstConfig::allow_mixed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScstClass {
    /// EOS in both df and reward.
    Standard,
    /// EOS in neither.
    NoEos,
    /// EOS in df only.
    MixedInit,
    /// EOS in reward only.
    MixedReward,
}

impl ScstClass {
    pub const ALL: [ScstClass; 4] = [
        ScstClass::Standard,
        ScstClass::NoEos,
        ScstClass::MixedInit,
        ScstClass::MixedReward,
    ];

    pub fn from_modes(df: EosMode, reward: EosMode) -> Self {
        match (df, reward) {
            (EosMode::With, EosMode::With) => ScstClass::Standard,
            (EosMode::Without, EosMode::Without) => ScstClass::NoEos,
            (EosMode::With, EosMode::Without) => ScstClass::MixedInit,
            (EosMode::Without, EosMode::With) => ScstClass::MixedReward,
        }
    }

    pub fn df_mode(self) -> EosMode {
        match self {
            ScstClass::Standard | ScstClass::MixedInit => EosMode::With,
            ScstClass::NoEos | ScstClass::MixedReward => EosMode::Without,
        }
    }

    pub fn reward_mode(self) -> EosMode {
        match self {
            ScstClass::Standard | ScstClass::MixedReward => EosMode::With,
            ScstClass::NoEos | ScstClass::MixedInit => EosMode::Without,
        }
    }

    pub fn is_mixed(self) -> bool {
        matches!(self, ScstClass::MixedInit | ScstClass::MixedReward)
    }
}

/// Source of document frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitMode {
    /// Frozen table computed once from a training corpus.
    CorpusInit,
    /// Transient table computed from each batch's own references.
    BatchInit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseMode {
    /// Reward of a separately decoded base sequence.
    Greedy,
    /// Mean reward over all samples of the image, the sample itself included.
    Average,
    /// Mean reward over the other samples of the image.
    LeaveOneOut,
}

impl BaseMode {
    pub const ALL: [BaseMode; 3] = [BaseMode::Greedy, BaseMode::Average, BaseMode::LeaveOneOut];
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScstConfig {
    pub class: ScstClass,
    pub init: InitMode,
    pub metric: MetricParams,
    pub base: BaseMode,
    /// Samples per image.
    pub nspi: usize,
    pub eos_literal: String,
    /// Semantic version recorded in the signature.
    pub version: String,
    /// Permits [`ScstClass::MixedInit`] and [`ScstClass::MixedReward`].
    pub allow_mixed: bool,
}

impl Default for ScstConfig {
    fn default() -> Self {
        ScstConfig {
            class: ScstClass::Standard,
            init: InitMode::CorpusInit,
            metric: MetricParams::default(),
            base: BaseMode::Average,
            nspi: 5,
            eos_literal: DEFAULT_EOS.to_owned(),
            version: crate::VERSION.to_owned(),
            allow_mixed: false,
        }
    }
}

impl ScstConfig {
    pub fn validate(&self) -> Result<()> {
        self.metric.validate()?;
        if self.nspi == 0 {
            return Err(Error::InvalidConfig("nspi must be at least 1".into()));
        }
        if self.nspi < 2 && self.base != BaseMode::Greedy {
            return Err(Error::InvalidConfig(format!(
                "{:?} base needs at least 2 samples per image",
                self.base
            )));
        }
        if self.class.is_mixed() && !self.allow_mixed {
            return Err(Error::NonStandardMixed);
        }
        if self.metric.metric == Metric::Bleu && self.init == InitMode::CorpusInit {
            return Err(Error::InvalidConfig(
                "BLEU uses no document frequencies; use batch initialization".into(),
            ));
        }
        if self.eos_literal.is_empty() || self.eos_literal.chars().any(char::is_whitespace) {
            return Err(Error::InvalidConfig(format!(
                "EOS literal {:?} must be a single non-empty token",
                self.eos_literal
            )));
        }
        signature::check_version(&self.version)?;
        Ok(())
    }
}

/// One image of a training batch.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBatch {
    pub image_id: String,
    pub samples: Vec<TokenSequence>,
    pub refs: Vec<TokenSequence>,
    /// Greedy-decoded base sequence; required iff the base mode is greedy.
    pub base: Option<TokenSequence>,
}

/// Rewards, baselines and advantages of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageRow {
    pub image_id: String,
    pub rewards: Vec<f64>,
    /// Baseline per sample. Constant across samples except for leave-one-out.
    pub baselines: Vec<f64>,
    pub advantages: Vec<f64>,
}

impl AdvantageRow {
    /// The image baseline, or `None` when it differs per sample.
    pub fn base(&self) -> Option<f64> {
        let first = *self.baselines.first()?;
        self.baselines.iter().all(|&b| b == first).then_some(first)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageMatrix {
    pub rows: Vec<AdvantageRow>,
}

impl AdvantageMatrix {
    pub fn get(&self, image_id: &str) -> Option<&AdvantageRow> {
        self.rows.iter().find(|r| r.image_id == image_id)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// A sentence-level reward.
pub trait Reward: Sync {
    fn reward(&self, candidate: &TokenSequence, refs: &[TokenSequence]) -> f64;
}

impl Reward for Scorer {
    fn reward(&self, candidate: &TokenSequence, refs: &[TokenSequence]) -> f64 {
        self.score(candidate, refs)
    }
}

impl<F> Reward for F
where
    F: Fn(&TokenSequence, &[TokenSequence]) -> f64 + Sync,
{
    fn reward(&self, candidate: &TokenSequence, refs: &[TokenSequence]) -> f64 {
        self(candidate, refs)
    }
}

#[derive(Debug, Clone)]
pub struct ScstEngine {
    config: ScstConfig,
    df: Option<Arc<DocFreqTable>>,
    kernel: Kernel,
    signature: String,
}

/// Builds an engine. `corpus` must be supplied exactly when the init mode is
/// [`InitMode::CorpusInit`]. The metric kernel is read from the environment.
pub fn init_engine(config: ScstConfig, corpus: Option<&Corpus>) -> Result<ScstEngine> {
    init_engine_with_kernel(config, corpus, Kernel::from_env()?)
}

pub fn init_engine_with_kernel(config: ScstConfig, corpus: Option<&Corpus>, kernel: Kernel) -> Result<ScstEngine> {
    config.validate()?;
    let df = match (config.init, corpus) {
        (InitMode::CorpusInit, None) => return Err(Error::MissingCorpus),
        (InitMode::BatchInit, Some(_)) => return Err(Error::UnexpectedCorpus),
        (InitMode::CorpusInit, Some(corpus)) => Some(Arc::new(build_df(
            corpus,
            config.class.df_mode(),
            config.metric.n_max,
            &config.eos_literal,
        )?)),
        (InitMode::BatchInit, None) => None,
    };
    let signature = signature::generate(&config)?;
    Ok(ScstEngine {
        config,
        df,
        kernel,
        signature,
    })
}

impl ScstEngine {
    pub fn config(&self) -> &ScstConfig {
        &self.config
    }

    pub fn signature(&self) -> &str {
        &self.signature
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    /// The frozen table of a corpus-initialized engine.
    pub fn doc_freq(&self) -> Option<&DocFreqTable> {
        self.df.as_deref()
    }

    pub fn validate_batch(&self, batch: &[ImageBatch]) -> Result<()> {
        let cfg = &self.config;
        let lit = cfg.eos_literal.as_str();
        for image in batch {
            let id = &image.image_id;
            if image.samples.len() != cfg.nspi {
                return Err(Error::SampleCountMismatch {
                    image_id: id.clone(),
                    expected: cfg.nspi,
                    found: image.samples.len(),
                });
            }
            match (cfg.base, &image.base) {
                (BaseMode::Greedy, None) => return Err(Error::MissingBase(id.clone())),
                (BaseMode::Average | BaseMode::LeaveOneOut, Some(_)) => {
                    return Err(Error::UnexpectedBase(id.clone()))
                }
                _ => {}
            }
            if image.refs.is_empty() {
                return Err(Error::EmptyRefs(id.clone()));
            }
            let strict = cfg.class == ScstClass::NoEos;
            let all = image.samples.iter().chain(&image.refs).chain(image.base.as_ref());
            for seq in all {
                if misplaced_eos(seq, lit, strict) {
                    return Err(Error::EosLiteralMisplaced(format!("image {id}: {}", seq.to_text())));
                }
            }
        }
        Ok(())
    }

    /// Validates the batch and computes rewards, baselines and advantages
    /// with the configured metric.
    pub fn compute_advantages(&self, batch: &[ImageBatch], exec: Execution) -> Result<AdvantageMatrix> {
        self.validate_batch(batch)?;
        let scorer = self.scorer_for(batch)?;
        Ok(self.advantages_unchecked(batch, &scorer, exec))
    }

    /// Like [`compute_advantages`](Self::compute_advantages) but scores with
    /// an arbitrary reward. Validation and EOS preparation are unchanged.
    pub fn compute_advantages_with<R: Reward>(
        &self,
        batch: &[ImageBatch],
        reward: &R,
        exec: Execution,
    ) -> Result<AdvantageMatrix> {
        self.validate_batch(batch)?;
        Ok(self.advantages_unchecked(batch, reward, exec))
    }

    fn scorer_for(&self, batch: &[ImageBatch]) -> Result<Scorer> {
        let cfg = &self.config;
        let df = match (&self.df, cfg.metric.metric.is_cider_family()) {
            (Some(df), _) => Some(Arc::clone(df)),
            (None, true) => {
                let stripped: Vec<Vec<TokenSequence>> = batch
                    .iter()
                    .map(|img| img.refs.iter().map(|r| prepare(r, &cfg.eos_literal, EosMode::Without)).collect())
                    .collect();
                Some(Arc::new(DocFreqTable::from_ref_sets(
                    stripped.iter().map(Vec::as_slice),
                    cfg.class.df_mode(),
                    cfg.metric.n_max,
                    &cfg.eos_literal,
                )?))
            }
            (None, false) => None,
        };
        Scorer::new(cfg.metric, df, self.kernel)
    }

    fn advantages_unchecked<R: Reward>(&self, batch: &[ImageBatch], reward: &R, exec: Execution) -> AdvantageMatrix {
        let cfg = &self.config;
        let mode = cfg.class.reward_mode();
        let lit = cfg.eos_literal.as_str();
        let refs: Vec<Vec<TokenSequence>> = batch
            .iter()
            .map(|img| img.refs.iter().map(|r| prepare(r, lit, mode)).collect())
            .collect();

        // one job per sample, then one per base, all in input order
        let mut jobs: Vec<(usize, TokenSequence)> = Vec::with_capacity(batch.len() * (cfg.nspi + 1));
        for (i, img) in batch.iter().enumerate() {
            jobs.extend(img.samples.iter().map(|s| (i, prepare(s, lit, mode))));
        }
        for (i, img) in batch.iter().enumerate() {
            if let Some(base) = &img.base {
                jobs.push((i, prepare(base, lit, mode)));
            }
        }
        let scores = map_indexed(exec, jobs.len(), |j| {
            let (i, cand) = &jobs[j];
            assert_boundary(cand, lit, mode);
            for r in &refs[*i] {
                assert_boundary(r, lit, mode);
            }
            reward.reward(cand, &refs[*i])
        });

        let n = cfg.nspi;
        let (sample_scores, base_scores) = scores.split_at(batch.len() * n);
        let rows = batch
            .iter()
            .enumerate()
            .map(|(i, img)| {
                let rewards = sample_scores[i * n..(i + 1) * n].to_vec();
                let baselines = match cfg.base {
                    BaseMode::Greedy => vec![base_scores[i]; n],
                    BaseMode::Average => vec![rewards.iter().sum::<f64>() / n as f64; n],
                    BaseMode::LeaveOneOut => {
                        let total: f64 = rewards.iter().sum();
                        rewards.iter().map(|r| (total - r) / (n - 1) as f64).collect()
                    }
                };
                let advantages = rewards.iter().zip(&baselines).map(|(r, b)| r - b).collect();
                AdvantageRow {
                    image_id: img.image_id.clone(),
                    rewards,
                    baselines,
                    advantages,
                }
            })
            .collect();
        AdvantageMatrix { rows }
    }
}

fn misplaced_eos(seq: &TokenSequence, lit: &str, strict: bool) -> bool {
    let toks = seq.tokens();
    match toks.iter().position(|t| t == lit) {
        None => false,
        Some(pos) => strict || pos + 1 != toks.len(),
    }
}

/// Strips or appends the terminal EOS according to `mode`.
fn prepare(seq: &TokenSequence, lit: &str, mode: EosMode) -> TokenSequence {
    let toks = seq.tokens();
    let content = match toks.last() {
        Some(t) if t == lit => &toks[..toks.len() - 1],
        _ => toks,
    };
    let mut out = content.to_vec();
    if mode == EosMode::With {
        out.push(lit.to_owned());
    }
    TokenSequence::from_tokens(out, lit).expect("validated batch")
}

fn assert_boundary(seq: &TokenSequence, lit: &str, mode: EosMode) {
    let toks = seq.tokens();
    match mode {
        EosMode::With => assert!(
            toks.last().is_some_and(|t| t == lit),
            "EOS reward scored a sequence without terminal EOS"
        ),
        EosMode::Without => assert!(
            !toks.iter().any(|t| t == lit),
            "EOS-free reward scored a sequence containing EOS"
        ),
    }
}
