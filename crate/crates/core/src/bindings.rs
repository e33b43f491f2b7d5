//! Plain-data entry points for foreign-language wrappers.
//!
//! Everything crosses this boundary as strings, nested lists and `f64`s; the
//! numerics are those of [`crate::scst`] and [`crate::metrics`] unchanged.
//! Errors carry the core error name so a host can raise an exception type
//! of the same name.

use std::fmt;
use std::sync::Arc;

use crate::corpus::{Corpus, CorpusRecord, Normalization, RefGroup, TokenSequence};
use crate::metrics::{build_df, MetricParams, Scorer};
use crate::scst::{init_engine, ImageBatch, ScstConfig, ScstEngine};
use crate::{signature, Error, Execution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindError {
    /// Core error name, e.g. `SampleCountMismatch`.
    pub name: &'static str,
    pub message: String,
}

impl fmt::Display for BindError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.message)
    }
}

impl std::error::Error for BindError {}

impl From<Error> for BindError {
    fn from(e: Error) -> Self {
        BindError {
            name: e.name(),
            message: e.to_string(),
        }
    }
}

pub type BindResult<T> = std::result::Result<T, BindError>;

/// A shareable engine handle.
#[derive(Debug, Clone)]
pub struct BoundEngine {
    engine: Arc<ScstEngine>,
}

impl BoundEngine {
    pub fn signature(&self) -> &str {
        self.engine.signature()
    }

    pub fn engine(&self) -> &ScstEngine {
        &self.engine
    }
}

/// Rewards, per-sample baselines and advantages, one inner list per image.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardLists {
    pub advantages: Vec<Vec<f64>>,
    pub rewards: Vec<Vec<f64>>,
    pub bases: Vec<Vec<f64>>,
}

fn seq(raw: &str, lit: &str) -> BindResult<TokenSequence> {
    Ok(TokenSequence::normalize_allow_empty(raw, Normalization::AsIs, lit)?)
}

fn corpus_from(records: &[CorpusRecord], lit: &str) -> BindResult<Corpus> {
    let groups = records
        .iter()
        .map(|r| {
            Ok(RefGroup {
                image_id: r.image_id.clone(),
                refs: r.refs.iter().filter(|s| !s.trim().is_empty()).map(|s| seq(s, lit)).collect::<BindResult<_>>()?,
            })
        })
        .collect::<BindResult<Vec<_>>>()?;
    Ok(Corpus::new(groups)?)
}

pub fn bind_init(config: ScstConfig, corpus: Option<&[CorpusRecord]>) -> BindResult<BoundEngine> {
    let corpus = corpus.map(|c| corpus_from(c, &config.eos_literal)).transpose()?;
    let engine = init_engine(config, corpus.as_ref())?;
    Ok(BoundEngine {
        engine: Arc::new(engine),
    })
}

/// Like [`bind_init`], with the configuration given as a signature string.
pub fn bind_init_signature(sig: &str, eos_literal: &str, corpus: Option<&[CorpusRecord]>) -> BindResult<BoundEngine> {
    let parsed = signature::parse(sig)?;
    bind_init(parsed.to_config(eos_literal), corpus)
}

pub fn bind_signature(config: &ScstConfig) -> BindResult<String> {
    Ok(signature::generate(config)?)
}

fn to_batch(
    engine: &BoundEngine,
    samples: &[Vec<String>],
    refs: &[Vec<String>],
    base: Option<&[String]>,
) -> BindResult<Vec<ImageBatch>> {
    let lit = engine.engine.config().eos_literal.as_str();
    if refs.len() != samples.len() || base.is_some_and(|b| b.len() != samples.len()) {
        return Err(BindError {
            name: "InvalidConfig",
            message: "samples, refs and base must have one entry per image".into(),
        });
    }
    (0..samples.len())
        .map(|i| {
            Ok(ImageBatch {
                image_id: i.to_string(),
                samples: samples[i].iter().map(|s| seq(s, lit)).collect::<BindResult<_>>()?,
                refs: refs[i].iter().map(|s| seq(s, lit)).collect::<BindResult<_>>()?,
                base: base.map(|b| seq(&b[i], lit)).transpose()?,
            })
        })
        .collect()
}

pub fn bind_validate(engine: &BoundEngine, samples: &[Vec<String>], refs: &[Vec<String>], base: Option<&[String]>) -> BindResult<()> {
    let batch = to_batch(engine, samples, refs, base)?;
    Ok(engine.engine.validate_batch(&batch)?)
}

/// Images are identified by position in the outer lists.
pub fn bind_reward(engine: &BoundEngine, samples: &[Vec<String>], refs: &[Vec<String>], base: Option<&[String]>) -> BindResult<RewardLists> {
    let batch = to_batch(engine, samples, refs, base)?;
    let m = engine.engine.compute_advantages(&batch, Execution::Parallel)?;
    let mut out = RewardLists {
        advantages: Vec::with_capacity(m.len()),
        rewards: Vec::with_capacity(m.len()),
        bases: Vec::with_capacity(m.len()),
    };
    for row in m.rows {
        out.advantages.push(row.advantages);
        out.rewards.push(row.rewards);
        out.bases.push(row.baselines);
    }
    Ok(out)
}

/// Scores one candidate per reference list. `df_corpus` is required for the
/// CIDEr family; sequences are scored exactly as given.
pub fn bind_score(
    params: MetricParams,
    df_corpus: Option<&[CorpusRecord]>,
    eos_mode: crate::metrics::EosMode,
    eos_literal: &str,
    candidates: &[String],
    refs: &[Vec<String>],
) -> BindResult<Vec<f64>> {
    let df = match df_corpus {
        Some(records) => {
            let corpus = corpus_from(records, eos_literal)?;
            Some(Arc::new(build_df(&corpus, eos_mode, params.n_max, eos_literal)?))
        }
        None => None,
    };
    let scorer = Scorer::new(params, df, crate::metrics::Kernel::from_env()?)?;
    candidates
        .iter()
        .zip(refs)
        .map(|(c, r)| {
            let c = seq(c, eos_literal)?;
            let r: Vec<_> = r.iter().map(|s| seq(s, eos_literal)).collect::<BindResult<_>>()?;
            Ok(scorer.score(&c, &r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scst::{BaseMode, InitMode, ScstClass};

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn errors_carry_core_names() {
        let err = bind_init(ScstConfig::default(), None).unwrap_err();
        assert_eq!(err.name, "MissingCorpus");
        let cfg = ScstConfig {
            class: ScstClass::NoEos,
            init: InitMode::BatchInit,
            nspi: 3,
            ..ScstConfig::default()
        };
        let engine = bind_init(cfg, None).unwrap();
        assert!(engine.signature().starts_with("NO<EOS>MODE_w/oInit+"));
        let err = bind_reward(&engine, &[strings(&["a b", "c d"])], &[strings(&["a b"])], None).unwrap_err();
        assert_eq!(err.name, "SampleCountMismatch");
    }

    #[test]
    fn reward_matches_engine() {
        let cfg = ScstConfig {
            init: InitMode::BatchInit,
            base: BaseMode::Average,
            nspi: 3,
            ..ScstConfig::default()
        };
        let engine = bind_init(cfg, None).unwrap();
        let samples = vec![strings(&["a dog runs", "a dog", "a cat sits"]), strings(&["two birds fly", "two birds", "birds"])];
        let refs = vec![strings(&["a dog runs fast", "a dog is running"]), strings(&["two birds fly high", "birds flying"])];
        let got = bind_reward(&engine, &samples, &refs, None).unwrap();
        for (adv, rew) in got.advantages.iter().zip(&got.rewards) {
            let mean = rew.iter().sum::<f64>() / 3.0;
            for (a, r) in adv.iter().zip(rew) {
                assert_eq!(*a, r - mean);
            }
        }
        let again = bind_reward(&engine, &samples, &refs, None).unwrap();
        assert_eq!(got, again);
    }
}
