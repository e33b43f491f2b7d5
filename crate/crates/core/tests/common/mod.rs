#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use eos_scst::corpus::{load_corpus, load_samples, Corpus, InputFormat, Normalization, SampleGroup, TokenSequence, DEFAULT_EOS};
use eos_scst::metrics::{build_df, CiderRParams, DocFreqTable, EosMode, Kernel, MetricParams};
use eos_scst::scst::{init_engine_with_kernel, BaseMode, ImageBatch, InitMode, ScstClass, ScstConfig, ScstEngine};
use serde_json::Value;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn micro_corpus() -> Corpus {
    load_corpus(fixture("micro_refs.jsonl"), InputFormat::JsonLines, Normalization::AsIs, DEFAULT_EOS).unwrap()
}

pub fn micro_samples() -> Vec<SampleGroup> {
    load_samples(fixture("micro_samples.jsonl"), Normalization::AsIs, DEFAULT_EOS).unwrap()
}

pub fn oracle() -> Value {
    let text = std::fs::read_to_string(fixture("oracle_scores.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn matrix(v: &Value) -> Vec<Vec<f64>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|row| row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
        .collect()
}

pub fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

/// Oracle metric keys and their parameters.
pub fn oracle_metrics() -> Vec<(&'static str, MetricParams)> {
    vec![
        ("cider_n4", MetricParams::cider(4)),
        ("cider_d_n4_s6.0", MetricParams::cider_d(4, 6.0)),
        ("cider_d_n5_s6.0", MetricParams::cider_d(5, 6.0)),
        ("cider_r_n4", MetricParams::cider_r(4, CiderRParams::default())),
        ("bleu_n4", MetricParams::bleu(4)),
    ]
}

pub fn eos_modes() -> [(&'static str, EosMode); 2] {
    [("without", EosMode::Without), ("with", EosMode::With)]
}

pub fn prepare(seq: &TokenSequence, mode: EosMode) -> TokenSequence {
    match mode {
        EosMode::With => seq.ensure_eos(DEFAULT_EOS),
        EosMode::Without => seq.strip_eos(),
    }
}

pub fn micro_df(mode: EosMode, n: usize) -> Arc<DocFreqTable> {
    Arc::new(build_df(&micro_corpus(), mode, n, DEFAULT_EOS).unwrap())
}

pub fn seq(s: &str) -> TokenSequence {
    TokenSequence::normalize_allow_empty(s, Normalization::AsIs, DEFAULT_EOS).unwrap()
}

/// Micro-corpus batch, optionally restricted to `subset`, with the greedy
/// base attached when `with_base`.
pub fn micro_batch(subset: Option<&[String]>, with_base: bool) -> Vec<ImageBatch> {
    let corpus = micro_corpus();
    micro_samples()
        .into_iter()
        .filter(|g| subset.is_none_or(|s| s.contains(&g.image_id)))
        .map(|g| ImageBatch {
            refs: corpus.get(&g.image_id).unwrap().refs.clone(),
            image_id: g.image_id,
            samples: g.samples,
            base: if with_base { g.base } else { None },
        })
        .collect()
}

pub fn eos_corpus() -> Corpus {
    load_corpus(fixture("eos_refs.jsonl"), InputFormat::JsonLines, Normalization::AsIs, DEFAULT_EOS).unwrap()
}

pub struct EosPair {
    pub image_id: String,
    pub full: TokenSequence,
    pub truncated: TokenSequence,
}

pub fn eos_pairs() -> Vec<EosPair> {
    std::fs::read_to_string(fixture("eos_pairs.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: Value = serde_json::from_str(l).unwrap();
            EosPair {
                image_id: v["image_id"].as_str().unwrap().to_owned(),
                full: seq(v["full"].as_str().unwrap()),
                truncated: seq(v["truncated"].as_str().unwrap()),
            }
        })
        .collect()
}

/// Reference batch cases: (oracle key, config, corpus-initialized?, subset?).
pub fn batch_cases() -> Vec<(&'static str, ScstConfig, bool)> {
    let cfg = |class, init, metric, base| ScstConfig {
        class,
        init,
        metric,
        base,
        nspi: 5,
        ..ScstConfig::default()
    };
    use BaseMode::*;
    use InitMode::*;
    use ScstClass::*;
    vec![
        ("standard_corpus_cider_d_average", cfg(Standard, CorpusInit, MetricParams::cider_d(4, 6.0), Average), false),
        ("noeos_corpus_cider_d_greedy", cfg(NoEos, CorpusInit, MetricParams::cider_d(4, 6.0), Greedy), false),
        ("noeos_bleu_average", cfg(NoEos, BatchInit, MetricParams::bleu(4), Average), false),
        (
            "standard_cider_r_greedy",
            cfg(Standard, CorpusInit, MetricParams::cider_r(4, CiderRParams::default()), Greedy),
            false,
        ),
        ("standard_subset_batch_init_cider_d_average", cfg(Standard, BatchInit, MetricParams::cider_d(4, 6.0), Average), true),
        ("standard_subset_corpus_init_cider_d_average", cfg(Standard, CorpusInit, MetricParams::cider_d(4, 6.0), Average), true),
    ]
}

pub fn subset_ids() -> Vec<String> {
    oracle()["subset_image_ids"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_owned())
        .collect()
}

/// Builds the engine and batch of one reference case.
pub fn batch_case(config: &ScstConfig, subset: bool, kernel: Kernel) -> (ScstEngine, Vec<ImageBatch>) {
    let corpus = micro_corpus();
    let corpus_arg = (config.init == InitMode::CorpusInit).then_some(&corpus);
    let engine = init_engine_with_kernel(config.clone(), corpus_arg, kernel).unwrap();
    let ids = subset_ids();
    let batch = micro_batch(subset.then_some(ids.as_slice()), config.base == BaseMode::Greedy);
    (engine, batch)
}
