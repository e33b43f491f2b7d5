use std::path::PathBuf;
use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use eos_scst::corpus::{load_corpus, load_samples, InputFormat, Normalization, DEFAULT_EOS};
use eos_scst::metrics::{build_df, EosMode, Kernel, MetricParams, Scorer};
use eos_scst::scst::{init_engine_with_kernel, ImageBatch, ScstConfig};
use eos_scst::Execution;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// The micro-corpus batch repeated `copies` times under distinct image ids.
fn batch(copies: usize) -> (eos_scst::corpus::Corpus, Vec<ImageBatch>) {
    let corpus = load_corpus(fixture("micro_refs.jsonl"), InputFormat::JsonLines, Normalization::AsIs, DEFAULT_EOS).unwrap();
    let samples = load_samples(fixture("micro_samples.jsonl"), Normalization::AsIs, DEFAULT_EOS).unwrap();
    let mut out = Vec::new();
    for k in 0..copies {
        for g in &samples {
            out.push(ImageBatch {
                image_id: format!("{}#{k}", g.image_id),
                samples: g.samples.clone(),
                refs: corpus.get(&g.image_id).unwrap().refs.clone(),
                base: None,
            });
        }
    }
    (corpus, out)
}

fn kernels(c: &mut Criterion) {
    let (corpus, images) = batch(1);
    let mut group = c.benchmark_group("score_100_samples");
    for (name, params) in [
        ("cider_d", MetricParams::cider_d(4, 6.0)),
        ("cider_r", MetricParams::cider_r(4, Default::default())),
        ("bleu", MetricParams::bleu(4)),
    ] {
        let df = params
            .metric
            .is_cider_family()
            .then(|| Arc::new(build_df(&corpus, EosMode::With, 4, DEFAULT_EOS).unwrap()));
        for kernel in [Kernel::Portable, Kernel::Optimized] {
            let scorer = Scorer::new(params, df.clone(), kernel).unwrap();
            group.bench_function(BenchmarkId::new(name, format!("{kernel:?}")), |b| {
                b.iter(|| {
                    let mut total = 0.0;
                    for img in &images {
                        for s in &img.samples {
                            total += scorer.score(s, &img.refs);
                        }
                    }
                    black_box(total)
                })
            });
        }
    }
    group.finish();
}

fn execution(c: &mut Criterion) {
    let (corpus, images) = batch(50);
    let mut group = c.benchmark_group("advantages_1000_images");
    group.sample_size(20);
    for kernel in [Kernel::Portable, Kernel::Optimized] {
        let engine = init_engine_with_kernel(ScstConfig::default(), Some(&corpus), kernel).unwrap();
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_function(BenchmarkId::new(format!("{kernel:?}"), format!("{exec:?}")), |b| {
                b.iter(|| black_box(engine.compute_advantages(&images, exec).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, kernels, execution);
criterion_main!(benches);
