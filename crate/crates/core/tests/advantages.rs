//! Rewards, baselines and advantages against the reference scorers.

mod common;

use common::*;
use eos_scst::metrics::Kernel;
use eos_scst::Execution;

#[test]
fn batches_match_reference() {
    let oracle = oracle();
    for (key, config, subset) in batch_cases() {
        let expected = oracle["batches"][key].as_array().unwrap();
        for kernel in [Kernel::Portable, Kernel::Optimized] {
            let (engine, batch) = batch_case(&config, subset, kernel);
            assert_eq!(batch.len(), expected.len(), "{key}");
            for exec in [Execution::Sequential, Execution::Parallel] {
                let m = engine.compute_advantages(&batch, exec).unwrap();
                for (row, want) in m.rows.iter().zip(expected) {
                    let cmp = |got: &[f64], want: Vec<f64>, what: &str| {
                        for (g, w) in got.iter().zip(&want) {
                            assert!((g - w).abs() < 1e-9, "{key} {kernel:?} {} {what}: {g} vs {w}", row.image_id);
                        }
                    };
                    cmp(&row.rewards, floats(&want["rewards"]), "reward");
                    cmp(&row.advantages, floats(&want["advantages"]), "advantage");
                    let base = want["base"].as_f64().unwrap();
                    assert!((row.base().unwrap() - base).abs() < 1e-9, "{key} base");
                }
            }
        }
    }
}

#[test]
fn batch_init_differs_from_corpus_init() {
    let cases = batch_cases();
    let pick = |k: &str| cases.iter().find(|c| c.0 == k).unwrap().clone();
    let (_, a, _) = pick("standard_subset_batch_init_cider_d_average");
    let (_, b, _) = pick("standard_subset_corpus_init_cider_d_average");
    let (ea, batch) = batch_case(&a, true, Kernel::Optimized);
    let (eb, _) = batch_case(&b, true, Kernel::Optimized);
    let ra = ea.compute_advantages(&batch, Execution::Parallel).unwrap();
    let rb = eb.compute_advantages(&batch, Execution::Parallel).unwrap();
    assert_ne!(ra.rows[0].rewards, rb.rows[0].rewards);
    assert!(ea.signature().starts_with("STANDARD_w/oInit+"));
    assert!(eb.signature().starts_with("STANDARD_wInit+"));
}
