//! Scalar pieces shared by both kernels.

use indexmap::IndexMap;

pub(crate) const BLEU_TINY: f64 = 1e-15;
pub(crate) const BLEU_SMALL: f64 = 1e-9;

/// CIDEr-D length penalty; `delta` is the difference of bigram counts.
pub(crate) fn gaussian(delta: f64, sigma: f64) -> f64 {
    (-(delta * delta) / (2.0 * sigma * sigma)).exp()
}

/// CIDEr-R length penalty on lengths measured as bigram count plus one.
pub(crate) fn relative_length(candidate_len: f64, reference_len: f64, alpha: f64) -> f64 {
    let delta = (reference_len - candidate_len).abs();
    (-(delta * delta) / (alpha * reference_len * reference_len)).exp()
}

/// Word counts of the space-joined sentence under `\w+` tokenization, in
/// first-occurrence order. `<eos>` therefore contributes the word `eos`.
///
/// Word characters are alphanumerics plus `_`; this agrees with Python's
/// Unicode `\w` outside a handful of combining marks.
pub(crate) fn word_counts<S: AsRef<str>>(tokens: &[S]) -> IndexMap<&str, u32> {
    let mut counts = IndexMap::new();
    for tok in tokens {
        for word in tok.as_ref().split(|c: char| !(c.is_alphanumeric() || c == '_')) {
            if !word.is_empty() {
                *counts.entry(word).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Geometric mean over candidate words of `1 / (1 + |ref count - cand count|)`,
/// or `1 / cand count` for words missing from the reference. A candidate
/// without words gets 0.
pub(crate) fn repetition(candidate: &IndexMap<&str, u32>, reference: &IndexMap<&str, u32>) -> f64 {
    if candidate.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for (word, &freq) in candidate {
        let diff = match reference.get(word) {
            Some(&r) => r.abs_diff(freq) as f64,
            None => (freq - 1) as f64,
        };
        log_sum += (1.0 / (1.0 + diff)).ln();
    }
    (log_sum / candidate.len() as f64).exp()
}

/// Reference length closest to the candidate's; ties go to the shorter
/// reference, then to the earlier one.
pub(crate) fn closest_ref_len(test_len: usize, ref_lens: impl Iterator<Item = usize>) -> usize {
    let t = test_len as f64;
    let mut best: Option<(f64, usize)> = None;
    for r in ref_lens {
        let key = r.abs_diff(test_len) as f64 + r as f64 / t;
        if best.is_none_or(|(k, _)| key < k) {
            best = Some((key, r));
        }
    }
    best.map_or(0, |(_, r)| r)
}

/// Sentence BLEU-n from clipped match counts per order.
pub(crate) fn bleu_from_counts(matches: &[u64], test_len: usize, ref_len: usize) -> f64 {
    let n = matches.len();
    let ratio = (test_len as f64 + BLEU_TINY) / (ref_len as f64 + BLEU_SMALL);
    let mut product = 1.0;
    for (k, &m) in matches.iter().enumerate() {
        let guesses = test_len.saturating_sub(k) as f64;
        product *= (m as f64 + BLEU_TINY) / (guesses + BLEU_SMALL);
    }
    let mut score = product.powf(1.0 / n as f64);
    if ratio < 1.0 {
        score *= (1.0 - 1.0 / ratio).exp();
    }
    score
}

/// Mean of per-order sums, divided by the reference count, times 10.
pub(crate) fn finish_cider(per_order: &[f64], n_refs: usize) -> f64 {
    let mean = per_order.iter().sum::<f64>() / per_order.len() as f64;
    mean / n_refs as f64 * 10.0
}
