//! String-keyed reference kernel.

use indexmap::IndexMap;

use super::penalty;
use super::{DocFreqTable, Metric, MetricParams};
use crate::corpus::{extract_ngrams, NGram, TokenSequence};

struct Vectorized {
    orders: Vec<IndexMap<NGram, f64>>,
    norms: Vec<f64>,
    bigrams: usize,
}

fn vectorize(seq: &TokenSequence, df: &DocFreqTable, n: usize) -> Vectorized {
    let counts = extract_ngrams(seq, n).expect("order validated by caller");
    let log_size = df.log_corpus_size();
    let mut orders = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    for k in 1..=n {
        let mut weights = IndexMap::new();
        let mut sq = 0.0;
        for (gram, &tf) in counts.order(k) {
            let doc = f64::max(1.0, df.df(gram) as f64).ln();
            let w = tf as f64 * (log_size - doc);
            sq += w * w;
            weights.insert(gram.clone(), w);
        }
        orders.push(weights);
        norms.push(sq.sqrt());
    }
    let bigrams = if n >= 2 { counts.order(2).values().sum() } else { 0 };
    Vectorized { orders, norms, bigrams }
}

pub(super) fn cider_family(
    metric: Metric,
    candidate: &TokenSequence,
    refs: &[TokenSequence],
    df: &DocFreqTable,
    params: &MetricParams,
) -> f64 {
    if candidate.is_empty() || refs.is_empty() {
        return 0.0;
    }
    let n = params.n_max;
    let cand = vectorize(candidate, df, n);
    let cand_words = penalty::word_counts(candidate.tokens());
    let clip = matches!(metric, Metric::CiderD | Metric::CiderR);
    let mut per_order = vec![0.0; n];
    for reference in refs {
        let r = vectorize(reference, df, n);
        let factor = match metric {
            Metric::Cider => 1.0,
            Metric::CiderD => penalty::gaussian(cand.bigrams as f64 - r.bigrams as f64, params.sigma),
            Metric::CiderR => {
                let p = params.cider_r;
                let rep = penalty::repetition(&cand_words, &penalty::word_counts(reference.tokens()));
                let len = penalty::relative_length(cand.bigrams as f64 + 1.0, r.bigrams as f64 + 1.0, p.alpha);
                rep.powf(p.repeat_coeff) * len.powf(p.length_coeff)
            }
            Metric::Bleu => unreachable!("BLEU is not a CIDEr variant"),
        };
        #[allow(clippy::needless_range_loop)]
        for k in 0..n {
            let mut val = 0.0;
            for (gram, &wc) in &cand.orders[k] {
                let wr = r.orders[k].get(gram).copied().unwrap_or(0.0);
                val += if clip { wc.min(wr) * wr } else { wc * wr };
            }
            if cand.norms[k] != 0.0 && r.norms[k] != 0.0 {
                val /= cand.norms[k] * r.norms[k];
            }
            if metric != Metric::Cider {
                val *= factor;
            }
            per_order[k] += val;
        }
    }
    penalty::finish_cider(&per_order, refs.len())
}

pub(super) fn bleu(candidate: &TokenSequence, refs: &[TokenSequence], n: usize) -> f64 {
    if candidate.is_empty() || refs.is_empty() {
        return 0.0;
    }
    let cand = extract_ngrams(candidate, n).expect("order validated by caller");
    let ref_counts: Vec<_> = refs
        .iter()
        .map(|r| extract_ngrams(r, n).expect("order validated by caller"))
        .collect();
    let mut matches = vec![0u64; n];
    for (gram, count) in cand.iter() {
        let max_ref = ref_counts
            .iter()
            .map(|rc| rc.order(gram.len()).get(gram).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        matches[gram.len() - 1] += count.min(max_ref) as u64;
    }
    let ref_len = penalty::closest_ref_len(candidate.len(), refs.iter().map(TokenSequence::len));
    penalty::bleu_from_counts(&matches, candidate.len(), ref_len)
}
