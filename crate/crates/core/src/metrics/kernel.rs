//! Id-based kernel.
//!
//! Tokens and n-grams are mapped to the integer ids of the frozen
//! [`DocFreqTable`]; anything the table has not seen gets a temporary id from
//! a per-thread overlay that is reset on every call. Buffers live in a
//! thread-local [`Scratch`] and keep their capacity between calls.

use std::cell::RefCell;

use rustc_hash::FxHashMap;

use super::df::ROOT;
use super::penalty;
use super::{DocFreqTable, Metric, MetricParams};
use crate::corpus::TokenSequence;

#[derive(Default)]
struct Overlay {
    base_tokens: u32,
    base_nodes: u32,
    tokens: FxHashMap<String, u32>,
    nodes: FxHashMap<(u32, u32), u32>,
}

impl Overlay {
    fn reset(&mut self, base_tokens: usize, base_nodes: usize) {
        self.base_tokens = base_tokens as u32;
        self.base_nodes = base_nodes as u32;
        self.tokens.clear();
        self.nodes.clear();
    }

    fn token(&mut self, table: Option<&DocFreqTable>, tok: &str) -> u32 {
        if let Some(id) = table.and_then(|t| t.token_id(tok)) {
            return id;
        }
        if let Some(&id) = self.tokens.get(tok) {
            return id;
        }
        let id = self.base_tokens + self.tokens.len() as u32;
        self.tokens.insert(tok.to_owned(), id);
        id
    }

    /// Node id of `parent + tok` and whether it is stored in the table.
    fn child(&mut self, table: Option<&DocFreqTable>, parent: u32, tok: u32) -> (u32, bool) {
        if parent == ROOT || parent < self.base_nodes {
            if let Some(id) = table.and_then(|t| t.child(parent, tok)) {
                return (id, true);
            }
        }
        let next = self.base_nodes + self.nodes.len() as u32;
        let id = *self.nodes.entry((parent, tok)).or_insert(next);
        (id, false)
    }
}

/// One sequence: per order, `(node id, count, known)` in first-occurrence order.
#[derive(Default)]
struct Encoded {
    orders: Vec<Vec<(u32, u32, bool)>>,
    slot: FxHashMap<u32, usize>,
    prev: Vec<u32>,
    ids: Vec<u32>,
}

impl Encoded {
    fn encode(&mut self, overlay: &mut Overlay, table: Option<&DocFreqTable>, seq: &TokenSequence, n: usize) {
        self.ids.clear();
        self.ids.extend(seq.tokens().iter().map(|t| overlay.token(table, t)));
        if self.orders.len() < n {
            self.orders.resize_with(n, Vec::new);
        }
        self.prev.clear();
        self.prev.resize(self.ids.len(), ROOT);
        for k in 0..n {
            let grams = &mut self.orders[k];
            grams.clear();
            self.slot.clear();
            let windows = self.ids.len().saturating_sub(k);
            for start in 0..windows {
                let (id, known) = overlay.child(table, self.prev[start], self.ids[start + k]);
                self.prev[start] = id;
                match self.slot.get(&id) {
                    Some(&s) => grams[s].1 += 1,
                    None => {
                        self.slot.insert(id, grams.len());
                        grams.push((id, 1, known));
                    }
                }
            }
        }
    }

    fn bigrams(&self, n: usize) -> u32 {
        if n >= 2 {
            self.orders[1].iter().map(|g| g.1).sum()
        } else {
            0
        }
    }
}

#[derive(Default)]
struct Weighted {
    orders: Vec<Vec<(u32, f64)>>,
    lookup: FxHashMap<u32, f64>,
    norms: Vec<f64>,
}

impl Weighted {
    fn fill(&mut self, enc: &Encoded, table: &DocFreqTable, n: usize, with_lookup: bool) {
        let log_size = table.log_corpus_size();
        let unseen = log_size - f64::max(1.0, 0.0).ln();
        if self.orders.len() < n {
            self.orders.resize_with(n, Vec::new);
        }
        self.norms.clear();
        self.lookup.clear();
        for k in 0..n {
            let out = &mut self.orders[k];
            out.clear();
            let mut sq = 0.0;
            for &(id, count, known) in &enc.orders[k] {
                let idf = if known { table.idf_by_id(id) } else { unseen };
                let w = count as f64 * idf;
                sq += w * w;
                out.push((id, w));
                if with_lookup {
                    self.lookup.insert(id, w);
                }
            }
            self.norms.push(sq.sqrt());
        }
    }
}

#[derive(Default)]
struct Scratch {
    overlay: Overlay,
    enc: Encoded,
    cand: Weighted,
    reference: Weighted,
    ref_max: FxHashMap<u32, u32>,
    per_order: Vec<f64>,
}

thread_local! {
    static SCRATCH: RefCell<Scratch> = RefCell::new(Scratch::default());
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
    SCRATCH.with(|cell| {
        let s = &mut *cell.borrow_mut();
        let n = params.n_max;
        s.overlay.reset(df.vocab_len(), df.len());

        s.enc.encode(&mut s.overlay, Some(df), candidate, n);
        s.cand.fill(&s.enc, df, n, false);
        let cand_bigrams = s.enc.bigrams(n);
        let cand_words = penalty::word_counts(candidate.tokens());

        let clip = matches!(metric, Metric::CiderD | Metric::CiderR);
        s.per_order.clear();
        s.per_order.resize(n, 0.0);
        for reference in refs {
            s.enc.encode(&mut s.overlay, Some(df), reference, n);
            s.reference.fill(&s.enc, df, n, true);
            let ref_bigrams = s.enc.bigrams(n);
            let factor = match metric {
                Metric::Cider => 1.0,
                Metric::CiderD => penalty::gaussian(cand_bigrams as f64 - ref_bigrams as f64, params.sigma),
                Metric::CiderR => {
                    let p = params.cider_r;
                    let rep = penalty::repetition(&cand_words, &penalty::word_counts(reference.tokens()));
                    let len =
                        penalty::relative_length(cand_bigrams as f64 + 1.0, ref_bigrams as f64 + 1.0, p.alpha);
                    rep.powf(p.repeat_coeff) * len.powf(p.length_coeff)
                }
                Metric::Bleu => unreachable!("BLEU is not a CIDEr variant"),
            };
            for k in 0..n {
                let mut val = 0.0;
                for &(id, wc) in &s.cand.orders[k] {
                    // absent reference weights contribute an exact +0.0
                    if let Some(&wr) = s.reference.lookup.get(&id) {
                        val += if clip { wc.min(wr) * wr } else { wc * wr };
                    }
                }
                let (nc, nr) = (s.cand.norms[k], s.reference.norms[k]);
                if nc != 0.0 && nr != 0.0 {
                    val /= nc * nr;
                }
                if metric != Metric::Cider {
                    val *= factor;
                }
                s.per_order[k] += val;
            }
        }
        penalty::finish_cider(&s.per_order, refs.len())
    })
}

pub(super) fn bleu(candidate: &TokenSequence, refs: &[TokenSequence], n: usize) -> f64 {
    if candidate.is_empty() || refs.is_empty() {
        return 0.0;
    }
    SCRATCH.with(|cell| {
        let s = &mut *cell.borrow_mut();
        s.overlay.reset(0, 0);
        s.ref_max.clear();
        for reference in refs {
            s.enc.encode(&mut s.overlay, None, reference, n);
            for order in &s.enc.orders[..n] {
                for &(id, count, _) in order {
                    let e = s.ref_max.entry(id).or_insert(0);
                    *e = (*e).max(count);
                }
            }
        }
        s.enc.encode(&mut s.overlay, None, candidate, n);
        let mut matches = vec![0u64; n];
        for (k, order) in s.enc.orders[..n].iter().enumerate() {
            for &(id, count, _) in order {
                if let Some(&m) = s.ref_max.get(&id) {
                    matches[k] += count.min(m) as u64;
                }
            }
        }
        let ref_len = penalty::closest_ref_len(candidate.len(), refs.iter().map(TokenSequence::len));
        penalty::bleu_from_counts(&matches, candidate.len(), ref_len)
    })
}
