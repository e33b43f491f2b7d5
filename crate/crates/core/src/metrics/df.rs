use std::collections::BTreeMap;

use indexmap::IndexMap;
use rustc_hash::{FxHashMap, FxHashSet};

use super::EosMode;
use crate::corpus::{check_order, extract_ngrams, Corpus, NGram, TokenSequence};
use crate::error::{Error, Result};

/// Parent id of unigrams in the n-gram trie.
pub(crate) const ROOT: u32 = u32::MAX;

/// Document frequencies of every n-gram (orders `1..=n_max`) in a reference
/// corpus. An image counts once per n-gram no matter how many of its
/// references contain it.
///
/// N-grams are hash-consed: each one is a trie node keyed by
/// `(prefix id, last token id)`. Every prefix of a stored n-gram is itself
/// stored, so lookups walk the trie one token at a time.
#[derive(Debug, Clone)]
pub struct DocFreqTable {
    n_max: usize,
    corpus_size: usize,
    eos_literal: String,
    eos_included: bool,
    log_corpus_size: f64,
    vocab: Vec<String>,
    token_ids: FxHashMap<String, u32>,
    nodes: FxHashMap<(u32, u32), u32>,
    parent: Vec<u32>,
    last_token: Vec<u32>,
    df: Vec<u32>,
    // ln|I| - ln(max(df, 1)) per node
    idf: Vec<f64>,
}

impl DocFreqTable {
    /// Builds the table from per-image reference sets. In [`EosMode::With`]
    /// the EOS literal is appended to every reference, which must not carry it
    /// already; in [`EosMode::Without`] no reference may carry it.
    pub fn from_ref_sets<'a, I>(ref_sets: I, eos_mode: EosMode, n_max: usize, eos_literal: &str) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [TokenSequence]>,
    {
        check_order(n_max)?;
        let mut t = DocFreqTable {
            n_max,
            corpus_size: 0,
            eos_literal: eos_literal.to_owned(),
            eos_included: false,
            log_corpus_size: 0.0,
            vocab: Vec::new(),
            token_ids: FxHashMap::default(),
            nodes: FxHashMap::default(),
            parent: Vec::new(),
            last_token: Vec::new(),
            df: Vec::new(),
            idf: Vec::new(),
        };
        let mut seen = FxHashSet::default();
        let mut ids = Vec::new();
        for refs in ref_sets {
            seen.clear();
            for r in refs {
                if r.contains_token(eos_literal) {
                    return Err(Error::EosConflict(format!(
                        "reference `{}` already contains `{eos_literal}`",
                        r.to_text()
                    )));
                }
                ids.clear();
                ids.extend(r.tokens().iter().map(|tok| t.intern_token(tok)));
                if eos_mode == EosMode::With && !r.is_empty() {
                    let eos = t.intern_token(eos_literal);
                    ids.push(eos);
                }
                for start in 0..ids.len() {
                    let mut node = ROOT;
                    for &tok in ids[start..].iter().take(n_max) {
                        node = t.intern_node(node, tok);
                        seen.insert(node);
                    }
                }
            }
            for &node in &seen {
                t.df[node as usize] += 1;
            }
            t.corpus_size += 1;
        }
        if t.corpus_size == 0 {
            return Err(Error::EmptyCorpus);
        }
        t.log_corpus_size = (t.corpus_size as f64).ln();
        let log_size = t.log_corpus_size;
        t.idf = t.df.iter().map(|&d| log_size - f64::max(1.0, d as f64).ln()).collect();
        t.eos_included = t.token_ids.contains_key(eos_literal);
        Ok(t)
    }

    fn intern_token(&mut self, tok: &str) -> u32 {
        if let Some(&id) = self.token_ids.get(tok) {
            return id;
        }
        let id = self.vocab.len() as u32;
        self.vocab.push(tok.to_owned());
        self.token_ids.insert(tok.to_owned(), id);
        id
    }

    fn intern_node(&mut self, parent: u32, tok: u32) -> u32 {
        let next = self.df.len() as u32;
        let id = *self.nodes.entry((parent, tok)).or_insert(next);
        if id == next {
            self.parent.push(parent);
            self.last_token.push(tok);
            self.df.push(0);
        }
        id
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of images, `|I|`.
    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    pub fn eos_included(&self) -> bool {
        self.eos_included
    }

    pub fn eos_literal(&self) -> &str {
        &self.eos_literal
    }

    /// `ln |I|`.
    pub fn log_corpus_size(&self) -> f64 {
        self.log_corpus_size
    }

    /// Number of distinct stored n-grams.
    pub fn len(&self) -> usize {
        self.df.len()
    }

    pub fn is_empty(&self) -> bool {
        self.df.is_empty()
    }

    pub(crate) fn token_id(&self, tok: &str) -> Option<u32> {
        self.token_ids.get(tok).copied()
    }

    pub(crate) fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    pub(crate) fn child(&self, parent: u32, tok: u32) -> Option<u32> {
        self.nodes.get(&(parent, tok)).copied()
    }

    pub(crate) fn idf_by_id(&self, id: u32) -> f64 {
        self.idf[id as usize]
    }

    pub fn ngram_id<S: AsRef<str>>(&self, ngram: &[S]) -> Option<u32> {
        if ngram.is_empty() || ngram.len() > self.n_max {
            return None;
        }
        let mut node = ROOT;
        for tok in ngram {
            node = self.child(node, self.token_id(tok.as_ref())?)?;
        }
        Some(node)
    }

    /// Document frequency; 0 for n-grams absent from the corpus.
    pub fn df<S: AsRef<str>>(&self, ngram: &[S]) -> u32 {
        self.ngram_id(ngram).map_or(0, |id| self.df[id as usize])
    }

    /// `ln(|I| / max(df, 1))`.
    pub fn idf<S: AsRef<str>>(&self, ngram: &[S]) -> f64 {
        (self.corpus_size as f64 / f64::max(1.0, self.df(ngram) as f64)).ln()
    }

    pub fn ngram_tokens(&self, id: u32) -> NGram {
        let mut out = Vec::new();
        let mut node = id;
        while node != ROOT {
            out.push(self.vocab[self.last_token[node as usize] as usize].clone());
            node = self.parent[node as usize];
        }
        out.reverse();
        out
    }

    /// All stored n-grams with their document frequency, sorted.
    pub fn to_map(&self) -> BTreeMap<NGram, u32> {
        (0..self.df.len() as u32)
            .map(|id| (self.ngram_tokens(id), self.df[id as usize]))
            .collect()
    }
}

/// Document frequencies over a corpus.
pub fn build_df(corpus: &Corpus, eos_mode: EosMode, n_max: usize, eos_literal: &str) -> Result<DocFreqTable> {
    DocFreqTable::from_ref_sets(corpus.groups().iter().map(|g| g.refs.as_slice()), eos_mode, n_max, eos_literal)
}

/// Per-order tf-idf weights of one sequence:
/// `h(w) / sum_l h(l) * ln(|I| / max(df(w), 1))`, the term frequency being
/// normalized within each order.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfVector {
    orders: Vec<IndexMap<NGram, f64>>,
}

impl TfIdfVector {
    pub fn order(&self, n: usize) -> &IndexMap<NGram, f64> {
        &self.orders[n - 1]
    }

    pub fn weight<S: AsRef<str>>(&self, ngram: &[S]) -> Option<f64> {
        if ngram.is_empty() || ngram.len() > self.orders.len() {
            return None;
        }
        let key: NGram = ngram.iter().map(|s| s.as_ref().to_owned()).collect();
        self.orders[ngram.len() - 1].get(&key).copied()
    }
}

pub fn tfidf(seq: &TokenSequence, df: &DocFreqTable) -> TfIdfVector {
    let counts = extract_ngrams(seq, df.n_max()).expect("table order already validated");
    let size = df.corpus_size() as f64;
    let orders = (1..=df.n_max())
        .map(|n| {
            let m = counts.order(n);
            let total: usize = m.values().sum();
            m.iter()
                .map(|(g, &h)| {
                    let tf = h as f64 / total as f64;
                    (g.clone(), tf * (size / f64::max(1.0, df.df(g) as f64)).ln())
                })
                .collect()
        })
        .collect();
    TfIdfVector { orders }
}
