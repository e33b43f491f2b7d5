//! Tokenized captions, n-gram counting and JSONL ingestion.
//!
//! Text is consumed pre-tokenized: a caption is split on whitespace and,
//! optionally, lowercased. No other transform is applied.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default End-of-Sequence literal.
pub const DEFAULT_EOS: &str = "<eos>";

/// Largest n-gram order the engine accepts.
pub const MAX_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EosState {
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    AsIs,
    Lower,
}

/// A whitespace-tokenized sentence.
///
/// When `eos_state` is [`EosState::Present`] the EOS literal is the final token
/// and appears nowhere else.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenSequence {
    tokens: Vec<String>,
    eos_state: EosState,
}

impl TokenSequence {
    /// Splits `raw` on whitespace. Rejects empty input and an EOS literal
    /// anywhere but the final position.
    pub fn normalize(raw: &str, scheme: Normalization, eos_literal: &str) -> Result<Self> {
        let seq = Self::normalize_allow_empty(raw, scheme, eos_literal)?;
        if seq.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(seq)
    }

    /// Like [`normalize`](Self::normalize) but yields an empty sequence for
    /// blank input. Used for model samples, which may legitimately be empty.
    pub fn normalize_allow_empty(raw: &str, scheme: Normalization, eos_literal: &str) -> Result<Self> {
        let tokens = raw
            .split_whitespace()
            .map(|t| match scheme {
                Normalization::AsIs => t.to_owned(),
                Normalization::Lower => t.to_lowercase(),
            })
            .collect();
        Self::from_tokens(tokens, eos_literal).map_err(|e| match e {
            Error::EosLiteralMisplaced(_) => Error::EosLiteralMisplaced(raw.to_owned()),
            other => other,
        })
    }

    pub fn from_tokens(tokens: Vec<String>, eos_literal: &str) -> Result<Self> {
        if let Some(bad) = tokens.iter().find(|t| t.is_empty() || t.chars().any(char::is_whitespace)) {
            return Err(Error::InvalidToken(bad.clone()));
        }
        let last = tokens.len().saturating_sub(1);
        if tokens[..last].iter().any(|t| t == eos_literal) {
            return Err(Error::EosLiteralMisplaced(tokens.join(" ")));
        }
        let eos_state = match tokens.last() {
            Some(t) if t == eos_literal => EosState::Present,
            _ => EosState::Absent,
        };
        Ok(TokenSequence { tokens, eos_state })
    }

    pub fn empty() -> Self {
        TokenSequence {
            tokens: Vec::new(),
            eos_state: EosState::Absent,
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn eos_state(&self) -> EosState {
        self.eos_state
    }

    pub fn has_eos(&self) -> bool {
        self.eos_state == EosState::Present
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens with a terminal EOS removed.
    pub fn content_tokens(&self) -> &[String] {
        match self.eos_state {
            EosState::Present => &self.tokens[..self.tokens.len() - 1],
            EosState::Absent => &self.tokens,
        }
    }

    pub fn contains_token(&self, token: &str) -> bool {
        self.tokens.iter().any(|t| t == token)
    }

    pub fn append_eos(&self, eos_literal: &str) -> Result<Self> {
        if self.is_empty() {
            return Err(Error::EmptyInput);
        }
        if self.has_eos() {
            return Err(Error::EosAlreadyPresent);
        }
        let mut tokens = self.tokens.clone();
        tokens.push(eos_literal.to_owned());
        Ok(TokenSequence {
            tokens,
            eos_state: EosState::Present,
        })
    }

    /// The sequence without its terminal EOS.
    pub fn strip_eos(&self) -> Self {
        TokenSequence {
            tokens: self.content_tokens().to_vec(),
            eos_state: EosState::Absent,
        }
    }

    /// Appends EOS unless already present. Empty sequences become `[eos]`.
    pub fn ensure_eos(&self, eos_literal: &str) -> Self {
        if self.has_eos() {
            return self.clone();
        }
        let mut tokens = self.tokens.clone();
        tokens.push(eos_literal.to_owned());
        TokenSequence {
            tokens,
            eos_state: EosState::Present,
        }
    }

    /// The first `keep` content tokens, followed by the terminal EOS if any.
    pub(crate) fn keep_prefix(&self, keep: usize) -> Self {
        let content = self.content_tokens();
        let mut tokens = content[..keep.min(content.len())].to_vec();
        if self.has_eos() {
            tokens.push(self.tokens[self.tokens.len() - 1].clone());
        }
        TokenSequence {
            tokens,
            eos_state: self.eos_state,
        }
    }

    /// Re-derive the EOS state against a different literal.
    pub fn with_literal(self, eos_literal: &str) -> Result<Self> {
        Self::from_tokens(self.tokens, eos_literal)
    }

    pub fn to_text(&self) -> String {
        self.tokens.join(" ")
    }
}

pub type NGram = Vec<String>;

/// Per-order n-gram counts of one sequence, in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramMultiset {
    orders: Vec<IndexMap<NGram, usize>>,
}

impl NGramMultiset {
    pub fn n_max(&self) -> usize {
        self.orders.len()
    }

    /// Counts for n-grams of length `n` (1-based).
    pub fn order(&self, n: usize) -> &IndexMap<NGram, usize> {
        &self.orders[n - 1]
    }

    pub fn count(&self, ngram: &[&str]) -> usize {
        if ngram.is_empty() || ngram.len() > self.orders.len() {
            return 0;
        }
        let key: NGram = ngram.iter().map(|s| (*s).to_owned()).collect();
        self.orders[ngram.len() - 1].get(&key).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NGram, usize)> {
        self.orders.iter().flat_map(|m| m.iter().map(|(k, v)| (k, *v)))
    }
}

pub fn check_order(n_max: usize) -> Result<()> {
    if !(1..=MAX_ORDER).contains(&n_max) {
        return Err(Error::InvalidConfig(format!(
            "n-gram order must be in 1..={MAX_ORDER}, got {n_max}"
        )));
    }
    Ok(())
}

/// Sliding-window n-gram counts for orders `1..=n_max`.
pub fn extract_ngrams(seq: &TokenSequence, n_max: usize) -> Result<NGramMultiset> {
    check_order(n_max)?;
    let tokens = seq.tokens();
    let orders = (1..=n_max)
        .map(|n| {
            let mut counts = IndexMap::new();
            for window in tokens.windows(n) {
                *counts.entry(window.to_vec()).or_insert(0) += 1;
            }
            counts
        })
        .collect();
    Ok(NGramMultiset { orders })
}

/// The ground-truth captions of one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefGroup {
    pub image_id: String,
    pub refs: Vec<TokenSequence>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    groups: Vec<RefGroup>,
}

impl Corpus {
    pub fn new(groups: Vec<RefGroup>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut seen = HashSet::new();
        for g in &groups {
            if !seen.insert(g.image_id.as_str()) {
                return Err(Error::DuplicateImageId(g.image_id.clone()));
            }
            if g.refs.is_empty() {
                return Err(Error::EmptyRefs(g.image_id.clone()));
            }
            if g.refs.iter().any(|r| r.eos_state() != g.refs[0].eos_state()) {
                return Err(Error::EosConflict(format!(
                    "references of `{}` disagree on EOS presence",
                    g.image_id
                )));
            }
        }
        Ok(Corpus { groups })
    }

    pub fn groups(&self) -> &[RefGroup] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn get(&self, image_id: &str) -> Option<&RefGroup> {
        self.groups.iter().find(|g| g.image_id == image_id)
    }

    /// Writes the corpus back out as JSONL, one record per group.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for g in &self.groups {
            let rec = CorpusRecord {
                image_id: g.image_id.clone(),
                refs: g.refs.iter().map(TokenSequence::to_text).collect(),
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub image_id: String,
    pub refs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRecord {
    pub image_id: String,
    pub samples: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
}

/// Model outputs for one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleGroup {
    pub image_id: String,
    pub samples: Vec<TokenSequence>,
    pub base: Option<TokenSequence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    #[default]
    JsonLines,
}

fn parse_lines<T, R, F>(reader: R, origin: &str, mut f: F) -> Result<Vec<T>>
where
    R: BufRead,
    F: FnMut(serde_json::Value, usize) -> Result<T>,
{
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::ParseError {
            path: origin.to_owned(),
            line: lineno,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| Error::ParseError {
            path: origin.to_owned(),
            line: lineno,
            message: e.to_string(),
        })?;
        out.push(f(value, lineno)?);
    }
    Ok(out)
}

fn record<T: serde::de::DeserializeOwned>(value: serde_json::Value, origin: &str, line: usize) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::ParseError {
        path: origin.to_owned(),
        line,
        message: e.to_string(),
    })
}

fn at_line(err: Error, origin: &str, line: usize) -> Error {
    match err {
        e @ (Error::EmptyInput | Error::EosLiteralMisplaced(_) | Error::InvalidToken(_)) => Error::ParseError {
            path: origin.to_owned(),
            line,
            message: e.to_string(),
        },
        other => other,
    }
}

/// Reads a reference corpus: `{"image_id": .., "refs": [..]}` per line.
pub fn read_corpus<R: BufRead>(reader: R, origin: &str, scheme: Normalization, eos_literal: &str) -> Result<Corpus> {
    let groups = parse_lines(reader, origin, |value, line| {
        let rec: CorpusRecord = record(value, origin, line)?;
        let refs = rec
            .refs
            .iter()
            .map(|r| TokenSequence::normalize(r, scheme, eos_literal))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| at_line(e, origin, line))?;
        Ok(RefGroup {
            image_id: rec.image_id,
            refs,
        })
    })?;
    Corpus::new(groups)
}

pub fn load_corpus(path: impl AsRef<Path>, format: InputFormat, scheme: Normalization, eos_literal: &str) -> Result<Corpus> {
    let path = path.as_ref();
    let InputFormat::JsonLines = format;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), &path.display().to_string(), scheme, eos_literal)
}

/// Reads sample records: `{"image_id": .., "samples": [..], "base": ..}`.
/// Blank samples are kept as empty sequences.
pub fn read_samples<R: BufRead>(reader: R, origin: &str, scheme: Normalization, eos_literal: &str) -> Result<Vec<SampleGroup>> {
    let groups = parse_lines(reader, origin, |value, line| {
        let rec: SampleRecord = record(value, origin, line)?;
        let samples = rec
            .samples
            .iter()
            .map(|s| TokenSequence::normalize_allow_empty(s, scheme, eos_literal))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| at_line(e, origin, line))?;
        let base = rec
            .base
            .as_deref()
            .map(|b| TokenSequence::normalize_allow_empty(b, scheme, eos_literal))
            .transpose()
            .map_err(|e| at_line(e, origin, line))?;
        Ok(SampleGroup {
            image_id: rec.image_id,
            samples,
            base,
        })
    })?;
    if groups.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut seen = HashSet::new();
    for g in &groups {
        if !seen.insert(g.image_id.as_str()) {
            return Err(Error::DuplicateImageId(g.image_id.clone()));
        }
    }
    Ok(groups)
}

pub fn load_samples(path: impl AsRef<Path>, scheme: Normalization, eos_literal: &str) -> Result<Vec<SampleGroup>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_samples(BufReader::new(file), &path.display().to_string(), scheme, eos_literal)
}
