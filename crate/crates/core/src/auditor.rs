//! Detection and removal of trailing fragments such as "on a" or "in front of".
//!
//! Captions are classified by their final token (after dropping a terminal
//! EOS) into seven artifact classes, a catch-all `*` for other unfinished
//! endings, or clean. The set of tokens considered unfinished comes from a
//! [`FragmentLexicon`]; the built-in one is `data/fragment_lexicon.txt`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::corpus::TokenSequence;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};

const BUILTIN: &str = include_str!("../data/fragment_lexicon.txt");

/// Tokens every lexicon contains in addition to the artifact classes.
const COMPOUND_FILLERS: [&str; 3] = ["top", "front", "next"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ArtifactClass {
    #[serde(rename = "in")]
    In,
    #[serde(rename = "a")]
    A,
    #[serde(rename = "of")]
    Of,
    #[serde(rename = "the")]
    The,
    #[serde(rename = "with")]
    With,
    #[serde(rename = "on")]
    On,
    #[serde(rename = "and")]
    And,
    /// Any other unfinished ending.
    #[serde(rename = "*")]
    Other,
}

impl ArtifactClass {
    pub const ALL: [ArtifactClass; 8] = [
        ArtifactClass::In,
        ArtifactClass::A,
        ArtifactClass::Of,
        ArtifactClass::The,
        ArtifactClass::With,
        ArtifactClass::On,
        ArtifactClass::And,
        ArtifactClass::Other,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ArtifactClass::In => "in",
            ArtifactClass::A => "a",
            ArtifactClass::Of => "of",
            ArtifactClass::The => "the",
            ArtifactClass::With => "with",
            ArtifactClass::On => "on",
            ArtifactClass::And => "and",
            ArtifactClass::Other => "*",
        }
    }

    /// The class named by a final token, if any. Never returns `Other`.
    pub fn from_token(token: &str) -> Option<Self> {
        ArtifactClass::ALL[..7].iter().copied().find(|c| c.label() == token)
    }
}

impl fmt::Display for ArtifactClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ending {
    Clean,
    Artifact(ArtifactClass),
}

/// Tokens that cannot end a finished caption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentLexicon {
    version: String,
    words: HashSet<String>,
}

impl FragmentLexicon {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN, "builtin").expect("built-in lexicon is well formed")
    }

    /// Parses lexicon text: one token per line, `#` comments, and an optional
    /// `version: <v>` line. Without a version line the lexicon is labelled
    /// `custom`.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut version = None;
        let mut words: HashSet<String> = ArtifactClass::ALL[..7].iter().map(|c| c.label().to_owned()).collect();
        words.extend(COMPOUND_FILLERS.iter().map(|w| (*w).to_owned()));
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(v) = line.strip_prefix("version:") {
                if version.is_some() {
                    return Err(parse_error(origin, i, "duplicate version line"));
                }
                version = Some(v.trim().to_owned());
                continue;
            }
            if line.split_whitespace().count() != 1 {
                return Err(parse_error(origin, i, "expected a single token"));
            }
            words.insert(line.to_owned());
        }
        Ok(FragmentLexicon {
            version: version.unwrap_or_else(|| "custom".to_owned()),
            words,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Default for FragmentLexicon {
    fn default() -> Self {
        Self::builtin()
    }
}

fn parse_error(origin: &str, line: usize, message: &str) -> Error {
    Error::ParseError {
        path: origin.to_owned(),
        line: line + 1,
        message: message.to_owned(),
    }
}

/// Classifies the final content token. A caption with no content tokens is
/// unfinished and lands in `*`.
pub fn classify_ending(seq: &TokenSequence, lexicon: &FragmentLexicon) -> Ending {
    match seq.content_tokens().last() {
        None => Ending::Artifact(ArtifactClass::Other),
        Some(last) => match ArtifactClass::from_token(last) {
            Some(class) => Ending::Artifact(class),
            None if lexicon.contains(last) => Ending::Artifact(ArtifactClass::Other),
            None => Ending::Clean,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cleaned {
    pub seq: TokenSequence,
    /// Stripping would have removed every token; `seq` is the input.
    pub unstrippable: bool,
}

/// Removes trailing lexicon tokens one at a time. A terminal EOS is kept.
/// If nothing would remain, the input is returned and flagged.
pub fn clean(seq: &TokenSequence, lexicon: &FragmentLexicon) -> Cleaned {
    let content = seq.content_tokens();
    let keep = content.iter().rposition(|t| !lexicon.contains(t)).map_or(0, |p| p + 1);
    if keep == 0 {
        return Cleaned {
            seq: seq.clone(),
            unstrippable: true,
        };
    }
    if keep == content.len() {
        return Cleaned {
            seq: seq.clone(),
            unstrippable: false,
        };
    }
    let seq = seq.keep_prefix(keep);
    Cleaned {
        seq,
        unstrippable: false,
    }
}

/// Count of a trailing n-gram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fragment {
    pub text: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassStats {
    pub class: ArtifactClass,
    pub count: usize,
    /// `count` over all artifacts; 0 when there are none.
    pub share_of_artifacts: f64,
    /// Trailing bigrams, most frequent first.
    pub trailing_bigrams: Vec<Fragment>,
    pub trailing_trigrams: Vec<Fragment>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub lexicon_version: String,
    pub total: usize,
    pub clean: usize,
    pub artifacts: usize,
    /// `artifacts / total`; 0 for an empty input.
    pub artifact_rate: f64,
    /// One entry per class, in the order in, a, of, the, with, on, and, *.
    pub classes: Vec<ClassStats>,
}

impl AuditReport {
    pub fn class(&self, class: ArtifactClass) -> &ClassStats {
        &self.classes[ArtifactClass::ALL.iter().position(|c| *c == class).expect("listed")]
    }

    /// Fixed-width text table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "lexicon {}  total {}  clean {}  artifacts {}  rate {:.6}\n",
            self.lexicon_version, self.total, self.clean, self.artifacts, self.artifact_rate
        ));
        out.push_str(&format!("{:<6}{:>8}{:>10}  {}\n", "class", "count", "share", "top endings"));
        for c in &self.classes {
            let top: Vec<String> = c
                .trailing_bigrams
                .iter()
                .take(3)
                .map(|f| format!("\"{}\" {}", f.text, f.count))
                .collect();
            out.push_str(&format!(
                "{:<6}{:>8}{:>10.6}  {}\n",
                c.class.label(),
                c.count,
                c.share_of_artifacts,
                top.join(", ")
            ));
        }
        out
    }
}

/// Classifies every caption and aggregates the result. The report does not
/// depend on the order of `captions`.
pub fn audit(captions: &[TokenSequence], lexicon: &FragmentLexicon, exec: Execution) -> AuditReport {
    let endings = map_indexed(exec, captions.len(), |i| classify_ending(&captions[i], lexicon));
    let mut counts = [0usize; 8];
    let mut bigrams: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); 8];
    let mut trigrams: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); 8];
    let mut clean_count = 0;
    for (seq, ending) in captions.iter().zip(&endings) {
        let Ending::Artifact(class) = ending else {
            clean_count += 1;
            continue;
        };
        let k = ArtifactClass::ALL.iter().position(|c| c == class).expect("listed");
        counts[k] += 1;
        let content = seq.content_tokens();
        for (n, hist) in [(2, &mut bigrams[k]), (3, &mut trigrams[k])] {
            if content.len() >= n {
                *hist.entry(content[content.len() - n..].join(" ")).or_insert(0) += 1;
            }
        }
    }
    let artifacts: usize = counts.iter().sum();
    let ranked = |hist: &BTreeMap<String, usize>| {
        let mut v: Vec<Fragment> = hist
            .iter()
            .map(|(text, &count)| Fragment {
                text: text.clone(),
                count,
            })
            .collect();
        v.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.text.cmp(&b.text)));
        v
    };
    let classes = ArtifactClass::ALL
        .iter()
        .enumerate()
        .map(|(k, &class)| ClassStats {
            class,
            count: counts[k],
            share_of_artifacts: if artifacts == 0 {
                0.0
            } else {
                counts[k] as f64 / artifacts as f64
            },
            trailing_bigrams: ranked(&bigrams[k]),
            trailing_trigrams: ranked(&trigrams[k]),
        })
        .collect();
    AuditReport {
        lexicon_version: lexicon.version().to_owned(),
        total: captions.len(),
        clean: clean_count,
        artifacts,
        artifact_rate: if captions.is_empty() {
            0.0
        } else {
            artifacts as f64 / captions.len() as f64
        },
        classes,
    }
}
