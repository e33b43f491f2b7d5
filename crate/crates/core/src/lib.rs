//! Caption metrics and a self-critical sequence training (SCST) reward engine
//! that makes End-of-Sequence handling explicit.
//!
//! * [`corpus`] tokenized captions, n-gram counting, JSONL ingestion
//! * [`metrics`] document frequencies, CIDEr, CIDEr-D, CIDEr-R, BLEU
//! * [`scst`] configuration classes, batch validation, advantages
//! * [`signature`] canonical configuration strings and the questionnaire
//! * [`auditor`] trailing-fragment detection and cleaning
//! * [`bindings`] plain-data entry points for foreign-language wrappers
//!
//! ```
//! use std::sync::Arc;
//! use eos_scst::corpus::{Corpus, Normalization, RefGroup, TokenSequence, DEFAULT_EOS};
//! use eos_scst::metrics::{build_df, EosMode, Kernel, MetricParams, Scorer};
//!
//! let seq = |s: &str| TokenSequence::normalize(s, Normalization::Lower, DEFAULT_EOS).unwrap();
//! let corpus = Corpus::new(vec![
//!     RefGroup { image_id: "1".into(), refs: vec![seq("a dog catching a frisbee")] },
//!     RefGroup { image_id: "2".into(), refs: vec![seq("two cats on a sofa")] },
//! ]).unwrap();
//! let df = build_df(&corpus, EosMode::With, 4, DEFAULT_EOS).unwrap();
//! let scorer = Scorer::new(MetricParams::cider_d(4, 6.0), Some(Arc::new(df)), Kernel::Optimized).unwrap();
//! let refs = [seq("a dog catching a frisbee <eos>")];
//! let score = scorer.score(&seq("a dog catching a frisbee <eos>"), &refs);
//! assert!((score - 10.0).abs() < 1e-9);
//! ```

pub mod auditor;
pub mod bindings;
pub mod corpus;
mod error;
pub mod exec;
pub mod metrics;
pub mod scst;
pub mod signature;

pub use error::{Error, Result};
pub use exec::Execution;

/// Library version; also the last segment of every signature.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
