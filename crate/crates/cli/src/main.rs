use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use eos_scst::auditor::{self, FragmentLexicon};
use eos_scst::corpus::{load_corpus, load_samples, InputFormat, Normalization, SampleRecord, TokenSequence};
use eos_scst::metrics::{build_df, CiderRParams, EosMode, Kernel, MetricParams, Scorer};
use eos_scst::scst::{init_engine, BaseMode, ImageBatch, InitMode, ScstClass, ScstConfig};
use eos_scst::signature::{self, Questionnaire};
use eos_scst::{Error, Execution};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

/// Caption metrics, SCST rewards and EOS-artifact audits.
#[derive(Parser)]
#[command(name = "eos-scst", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a configuration signature by answering a few questions.
    Sign(SignArgs),
    /// Score candidate captions against references.
    Score(ScoreArgs),
    /// Compute SCST rewards, baselines and advantages for a batch.
    Reward(RewardArgs),
    /// Count and optionally strip trailing-fragment artifacts.
    Audit(AuditArgs),
}

#[derive(Args)]
struct SignArgs {
    /// Read answers from a file, one per line, instead of prompting.
    #[arg(long)]
    answers: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct TextArgs {
    /// Lowercase all tokens.
    #[arg(long)]
    lower: bool,
    #[arg(long, default_value = eos_scst::corpus::DEFAULT_EOS)]
    eos_literal: String,
    /// Score one image at a time on the calling thread.
    #[arg(long)]
    sequential: bool,
}

impl TextArgs {
    fn scheme(&self) -> Normalization {
        if self.lower {
            Normalization::Lower
        } else {
            Normalization::AsIs
        }
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricName {
    Cider,
    CiderD,
    CiderR,
    Bleu,
}

#[derive(Args, Clone)]
struct MetricArgs {
    #[arg(long, value_enum, default_value = "cider-d")]
    metric: MetricName,
    /// Maximum n-gram order.
    #[arg(short = 'n', long, default_value_t = 4)]
    n_max: usize,
    /// CIDEr-D length penalty scale.
    #[arg(long, default_value_t = 6.0)]
    sigma: f64,
    /// CIDEr-R repetition penalty exponent.
    #[arg(long, default_value_t = 0.8)]
    repeat_coeff: f64,
    /// CIDEr-R length penalty exponent.
    #[arg(long, default_value_t = 0.2)]
    length_coeff: f64,
    /// CIDEr-R length penalty alpha.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

impl MetricArgs {
    fn params(&self) -> MetricParams {
        let n = self.n_max;
        match self.metric {
            MetricName::Cider => MetricParams::cider(n),
            MetricName::CiderD => MetricParams::cider_d(n, self.sigma),
            MetricName::CiderR => MetricParams::cider_r(
                n,
                CiderRParams {
                    repeat_coeff: self.repeat_coeff,
                    length_coeff: self.length_coeff,
                    alpha: self.alpha,
                },
            ),
            MetricName::Bleu => MetricParams::bleu(n),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EosArg {
    With,
    Without,
}

#[derive(Args)]
struct ScoreArgs {
    /// Candidates: `{"image_id": .., "samples": [..]}` per line.
    #[arg(long)]
    candidates: PathBuf,
    /// References: `{"image_id": .., "refs": [..]}` per line.
    #[arg(long)]
    refs: PathBuf,
    /// Corpus for document frequencies; defaults to the references.
    #[arg(long)]
    df_corpus: Option<PathBuf>,
    /// Append EOS to candidates and references (and document frequencies).
    #[arg(long, value_enum, default_value = "with")]
    eos: EosArg,
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    text: TextArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Standard,
    NoEos,
    MixedInit,
    MixedReward,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Corpus,
    Batch,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Average,
    Greedy,
    LooAverage,
}

#[derive(Args)]
struct RewardArgs {
    /// Batch: `{"image_id": .., "samples": [..], "refs": [..], "base": ..}` per line.
    #[arg(long)]
    batch: PathBuf,
    /// Training corpus for document frequencies (corpus initialization).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Take the whole configuration from a signature.
    #[arg(long, conflicts_with_all = ["class", "init", "base", "nspi", "metric", "n_max", "sigma", "repeat_coeff", "length_coeff", "alpha", "allow_mixed"])]
    signature: Option<String>,
    #[arg(long, value_enum, required_unless_present = "signature")]
    class: Option<ClassArg>,
    #[arg(long, value_enum, required_unless_present = "signature")]
    init: Option<InitArg>,
    #[arg(long, value_enum, required_unless_present = "signature")]
    base: Option<BaseArg>,
    /// Samples per image.
    #[arg(long, required_unless_present = "signature")]
    nspi: Option<usize>,
    /// Permit the mixed EOS classes.
    #[arg(long)]
    allow_mixed: bool,
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    text: TextArgs,
}

#[derive(Args)]
struct AuditArgs {
    /// Captions: `{"image_id": .., "samples": [..]}` per line.
    #[arg(long)]
    candidates: PathBuf,
    /// Fragment lexicon file replacing the built-in one.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Write the cleaned captions here, in the input format.
    #[arg(long, value_name = "OUT")]
    clean: Option<PathBuf>,
    /// Print the table on stdout instead of the JSON report.
    #[arg(long)]
    table: bool,
    #[command(flatten)]
    text: TextArgs,
}

/// A number printed with six decimals.
fn num(x: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{x:.6}")).expect("finite number")
}

fn nums(xs: &[f64]) -> Vec<Box<RawValue>> {
    xs.iter().copied().map(num).collect()
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run_sign(args: SignArgs) -> Result<()> {
    let answers = match args.answers {
        Some(path) => {
            let file = File::open(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            Questionnaire::from_answers(BufReader::new(file), io::stderr()).run()?
        }
        None => Questionnaire::interactive(io::stdin().lock(), io::stderr()).run()?,
    };
    println!("{}", answers.signature);
    Ok(())
}

#[derive(Serialize)]
struct ScoreImage {
    image_id: String,
    scores: Vec<Box<RawValue>>,
    mean: Box<RawValue>,
}

#[derive(Serialize)]
struct ScoreReport {
    signature: String,
    metric: String,
    images: Vec<ScoreImage>,
    corpus_mean: Box<RawValue>,
}

fn run_score(args: ScoreArgs) -> Result<()> {
    let text = &args.text;
    let lit = text.eos_literal.as_str();
    let params = args.metric.params();
    params.validate()?;
    let mode = match args.eos {
        EosArg::With => EosMode::With,
        EosArg::Without => EosMode::Without,
    };
    let refs = load_corpus(&args.refs, InputFormat::JsonLines, text.scheme(), lit)?;
    let candidates = load_samples(&args.candidates, text.scheme(), lit)?;
    let df = if params.metric.is_cider_family() {
        let source = match &args.df_corpus {
            Some(path) => load_corpus(path, InputFormat::JsonLines, text.scheme(), lit)?,
            None => refs.clone(),
        };
        Some(Arc::new(build_df(&source, mode, params.n_max, lit)?))
    } else {
        None
    };
    let scorer = Scorer::new(params, df, Kernel::from_env()?)?;
    let prep = |s: &TokenSequence| match mode {
        EosMode::With => s.ensure_eos(lit),
        EosMode::Without => s.strip_eos(),
    };

    let mut prepared = Vec::with_capacity(candidates.len());
    for group in &candidates {
        let image = refs.get(&group.image_id).ok_or_else(|| Error::EmptyRefs(group.image_id.clone()))?;
        let image_refs: Vec<_> = image.refs.iter().map(prep).collect();
        prepared.push((group.samples.iter().map(prep).collect::<Vec<_>>(), image_refs));
    }
    let pairs: Vec<(&TokenSequence, &[TokenSequence])> = prepared
        .iter()
        .flat_map(|(samples, r)| samples.iter().map(move |s| (s, r.as_slice())))
        .collect();
    let scores = scorer.score_batch(&pairs, text.exec());

    let mut images = Vec::with_capacity(candidates.len());
    let mut means = Vec::with_capacity(candidates.len());
    let mut offset = 0;
    for group in &candidates {
        let own = &scores[offset..offset + group.samples.len()];
        offset += group.samples.len();
        let m = mean(own);
        means.push(m);
        images.push(ScoreImage {
            image_id: group.image_id.clone(),
            scores: nums(own),
            mean: num(m),
        });
    }
    let class = match mode {
        EosMode::With => ScstClass::Standard,
        EosMode::Without => ScstClass::NoEos,
    };
    let metric = signature::render_metric(&params);
    print_json(&ScoreReport {
        signature: format!(
            "{}_{}+{}+{}",
            signature::class_tag(class),
            signature::init_tag(InitMode::CorpusInit),
            metric,
            eos_scst::VERSION
        ),
        metric,
        images,
        corpus_mean: num(mean(&means)),
    })
}

#[derive(Deserialize)]
struct BatchRecord {
    image_id: String,
    samples: Vec<String>,
    refs: Vec<String>,
    #[serde(default)]
    base: Option<String>,
}

fn read_batch(path: &Path, scheme: Normalization, lit: &str) -> Result<Vec<ImageBatch>> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_owned(),
        source: e,
    })?;
    let origin = path.display().to_string();
    let parse_err = |line: usize, message: String| Error::ParseError {
        path: origin.clone(),
        line,
        message,
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| parse_err(i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: BatchRecord = serde_json::from_str(&line).map_err(|e| parse_err(i + 1, e.to_string()))?;
        let conv = |s: &str| TokenSequence::normalize_allow_empty(s, scheme, lit).map_err(|e| parse_err(i + 1, e.to_string()));
        out.push(ImageBatch {
            samples: rec.samples.iter().map(|s| conv(s)).collect::<Result<_, _>>()?,
            refs: rec.refs.iter().filter(|r| !r.trim().is_empty()).map(|s| conv(s)).collect::<Result<_, _>>()?,
            base: rec.base.as_deref().map(conv).transpose()?,
            image_id: rec.image_id,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyCorpus.into());
    }
    Ok(out)
}

#[derive(Serialize)]
struct RewardImage {
    image_id: String,
    rewards: Vec<Box<RawValue>>,
    base: Option<Box<RawValue>>,
    baselines: Vec<Box<RawValue>>,
    advantages: Vec<Box<RawValue>>,
}

#[derive(Serialize)]
struct RewardReport {
    signature: String,
    images: Vec<RewardImage>,
}

fn reward_config(args: &RewardArgs) -> Result<ScstConfig> {
    let lit = &args.text.eos_literal;
    if let Some(sig) = &args.signature {
        let parsed = signature::parse(sig)?;
        return Ok(parsed.to_config(lit));
    }
    let (Some(class), Some(init), Some(base), Some(nspi)) = (args.class, args.init, args.base, args.nspi) else {
        bail!("either --signature or --class, --init, --base and --nspi are required");
    };
    Ok(ScstConfig {
        class: match class {
            ClassArg::Standard => ScstClass::Standard,
            ClassArg::NoEos => ScstClass::NoEos,
            ClassArg::MixedInit => ScstClass::MixedInit,
            ClassArg::MixedReward => ScstClass::MixedReward,
        },
        init: match init {
            InitArg::Corpus => InitMode::CorpusInit,
            InitArg::Batch => InitMode::BatchInit,
        },
        metric: args.metric.params(),
        base: match base {
            BaseArg::Average => BaseMode::Average,
            BaseArg::Greedy => BaseMode::Greedy,
            BaseArg::LooAverage => BaseMode::LeaveOneOut,
        },
        nspi,
        eos_literal: lit.clone(),
        version: eos_scst::VERSION.to_owned(),
        allow_mixed: args.allow_mixed,
    })
}

fn run_reward(args: RewardArgs) -> Result<()> {
    let config = reward_config(&args)?;
    let text = &args.text;
    let corpus = args
        .corpus
        .as_ref()
        .map(|p| load_corpus(p, InputFormat::JsonLines, text.scheme(), &config.eos_literal))
        .transpose()?;
    let batch = read_batch(&args.batch, text.scheme(), &config.eos_literal)?;
    let engine = init_engine(config, corpus.as_ref())?;
    let m = engine.compute_advantages(&batch, text.exec())?;
    print_json(&RewardReport {
        signature: engine.signature().to_owned(),
        images: m
            .rows
            .iter()
            .map(|r| RewardImage {
                image_id: r.image_id.clone(),
                rewards: nums(&r.rewards),
                base: r.base().map(num),
                baselines: nums(&r.baselines),
                advantages: nums(&r.advantages),
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct Fragment {
    text: String,
    count: usize,
}

#[derive(Serialize)]
struct ClassReport {
    class: &'static str,
    count: usize,
    share_of_artifacts: Box<RawValue>,
    trailing_bigrams: Vec<Fragment>,
    trailing_trigrams: Vec<Fragment>,
}

#[derive(Serialize)]
struct AuditOut {
    lexicon_version: String,
    total: usize,
    clean: usize,
    artifacts: usize,
    artifact_rate: Box<RawValue>,
    unstrippable: Option<usize>,
    classes: Vec<ClassReport>,
}

fn run_audit(args: AuditArgs) -> Result<()> {
    let text = &args.text;
    let lexicon = match &args.lexicon {
        Some(path) => FragmentLexicon::load(path)?,
        None => FragmentLexicon::builtin(),
    };
    let groups = load_samples(&args.candidates, text.scheme(), &text.eos_literal)?;
    let captions: Vec<TokenSequence> = groups.iter().flat_map(|g| g.samples.iter().cloned()).collect();
    let report = auditor::audit(&captions, &lexicon, text.exec());

    let mut unstrippable = None;
    if let Some(out_path) = &args.clean {
        let file = File::create(out_path).map_err(|e| Error::Io {
            path: out_path.clone(),
            source: e,
        })?;
        let mut out = BufWriter::new(file);
        let mut flagged = 0;
        for g in &groups {
            let samples = g
                .samples
                .iter()
                .map(|s| {
                    if s.is_empty() {
                        return String::new();
                    }
                    let c = auditor::clean(s, &lexicon);
                    flagged += usize::from(c.unstrippable);
                    c.seq.to_text()
                })
                .collect();
            let rec = SampleRecord {
                image_id: g.image_id.clone(),
                samples,
                base: g.base.as_ref().map(TokenSequence::to_text),
            };
            serde_json::to_writer(&mut out, &rec)?;
            writeln!(out)?;
        }
        out.flush().with_context(|| format!("writing {}", out_path.display()))?;
        unstrippable = Some(flagged);
    }

    if args.table {
        print!("{}", report.to_table());
        return Ok(());
    }
    eprint!("{}", report.to_table());
    let classes = report
        .classes
        .iter()
        .map(|c| {
            let frags = |v: &[auditor::Fragment]| {
                v.iter()
                    .map(|f| Fragment {
                        text: f.text.clone(),
                        count: f.count,
                    })
                    .collect()
            };
            ClassReport {
                class: c.class.label(),
                count: c.count,
                share_of_artifacts: num(c.share_of_artifacts),
                trailing_bigrams: frags(&c.trailing_bigrams),
                trailing_trigrams: frags(&c.trailing_trigrams),
            }
        })
        .collect();
    print_json(&AuditOut {
        lexicon_version: report.lexicon_version.clone(),
        total: report.total,
        clean: report.clean,
        artifacts: report.artifacts,
        artifact_rate: num(report.artifact_rate),
        unstrippable,
        classes,
    })
}

/// 1 for validation and metric failures, 2 for usage and file errors, 130
/// for an aborted questionnaire.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Aborted) => 130,
        Some(
            Error::Io { .. }
            | Error::ParseError { .. }
            | Error::EmptyCorpus
            | Error::DuplicateImageId(_)
            | Error::MalformedAnswers(_)
            | Error::MalformedSignature { .. },
        ) => 2,
        Some(_) => 1,
        None if err.downcast_ref::<io::Error>().is_some() => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sign(a) => run_sign(a),
        Command::Score(a) => run_score(a),
        Command::Reward(a) => run_reward(a),
        Command::Audit(a) => run_audit(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit_code(&err);
            match err.downcast_ref::<Error>() {
                Some(e) => eprintln!("error: {} ({})", err, e.name()),
                None => eprintln!("error: {err:#}"),
            }
            ExitCode::from(code)
        }
    }
}
