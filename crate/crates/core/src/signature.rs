//! Canonical configuration strings.
//!
//! Format: `<class>_<init>+<metric[args]>+<base[args]>+<version>`, e.g.
//! `STANDARD_wInit+Cider-D[n4,s6.0]+average[nspi5]+1.0.0`.
//!
//! | field   | values |
//! |---------|--------|
//! | class   | `STANDARD`, `NO<EOS>MODE`, `MIXED<EOS>INIT`, `MIXED<EOS>REWARD` |
//! | init    | `wInit` (corpus document frequencies), `w/oInit` (per-batch) |
//! | metric  | `Cider[n4]`, `Cider-D[n4,s6.0]`, `Cider-R[n4,rc0.8,lc0.2,a1.0]`, `BLEU[n4]` |
//! | base    | `greedy[nspi5]`, `average[nspi5]`, `loo-average[nspi5]` |
//! | version | `MAJOR.MINOR.PATCH` |
//!
//! Real-valued arguments are written in plain decimal notation with at least
//! one fractional digit, so every configuration has exactly one string.

use std::io::{BufRead, Write};

use crate::corpus::DEFAULT_EOS;
use crate::error::{Error, Result};
use crate::metrics::{CiderRParams, EosMode, Metric, MetricParams, DEFAULT_N, DEFAULT_SIGMA};
use crate::scst::{BaseMode, InitMode, ScstClass, ScstConfig};

pub fn class_tag(class: ScstClass) -> &'static str {
    match class {
        ScstClass::Standard => "STANDARD",
        ScstClass::NoEos => "NO<EOS>MODE",
        ScstClass::MixedInit => "MIXED<EOS>INIT",
        ScstClass::MixedReward => "MIXED<EOS>REWARD",
    }
}

pub fn init_tag(init: InitMode) -> &'static str {
    match init {
        InitMode::CorpusInit => "wInit",
        InitMode::BatchInit => "w/oInit",
    }
}

pub fn base_tag(base: BaseMode) -> &'static str {
    match base {
        BaseMode::Greedy => "greedy",
        BaseMode::Average => "average",
        BaseMode::LeaveOneOut => "loo-average",
    }
}

/// Shortest round-tripping decimal with at least one fractional digit.
pub fn render_real(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') {
        s
    } else {
        s + ".0"
    }
}

pub fn render_metric(p: &MetricParams) -> String {
    let args = match p.metric {
        Metric::Cider | Metric::Bleu => format!("n{}", p.n_max),
        Metric::CiderD => format!("n{},s{}", p.n_max, render_real(p.sigma)),
        Metric::CiderR => format!(
            "n{},rc{},lc{},a{}",
            p.n_max,
            render_real(p.cider_r.repeat_coeff),
            render_real(p.cider_r.length_coeff),
            render_real(p.cider_r.alpha)
        ),
    };
    format!("{}[{args}]", p.metric.signature_name())
}

/// Signature of a configuration. Fails if the configuration is invalid.
pub fn generate(config: &ScstConfig) -> Result<String> {
    config.validate()?;
    Ok(format!(
        "{}_{}+{}+{}[nspi{}]+{}",
        class_tag(config.class),
        init_tag(config.init),
        render_metric(&config.metric),
        base_tag(config.base),
        config.nspi,
        config.version
    ))
}

/// Rejects anything but `MAJOR.MINOR.PATCH` without leading zeros.
pub fn check_version(v: &str) -> Result<()> {
    let parts: Vec<&str> = v.split('.').collect();
    let ok = parts.len() == 3 && parts.iter().all(|p| is_canonical_uint(p));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("version `{v}` is not MAJOR.MINOR.PATCH")))
    }
}

fn is_canonical_uint(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0')) && s.len() <= 9
}

/// A parsed signature.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub raw: String,
    pub class: ScstClass,
    pub init: InitMode,
    pub metric: MetricParams,
    pub base: BaseMode,
    pub nspi: usize,
    pub version: String,
}

impl Signature {
    /// The configuration this signature describes. The EOS literal is not
    /// part of a signature and must be supplied.
    pub fn to_config(&self, eos_literal: &str) -> ScstConfig {
        ScstConfig {
            class: self.class,
            init: self.init,
            metric: self.metric,
            base: self.base,
            nspi: self.nspi,
            eos_literal: eos_literal.to_owned(),
            version: self.version.clone(),
            allow_mixed: self.class.is_mixed(),
        }
    }
}

struct Cursor;

impl Cursor {
    fn fail(&self, segment: &str, position: usize, reason: impl Into<String>) -> Error {
        Error::MalformedSignature {
            segment: segment.to_owned(),
            position,
            reason: reason.into(),
        }
    }
}

/// Parses a canonical signature. Any non-canonical spelling is rejected with
/// the offending segment and its byte offset.
pub fn parse(raw: &str) -> Result<Signature> {
    let cur = Cursor;
    let mut parts = Vec::with_capacity(4);
    let mut start = 0;
    for (i, b) in raw.bytes().enumerate() {
        if b == b'+' {
            parts.push((start, &raw[start..i]));
            start = i + 1;
        }
    }
    parts.push((start, &raw[start..]));
    if parts.len() != 4 {
        return Err(cur.fail(
            raw,
            0,
            format!("expected 4 `+`-separated segments, found {}", parts.len()),
        ));
    }

    let (pos, head) = parts[0];
    let Some(sep) = head.find('_') else {
        return Err(cur.fail(head, pos, "missing `_<init>` tag"));
    };
    let (class_s, init_s) = (&head[..sep], &head[sep + 1..]);
    let class = ScstClass::ALL
        .into_iter()
        .find(|c| class_tag(*c) == class_s)
        .ok_or_else(|| cur.fail(class_s, pos, "unknown SCST class"))?;
    let init = [InitMode::CorpusInit, InitMode::BatchInit]
        .into_iter()
        .find(|m| init_tag(*m) == init_s)
        .ok_or_else(|| cur.fail(init_s, pos + sep + 1, "unknown init tag"))?;

    let (pos, metric_s) = parts[1];
    let (name, args, args_pos) = split_call(&cur, metric_s, pos)?;
    let metric = [Metric::Cider, Metric::CiderD, Metric::CiderR, Metric::Bleu]
        .into_iter()
        .find(|m| m.signature_name() == name)
        .ok_or_else(|| cur.fail(name, pos, "unknown metric"))?;
    let keys: &[&str] = match metric {
        Metric::Cider | Metric::Bleu => &["n"],
        Metric::CiderD => &["n", "s"],
        Metric::CiderR => &["n", "rc", "lc", "a"],
    };
    let values = keyed_args(&cur, args, args_pos, keys)?;
    let n: usize = parse_uint(&cur, values[0], args_pos)?;
    let metric_params = match metric {
        Metric::Cider => MetricParams::cider(n),
        Metric::Bleu => MetricParams::bleu(n),
        Metric::CiderD => MetricParams::cider_d(n, parse_real(&cur, values[1], args_pos)?),
        Metric::CiderR => MetricParams::cider_r(
            n,
            CiderRParams {
                repeat_coeff: parse_real(&cur, values[1], args_pos)?,
                length_coeff: parse_real(&cur, values[2], args_pos)?,
                alpha: parse_real(&cur, values[3], args_pos)?,
            },
        ),
    };

    let (pos, base_s) = parts[2];
    let (name, args, args_pos) = split_call(&cur, base_s, pos)?;
    let base = BaseMode::ALL
        .into_iter()
        .find(|b| base_tag(*b) == name)
        .ok_or_else(|| cur.fail(name, pos, "unknown base"))?;
    let values = keyed_args(&cur, args, args_pos, &["nspi"])?;
    let nspi = parse_uint(&cur, values[0], args_pos)?;

    let (pos, version) = parts[3];
    if check_version(version).is_err() {
        return Err(cur.fail(version, pos, "version is not MAJOR.MINOR.PATCH"));
    }

    let sig = Signature {
        raw: raw.to_owned(),
        class,
        init,
        metric: metric_params,
        base,
        nspi,
        version: version.to_owned(),
    };
    // semantic checks, then canonical spelling
    let config = sig.to_config(DEFAULT_EOS);
    if let Err(e) = config.validate() {
        return Err(cur.fail(raw, 0, e.to_string()));
    }
    let canonical = generate(&config)?;
    if canonical != raw {
        let at = canonical.bytes().zip(raw.bytes()).take_while(|(a, b)| a == b).count();
        return Err(cur.fail(raw, at, format!("not canonical; expected `{canonical}`")));
    }
    Ok(sig)
}

/// `name[args]` -> (name, args, byte offset of args).
fn split_call<'a>(cur: &Cursor, s: &'a str, pos: usize) -> Result<(&'a str, &'a str, usize)> {
    let open = s.find('[').ok_or_else(|| cur.fail(s, pos, "missing `[`"))?;
    if !s.ends_with(']') || s.len() < open + 2 {
        return Err(cur.fail(s, pos + s.len(), "missing closing `]`"));
    }
    Ok((&s[..open], &s[open + 1..s.len() - 1], pos + open + 1))
}

fn keyed_args<'a>(cur: &Cursor, args: &'a str, pos: usize, keys: &[&str]) -> Result<Vec<&'a str>> {
    let items: Vec<&str> = args.split(',').collect();
    if items.len() != keys.len() {
        return Err(cur.fail(
            args,
            pos,
            format!("expected arguments {}", keys.join(",")),
        ));
    }
    let mut offset = pos;
    let mut out = Vec::with_capacity(keys.len());
    for (item, key) in items.iter().zip(keys) {
        match item.strip_prefix(key) {
            Some(v) if !v.is_empty() && v.as_bytes()[0].is_ascii_digit() => out.push(v),
            _ => return Err(cur.fail(item, offset, format!("expected `{key}<value>`"))),
        }
        offset += item.len() + 1;
    }
    Ok(out)
}

fn parse_uint(cur: &Cursor, s: &str, pos: usize) -> Result<usize> {
    if !is_canonical_uint(s) {
        return Err(cur.fail(s, pos, "expected an integer"));
    }
    s.parse().map_err(|_| cur.fail(s, pos, "integer out of range"))
}

fn parse_real(cur: &Cursor, s: &str, pos: usize) -> Result<f64> {
    let well_formed = s
        .split_once('.')
        .is_some_and(|(i, f)| !i.is_empty() && !f.is_empty() && (i.bytes().chain(f.bytes())).all(|b| b.is_ascii_digit()));
    let v: f64 = if well_formed { s.parse().ok() } else { None }
        .ok_or_else(|| cur.fail(s, pos, "expected a decimal number"))?;
    if render_real(v) != s {
        return Err(cur.fail(s, pos, format!("non-canonical number; write {}", render_real(v))));
    }
    Ok(v)
}

/// Outcome of the questionnaire.
#[derive(Debug, Clone, PartialEq)]
pub struct Answers {
    pub config: ScstConfig,
    pub signature: String,
    pub warnings: Vec<String>,
}

/// Prompt-driven construction of an [`ScstConfig`].
///
/// Each prompt lists its accepted answers; an empty line selects the default
/// shown in brackets and `x` quits. Interactive sessions re-ask after an
/// unrecognized answer, while an answers file (one answer per line, in prompt
/// order) fails with [`Error::MalformedAnswers`].
pub struct Questionnaire<R, W> {
    input: R,
    output: W,
    strict: bool,
    version: String,
    eos_literal: String,
}

impl<R: BufRead, W: Write> Questionnaire<R, W> {
    pub fn interactive(input: R, output: W) -> Self {
        Questionnaire {
            input,
            output,
            strict: false,
            version: crate::VERSION.to_owned(),
            eos_literal: DEFAULT_EOS.to_owned(),
        }
    }

    pub fn from_answers(input: R, output: W) -> Self {
        Questionnaire {
            strict: true,
            ..Self::interactive(input, output)
        }
    }

    pub fn version(mut self, version: &str) -> Self {
        self.version = version.to_owned();
        self
    }

    pub fn eos_literal(mut self, eos_literal: &str) -> Self {
        self.eos_literal = eos_literal.to_owned();
        self
    }

    pub fn run(mut self) -> Result<Answers> {
        let df_eos = self.ask(
            "Is the EOS token appended to the references when the document frequencies are computed?",
            &[("yes", "y"), ("no", "n")],
            "yes",
        )?;
        self.note(if df_eos == "yes" {
            "n-grams ending in EOS receive document frequencies."
        } else {
            "document frequencies ignore EOS."
        })?;
        let reward_eos = self.ask(
            "Is the EOS token appended to samples and references when rewards are computed?",
            &[("yes", "y"), ("no", "n")],
            "yes",
        )?;
        self.note(if reward_eos == "yes" {
            "a sequence is rewarded for terminating properly."
        } else {
            "rewards ignore termination; trailing fragments go unpunished."
        })?;
        let mode = |a: &str| if a == "yes" { EosMode::With } else { EosMode::Without };
        let class = ScstClass::from_modes(mode(&df_eos), mode(&reward_eos));

        let init = self.ask(
            "Are document frequencies computed once from the training corpus, or from each batch's references?",
            &[("corpus", "c"), ("batch", "b")],
            "corpus",
        )?;
        let init = if init == "corpus" {
            InitMode::CorpusInit
        } else {
            InitMode::BatchInit
        };
        self.note(match init {
            InitMode::CorpusInit => "signature records wInit.",
            InitMode::BatchInit => "signature records w/oInit; idf depends on batch composition.",
        })?;

        let metric = loop {
            let m = self.ask(
                "Which reward metric?",
                &[("cider-d", "d"), ("cider", "c"), ("cider-r", "r"), ("bleu", "b")],
                "cider-d",
            )?;
            if m == "bleu" && init == InitMode::CorpusInit {
                self.reject("BLEU uses no document frequencies; corpus initialization does not apply")?;
                continue;
            }
            break m;
        };
        let n = self.ask_number("Maximum n-gram order?", DEFAULT_N as f64, |v| {
            v.fract() == 0.0 && (1.0..=crate::corpus::MAX_ORDER as f64).contains(&v)
        })? as usize;
        let params = match metric.as_str() {
            "cider" => MetricParams::cider(n),
            "bleu" => MetricParams::bleu(n),
            "cider-d" => {
                let sigma = self.ask_number("Length penalty sigma?", DEFAULT_SIGMA, |v| v > 0.0)?;
                MetricParams::cider_d(n, sigma)
            }
            _ => {
                let d = CiderRParams::default();
                let rc = self.ask_number("Repetition penalty coefficient?", d.repeat_coeff, |v| v > 0.0 && v < 1.0)?;
                let lc = loop {
                    let lc = self.ask_number("Length penalty coefficient (sums to 1 with the repetition one)?", 1.0 - rc, |v| v > 0.0)?;
                    if (rc + lc - 1.0).abs() <= 1e-12 {
                        break lc;
                    }
                    self.reject("coefficients must sum to 1")?;
                };
                let alpha = self.ask_number("Length penalty alpha?", d.alpha, |v| v > 0.0)?;
                MetricParams::cider_r(
                    n,
                    CiderRParams {
                        repeat_coeff: rc,
                        length_coeff: lc,
                        alpha,
                    },
                )
            }
        };
        self.note(&format!("reward is {}.", render_metric(&params)))?;

        let base = self.ask(
            "Which baseline?",
            &[("average", "a"), ("greedy", "g"), ("loo-average", "l")],
            "average",
        )?;
        let base = BaseMode::ALL.into_iter().find(|b| base_tag(*b) == base).expect("listed");
        self.note(match base {
            BaseMode::Average => "baseline is the mean reward of all samples of the image.",
            BaseMode::Greedy => "baseline is the reward of a greedy-decoded sequence.",
            BaseMode::LeaveOneOut => "baseline is the mean reward of the other samples of the image.",
        })?;
        let min = if base == BaseMode::Greedy { 1.0 } else { 2.0 };
        let nspi = self.ask_number("Samples per image (nspi)?", 5.0, |v| v.fract() == 0.0 && v >= min && v < 1e9)? as usize;

        if self.strict {
            let mut extra = String::new();
            while self.read_line(&mut extra)? {
                if !extra.trim().is_empty() {
                    return Err(Error::MalformedAnswers(format!("unexpected extra answer `{}`", extra.trim())));
                }
            }
        }

        let mut warnings = Vec::new();
        if class.is_mixed() {
            warnings.push(format!(
                "EOS is used in {} but not in {}; this is a non-standard configuration ({})",
                if class == ScstClass::MixedInit { "the document frequencies" } else { "the reward" },
                if class == ScstClass::MixedInit { "the reward" } else { "the document frequencies" },
                class_tag(class)
            ));
        }
        let config = ScstConfig {
            class,
            init,
            metric: params,
            base,
            nspi,
            eos_literal: self.eos_literal.clone(),
            version: self.version.clone(),
            allow_mixed: class.is_mixed(),
        };
        let signature = generate(&config)?;
        for w in &warnings {
            writeln!(self.output, "warning: {w}").map_err(out_err)?;
        }
        writeln!(self.output, "{signature}").map_err(out_err)?;
        Ok(Answers {
            config,
            signature,
            warnings,
        })
    }

    fn read_line(&mut self, buf: &mut String) -> Result<bool> {
        buf.clear();
        let n = self
            .input
            .read_line(buf)
            .map_err(|e| Error::MalformedAnswers(format!("read failed: {e}")))?;
        Ok(n > 0)
    }

    /// Next answer, trimmed and lowercased. `None` on end of input.
    fn answer(&mut self, prompt: &str) -> Result<String> {
        write!(self.output, "{prompt} ").map_err(out_err)?;
        self.output.flush().map_err(out_err)?;
        let mut line = String::new();
        if !self.read_line(&mut line)? {
            if self.strict {
                return Err(Error::MalformedAnswers("answers end before the last question".into()));
            }
            return Err(Error::Aborted);
        }
        let a = line.trim().to_lowercase();
        if self.strict {
            writeln!(self.output, "{a}").map_err(out_err)?;
        }
        if a == "x" {
            return Err(Error::Aborted);
        }
        Ok(a)
    }

    fn reject(&mut self, why: &str) -> Result<()> {
        if self.strict {
            return Err(Error::MalformedAnswers(why.to_owned()));
        }
        writeln!(self.output, "  not accepted: {why}").map_err(out_err)
    }

    fn note(&mut self, consequence: &str) -> Result<()> {
        writeln!(self.output, "  -> {consequence}").map_err(out_err)
    }

    fn ask(&mut self, question: &str, options: &[(&str, &str)], default: &str) -> Result<String> {
        let listed: Vec<String> = options.iter().map(|(full, short)| format!("{full} ({short})")).collect();
        let prompt = format!("{question} [{}; default {default}; x quits]", listed.join(", "));
        loop {
            let a = self.answer(&prompt)?;
            if a.is_empty() {
                return Ok(default.to_owned());
            }
            if let Some((full, _)) = options.iter().find(|(full, short)| a == *full || a == *short) {
                return Ok((*full).to_owned());
            }
            self.reject(&format!("`{a}` is not one of {}", listed.join(", ")))?;
        }
    }

    fn ask_number(&mut self, question: &str, default: f64, ok: impl Fn(f64) -> bool) -> Result<f64> {
        let prompt = format!("{question} [default {}; x quits]", render_real(default).trim_end_matches(".0"));
        loop {
            let a = self.answer(&prompt)?;
            if a.is_empty() {
                return Ok(default);
            }
            // accept the signature spelling too, e.g. `n4` or `s6.0`
            let digits = a.trim_start_matches(|c: char| c.is_ascii_alphabetic());
            match digits.parse::<f64>() {
                Ok(v) if v.is_finite() && ok(v) => return Ok(v),
                _ => self.reject(&format!("`{a}` is not an accepted value"))?,
            }
        }
    }
}

fn out_err(e: std::io::Error) -> Error {
    Error::MalformedAnswers(format!("write failed: {e}"))
}

/// Runs the interactive questionnaire on standard input and output.
pub fn questionnaire() -> Result<Answers> {
    let stdin = std::io::stdin();
    Questionnaire::interactive(stdin.lock(), std::io::stdout()).run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(class: ScstClass, init: InitMode, metric: MetricParams, base: BaseMode) -> ScstConfig {
        ScstConfig {
            class,
            init,
            metric,
            base,
            nspi: 5,
            version: "1.0.0".into(),
            ..ScstConfig::default()
        }
    }

    #[test]
    fn published_examples() {
        let s = generate(&cfg(
            ScstClass::NoEos,
            InitMode::BatchInit,
            MetricParams::bleu(4),
            BaseMode::Average,
        ))
        .unwrap();
        assert_eq!(s, "NO<EOS>MODE_w/oInit+BLEU[n4]+average[nspi5]+1.0.0");
        let s = generate(&cfg(
            ScstClass::Standard,
            InitMode::BatchInit,
            MetricParams::cider_d(5, 6.0),
            BaseMode::Average,
        ))
        .unwrap();
        assert_eq!(s, "STANDARD_w/oInit+Cider-D[n5,s6.0]+average[nspi5]+1.0.0");
    }

    #[test]
    fn cider_r_renders_all_coefficients() {
        let c = cfg(
            ScstClass::Standard,
            InitMode::CorpusInit,
            MetricParams::cider_r(4, CiderRParams::default()),
            BaseMode::Greedy,
        );
        let s = generate(&c).unwrap();
        assert_eq!(s, "STANDARD_wInit+Cider-R[n4,rc0.8,lc0.2,a1.0]+greedy[nspi5]+1.0.0");
        assert_eq!(parse(&s).unwrap().to_config(DEFAULT_EOS), c);
    }

    #[test]
    fn reals() {
        assert_eq!(render_real(6.0), "6.0");
        assert_eq!(render_real(0.25), "0.25");
        assert_eq!(render_real(1e-7), "0.0000001");
    }

    #[test]
    fn rejects() {
        for bad in [
            "STANDARD+Cider-D[n4]",
            "STANDARD_wInit+Cider-D[n4,s6.0]+average[nspi5]+1.0",
            "STANDARD_wInit+Cider-D[n4,s6]+average[nspi5]+1.0.0",
            "STANDARD_wInit+Cider-D[n4,s6.00]+average[nspi5]+1.0.0",
            "STANDARD_wInit+Cider-D[n04,s6.0]+average[nspi5]+1.0.0",
            "STANDARD_wInit+Cider-D[s6.0,n4]+average[nspi5]+1.0.0",
            "STANDARD_wInit+Cider-D[n4,s6.0]+average[nspi1]+1.0.0",
            "STANDARD_wInit+BLEU[n4]+average[nspi5]+1.0.0",
            "STANDARD_wInit+Cider[n4,s6.0]+average[nspi5]+1.0.0",
            "STANDARD_wInit+Cider-D[n9,s6.0]+average[nspi5]+1.0.0",
            "Standard_wInit+Cider-D[n4,s6.0]+average[nspi5]+1.0.0",
            "",
            "++++",
        ] {
            assert!(
                matches!(parse(bad), Err(Error::MalformedSignature { .. })),
                "{bad} parsed"
            );
        }
    }

    #[test]
    fn error_positions_point_at_segment() {
        match parse("STANDARD_wInit+Cider-X[n4]+average[nspi5]+1.0.0") {
            Err(Error::MalformedSignature { segment, position, .. }) => {
                assert_eq!(segment, "Cider-X");
                assert_eq!(position, 15);
            }
            other => panic!("{other:?}"),
        }
    }

    fn run(answers: &str) -> Result<(Answers, String)> {
        let mut out = Vec::new();
        let a = Questionnaire::from_answers(answers.as_bytes(), &mut out).version("1.0.0").run()?;
        Ok((a, String::from_utf8(out).unwrap()))
    }

    #[test]
    fn questionnaire_standard() {
        let (a, out) = run("yes\nyes\ncorpus\ncider-d\n4\n6.0\naverage\n5\n").unwrap();
        assert_eq!(a.signature, "STANDARD_wInit+Cider-D[n4,s6.0]+average[nspi5]+1.0.0");
        assert!(out.ends_with("STANDARD_wInit+Cider-D[n4,s6.0]+average[nspi5]+1.0.0\n"));
        assert!(a.warnings.is_empty());
    }

    #[test]
    fn questionnaire_defaults_and_no_eos() {
        let (a, _) = run("\n\n\n\n\n\n\n\n").unwrap();
        assert_eq!(a.signature, "STANDARD_wInit+Cider-D[n4,s6.0]+average[nspi5]+1.0.0");
        let (a, _) = run("n\nn\nb\nb\n4\na\n5\n").unwrap();
        assert_eq!(a.signature, "NO<EOS>MODE_w/oInit+BLEU[n4]+average[nspi5]+1.0.0");
    }

    #[test]
    fn questionnaire_mixed_warns() {
        let (a, out) = run("yes\nno\nbatch\ncider\n4\ngreedy\n5\n").unwrap();
        assert!(a.signature.starts_with("MIXED<EOS>INIT_w/oInit+Cider[n4]"));
        assert_eq!(a.warnings.len(), 1);
        assert!(out.contains("warning:"));
    }

    #[test]
    fn questionnaire_failures() {
        assert!(matches!(run("maybe\n"), Err(Error::MalformedAnswers(_))));
        assert!(matches!(run("yes\nyes\n"), Err(Error::MalformedAnswers(_))));
        assert!(matches!(run("yes\nx\n"), Err(Error::Aborted)));
        assert!(matches!(run("yes\nyes\ncorpus\nbleu\n"), Err(Error::MalformedAnswers(_))));
        assert!(matches!(
            run("yes\nyes\ncorpus\ncider-d\n4\n6.0\naverage\n5\nextra\n"),
            Err(Error::MalformedAnswers(_))
        ));
    }

    #[test]
    fn interactive_reasks_and_eof_aborts() {
        let mut out = Vec::new();
        let a = Questionnaire::interactive("perhaps\ny\ny\nc\nd\n4\n6\na\n5\n".as_bytes(), &mut out)
            .version("1.0.0")
            .run()
            .unwrap();
        assert_eq!(a.signature, "STANDARD_wInit+Cider-D[n4,s6.0]+average[nspi5]+1.0.0");
        assert!(String::from_utf8(out).unwrap().contains("not accepted"));
        let r = Questionnaire::interactive("y\n".as_bytes(), Vec::new()).run();
        assert!(matches!(r, Err(Error::Aborted)));
    }
}
