//! Command-line front end. Every subcommand reads its inputs, writes its
//! outputs and emits a JSON provenance record (config hash, seed and input
//! digests) on stderr and next to its main output as `<out>.prov.json`.
//!
//! Exit codes: 0 on success, 1 for data errors, 2 for usage errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::alignment::{DensityThreshold, PairOrder};
use crate::corpus::{
    load_embeddings, read_conll, write_conll_string, Corpus, EmbeddingTable, PredicateFrame,
};
use crate::eval::Report;
use crate::model::{
    load, save, train, ArgumentClassifier, LemmaMode, Model, ModelConfig, PredicateIdentifier,
    Preset, SenseClassifier, TrainOptions, TrainReport,
};
use crate::morphology::{compile_lexicon, lemma_lexicon, StemLexicon};
use crate::par::{self, Execution};
use crate::projection::{
    intersect_lines, project_corpus, read_tokenized, ProjectionConfig, ProjectionStats,
};
use crate::{Error, Result};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "SRL_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "xsrl",
    version,
    about = "Cross-lingual dependency SRL: projection, training, tagging, scoring"
)]
pub struct Cli {
    /// Run data-parallel loops on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RevOrder {
    /// Each reverse-file pair is `target-source`.
    TargetFirst,
    /// Each reverse-file pair is `source-target`.
    SourceFirst,
}

impl From<RevOrder> for PairOrder {
    fn from(o: RevOrder) -> Self {
        match o {
            RevOrder::TargetFirst => PairOrder::TargetFirst,
            RevOrder::SourceFirst => PairOrder::SourceFirst,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LexiconKind {
    /// `word<TAB>morph/TAG ...` segmentations (tags PRE, STM, SUF).
    Segmentation,
    /// `word<TAB>lemma` pairs.
    Lemmas,
}

#[derive(Debug, Args)]
pub struct AlignmentInputs {
    /// Forward alignment, one Pharaoh line per sentence pair, `src-tgt`.
    #[arg(long)]
    pub fwd: PathBuf,
    /// Reverse alignment, one Pharaoh line per sentence pair.
    #[arg(long)]
    pub rev: PathBuf,
    /// Pair order of the reverse file.
    #[arg(long, value_enum, default_value = "target-first")]
    pub rev_order: RevOrder,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Training corpus (CoNLL-2009).
    #[arg(long)]
    pub src: PathBuf,
    /// Checkpoint path; the sidecar goes to `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Base hyperparameters.
    #[arg(long, value_enum, default_value = "desk")]
    pub preset: PresetArg,
    /// JSON object overriding preset fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Pre-trained word embeddings (`word v1 ... vd` per line, d = d_w).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Desk,
    Full,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Desk => Preset::Desk,
            PresetArg::Full => Preset::Full,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LemmaModeArg {
    Char,
    Ustem,
    Slem,
}

impl From<LemmaModeArg> for LemmaMode {
    fn from(m: LemmaModeArg) -> Self {
        match m {
            LemmaModeArg::Char => LemmaMode::Char,
            LemmaModeArg::Ustem => LemmaMode::Ustem,
            LemmaModeArg::Slem => LemmaMode::Slem,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Intersect two directional alignments into one-to-one links.
    Intersect {
        #[command(flatten)]
        align: AlignmentInputs,
        /// Source corpus (CoNLL-2009) giving sentence lengths.
        #[arg(long)]
        src: Option<PathBuf>,
        /// Target sentences, one per line, space-tokenized.
        #[arg(long)]
        tgt: Option<PathBuf>,
        /// Output Pharaoh file (0-based, source first).
        #[arg(long)]
        out: PathBuf,
    },
    /// Project source annotations onto target sentences.
    Project {
        #[command(flatten)]
        align: AlignmentInputs,
        /// Annotated source corpus (CoNLL-2009).
        #[arg(long)]
        src: PathBuf,
        /// Target sentences, one per line, space-tokenized.
        #[arg(long)]
        tgt: PathBuf,
        /// Projected corpus (CoNLL-2009).
        #[arg(long)]
        out: PathBuf,
        /// Keep pairs whose alignment density is at least this value.
        /// 0.8 is the default; 0.6 suits language pairs with sparse
        /// alignments.
        #[arg(long, default_value = "0.8")]
        min_density: String,
    },
    /// Corpus size summary (sentences, tokens, types, predicates).
    Stats {
        #[arg(long)]
        src: PathBuf,
        /// Write the JSON summary here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a stem lexicon from segmentations or lemma pairs.
    StemCompile {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "segmentation")]
        kind: LexiconKind,
    },
    /// Train the argument classifier.
    TrainArgs {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        lemma_mode: Option<LemmaModeArg>,
        /// Compiled lexicon (JSON from `stem-compile`); needed for ustem and slem.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Train the sense classifier.
    TrainSenses {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Train the source-side predicate identifier (needs POS tags).
    TrainPredid {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Label a corpus. Predicate positions come from the input frames, or
    /// from `--predid` when given.
    Tag {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Argument classifier checkpoint.
        #[arg(long)]
        args: PathBuf,
        /// Sense classifier checkpoint; input senses are kept without it.
        #[arg(long)]
        senses: Option<PathBuf>,
        /// Predicate identifier checkpoint.
        #[arg(long)]
        predid: Option<PathBuf>,
    },
    /// Labeled F1 with gold and automatic senses.
    Score {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Serialize)]
struct Provenance {
    command: &'static str,
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    config_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl Provenance {
    fn new(command: &'static str) -> Self {
        Provenance {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config_hash: None,
            seed: None,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.insert(
            path.display().to_string(),
            hex::encode(Sha256::digest(bytes)),
        );
    }

    fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    fn emit(&self, out: Option<&Path>) -> Result<()> {
        let json = serde_json::to_string(self).expect("provenance serializes");
        eprintln!("{json}");
        if let Some(out) = out {
            let path = provenance_path(out);
            fs::write(&path, format!("{json}\n")).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// `<out>.prov.json`.
pub fn provenance_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".prov.json");
    PathBuf::from(s)
}

fn read(path: &Path, prov: &mut Provenance) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    prov.input(path, &bytes);
    Ok(bytes)
}

fn read_text(path: &Path, prov: &mut Provenance) -> Result<String> {
    let bytes = read(path, prov)?;
    String::from_utf8(bytes)
        .map_err(|e| Error::Config(format!("{}: not UTF-8: {e}", path.display())))
}

fn read_corpus(path: &Path, prov: &mut Provenance) -> Result<Corpus> {
    let bytes = read(path, prov)?;
    Ok(read_conll(BufReader::new(bytes.as_slice()))?)
}

fn write(path: &Path, text: &str, prov: &mut Provenance) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    prov.output(path);
    Ok(())
}

fn lines(text: &str) -> Vec<&str> {
    text.lines().collect()
}

fn resolve_config(
    m: &ModelArgs,
    lemma_mode: Option<LemmaModeArg>,
    prov: &mut Provenance,
) -> Result<ModelConfig> {
    let preset = Preset::from(m.preset);
    let mut cfg = match &m.config {
        Some(path) => ModelConfig::from_json_over(preset, &read_text(path, prov)?)?,
        None => ModelConfig::preset(preset),
    };
    if let Some(s) = m.seed {
        cfg.seed = s;
    }
    if let Some(e) = m.epochs {
        cfg.epochs = e;
    }
    if let Some(l) = lemma_mode {
        cfg.lemma_mode = l.into();
    }
    cfg.validate()?;
    prov.config_hash = Some(cfg.hash());
    prov.seed = Some(cfg.seed);
    Ok(cfg)
}

fn read_embeddings(
    m: &ModelArgs,
    dim: usize,
    prov: &mut Provenance,
) -> Result<Option<EmbeddingTable>> {
    match &m.embeddings {
        Some(path) => {
            let bytes = read(path, prov)?;
            Ok(Some(load_embeddings(
                BufReader::new(bytes.as_slice()),
                dim,
            )?))
        }
        None => Ok(None),
    }
}

fn log_report(what: &str, report: &TrainReport) {
    log::info!(
        "{what}: {} instances, {} steps, final epoch loss {:.6}",
        report.instances,
        report.steps,
        report.epoch_losses.last().copied().unwrap_or(0.0)
    );
}

fn load_kind(path: &Path, prov: &mut Provenance) -> Result<Model> {
    read(path, prov)?;
    read(&crate::model::persist::sidecar_path(path), prov)?;
    Ok(load(path)?)
}

fn wrong_kind(path: &Path, want: &str, got: &Model) -> Error {
    Error::Config(format!(
        "{}: expected a {want} model, found {}",
        path.display(),
        got.kind()
    ))
}

fn run_command(cmd: Command, exec: Execution) -> Result<()> {
    match cmd {
        Command::Intersect {
            align,
            src,
            tgt,
            out,
        } => {
            let mut prov = Provenance::new("intersect");
            let fwd = read_text(&align.fwd, &mut prov)?;
            let rev = read_text(&align.rev, &mut prov)?;
            let (fwd, rev) = (lines(&fwd), lines(&rev));
            if fwd.len() != rev.len() {
                return Err(Error::Config(format!(
                    "forward file has {} lines, reverse file has {}",
                    fwd.len(),
                    rev.len()
                )));
            }
            let src_lens = match &src {
                Some(p) => Some(
                    read_corpus(p, &mut prov)?
                        .sentences
                        .iter()
                        .map(|s| s.len())
                        .collect::<Vec<_>>(),
                ),
                None => None,
            };
            let tgt_lens = match &tgt {
                Some(p) => Some(
                    read_tokenized(&read_text(p, &mut prov)?)
                        .iter()
                        .map(Vec::len)
                        .collect::<Vec<_>>(),
                ),
                None => None,
            };
            let order = PairOrder::from(align.rev_order);
            let mut text = String::new();
            for (i, (f, r)) in fwd.iter().zip(&rev).enumerate() {
                let (sl, tl) = match (&src_lens, &tgt_lens) {
                    (Some(s), Some(t)) => (
                        *s.get(i).ok_or_else(|| {
                            Error::Config(format!("no source sentence {}", i + 1))
                        })?,
                        *t.get(i).ok_or_else(|| {
                            Error::Config(format!("no target sentence {}", i + 1))
                        })?,
                    ),
                    _ => inferred_lengths(f, r, order),
                };
                let a = intersect_lines(f, r, sl, tl, order)
                    .map_err(|e| Error::Config(format!("alignment line {}: {e}", i + 1)))?;
                text.push_str(&a.to_pharaoh());
                text.push('\n');
            }
            write(&out, &text, &mut prov)?;
            prov.emit(Some(&out))
        }
        Command::Project {
            align,
            src,
            tgt,
            out,
            min_density,
        } => {
            let mut prov = Provenance::new("project");
            let threshold: DensityThreshold = min_density
                .parse()
                .map_err(|e| Error::Config(format!("--min-density: {e}")))?;
            let source = read_corpus(&src, &mut prov)?;
            let target = read_tokenized(&read_text(&tgt, &mut prov)?);
            let fwd = read_text(&align.fwd, &mut prov)?;
            let rev = read_text(&align.rev, &mut prov)?;
            let config = ProjectionConfig {
                threshold,
                rev_order: align.rev_order.into(),
                exec,
            };
            let owned = |t: &str| t.lines().map(str::to_string).collect::<Vec<_>>();
            let result = project_corpus(&source, &target, &owned(&fwd), &owned(&rev), &config)?;
            write(&out, &write_conll_string(&result.corpus)?, &mut prov)?;
            println!("{}", result.stats.to_json());
            prov.emit(Some(&out))
        }
        Command::Stats { src, out } => {
            let mut prov = Provenance::new("stats");
            let corpus = read_corpus(&src, &mut prov)?;
            let json = ProjectionStats::of(&corpus).to_json();
            match &out {
                Some(p) => write(p, &format!("{json}\n"), &mut prov)?,
                None => println!("{json}"),
            }
            prov.emit(out.as_deref())
        }
        Command::StemCompile { src, out, kind } => {
            let mut prov = Provenance::new("stem-compile");
            let bytes = read(&src, &mut prov)?;
            let reader = BufReader::new(bytes.as_slice());
            let lex = match kind {
                LexiconKind::Segmentation => compile_lexicon(reader)?,
                LexiconKind::Lemmas => lemma_lexicon(reader)?,
            };
            write(&out, &lex.to_json(), &mut prov)?;
            prov.emit(Some(&out))
        }
        Command::TrainArgs {
            model,
            lemma_mode,
            lexicon,
        } => {
            let mut prov = Provenance::new("train-args");
            let cfg = resolve_config(&model, lemma_mode, &mut prov)?;
            let corpus = read_corpus(&model.src, &mut prov)?;
            let emb = read_embeddings(&model, cfg.d_w, &mut prov)?;
            let lex = match &lexicon {
                Some(p) => Some(StemLexicon::from_json(&read_text(p, &mut prov)?)?),
                None => None,
            };
            let opts = TrainOptions::from_config(&cfg, exec);
            let mut m = ArgumentClassifier::new(cfg, &corpus, emb.as_ref(), lex)?;
            log_report("train-args", &train(&mut m, &corpus, &opts)?);
            save(&Model::Arguments(m), &model.out)?;
            prov.output(&model.out);
            prov.emit(Some(&model.out))
        }
        Command::TrainSenses { model } => {
            let mut prov = Provenance::new("train-senses");
            let cfg = resolve_config(&model, None, &mut prov)?;
            let corpus = read_corpus(&model.src, &mut prov)?;
            let emb = read_embeddings(&model, cfg.d_w, &mut prov)?;
            let opts = TrainOptions::from_config(&cfg, exec);
            let mut m = SenseClassifier::new(cfg, &corpus, emb.as_ref())?;
            log_report("train-senses", &train(&mut m, &corpus, &opts)?);
            save(&Model::Senses(m), &model.out)?;
            prov.output(&model.out);
            prov.emit(Some(&model.out))
        }
        Command::TrainPredid { model } => {
            let mut prov = Provenance::new("train-predid");
            let cfg = resolve_config(&model, None, &mut prov)?;
            let corpus = read_corpus(&model.src, &mut prov)?;
            let emb = read_embeddings(&model, cfg.d_w, &mut prov)?;
            let opts = TrainOptions::from_config(&cfg, exec);
            let mut m = PredicateIdentifier::new(cfg, &corpus, emb.as_ref())?;
            log_report("train-predid", &train(&mut m, &corpus, &opts)?);
            save(&Model::Predicates(m), &model.out)?;
            prov.output(&model.out);
            prov.emit(Some(&model.out))
        }
        Command::Tag {
            src,
            out,
            args,
            senses,
            predid,
        } => {
            let mut prov = Provenance::new("tag");
            let mut corpus = read_corpus(&src, &mut prov)?;
            if let Some(p) = &predid {
                let Model::Predicates(m) = load_kind(p, &mut prov)? else {
                    return Err(wrong_kind(p, "predicates", &load(p)?));
                };
                let found = par::try_map(exec, &corpus.sentences, |s| m.identify(s))?;
                for (s, positions) in corpus.sentences.iter_mut().zip(found) {
                    s.frames = positions
                        .into_iter()
                        .map(|p| PredicateFrame::new(p, "_"))
                        .collect();
                }
            }
            if let Some(p) = &senses {
                let Model::Senses(m) = load_kind(p, &mut prov)? else {
                    return Err(wrong_kind(p, "senses", &load(p)?));
                };
                corpus = m.relabel_corpus(&corpus, exec)?;
            }
            let Model::Arguments(m) = load_kind(&args, &mut prov)? else {
                return Err(wrong_kind(&args, "arguments", &load(&args)?));
            };
            prov.config_hash = Some(m.config().hash());
            prov.seed = Some(m.config().seed);
            let tagged = m.tag_corpus(&corpus, exec)?;
            write(&out, &write_conll_string(&tagged)?, &mut prov)?;
            prov.emit(Some(&out))
        }
        Command::Score { gold, pred, out } => {
            let mut prov = Provenance::new("score");
            let g = read_corpus(&gold, &mut prov)?;
            let p = read_corpus(&pred, &mut prov)?;
            let report = Report::compute(&g, &p, exec)?;
            println!("{}", report.text());
            if let Some(o) = &out {
                write(o, &report.to_json(), &mut prov)?;
            }
            prov.emit(out.as_deref())
        }
    }
}

/// Sentence lengths implied by the largest index on each side.
fn inferred_lengths(fwd: &str, rev: &str, rev_order: PairOrder) -> (usize, usize) {
    let mut src = 0;
    let mut tgt = 0;
    for (line, order) in [(fwd, PairOrder::SourceFirst), (rev, rev_order)] {
        for tok in line.split_whitespace() {
            if let Some((a, b)) = tok.split_once('-') {
                let (a, b) = (
                    a.parse::<usize>().unwrap_or(0),
                    b.parse::<usize>().unwrap_or(0),
                );
                let (s, t) = match order {
                    PairOrder::SourceFirst => (a, b),
                    PairOrder::TargetFirst => (b, a),
                };
                src = src.max(s + 1);
                tgt = tgt.max(t + 1);
            }
        }
    }
    (src, tgt)
}

fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
}

/// Parse `argv` (including the program name) and run; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    par::init_threads(threads_from_env());
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match run_command(cli.command, exec) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            1
        }
    }
}
