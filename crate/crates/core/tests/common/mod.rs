#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xsrl::corpus::{write_conll_string, Corpus, PredicateFrame, Sentence};
use xsrl::model::LemmaMode;
use xsrl::morphology::{compile_lexicon, lemma_lexicon, StemLexicon};

pub fn congratulate_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/congratulate")
}

/// Run the `xsrl` binary; its output is shown only on failure.
pub fn cli<S: AsRef<str>>(args: &[S]) -> i32 {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_xsrl"))
        .args(args.iter().map(|a| a.as_ref()))
        .output()
        .expect("xsrl binary runs");
    let code = out.status.code().unwrap_or(-1);
    if code != 0 {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    code
}

pub fn path_str(p: &Path) -> String {
    p.to_str().expect("utf-8 temp path").to_string()
}

/// A small bilingual corpus: English source with predicate-argument
/// annotation, a verb-final target language, both directional alignments
/// and a stem lexicon for the target side.
pub struct Bitext {
    pub source: Corpus,
    pub target: Vec<Vec<String>>,
    pub fwd: Vec<String>,
    pub rev: Vec<String>,
}

const NOUNS: [(&str, &str); 8] = [
    ("dog", "koira"),
    ("cat", "kissa"),
    ("man", "mies"),
    ("woman", "nainen"),
    ("ball", "pallo"),
    ("letter", "kirje"),
    ("car", "auto"),
    ("book", "kirja"),
];

// (English form, target form, sense)
const VERBS: [(&str, &str, &str); 5] = [
    ("sees", "näkee", "see.01"),
    ("finds", "löytää", "find.01"),
    ("takes", "ottaa", "take.01"),
    ("reads", "lukee", "read.01"),
    ("likes", "pitää", "like.02"),
];

/// `n` sentence pairs from `seed`. English is `the N1 V the N2 [today]`;
/// the target drops articles, puts the verb last and, in some pairs,
/// ends with the particle `ko`, which is unaligned there and aligned to
/// English `too` in other pairs.
pub fn bitext(n: usize, seed: u64) -> Bitext {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut source = Vec::new();
    let mut target = Vec::new();
    let mut fwd = Vec::new();
    let mut rev = Vec::new();
    for i in 0..n {
        let mut nouns = NOUNS.to_vec();
        nouns.shuffle(&mut rng);
        let (subj, obj) = (nouns[0], nouns[1]);
        let verb = VERBS[rng.gen_range(0..VERBS.len())];
        let too = i % 4 == 1;
        let trailing_particle = i % 4 == 3;
        // Keeps the particle pairs at density 4/5.
        let today = trailing_particle || rng.gen_bool(0.4);

        let mut en = vec!["the", subj.0, verb.0, "the", obj.0];
        let mut links = vec![(1, 0), (4, 1)];
        let mut tgt = vec![subj.1, obj.1];
        if today {
            en.push("today");
            tgt.push("tänään");
            links.push((en.len() - 1, tgt.len() - 1));
        }
        if too {
            en.push("too");
            tgt.push("ko");
            links.push((en.len() - 1, tgt.len() - 1));
        }
        tgt.push(verb.1);
        links.push((2, tgt.len() - 1));
        if trailing_particle {
            tgt.push("ko");
        }

        let mut s = Sentence::from_forms(&en);
        for t in &mut s.tokens {
            let pos = match t.form.as_str() {
                "the" => "DT",
                "too" => "RB",
                f if f == verb.0 => "VBZ",
                _ => "NN",
            };
            t.pos = Some(pos.to_string());
        }
        let mut frame = PredicateFrame::new(3, verb.2)
            .with_arg(2, "A0")
            .with_arg(5, "A1");
        if today {
            frame = frame.with_arg(6, "AM-TMP");
        }
        s.frames.push(frame);
        source.push(s);
        target.push(tgt.iter().map(|t| t.to_string()).collect());
        links.sort_unstable();
        fwd.push(
            links
                .iter()
                .map(|(s, t)| format!("{s}-{t}"))
                .collect::<Vec<_>>()
                .join(" "),
        );
        rev.push(
            links
                .iter()
                .map(|(s, t)| format!("{t}-{s}"))
                .collect::<Vec<_>>()
                .join(" "),
        );
    }
    Bitext {
        source: Corpus::new(source),
        target,
        fwd,
        rev,
    }
}

impl Bitext {
    /// Write `src.conll`, `tgt.txt`, `fwd.aln` and `rev.aln` into `dir`.
    pub fn write(&self, dir: &Path) {
        fs::write(
            dir.join("src.conll"),
            write_conll_string(&self.source).unwrap(),
        )
        .unwrap();
        let lines = |v: Vec<String>| v.join("\n") + "\n";
        fs::write(
            dir.join("tgt.txt"),
            lines(self.target.iter().map(|t| t.join(" ")).collect()),
        )
        .unwrap();
        fs::write(dir.join("fwd.aln"), lines(self.fwd.clone())).unwrap();
        fs::write(dir.join("rev.aln"), lines(self.rev.clone())).unwrap();
    }
}

/// Target-side segmentations (verb stems) in the `word<TAB>morph/TAG` form.
pub fn segmentations() -> String {
    let mut out = String::new();
    for (_, t, _) in VERBS {
        let cut = t.char_indices().nth(3).map(|(i, _)| i).unwrap_or(t.len());
        out.push_str(&format!("{t}\t{}/STM {}/SUF\n", &t[..cut], &t[cut..]));
    }
    out
}

/// Target-side `word<TAB>lemma` pairs.
pub fn lemmas() -> String {
    VERBS
        .iter()
        .map(|(e, t, _)| format!("{t}\t{}\n", e.trim_end_matches('s')))
        .collect()
}

pub fn lexicon_for(mode: LemmaMode) -> Option<StemLexicon> {
    match mode {
        LemmaMode::Char => None,
        LemmaMode::Ustem => Some(compile_lexicon(segmentations().as_bytes()).unwrap()),
        LemmaMode::Slem => Some(lemma_lexicon(lemmas().as_bytes()).unwrap()),
    }
}

/// Paths of one full pipeline run inside a working directory.
pub struct PipelineRun {
    pub projected: PathBuf,
    pub args: PathBuf,
    pub senses: PathBuf,
    pub tagged: PathBuf,
    pub report: PathBuf,
}

impl PipelineRun {
    pub fn report_text(&self) -> String {
        let r: xsrl::eval::Report =
            serde_json::from_str(&fs::read_to_string(&self.report).unwrap()).unwrap();
        r.text()
    }

    /// Every artifact a rerun must reproduce byte for byte.
    pub fn artifacts(&self) -> Vec<(PathBuf, Vec<u8>)> {
        let sidecar = |p: &Path| xsrl::model::persist::sidecar_path(p);
        [
            self.projected.clone(),
            self.args.clone(),
            sidecar(&self.args),
            self.senses.clone(),
            sidecar(&self.senses),
            self.tagged.clone(),
            self.report.clone(),
        ]
        .into_iter()
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect()
    }
}

/// project → train-args → train-senses → tag → score on `bitext` written
/// to `dir`, self-scored against the projected corpus.
pub fn run_pipeline(
    dir: &Path,
    bitext: &Bitext,
    mode: LemmaMode,
    epochs: usize,
    extra: &[&str],
) -> PipelineRun {
    bitext.write(dir);
    let p = |n: &str| path_str(&dir.join(n));
    let ok = |args: Vec<String>| {
        let args: Vec<String> = extra.iter().map(|s| s.to_string()).chain(args).collect();
        assert_eq!(cli(&args), 0, "xsrl {}", args.join(" "));
    };
    let v = |a: &[&str]| a.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    ok(v(&[
        "project",
        "--src",
        &p("src.conll"),
        "--tgt",
        &p("tgt.txt"),
        "--fwd",
        &p("fwd.aln"),
        "--rev",
        &p("rev.aln"),
        "--out",
        &p("proj.conll"),
    ]));
    let epochs = epochs.to_string();
    let mode_name = match mode {
        LemmaMode::Char => "char",
        LemmaMode::Ustem => "ustem",
        LemmaMode::Slem => "slem",
    };
    let mut train = v(&[
        "train-args",
        "--src",
        &p("proj.conll"),
        "--out",
        &p("args.ckpt"),
        "--epochs",
        &epochs,
        "--lemma-mode",
        mode_name,
    ]);
    match mode {
        LemmaMode::Char => {}
        LemmaMode::Ustem | LemmaMode::Slem => {
            let (text, kind) = if mode == LemmaMode::Ustem {
                (segmentations(), "segmentation")
            } else {
                (lemmas(), "lemmas")
            };
            fs::write(dir.join("lex.txt"), text).unwrap();
            ok(v(&[
                "stem-compile",
                "--src",
                &p("lex.txt"),
                "--out",
                &p("lex.json"),
                "--kind",
                kind,
            ]));
            train.extend(v(&["--lexicon", &p("lex.json")]));
        }
    }
    ok(train);
    ok(v(&[
        "train-senses",
        "--src",
        &p("proj.conll"),
        "--out",
        &p("senses.ckpt"),
        "--epochs",
        &epochs,
    ]));
    ok(v(&[
        "tag",
        "--src",
        &p("proj.conll"),
        "--args",
        &p("args.ckpt"),
        "--senses",
        &p("senses.ckpt"),
        "--out",
        &p("tagged.conll"),
    ]));
    ok(v(&[
        "score",
        "--gold",
        &p("proj.conll"),
        "--pred",
        &p("tagged.conll"),
        "--out",
        &p("report.json"),
    ]));
    PipelineRun {
        projected: dir.join("proj.conll"),
        args: dir.join("args.ckpt"),
        senses: dir.join("senses.ckpt"),
        tagged: dir.join("tagged.conll"),
        report: dir.join("report.json"),
    }
}

pub mod checks;
pub mod props;
