//! Runs every acceptance criterion and prints one PASS/FAIL line each.

mod common;

use std::fs;
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

use common::checks::{bilstm_check, classifier_check, lstm_step_check};
use common::props::*;
use common::*;
use xsrl::alignment::{
    density, intersect, parse_pharaoh_ordered, DensityThreshold, OneToOneAlignment, PairOrder,
};
use xsrl::corpus::{read_conll_str, write_conll_string, Corpus, PredicateFrame, Sentence};
use xsrl::eval::{format_cell, score, SenseMode};
use xsrl::model::LemmaMode;
use xsrl::morphology::compile_lexicon;
use xsrl::par::Execution;
use xsrl::projection::{filter_by_density, intersect_lines, project_sentence};

type Outcome = Result<String, String>;

/// Name, time limit in seconds, check.
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn samples<S: Strategy>(
    strategy: S,
    n: usize,
    mut check: impl FnMut(S::Value) -> Result<(), String>,
) -> Result<(), String> {
    let mut runner = TestRunner::deterministic();
    for i in 0..n {
        let v = strategy
            .new_tree(&mut runner)
            .map_err(|e| e.to_string())?
            .current();
        check(v).map_err(|e| format!("case {i}: {e}"))?;
    }
    Ok(())
}

fn congratulate() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = congratulate_dir();
    let f = |n: &str| path_str(&d.join(n));
    let out = dir.path().join("de.conll");
    let rc = cli(&[
        "project",
        "--src",
        &f("en.conll"),
        "--tgt",
        &f("de.txt"),
        "--fwd",
        &f("fwd.aln"),
        "--rev",
        &f("rev.aln"),
        "--out",
        &path_str(&out),
    ]);
    ensure(rc == 0, || format!("project exited {rc}"))?;
    let got = fs::read(&out).map_err(|e| e.to_string())?;
    let want = fs::read(d.join("expected.conll")).map_err(|e| e.to_string())?;
    ensure(got == want, || "output differs from the golden file".into())?;
    let c = read_conll_str(std::str::from_utf8(&got).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let (frames, deps) = (c.frame_count(), c.sentences[0].dependency_count());
    ensure((frames, deps) == (2, 4), || {
        format!("{frames} frames, {deps} dependencies")
    })?;
    let read = |n: &str| fs::read_to_string(d.join(n)).unwrap();
    let a = intersect_lines(
        read("fwd.aln").trim(),
        read("rev.aln").trim(),
        7,
        7,
        PairOrder::TargetFirst,
    )
    .map_err(|e| e.to_string())?;
    let dens = density(&a).map_err(|e| e.to_string())?;
    ensure((dens.aligned, dens.total) == (6, 7), || {
        format!("density {}/{}", dens.aligned, dens.total)
    })?;
    Ok("byte-exact; 2 frames, 4 dependencies, density 6/7".into())
}

fn projection_oracle() -> Outcome {
    samples(projection_case(), 1000, |(src, t, links)| {
        let tgt: Vec<String> = (1..=t).map(|j| format!("v{j}")).collect();
        let align = OneToOneAlignment::from_links(links.iter().copied(), src.len(), t)
            .map_err(|e| e.to_string())?;
        let out = project_sentence(&src, &align, &tgt).map_err(|e| e.to_string())?;
        let (frames, deps, mask) = project_oracle(&src, t, &links);
        ensure(annotation_sets(&out) == (frames, deps), || {
            "annotations differ from oracle".into()
        })?;
        ensure(out.labeled_mask == Some(mask), || {
            "mask differs from oracle".into()
        })
    })?;
    Ok("1000/1000 instances match".into())
}

fn intersection_oracle() -> Outcome {
    samples(directional_pair(), 1000, |(s, t, fwd, rev)| {
        let f = parse_pharaoh_ordered(&pharaoh(&fwd, false), s, t, PairOrder::SourceFirst)
            .map_err(|e| e.to_string())?;
        let r = parse_pharaoh_ordered(&pharaoh(&rev, true), s, t, PairOrder::TargetFirst)
            .map_err(|e| e.to_string())?;
        let got: Links = intersect(&f, &r)
            .map_err(|e| e.to_string())?
            .links()
            .collect();
        ensure(got == intersect_oracle(&fwd, &rev), || {
            "intersection differs from oracle".into()
        })
    })?;
    Ok("1000/1000 pairs match".into())
}

fn density_boundary() -> Outcome {
    let aligned =
        |k: usize, n: usize| OneToOneAlignment::from_links((1..=k).map(|i| (i, i)), n, n).unwrap();
    for (k, n, threshold, keep) in [
        (3, 5, "0.6", true),
        (4, 5, "0.8", true),
        (2, 5, "0.6", false),
        (3, 5, "0.8", false),
        (6, 7, "0.8", true),
    ] {
        let th: DensityThreshold = threshold
            .parse()
            .map_err(|e: xsrl::alignment::AlignmentError| e.to_string())?;
        let kept = filter_by_density(vec![(aligned(k, n), ())], th).len() == 1;
        ensure(kept == keep, || {
            format!("{k}/{n} against {threshold}: kept = {kept}")
        })?;
    }
    Ok("3/5 @ 0.6 and 4/5 @ 0.8 kept; 2/5 @ 0.6 and 3/5 @ 0.8 dropped".into())
}

fn gradients() -> Outcome {
    let tol = 1e-5;
    let mut parts = Vec::new();
    let mut worst = 0.0f64;
    for (name, r) in [
        ("lstm step", lstm_step_check(0)),
        ("depth-2 bilstm", bilstm_check(0)),
        ("classifier char", classifier_check(LemmaMode::Char, 0)),
        ("classifier ustem", classifier_check(LemmaMode::Ustem, 0)),
        ("classifier slem", classifier_check(LemmaMode::Slem, 0)),
    ] {
        ensure(r.max_rel_error < tol, || {
            format!(
                "{name}: max relative error {:.2e} at {:?}",
                r.max_rel_error, r.worst
            )
        })?;
        worst = worst.max(r.max_rel_error);
        parts.push(format!("{name} {:.1e}", r.max_rel_error));
    }
    Ok(format!(
        "max relative error {worst:.1e} < 1e-5 ({})",
        parts.join(", ")
    ))
}

fn overfit() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = run_pipeline(dir.path(), &bitext(20, 5), LemmaMode::Char, 100, &[]);
    let text = run.report_text();
    ensure(text == "100.0 (100.0)", || format!("self F1 {text}"))?;
    Ok(format!("20 sentences, 100 epochs: F1 gold (auto) = {text}"))
}

fn scorer() -> Outcome {
    let sentence = |f: PredicateFrame| {
        let mut s = Sentence::from_forms(&["a", "b", "c", "d", "e"]);
        s.frames.push(f);
        Corpus::new(vec![s])
    };
    let gold = sentence(
        PredicateFrame::new(2, "see.01")
            .with_arg(1, "A0")
            .with_arg(3, "A1")
            .with_arg(5, "AM-TMP"),
    );
    let pred = sentence(
        PredicateFrame::new(2, "see.01")
            .with_arg(1, "A0")
            .with_arg(3, "A1")
            .with_arg(4, "A2"),
    );
    for mode in [SenseMode::Gold, SenseMode::Auto] {
        let s = score(&gold, &pred, mode, Execution::Sequential).map_err(|e| e.to_string())?;
        ensure((s.precision, s.recall, s.f1) == (0.75, 0.75, 0.75), || {
            format!("{mode}: {s:?}")
        })?;
    }
    let cell = format_cell(0.61034, 0.57012);
    ensure(cell == "61.0 (57.0)", || format!("formatted {cell:?}"))?;
    Ok("P = R = F1 = 0.75; \"61.0 (57.0)\"".into())
}

fn determinism() -> Outcome {
    let b = bitext(20, 5);
    let (d1, d2) = (
        tempfile::tempdir().map_err(|e| e.to_string())?,
        tempfile::tempdir().map_err(|e| e.to_string())?,
    );
    let a = run_pipeline(d1.path(), &b, LemmaMode::Char, 100, &[]).artifacts();
    let c = run_pipeline(d2.path(), &b, LemmaMode::Char, 100, &[]).artifacts();
    for ((p, x), (_, y)) in a.iter().zip(&c) {
        ensure(x == y, || {
            format!("{} differs", p.file_name().unwrap().to_string_lossy())
        })?;
    }
    Ok(format!(
        "{} artifacts byte-identical across two runs",
        a.len()
    ))
}

fn stemmer() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let lines = segmentation_lines_sized(200..=200)
        .new_tree(&mut runner)
        .map_err(|e| e.to_string())?
        .current();
    let lex = compile_lexicon(lines.as_bytes()).map_err(|e| e.to_string())?;
    let known: Vec<&str> = lines
        .lines()
        .filter_map(|l| l.split_once('\t'))
        .map(|(w, _)| w)
        .collect();
    let words = proptest::collection::vec((word(), word(), 0..known.len()), 5_000);
    let words = words
        .new_tree(&mut runner)
        .map_err(|e| e.to_string())?
        .current();
    // Half bare random words, half lexicon words wrapped in random affixes.
    let words: Vec<String> = words
        .into_iter()
        .flat_map(|(a, b, k)| [a.clone(), format!("{a}{}{b}", known[k])])
        .collect();
    for w in &words {
        let s = lex.stem(w);
        ensure(!s.is_empty() && w.contains(&s), || {
            format!("{w:?} -> {s:?}")
        })?;
    }
    Ok(format!(
        "{} words, lexicon of {} entries",
        words.len(),
        known.len()
    ))
}

fn round_trip() -> Outcome {
    samples(corpus(), 200, |c| {
        let text = write_conll_string(&c).map_err(|e| e.to_string())?;
        let back = read_conll_str(&text).map_err(|e| e.to_string())?;
        let again = write_conll_string(&back).map_err(|e| e.to_string())?;
        ensure(again == text, || "second serialization differs".into())
    })?;
    Ok("200/200 corpora byte-identical".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 congratulate projection", 1, congratulate),
        ("2 projection oracle", 30, projection_oracle),
        ("3 intersection oracle", 10, intersection_oracle),
        ("4 density boundary", 1, density_boundary),
        ("5 gradient checks", 120, gradients),
        ("6 overfit memorization", 600, overfit),
        ("7 scorer", 1, scorer),
        ("8 determinism", 900, determinism),
        ("9 stemmer totality", 10, stemmer),
        ("10 conll round-trip", 10, round_trip),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let limit = Duration::from_secs(limit);
        let (ok, detail) = match outcome {
            Ok(d) if took < limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} {name}: {detail} [{:.2}s / {}s]",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
