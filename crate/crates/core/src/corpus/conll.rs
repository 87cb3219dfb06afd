//! CoNLL-2009 reader and writer.
//!
//! Columns: ID FORM LEMMA PLEMMA POS PPOS FEAT PFEAT HEAD PHEAD DEPREL
//! PDEPREL FILLPRED PRED APRED1..APREDm. PLEMMA and PPOS populate
//! [`Token::lemma`] and [`Token::pos`]; the other non-SRL columns pass
//! through untouched. A partial labeling is stored as a comment line
//! `# labeled_mask = 0110...` directly before the sentence.

use std::io::{BufRead, Write};

use super::{Corpus, CorpusError, PredicateFrame, SemanticDependency, Sentence, Token, NULL_ROLE};

pub const MASK_COMMENT: &str = "# labeled_mask = ";

const FIXED_COLUMNS: usize = 14;
// Positions of the opaque columns among the fixed 12 non-SRL ones.
const OPAQUE_SLOTS: [usize; 8] = [2, 4, 6, 7, 8, 9, 10, 11];

pub fn read_conll_str(text: &str) -> Result<Corpus, CorpusError> {
    read_conll(text.as_bytes())
}

pub fn read_conll<R: BufRead>(reader: R) -> Result<Corpus, CorpusError> {
    let mut sentences = Vec::new();
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    let mut mask: Option<(usize, String)> = None;

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| CorpusError::Io(e.to_string()))?;
        if line.is_empty() {
            if !rows.is_empty() || mask.is_some() {
                let ordinal = sentences.len() + 1;
                sentences.push(parse_sentence(ordinal, &rows, mask.take(), lineno)?);
                rows.clear();
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix(MASK_COMMENT) {
            if !rows.is_empty() {
                return Err(CorpusError::Malformed {
                    line: lineno,
                    message: "labeled_mask comment inside a sentence".to_string(),
                });
            }
            mask = Some((lineno, rest.to_string()));
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<String> = line.split('\t').map(str::to_string).collect();
        if cols.len() < FIXED_COLUMNS {
            return Err(CorpusError::TooFewColumns {
                line: lineno,
                found: cols.len(),
            });
        }
        if let Some((_, first)) = rows.first() {
            if first.len() != cols.len() {
                return Err(CorpusError::InconsistentColumns {
                    line: lineno,
                    found: cols.len(),
                    expected: first.len(),
                });
            }
        }
        rows.push((lineno, cols));
    }
    if !rows.is_empty() || mask.is_some() {
        let ordinal = sentences.len() + 1;
        sentences.push(parse_sentence(ordinal, &rows, mask.take(), 0)?);
    }
    Ok(Corpus { sentences })
}

fn optional(cell: &str) -> Option<String> {
    (cell != "_").then(|| cell.to_string())
}

fn parse_sentence(
    ordinal: usize,
    rows: &[(usize, Vec<String>)],
    mask: Option<(usize, String)>,
    end_line: usize,
) -> Result<Sentence, CorpusError> {
    if rows.is_empty() {
        return Err(CorpusError::Malformed {
            line: mask.map(|(l, _)| l).unwrap_or(end_line),
            message: "labeled_mask comment without a sentence".to_string(),
        });
    }
    let width = rows[0].1.len();
    let mut tokens = Vec::with_capacity(rows.len());
    let mut predicates = Vec::new();
    for (i, (lineno, cols)) in rows.iter().enumerate() {
        let malformed = |message: String| CorpusError::Malformed {
            line: *lineno,
            message,
        };
        let id: usize = cols[0]
            .parse()
            .map_err(|_| malformed(format!("invalid token id {:?}", cols[0])))?;
        if id != i + 1 {
            return Err(malformed(format!("token id {id}, expected {}", i + 1)));
        }
        let form = &cols[1];
        if form.is_empty() || form.chars().any(char::is_whitespace) {
            return Err(malformed(format!("invalid form {form:?}")));
        }
        match cols[12].as_str() {
            "Y" => predicates.push((i + 1, cols[13].clone())),
            "_" => {
                if cols[13] != "_" {
                    return Err(malformed(format!(
                        "PRED {:?} on a token without FILLPRED",
                        cols[13]
                    )));
                }
            }
            other => return Err(malformed(format!("invalid FILLPRED {other:?}"))),
        }
        tokens.push(Token {
            index: id,
            form: form.clone(),
            pos: optional(&cols[5]),
            lemma: optional(&cols[3]),
            opaque: OPAQUE_SLOTS.iter().map(|&c| cols[c].clone()).collect(),
        });
    }

    let apreds = width - FIXED_COLUMNS;
    if apreds != predicates.len() {
        return Err(CorpusError::ApredMismatch {
            sentence: ordinal,
            predicates: predicates.len(),
            found: apreds,
        });
    }

    let frames = predicates
        .into_iter()
        .enumerate()
        .map(|(k, (position, sense))| {
            let args = rows
                .iter()
                .enumerate()
                .filter_map(|(t, (_, cols))| {
                    let cell = &cols[FIXED_COLUMNS + k];
                    (cell != "_" && cell != NULL_ROLE)
                        .then(|| SemanticDependency::new(t + 1, cell.clone()))
                })
                .collect();
            PredicateFrame {
                position,
                sense,
                args,
            }
        })
        .collect();

    let labeled_mask = match mask {
        None => None,
        Some((line, bits)) => {
            let parsed: Result<Vec<bool>, _> = bits
                .trim_end()
                .chars()
                .map(|c| match c {
                    '1' => Ok(true),
                    '0' => Ok(false),
                    _ => Err(CorpusError::Malformed {
                        line,
                        message: format!("invalid labeled_mask character {c:?}"),
                    }),
                })
                .collect();
            let parsed = parsed?;
            if parsed.len() != tokens.len() {
                return Err(CorpusError::Malformed {
                    line,
                    message: format!(
                        "labeled_mask has {} entries for {} tokens",
                        parsed.len(),
                        tokens.len()
                    ),
                });
            }
            Some(parsed)
        }
    };

    Ok(Sentence {
        tokens,
        frames,
        labeled_mask,
    })
}

fn check_cell(ordinal: usize, what: &str, value: &str) -> Result<(), CorpusError> {
    if value.is_empty() || value.contains(['\t', '\n', '\r']) {
        return Err(CorpusError::Invalid {
            sentence: ordinal,
            message: format!("{what} {value:?} cannot be written"),
        });
    }
    Ok(())
}

pub fn write_conll_string(corpus: &Corpus) -> Result<String, CorpusError> {
    let mut out = Vec::new();
    write_conll(corpus, &mut out)?;
    Ok(String::from_utf8(out).expect("writer emits UTF-8"))
}

fn io(e: std::io::Error) -> CorpusError {
    CorpusError::Io(e.to_string())
}

pub fn write_conll<W: Write>(corpus: &Corpus, mut w: W) -> Result<(), CorpusError> {
    for (s_idx, sentence) in corpus.sentences.iter().enumerate() {
        let ordinal = s_idx + 1;
        sentence.validate(ordinal)?;
        let mut frames: Vec<&PredicateFrame> = sentence.frames.iter().collect();
        frames.sort_by_key(|f| f.position);
        for f in &frames {
            check_cell(ordinal, "sense", &f.sense)?;
            for d in &f.args {
                check_cell(ordinal, "role", &d.role)?;
                if d.role == "_" {
                    return Err(CorpusError::Invalid {
                        sentence: ordinal,
                        message: "role \"_\" cannot be written".to_string(),
                    });
                }
            }
        }

        if let Some(mask) = &sentence.labeled_mask {
            let bits: String = mask.iter().map(|&b| if b { '1' } else { '0' }).collect();
            writeln!(w, "{MASK_COMMENT}{bits}").map_err(io)?;
        }

        for token in &sentence.tokens {
            for cell in token.opaque.iter().chain(&token.lemma).chain(&token.pos) {
                check_cell(ordinal, "column", cell)?;
            }
            let o = &token.opaque;
            let lemma = token.lemma.as_deref().unwrap_or("_");
            let pos = token.pos.as_deref().unwrap_or("_");
            let frame_here = frames.iter().find(|f| f.position == token.index);
            let (fill, pred) = match frame_here {
                Some(f) => ("Y", f.sense.as_str()),
                None => ("_", "_"),
            };
            write!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                token.index,
                token.form,
                o[0],
                lemma,
                o[1],
                pos,
                o[2],
                o[3],
                o[4],
                o[5],
                o[6],
                o[7],
                fill,
                pred
            )
            .map_err(io)?;
            for f in &frames {
                write!(w, "\t{}", f.role_of(token.index).unwrap_or("_")).map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: usize, form: &str, fill: &str, pred: &str, apreds: &[&str]) -> String {
        let mut cols = vec![id.to_string(), form.to_string()];
        cols.extend(std::iter::repeat_n("_".to_string(), 10));
        cols.push(fill.to_string());
        cols.push(pred.to_string());
        cols.extend(apreds.iter().map(|s| s.to_string()));
        cols.join("\t")
    }

    fn german_congratulate_sentence() -> String {
        let rows = [
            line(1, "Ich", "_", "_", &["A0", "_"]),
            line(2, "beglückwünsche", "Y", "congratulate.01", &["_", "_"]),
            line(3, "ihn", "_", "_", &["A1", "_"]),
            line(4, "zu", "_", "_", &["_", "_"]),
            line(5, "seinem", "_", "_", &["_", "A0"]),
            line(6, "ausgezeichneten", "_", "_", &["_", "AM-ADJ"]),
            line(7, "Bericht", "Y", "report.01", &["_", "_"]),
        ];
        format!("{}\n\n", rows.join("\n"))
    }

    #[test]
    fn empty_stream_is_empty_corpus() {
        assert_eq!(read_conll_str("").unwrap().len(), 0);
        assert_eq!(write_conll_string(&Corpus::default()).unwrap(), "");
    }

    #[test]
    fn reads_congratulate_sentence() {
        let corpus = read_conll_str(&german_congratulate_sentence()).unwrap();
        assert_eq!(corpus.len(), 1);
        let s = &corpus.sentences[0];
        assert_eq!(s.len(), 7);
        assert_eq!(
            s.frames,
            vec![
                PredicateFrame::new(2, "congratulate.01")
                    .with_arg(1, "A0")
                    .with_arg(3, "A1"),
                PredicateFrame::new(7, "report.01")
                    .with_arg(5, "A0")
                    .with_arg(6, "AM-ADJ"),
            ]
        );
        assert_eq!(s.dependency_count(), 4);
    }

    #[test]
    fn writes_congratulate_sentence_back() {
        let text = german_congratulate_sentence();
        let corpus = read_conll_str(&text).unwrap();
        let out = write_conll_string(&corpus).unwrap();
        assert_eq!(out, text);
        let lines: Vec<&str> = out.split('\n').collect();
        // 7 token lines, the blank separator, and the empty tail after it.
        assert_eq!(lines.len(), 9);
        let role_rows: Vec<usize> = lines[..7]
            .iter()
            .enumerate()
            .filter(|(_, l)| l.split('\t').skip(14).any(|c| c != "_"))
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(role_rows, vec![1, 3, 5, 6]);
    }

    #[test]
    fn sentence_without_predicates() {
        let text = format!(
            "{}\n{}\n{}\n",
            line(1, "a", "_", "_", &[]),
            line(2, "b", "_", "_", &[]),
            line(3, "c", "_", "_", &[])
        );
        let corpus = read_conll_str(&text).unwrap();
        assert_eq!(corpus.sentences[0].frames, vec![]);
        assert_eq!(corpus.sentences[0].len(), 3);
    }

    #[test]
    fn short_line_names_line_and_count() {
        let text = "1\ta\t_\n";
        assert_eq!(
            read_conll_str(text),
            Err(CorpusError::TooFewColumns { line: 1, found: 3 })
        );
    }

    #[test]
    fn apred_count_mismatch_names_sentence() {
        let ok = format!("{}\n\n", line(1, "a", "_", "_", &[]));
        let bad = format!(
            "{}\n{}\n",
            line(1, "a", "Y", "a.01", &["_", "_"]),
            line(2, "b", "_", "_", &["_", "_"])
        );
        assert_eq!(
            read_conll_str(&format!("{ok}{bad}")),
            Err(CorpusError::ApredMismatch {
                sentence: 2,
                predicates: 1,
                found: 2
            })
        );
    }

    #[test]
    fn inconsistent_columns_rejected() {
        let text = format!(
            "{}\n{}\n",
            line(1, "a", "_", "_", &["_"]),
            line(2, "b", "_", "_", &[])
        );
        assert!(matches!(
            read_conll_str(&text),
            Err(CorpusError::InconsistentColumns { line: 2, .. })
        ));
    }

    #[test]
    fn role_with_tab_cannot_be_written() {
        let mut s = Sentence::from_forms(&["a", "b"]);
        s.frames
            .push(PredicateFrame::new(1, "a.01").with_arg(2, "A\t0"));
        assert!(write_conll_string(&Corpus::new(vec![s])).is_err());
    }

    #[test]
    fn mask_comment_round_trips() {
        let mut s = Sentence::from_forms(&["a", "b", "c"]);
        s.labeled_mask = Some(vec![true, false, true]);
        s.frames
            .push(PredicateFrame::new(1, "a.01").with_arg(3, "A1"));
        let c = Corpus::new(vec![s]);
        let text = write_conll_string(&c).unwrap();
        assert!(text.starts_with("# labeled_mask = 101\n"));
        assert_eq!(read_conll_str(&text).unwrap(), c);
    }

    #[test]
    fn opaque_columns_pass_through() {
        let text = "1\tdogs\tdog\tdog\tNNS\tNNS\tNum=Plur\t_\t2\t2\tSBJ\tSBJ\t_\t_\n\n";
        let c = read_conll_str(text).unwrap();
        let t = &c.sentences[0].tokens[0];
        assert_eq!(t.lemma.as_deref(), Some("dog"));
        assert_eq!(t.pos.as_deref(), Some("NNS"));
        assert_eq!(write_conll_string(&c).unwrap(), text);
    }
}
