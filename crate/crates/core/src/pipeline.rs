//! The joint method: MMSEG tags become an observation column for the CRF.
//!
//! Training grids have three columns: the character, the MMSEG tag of the
//! raw sentence, and the gold tag. Decoding grids have the first two.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{tags_to_words, words_to_tags, Segmentation, Sentence};
use crate::crf::CrfModel;
use crate::error::{Error, Result};
use crate::fsutil;
use crate::lexicon::Lexicon;
use crate::mmseg::{mmseg_tags, FreedomTable};
use crate::template::TokenGrid;

/// Character and MMSEG-tag columns for a raw sentence.
pub fn observation_grid(
    lex: &Lexicon,
    sent: &Sentence,
    freedom: Option<&FreedomTable>,
) -> Result<TokenGrid> {
    let tags = mmseg_tags(lex, sent, freedom)?;
    let chars = sent.chars().iter().map(|c| c.to_string()).collect();
    let tags = tags
        .as_slice()
        .iter()
        .map(|t| t.as_str().to_owned())
        .collect();
    TokenGrid::from_columns(vec![chars, tags])
}

/// Builds `(char, mmseg tag, gold tag)` grids. MMSEG runs on the raw
/// sentence, never on the gold words.
pub fn make_training_grids(
    corpus: &[Segmentation],
    lex: &Lexicon,
    freedom: Option<&FreedomTable>,
) -> Result<Vec<TokenGrid>> {
    if corpus.is_empty() {
        return Err(Error::invalid("empty corpus"));
    }
    corpus
        .par_iter()
        .enumerate()
        .map(|(i, seg)| {
            let gold =
                words_to_tags(seg).map_err(|e| Error::invalid(format!("sentence {i}: {e}")))?;
            let sent = seg.sentence();
            if sent.is_empty() {
                return Err(Error::invalid(format!("sentence {i} is empty")));
            }
            let obs = observation_grid(lex, &sent, freedom)?;
            let rows = obs
                .rows()
                .zip(gold.as_slice())
                .map(|(r, t)| {
                    let mut r = r.to_vec();
                    r.push(t.as_str().to_owned());
                    r
                })
                .collect();
            TokenGrid::new(rows)
        })
        .collect()
}

/// Every word of the corpus as a lexicon.
pub fn vocabulary(corpus: &[Segmentation]) -> Lexicon {
    Lexicon::from_words(corpus.iter().flat_map(|s| s.words.iter()))
}

/// Training grids whose MMSEG column never sees a sentence's own words.
///
/// Sentence `i` belongs to fold `i % folds`; its MMSEG tags are computed
/// with `base` plus the vocabulary of the other folds. Decoding should then
/// use `base` plus the full [`vocabulary`].
pub fn make_jackknife_training_grids(
    corpus: &[Segmentation],
    base: &Lexicon,
    folds: usize,
    freedom: Option<&FreedomTable>,
) -> Result<Vec<TokenGrid>> {
    if folds < 2 {
        return Err(Error::Config(format!(
            "jackknife needs at least 2 folds, got {folds}"
        )));
    }
    if corpus.is_empty() {
        return Err(Error::invalid("empty corpus"));
    }
    let mut grids: Vec<Option<TokenGrid>> = vec![None; corpus.len()];
    for f in 0..folds {
        let mut lex = base.clone();
        lex.merge(&Lexicon::from_words(
            corpus
                .iter()
                .enumerate()
                .filter(|(i, _)| i % folds != f)
                .flat_map(|(_, s)| s.words.iter()),
        ));
        let members: Vec<usize> = (f..corpus.len()).step_by(folds).collect();
        if members.is_empty() {
            continue;
        }
        let part: Vec<Segmentation> = members.iter().map(|&i| corpus[i].clone()).collect();
        for (i, g) in members
            .into_iter()
            .zip(make_training_grids(&part, &lex, freedom)?)
        {
            grids[i] = Some(g);
        }
    }
    Ok(grids.into_iter().flatten().collect())
}

/// Segments one raw line. Whitespace runs are kept as hard word
/// boundaries and dropped from the output; an empty line gives an empty
/// segmentation.
pub fn segment_line(
    model: &CrfModel,
    lex: &Lexicon,
    line: &str,
    freedom: Option<&FreedomTable>,
) -> Result<Segmentation> {
    let mut words = Vec::new();
    for fragment in line.split_whitespace() {
        let sent = Sentence::new(fragment)?;
        let grid = observation_grid(lex, &sent, freedom)?;
        let tags = model.viterbi(&grid)?;
        words.extend(tags_to_words(&sent, &tags)?.words);
    }
    Ok(Segmentation { words })
}

/// Segments every line; output order matches input order.
pub fn segment_text<S: AsRef<str> + Sync>(
    model: &CrfModel,
    lex: &Lexicon,
    raw_lines: &[S],
    freedom: Option<&FreedomTable>,
) -> Result<Vec<Segmentation>> {
    if model.meta().columns != 2 {
        return Err(Error::invalid(format!(
            "model expects {} observation column(s); segmentation provides 2 (character, MMSEG tag)",
            model.meta().columns
        )));
    }
    raw_lines
        .par_iter()
        .map(|l| segment_line(model, lex, l.as_ref(), freedom))
        .collect()
}

/// CRF++ training file: one row per line, columns separated by a space,
/// a blank line after every sentence.
pub fn write_training_file(grids: &[TokenGrid], path: impl AsRef<Path>) -> Result<()> {
    for (i, g) in grids.iter().enumerate() {
        for row in g.rows() {
            if let Some(c) = row
                .iter()
                .find(|c| c.is_empty() || c.chars().any(char::is_whitespace))
            {
                return Err(Error::invalid(format!(
                    "sentence {i}: cell {c:?} cannot be written to a training file"
                )));
            }
        }
    }
    fsutil::write_atomic(path.as_ref(), |w| write_grids(grids, w))
}

pub(crate) fn write_grids(grids: &[TokenGrid], w: &mut dyn Write) -> std::io::Result<()> {
    for g in grids {
        for row in g.rows() {
            writeln!(w, "{}", row.join(" "))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn parse_training_text(lines: &[String]) -> Result<Vec<TokenGrid>> {
    let mut grids = Vec::new();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut width = None;
    for (i, line) in lines.iter().enumerate() {
        let cells: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        if cells.is_empty() {
            if !rows.is_empty() {
                grids.push(TokenGrid::new(std::mem::take(&mut rows))?);
            }
            continue;
        }
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {w} columns, found {}", cells.len()),
                })
            }
            _ => {}
        }
        rows.push(cells);
    }
    if !rows.is_empty() {
        grids.push(TokenGrid::new(rows)?);
    }
    Ok(grids)
}

pub fn read_training_file(path: impl AsRef<Path>) -> Result<Vec<TokenGrid>> {
    parse_training_text(&fsutil::read_lines(path.as_ref())?)
}
