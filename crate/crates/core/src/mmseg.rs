//! Complex MMSEG segmentation.
//!
//! At every position all chunks of up to three words are enumerated, where
//! a word is either a lexicon match or the single character at that
//! position. A four-rule cascade picks one chunk and only its first word
//! is committed:
//!
//! 1. largest total length
//! 2. largest average word length
//! 3. smallest variance of word lengths
//! 4. largest sum of morphemic freedom over single-character words
//!
//! Remaining ties go to the chunk with the longest first word, then to the
//! earliest chunk in enumeration order. Rule 4 is inert without a
//! [`FreedomTable`].

use std::collections::HashMap;
use std::path::Path;

use crate::corpus::{words_to_tags, Segmentation, Sentence, TagSeq};
use crate::error::{Error, Result};
use crate::fsutil;
use crate::lexicon::Lexicon;

/// Per-character morphemic freedom scores (log-frequency scale).
#[derive(Debug, Clone, Default)]
pub struct FreedomTable {
    scores: HashMap<char, f64>,
}

impl FreedomTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, c: char, score: f64) -> Result<()> {
        if !score.is_finite() || score < 0.0 {
            return Err(Error::invalid(format!(
                "freedom score for {c:?} must be finite and non-negative, got {score}"
            )));
        }
        self.scores.insert(c, score);
        Ok(())
    }

    /// Score of `c`; characters not in the table score 0.
    pub fn score(&self, c: char) -> f64 {
        self.scores.get(&c).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Parses `char<TAB>score` lines. Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = FreedomTable::new();
        for (i, line) in text.lines().enumerate() {
            table.parse_line(i + 1, line)?;
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut table = FreedomTable::new();
        for (i, line) in fsutil::read_lines(path.as_ref())?.iter().enumerate() {
            table.parse_line(i + 1, line)?;
        }
        Ok(table)
    }

    fn parse_line(&mut self, line_no: usize, line: &str) -> Result<()> {
        if line.trim().is_empty() || line.starts_with('#') {
            return Ok(());
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let (ch, score) = line
            .split_once('\t')
            .ok_or_else(|| err("expected char<TAB>score".into()))?;
        let mut cs = ch.chars();
        let c = match (cs.next(), cs.next()) {
            (Some(c), None) => c,
            _ => return Err(err(format!("expected a single character, got {ch:?}"))),
        };
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|_| err(format!("invalid score {score:?}")))?;
        self.insert(c, score).map_err(|e| err(e.to_string()))
    }
}

/// One MMSEG candidate: up to three consecutive words starting at a
/// position.
#[derive(Debug, Clone, PartialEq)]
pub struct Chunk {
    word_lengths: Vec<usize>,
    text: Vec<char>,
}

impl Chunk {
    /// Builds a chunk from the characters it covers and its word lengths.
    pub fn new(text: &[char], word_lengths: Vec<usize>) -> Result<Self> {
        if word_lengths.is_empty() || word_lengths.len() > 3 || word_lengths.contains(&0) {
            return Err(Error::invalid(format!(
                "a chunk has 1-3 non-empty words, got {word_lengths:?}"
            )));
        }
        let total: usize = word_lengths.iter().sum();
        if total > text.len() {
            return Err(Error::invalid("chunk longer than its text"));
        }
        Ok(Chunk {
            text: text[..total].to_vec(),
            word_lengths,
        })
    }

    pub fn word_lengths(&self) -> &[usize] {
        &self.word_lengths
    }

    pub fn total_len(&self) -> usize {
        self.text.len()
    }

    pub fn avg_len(&self) -> f64 {
        self.total_len() as f64 / self.word_lengths.len() as f64
    }

    /// Population variance of the word lengths.
    pub fn variance(&self) -> f64 {
        let avg = self.avg_len();
        self.word_lengths
            .iter()
            .map(|&l| (l as f64 - avg).powi(2))
            .sum::<f64>()
            / self.word_lengths.len() as f64
    }

    /// Sum of freedom scores of the chunk's single-character words.
    pub fn freedom(&self, table: Option<&FreedomTable>) -> f64 {
        let Some(table) = table else { return 0.0 };
        let mut start = 0;
        let mut sum = 0.0;
        for &l in &self.word_lengths {
            if l == 1 {
                sum += table.score(self.text[start]);
            }
            start += l;
        }
        sum
    }

    // n * sum(l^2) - total^2, i.e. n^2 * variance, kept integral so that
    // comparisons are exact.
    fn scaled_variance(&self) -> i64 {
        let n = self.word_lengths.len() as i64;
        let sq: i64 = self.word_lengths.iter().map(|&l| (l * l) as i64).sum();
        let t = self.total_len() as i64;
        n * sq - t * t
    }
}

fn candidate_words(lex: &Lexicon, rest: &[char]) -> Vec<usize> {
    let mut lens = lex.prefix_lengths(rest);
    if lens.first() != Some(&1) {
        lens.insert(0, 1);
    }
    lens
}

/// Enumerates all chunks of one to three words starting at `pos`, in
/// depth-first order (shorter words first, each chunk before its
/// extensions).
pub fn gen_chunks(lex: &Lexicon, sent: &Sentence, pos: usize) -> Result<Vec<Chunk>> {
    let chars = sent.chars();
    if pos >= chars.len() {
        return Err(Error::invalid(format!(
            "position {pos} out of range for sentence of length {}",
            chars.len()
        )));
    }
    let text = &chars[pos..];
    let mut out = Vec::new();
    for l1 in candidate_words(lex, text) {
        out.push(Chunk::new(text, vec![l1])?);
        if l1 == text.len() {
            continue;
        }
        for l2 in candidate_words(lex, &text[l1..]) {
            out.push(Chunk::new(text, vec![l1, l2])?);
            if l1 + l2 == text.len() {
                continue;
            }
            for l3 in candidate_words(lex, &text[l1 + l2..]) {
                out.push(Chunk::new(text, vec![l1, l2, l3])?);
            }
        }
    }
    Ok(out)
}

fn keep_best<T: Copy, F>(
    cands: Vec<usize>,
    key: F,
    better: fn(T, T) -> std::cmp::Ordering,
) -> Vec<usize>
where
    F: Fn(usize) -> T,
{
    use std::cmp::Ordering;
    let mut best: Vec<usize> = Vec::with_capacity(cands.len());
    let mut best_key: Option<T> = None;
    for i in cands {
        let k = key(i);
        match best_key.map(|b| better(k, b)) {
            None | Some(Ordering::Greater) => {
                best.clear();
                best.push(i);
                best_key = Some(k);
            }
            Some(Ordering::Equal) => best.push(i),
            Some(Ordering::Less) => {}
        }
    }
    best
}

/// Index of the chunk chosen by the rule cascade.
pub fn pick_chunk_index(chunks: &[Chunk], freedom: Option<&FreedomTable>) -> Result<usize> {
    if chunks.is_empty() {
        return Err(Error::invalid("no chunks to choose from"));
    }
    let all: Vec<usize> = (0..chunks.len()).collect();
    let c = |i: usize| &chunks[i];
    // rule 1: total length
    let s = keep_best(all, |i| c(i).total_len(), |a, b| a.cmp(&b));
    // rule 2: average length, compared as total/n by cross-multiplication
    let s = keep_best(
        s,
        |i| (c(i).total_len(), c(i).word_lengths.len()),
        |(ta, na), (tb, nb)| (ta * nb).cmp(&(tb * na)),
    );
    // rule 3: variance, smaller is better
    let s = keep_best(
        s,
        |i| (c(i).scaled_variance(), c(i).word_lengths.len() as i64),
        |(va, na), (vb, nb)| (vb * na * na).cmp(&(va * nb * nb)),
    );
    // rule 4: freedom of single-character words
    let s = if freedom.is_some() {
        keep_best(
            s,
            |i| c(i).freedom(freedom),
            |a, b| a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal),
        )
    } else {
        s
    };
    // longest first word, then enumeration order
    let s = keep_best(s, |i| c(i).word_lengths[0], |a, b| a.cmp(&b));
    Ok(s[0])
}

pub fn pick_chunk<'a>(chunks: &'a [Chunk], freedom: Option<&FreedomTable>) -> Result<&'a Chunk> {
    pick_chunk_index(chunks, freedom).map(|i| &chunks[i])
}

/// Lengths of the words MMSEG commits for `sent`.
pub fn mmseg_word_lengths(
    lex: &Lexicon,
    sent: &Sentence,
    freedom: Option<&FreedomTable>,
) -> Result<Vec<usize>> {
    if sent.is_empty() {
        return Err(Error::invalid("cannot segment an empty sentence"));
    }
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < sent.len() {
        let chunks = gen_chunks(lex, sent, pos)?;
        let first = pick_chunk(&chunks, freedom)?.word_lengths[0];
        out.push(first);
        pos += first;
    }
    Ok(out)
}

pub fn mmseg_segment(
    lex: &Lexicon,
    sent: &Sentence,
    freedom: Option<&FreedomTable>,
) -> Result<Segmentation> {
    let lens = mmseg_word_lengths(lex, sent, freedom)?;
    let mut words = Vec::with_capacity(lens.len());
    let mut pos = 0;
    for l in lens {
        words.push(sent.chars()[pos..pos + l].iter().collect());
        pos += l;
    }
    Ok(Segmentation { words })
}

pub fn mmseg_tags(
    lex: &Lexicon,
    sent: &Sentence,
    freedom: Option<&FreedomTable>,
) -> Result<TagSeq> {
    words_to_tags(&mmseg_segment(lex, sent, freedom)?)
}
