//! Word lists backing MMSEG.
//!
//! A lexicon file is UTF-8 with one entry per line. The first
//! whitespace-delimited field is the word; trailing fields (frequencies,
//! POS tags in distributed dumps) are ignored. Blank lines and lines whose
//! first non-blank character is `#` are skipped.

use std::collections::HashMap;
use std::path::Path;

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::fsutil;

const ROOT: u32 = 0;

/// A prefix-searchable set of words.
#[derive(Debug, Clone)]
pub struct Lexicon {
    // (parent node, char) -> child node
    edges: HashMap<(u32, char), u32>,
    terminal: Vec<bool>,
    len: usize,
    max_word_len: usize,
    source_names: Vec<String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::empty()
    }
}

impl Lexicon {
    pub fn empty() -> Self {
        Lexicon {
            edges: HashMap::new(),
            terminal: vec![false],
            len: 0,
            max_word_len: 0,
            source_names: Vec::new(),
        }
    }

    pub fn from_words<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        let mut lex = Self::empty();
        for w in words {
            lex.insert(w.as_ref());
        }
        lex
    }

    /// Adds a word; the empty string is ignored.
    pub fn insert(&mut self, word: &str) {
        let mut node = ROOT;
        let mut n = 0;
        for c in word.chars() {
            n += 1;
            let next = self.terminal.len() as u32;
            node = *self.edges.entry((node, c)).or_insert_with(|| next);
            if node == next {
                self.terminal.push(false);
            }
        }
        if n == 0 || self.terminal[node as usize] {
            return;
        }
        self.terminal[node as usize] = true;
        self.len += 1;
        self.max_word_len = self.max_word_len.max(n);
    }

    /// Adds every word of `other` and appends its source names.
    pub fn merge(&mut self, other: &Lexicon) {
        for w in other.words() {
            self.insert(&w);
        }
        self.source_names.extend(other.source_names.iter().cloned());
    }

    pub fn contains(&self, word: &str) -> bool {
        let mut node = ROOT;
        for c in word.chars() {
            match self.edges.get(&(node, c)) {
                Some(&n) => node = n,
                None => return false,
            }
        }
        node != ROOT && self.terminal[node as usize]
    }

    /// Lengths `L`, ascending, such that `chars[..L]` is a word.
    pub fn prefix_lengths(&self, chars: &[char]) -> Vec<usize> {
        let mut out = Vec::new();
        let mut node = ROOT;
        for (i, c) in chars.iter().take(self.max_word_len).enumerate() {
            match self.edges.get(&(node, *c)) {
                Some(&n) => node = n,
                None => break,
            }
            if self.terminal[node as usize] {
                out.push(i + 1);
            }
        }
        out
    }

    /// Lengths of lexicon words starting at `pos` in `sent`, ascending.
    pub fn prefixes_of(&self, sent: &Sentence, pos: usize) -> Result<Vec<usize>> {
        if pos >= sent.len() {
            return Err(Error::invalid(format!(
                "position {pos} out of range for sentence of length {}",
                sent.len()
            )));
        }
        Ok(self.prefix_lengths(&sent.chars()[pos..]))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn max_word_len(&self) -> usize {
        self.max_word_len
    }

    pub fn source_names(&self) -> &[String] {
        &self.source_names
    }

    /// All words, sorted.
    pub fn words(&self) -> Vec<String> {
        let mut children: HashMap<u32, Vec<(char, u32)>> = HashMap::new();
        for (&(p, c), &n) in &self.edges {
            children.entry(p).or_default().push((c, n));
        }
        let mut out = Vec::with_capacity(self.len);
        let mut stack = vec![(ROOT, String::new())];
        while let Some((node, prefix)) = stack.pop() {
            if self.terminal[node as usize] {
                out.push(prefix.clone());
            }
            if let Some(kids) = children.get(&node) {
                for &(c, n) in kids {
                    let mut s = prefix.clone();
                    s.push(c);
                    stack.push((n, s));
                }
            }
        }
        out.sort();
        out
    }
}

/// Extracts the word from one lexicon line, or `None` for blank and
/// comment lines.
pub fn parse_lexicon_line(line: &str) -> Option<&str> {
    let t = line.trim_start();
    if t.starts_with('#') {
        return None;
    }
    t.split_whitespace().next()
}

/// Loads and merges lexicon files.
pub fn load_lexicon<P: AsRef<Path>>(paths: &[P]) -> Result<Lexicon> {
    let mut lex = Lexicon::empty();
    for p in paths {
        let p = p.as_ref();
        for line in fsutil::read_lines(p)? {
            if let Some(w) = parse_lexicon_line(&line) {
                lex.insert(w);
            }
        }
        lex.source_names.push(
            p.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
        );
    }
    if lex.is_empty() {
        return Err(Error::EmptyLexicon(lex.source_names.join(", ")));
    }
    Ok(lex)
}
