//! Sentences, word segmentations, BMES tag sequences and Bakeoff-style
//! corpus files.
//!
//! The unit of segmentation is the Unicode scalar value (`char`). A corpus
//! file holds one sentence per line with words separated by runs of
//! whitespace; blank lines separate sentences and are never sentences.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fsutil;

/// Word-boundary tag of one character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    /// First character of a multi-character word.
    B,
    /// Inner character of a word of three or more characters.
    M,
    /// Last character of a multi-character word.
    E,
    /// Single-character word.
    S,
}

impl Tag {
    pub const ALL: [Tag; 4] = [Tag::B, Tag::M, Tag::E, Tag::S];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Tag> {
        Tag::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::B => "B",
            Tag::M => "M",
            Tag::E => "E",
            Tag::S => "S",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" => Ok(Tag::B),
            "M" => Ok(Tag::M),
            "E" => Ok(Tag::E),
            "S" => Ok(Tag::S),
            _ => Err(Error::invalid(format!("not a BMES tag: {s:?}"))),
        }
    }
}

/// Per-character tags for one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TagSeq(pub Vec<Tag>);

impl TagSeq {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Tag] {
        &self.0
    }

    /// Whether the sequence belongs to the BMES regular language: `B` and
    /// `M` must be followed by `M` or `E`, `E` and `S` by `B`, `S` or the
    /// end, and the first tag is `B` or `S`.
    pub fn is_well_formed(&self) -> bool {
        let mut open = false;
        for &t in &self.0 {
            open = match (open, t) {
                (false, Tag::B) => true,
                (false, Tag::S) => false,
                (true, Tag::M) => true,
                (true, Tag::E) => false,
                _ => return false,
            };
        }
        !open
    }
}

impl fmt::Display for TagSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.0 {
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// A raw sentence as a codepoint sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    chars: Vec<char>,
}

impl Sentence {
    /// Builds a sentence from text. Whitespace is not allowed inside a
    /// sentence.
    pub fn new(text: &str) -> Result<Self> {
        if text.chars().any(char::is_whitespace) {
            return Err(Error::invalid(format!(
                "sentence contains whitespace: {text:?}"
            )));
        }
        Ok(Sentence {
            chars: text.chars().collect(),
        })
    }

    pub fn from_chars(chars: Vec<char>) -> Self {
        Sentence { chars }
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.chars {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A sentence split into words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Segmentation {
    pub words: Vec<String>,
}

impl Segmentation {
    pub fn new<S: Into<String>>(words: impl IntoIterator<Item = S>) -> Self {
        Segmentation {
            words: words.into_iter().map(Into::into).collect(),
        }
    }

    /// The raw sentence text: all words concatenated.
    pub fn text(&self) -> String {
        self.words.concat()
    }

    pub fn sentence(&self) -> Sentence {
        Sentence::from_chars(self.words.iter().flat_map(|w| w.chars()).collect())
    }

    pub fn char_len(&self) -> usize {
        self.words.iter().map(|w| w.chars().count()).sum()
    }
}

impl fmt::Display for Segmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.words.join(" "))
    }
}

/// Converts words to BMES tags: a one-character word is `S`, longer words
/// are `B`, `M`..., `E`.
pub fn words_to_tags(seg: &Segmentation) -> Result<TagSeq> {
    let mut tags = Vec::with_capacity(seg.words.len() * 2);
    for (i, w) in seg.words.iter().enumerate() {
        let n = w.chars().count();
        match n {
            0 => return Err(Error::invalid(format!("word {i} is empty"))),
            1 => tags.push(Tag::S),
            _ => {
                tags.push(Tag::B);
                tags.extend(std::iter::repeat_n(Tag::M, n - 2));
                tags.push(Tag::E);
            }
        }
    }
    Ok(TagSeq(tags))
}

/// Converts a tag sequence back to words.
///
/// Ill-formed sequences are repaired while scanning left to right: a tag
/// that cannot extend the open word closes it before the current
/// character, and the character starts a new unit. Every character ends
/// up in exactly one word.
pub fn tags_to_words(sent: &Sentence, tags: &TagSeq) -> Result<Segmentation> {
    if sent.len() != tags.len() {
        return Err(Error::invalid(format!(
            "sentence has {} characters but {} tags",
            sent.len(),
            tags.len()
        )));
    }
    let mut words = Vec::new();
    let mut cur = String::new();
    for (&c, &t) in sent.chars().iter().zip(tags.as_slice()) {
        let open = !cur.is_empty();
        if open && matches!(t, Tag::M | Tag::E) {
            cur.push(c);
            if t == Tag::E {
                words.push(std::mem::take(&mut cur));
            }
            continue;
        }
        if open {
            words.push(std::mem::take(&mut cur));
        }
        cur.push(c);
        if matches!(t, Tag::S | Tag::E) {
            words.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    Ok(Segmentation { words })
}

/// Parses one corpus line. Returns `None` for blank lines.
pub fn parse_segmented_line(line: &str) -> Option<Segmentation> {
    let words: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
    if words.is_empty() {
        None
    } else {
        Some(Segmentation { words })
    }
}

pub fn read_segmented_corpus(path: impl AsRef<Path>) -> Result<Vec<Segmentation>> {
    let lines = fsutil::read_lines(path.as_ref())?;
    Ok(lines
        .iter()
        .filter_map(|l| parse_segmented_line(l))
        .collect())
}

pub fn write_segmented_corpus(segs: &[Segmentation], path: impl AsRef<Path>) -> Result<()> {
    fsutil::write_atomic(path.as_ref(), |w| write_segmented(segs, w))
}

pub(crate) fn write_segmented(segs: &[Segmentation], w: &mut dyn Write) -> std::io::Result<()> {
    for seg in segs {
        writeln!(w, "{seg}")?;
    }
    Ok(())
}
