//! CRF++-compatible feature templates.
//!
//! Each non-blank, non-comment line is one template. Lines starting with
//! `U` produce per-position features; lines starting with `B` produce
//! label-transition features. `%x[row,col]` picks the cell `col` of the
//! row at relative offset `row`; rows outside the sentence expand to the
//! sentinels `_B-1`, `_B-2`, ... before the start and `_B+1`, `_B+2`, ...
//! past the end.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemplateKind {
    /// Observation feature conjoined with the current label.
    Unigram,
    /// Label-pair feature over adjacent positions.
    Transition,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Piece {
    Literal(String),
    Atom { row: i32, col: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Template {
    id: String,
    kind: TemplateKind,
    pieces: Vec<Piece>,
}

impl Template {
    pub fn parse(line: &str) -> std::result::Result<Template, String> {
        let kind = match line.chars().next() {
            Some('U') => TemplateKind::Unigram,
            Some('B') => TemplateKind::Transition,
            _ => return Err(format!("template must start with 'U' or 'B': {line:?}")),
        };
        let mut pieces = Vec::new();
        let mut lit = String::new();
        let mut rest = line;
        while let Some(i) = rest.find('%') {
            lit.push_str(&rest[..i]);
            rest = &rest[i..];
            let Some(body) = rest.strip_prefix("%x[") else {
                lit.push('%');
                rest = &rest[1..];
                continue;
            };
            let close = body
                .find(']')
                .ok_or_else(|| format!("missing ']' in macro: {rest:?}"))?;
            let (row, col) = body[..close]
                .split_once(',')
                .ok_or_else(|| format!("macro needs row,col: {rest:?}"))?;
            let row: i32 = row
                .parse()
                .map_err(|_| format!("macro row is not an integer: {row:?}"))?;
            let col: usize = col
                .parse()
                .map_err(|_| format!("macro column is not a non-negative integer: {col:?}"))?;
            if !lit.is_empty() {
                pieces.push(Piece::Literal(std::mem::take(&mut lit)));
            }
            pieces.push(Piece::Atom { row, col });
            rest = &body[close + 1..];
        }
        lit.push_str(rest);
        if !lit.is_empty() {
            pieces.push(Piece::Literal(lit));
        }

        let id = match line.find(':') {
            Some(i) => line[..i].to_owned(),
            None => line[..line.find('%').unwrap_or(line.len())].to_owned(),
        };
        let tpl = Template { id, kind, pieces };
        match kind {
            TemplateKind::Unigram if tpl.atoms().next().is_none() => {
                Err(format!("unigram template without %x macro: {line:?}"))
            }
            TemplateKind::Transition if tpl.atoms().next().is_some() => Err(format!(
                "transition templates with macros are not supported: {line:?}"
            )),
            _ => Ok(tpl),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> TemplateKind {
        self.kind
    }

    /// `(row_offset, col)` of every macro, in order.
    pub fn atoms(&self) -> impl Iterator<Item = (i32, usize)> + '_ {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Atom { row, col } => Some((*row, *col)),
            Piece::Literal(_) => None,
        })
    }

    pub fn max_col(&self) -> Option<usize> {
        self.atoms().map(|(_, c)| c).max()
    }

    /// Appends the feature string at `pos` to `out`. Columns must have been
    /// validated against the grid width beforehand.
    pub fn expand_into(&self, grid: &TokenGrid, pos: usize, out: &mut String) {
        let n = grid.len() as i64;
        for p in &self.pieces {
            match p {
                Piece::Literal(s) => out.push_str(s),
                Piece::Atom { row, col } => {
                    let r = pos as i64 + *row as i64;
                    if r < 0 {
                        let _ = write!(out, "_B{r}");
                    } else if r >= n {
                        let _ = write!(out, "_B+{}", r - n + 1);
                    } else {
                        out.push_str(grid.cell(r as usize, *col));
                    }
                }
            }
        }
    }

    pub fn expand(&self, grid: &TokenGrid, pos: usize) -> Result<String> {
        if pos >= grid.len() {
            return Err(Error::invalid(format!(
                "position {pos} out of range for grid of {} rows",
                grid.len()
            )));
        }
        if let Some(c) = self.max_col() {
            if c >= grid.width() {
                return Err(col_error(self, grid.width()));
            }
        }
        let mut s = String::new();
        self.expand_into(grid, pos, &mut s);
        Ok(s)
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.pieces {
            match p {
                Piece::Literal(s) => f.write_str(s)?,
                Piece::Atom { row, col } => write!(f, "%x[{row},{col}]")?,
            }
        }
        Ok(())
    }
}

fn col_error(t: &Template, width: usize) -> Error {
    Error::Config(format!(
        "template {} references column {} but the data has {} observation column(s)",
        t.id,
        t.max_col().unwrap_or(0),
        width
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub name: String,
    templates: Vec<Template>,
}

impl TemplateSet {
    pub fn new(name: impl Into<String>, templates: Vec<Template>) -> Result<Self> {
        let mut seen = HashSet::new();
        for t in &templates {
            if !seen.insert(t.id.clone()) {
                return Err(Error::Config(format!("duplicate template id {}", t.id)));
            }
        }
        Ok(TemplateSet {
            name: name.into(),
            templates,
        })
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn unigrams(&self) -> impl Iterator<Item = &Template> {
        self.templates
            .iter()
            .filter(|t| t.kind == TemplateKind::Unigram)
    }

    pub fn transitions(&self) -> impl Iterator<Item = &Template> {
        self.templates
            .iter()
            .filter(|t| t.kind == TemplateKind::Transition)
    }

    /// Checks every referenced column against `width` observation columns.
    pub fn validate_columns(&self, width: usize) -> Result<()> {
        for t in &self.templates {
            if t.max_col().is_some_and(|c| c >= width) {
                return Err(col_error(t, width));
            }
        }
        Ok(())
    }

    /// Largest referenced column, if any template has a macro.
    pub fn max_col(&self) -> Option<usize> {
        self.templates.iter().filter_map(Template::max_col).max()
    }

    /// Template file text, one template per line.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for t in &self.templates {
            let _ = writeln!(s, "{t}");
        }
        s
    }
}

pub fn parse_templates(text: &str) -> Result<TemplateSet> {
    parse_named_templates("custom", text)
}

pub fn parse_named_templates(name: &str, text: &str) -> Result<TemplateSet> {
    let mut templates = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let t = Template::parse(line).map_err(|msg| Error::Parse { line: i + 1, msg })?;
        if !seen.insert(t.id.clone()) {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("duplicate template id {}", t.id),
            });
        }
        templates.push(t);
    }
    TemplateSet::new(name, templates)
}

/// Rows of observation cells (and optionally a trailing gold column).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenGrid {
    width: usize,
    cells: Vec<String>,
}

impl TokenGrid {
    pub fn new(rows: Vec<Vec<String>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 {
            return Err(Error::invalid(
                "a token grid needs at least one row and one column",
            ));
        }
        let mut cells = Vec::with_capacity(rows.len() * width);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != width {
                return Err(Error::invalid(format!(
                    "row {i} has {} columns, expected {width}",
                    r.len()
                )));
            }
            cells.extend(r);
        }
        Ok(TokenGrid { width, cells })
    }

    /// Builds a grid from equal-length columns.
    pub fn from_columns(columns: Vec<Vec<String>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.is_empty() || n == 0 {
            return Err(Error::invalid(
                "a token grid needs at least one row and one column",
            ));
        }
        if let Some(c) = columns.iter().position(|c| c.len() != n) {
            return Err(Error::invalid(format!(
                "column {c} has {} rows, expected {n}",
                columns[c].len()
            )));
        }
        let width = columns.len();
        let mut iters: Vec<_> = columns.into_iter().map(Vec::into_iter).collect();
        let mut cells = Vec::with_capacity(n * width);
        for _ in 0..n {
            for it in iters.iter_mut() {
                cells.push(it.next().expect("column lengths checked"));
            }
        }
        Ok(TokenGrid { width, cells })
    }

    pub fn len(&self) -> usize {
        self.cells.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn cell(&self, row: usize, col: usize) -> &str {
        &self.cells[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[String] {
        &self.cells[row * self.width..(row + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[String]> {
        self.cells.chunks(self.width)
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = &str> {
        self.rows().map(move |r| r[col].as_str())
    }

    /// The grid without its last column; `None` if it has only one.
    pub fn without_last_column(&self) -> Option<TokenGrid> {
        if self.width < 2 {
            return None;
        }
        let w = self.width - 1;
        let cells = self.rows().flat_map(|r| r[..w].iter().cloned()).collect();
        Some(TokenGrid { width: w, cells })
    }
}

pub const PRESET_NAMES: [&str; 5] = ["exp1", "exp2", "exp3", "exp4", "exp5"];

pub const DEFAULT_PRESET: &str = "exp4";

// Column 0 holds the character (C), column 1 the MMSEG tag (T).
const CHARACTER_LEVEL: &str = "\
# character unigrams: C-1, C0, C1
U00:%x[-1,0]
U01:%x[0,0]
U02:%x[1,0]
# character bigrams: C-1C0, C0C1
U03:%x[-1,0]/%x[0,0]
U04:%x[0,0]/%x[1,0]
# character jump: C-1C1
U05:%x[-1,0]/%x[1,0]
";

const TAG_LEVEL: &str = "\
# tag unigrams: T-1, T0, T1
U06:%x[-1,1]
U07:%x[0,1]
U08:%x[1,1]
# tag bigrams: T-1T0, T0T1
U09:%x[-1,1]/%x[0,1]
U10:%x[0,1]/%x[1,1]
# tag jump: T-1T1
U11:%x[-1,1]/%x[1,1]
";

// Reconstructed: character pairs around the focus joined with the current
// tag, plus the full three-character window with the current tag.
const CHARACTER_TAG_TRIGRAMS: &str = "\
U12:%x[-1,0]/%x[0,0]/%x[0,1]
U13:%x[0,0]/%x[1,0]/%x[0,1]
U14:%x[-1,0]/%x[1,0]/%x[0,1]
U15:%x[-1,0]/%x[0,0]/%x[1,0]/%x[0,1]
";

const CHARACTER_TAG_BIGRAMS: &str = "\
# character-tag bigrams: C-1T0, C0T0, C1T0
U12:%x[-1,0]/%x[0,1]
U13:%x[0,0]/%x[0,1]
U14:%x[1,0]/%x[0,1]
";

// Reconstructed: two- and three-character windows left and right of the
// focus, each joined with the current tag.
const WIDE_WINDOWS: &str = "\
U15:%x[-2,0]/%x[0,1]
U16:%x[2,0]/%x[0,1]
U17:%x[-2,0]/%x[-1,0]/%x[0,1]
U18:%x[1,0]/%x[2,0]/%x[0,1]
U19:%x[-3,0]/%x[-2,0]/%x[-1,0]/%x[0,1]
U20:%x[1,0]/%x[2,0]/%x[3,0]/%x[0,1]
";

const TRANSITION: &str = "B\n";

/// Built-in template sets for the five template experiments.
///
/// `exp1` uses characters only, `exp2` adds the MMSEG tag column, `exp3`
/// adds character-character-tag trigrams, `exp4` (the default) replaces
/// them with character-tag bigrams and `exp5` adds wider character
/// windows. The `exp3` and `exp5` additions are reconstructions.
pub fn preset(name: &str) -> Result<TemplateSet> {
    let parts: &[&str] = match name {
        "exp1" => &[CHARACTER_LEVEL],
        "exp2" => &[CHARACTER_LEVEL, TAG_LEVEL],
        "exp3" => &[CHARACTER_LEVEL, TAG_LEVEL, CHARACTER_TAG_TRIGRAMS],
        "exp4" => &[CHARACTER_LEVEL, TAG_LEVEL, CHARACTER_TAG_BIGRAMS],
        "exp5" => &[
            CHARACTER_LEVEL,
            TAG_LEVEL,
            CHARACTER_TAG_BIGRAMS,
            WIDE_WINDOWS,
        ],
        _ => {
            return Err(Error::Config(format!(
                "unknown preset {name:?}; valid presets: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    let mut text = parts.concat();
    text.push_str(TRANSITION);
    parse_named_templates(name, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: &[[&str; 2]]) -> TokenGrid {
        TokenGrid::new(
            rows.iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn parse_basic() {
        let ts = parse_templates("U00:%x[-1,0]\n").unwrap();
        assert_eq!(ts.templates().len(), 1);
        let t = &ts.templates()[0];
        assert_eq!(t.id(), "U00");
        assert_eq!(t.kind(), TemplateKind::Unigram);
        assert_eq!(t.atoms().collect::<Vec<_>>(), vec![(-1, 0)]);

        let ts = parse_templates("B\n").unwrap();
        assert_eq!(ts.templates()[0].kind(), TemplateKind::Transition);
        assert_eq!(ts.templates()[0].atoms().count(), 0);

        let ts = parse_templates("# c\n\nU01:%x[0,0]/%x[1,1]\r\nB\n").unwrap();
        assert_eq!(ts.templates().len(), 2);
        assert_eq!(
            ts.templates()[0].atoms().collect::<Vec<_>>(),
            vec![(0, 0), (1, 1)]
        );
    }

    #[test]
    fn parse_errors() {
        for (text, line) in [
            ("U00:%x[-1,0\n", 1),
            ("U00:%x[0,0]\nU01:%x[a,0]\n", 2),
            ("U00:%x[0,-1]\n", 1),
            ("U00:%x[0]\n", 1),
            ("U00:%x[0,0]\nU00:%x[1,0]\n", 2),
            ("X00:%x[0,0]\n", 1),
            ("U00:\n", 1),
            ("B00:%x[0,0]\n", 1),
        ] {
            match parse_templates(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn expansion() {
        let g = grid(&[["a", "B"], ["b", "E"]]);
        let t = |s: &str| Template::parse(s).unwrap();
        assert_eq!(t("U02:%x[0,0]").expand(&g, 0).unwrap(), "U02:a");
        assert_eq!(t("U10:%x[-1,0]/%x[0,0]").expand(&g, 1).unwrap(), "U10:a/b");
        assert_eq!(t("U03:%x[1,1]").expand(&g, 1).unwrap(), "U03:_B+1");
        assert_eq!(t("U04:%x[-2,0]").expand(&g, 0).unwrap(), "U04:_B-2");
        assert_eq!(t("U05:%x[2,0]").expand(&g, 1).unwrap(), "U05:_B+2");
        assert_eq!(t("B").expand(&g, 0).unwrap(), "B");
        assert!(matches!(
            t("U06:%x[0,2]").expand(&g, 0),
            Err(Error::Config(_))
        ));
        assert!(t("U02:%x[0,0]").expand(&g, 2).is_err());
    }

    #[test]
    fn literal_percent_is_kept() {
        let t = Template::parse("U00:100%/%x[0,0]").unwrap();
        let g = grid(&[["a", "S"]]);
        assert_eq!(t.expand(&g, 0).unwrap(), "U00:100%/a");
        assert_eq!(t.to_string(), "U00:100%/%x[0,0]");
    }

    #[test]
    fn column_validation() {
        let ts = preset("exp4").unwrap();
        assert!(ts.validate_columns(2).is_ok());
        assert!(matches!(ts.validate_columns(1), Err(Error::Config(_))));
        assert!(preset("exp1").unwrap().validate_columns(1).is_ok());
    }

    #[test]
    fn presets() {
        let counts = |n: &str| {
            let p = preset(n).unwrap();
            (p.unigrams().count(), p.transitions().count())
        };
        assert_eq!(counts("exp1"), (6, 1));
        assert_eq!(counts("exp2"), (12, 1));
        assert_eq!(counts("exp3"), (16, 1));
        assert_eq!(counts("exp4"), (15, 1));
        assert_eq!(counts("exp5"), (21, 1));
        match preset("exp9") {
            Err(Error::Config(msg)) => assert!(msg.contains("exp1, exp2, exp3, exp4, exp5")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exp4_matches_feature_table() {
        // (level, atoms) for every row of the feature table.
        let expected: Vec<Vec<(i32, usize)>> = vec![
            vec![(-1, 0)],
            vec![(0, 0)],
            vec![(1, 0)],
            vec![(-1, 0), (0, 0)],
            vec![(0, 0), (1, 0)],
            vec![(-1, 0), (1, 0)],
            vec![(-1, 1)],
            vec![(0, 1)],
            vec![(1, 1)],
            vec![(-1, 1), (0, 1)],
            vec![(0, 1), (1, 1)],
            vec![(-1, 1), (1, 1)],
            vec![(-1, 0), (0, 1)],
            vec![(0, 0), (0, 1)],
            vec![(1, 0), (0, 1)],
        ];
        let p = preset("exp4").unwrap();
        let got: Vec<Vec<_>> = p.unigrams().map(|t| t.atoms().collect()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn grid_shapes() {
        assert!(TokenGrid::new(vec![]).is_err());
        assert!(TokenGrid::new(vec![vec![]]).is_err());
        assert!(TokenGrid::new(vec![vec!["a".into()], vec!["b".into(), "c".into()]]).is_err());
        let g = TokenGrid::from_columns(vec![
            vec!["a".into(), "b".into()],
            vec!["B".into(), "E".into()],
        ])
        .unwrap();
        assert_eq!(g, grid(&[["a", "B"], ["b", "E"]]));
        let g1 = g.without_last_column().unwrap();
        assert_eq!(g1.width(), 1);
        assert_eq!(g1.column(0).collect::<Vec<_>>(), vec!["a", "b"]);
        assert!(g1.without_last_column().is_none());
    }
}
