//! Word-level precision, recall and F-score.
//!
//! A predicted word is correct when its codepoint span `[start, end)`
//! matches a gold word span on the same line, so repeated words are
//! counted by position.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::corpus::Segmentation;
use crate::error::{Error, Result};

/// Scores of one evaluation run. Serialized with the field names below.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub gold_words: usize,
    pub pred_words: usize,
    pub correct_words: usize,
    /// 1-based line numbers whose spans differ.
    pub per_line_mismatch: Vec<usize>,
}

/// Half-open codepoint intervals of the words, in order.
pub fn spans(seg: &Segmentation) -> Vec<(usize, usize)> {
    let mut start = 0;
    seg.words
        .iter()
        .map(|w| {
            let end = start + w.chars().count();
            let s = (start, end);
            start = end;
            s
        })
        .collect()
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_score(p: f64, r: f64) -> Result<f64> {
    for (name, v) in [("precision", p), ("recall", r)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!(
                "{name} must lie in [0, 1], got {v}"
            )));
        }
    }
    if p + r == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * p * r / (p + r))
}

fn ratio(num: usize, den: usize, empty: f64) -> f64 {
    if den == 0 {
        empty
    } else {
        num as f64 / den as f64
    }
}

pub fn score(gold: &[Segmentation], pred: &[Segmentation]) -> Result<EvalReport> {
    if gold.len() != pred.len() {
        return Err(Error::Alignment {
            line: gold.len().min(pred.len()) + 1,
            msg: format!(
                "gold has {} lines, prediction has {}",
                gold.len(),
                pred.len()
            ),
        });
    }
    let (mut n_gold, mut n_pred, mut correct) = (0, 0, 0);
    let mut mismatches = Vec::new();
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.text() != p.text() {
            return Err(Error::Alignment {
                line: i + 1,
                msg: "gold and predicted text differ".into(),
            });
        }
        let gs: HashSet<_> = spans(g).into_iter().collect();
        let ps = spans(p);
        let hit = ps.iter().filter(|s| gs.contains(s)).count();
        if hit != gs.len() || hit != ps.len() {
            mismatches.push(i + 1);
        }
        n_gold += gs.len();
        n_pred += ps.len();
        correct += hit;
    }
    // An empty corpus scored against itself is a perfect match.
    let both_empty = if n_gold == 0 && n_pred == 0 { 1.0 } else { 0.0 };
    let precision = ratio(correct, n_pred, both_empty);
    let recall = ratio(correct, n_gold, both_empty);
    Ok(EvalReport {
        precision,
        recall,
        f_score: f_score(precision, recall)?,
        gold_words: n_gold,
        pred_words: n_pred,
        correct_words: correct,
        per_line_mismatch: mismatches,
    })
}

/// A ratio as a percentage with two decimals, rounding half up.
pub fn percent(x: f64) -> String {
    format!("{:.2}", (x * 10_000.0).round() / 100.0)
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "P: {} R: {} F: {}",
            percent(self.precision),
            percent(self.recall),
            percent(self.f_score)
        )?;
        write!(
            f,
            "gold words: {} predicted words: {} correct words: {} mismatched lines: {}",
            self.gold_words,
            self.pred_words,
            self.correct_words,
            self.per_line_mismatch.len()
        )
    }
}
