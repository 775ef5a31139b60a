//! Test-only oracles and fixtures. Nothing here calls the lattice, the
//! chunk generator or the rule cascade under test.

#![allow(dead_code)]

use std::collections::HashSet;
use std::path::PathBuf;

use jointseg::crf::CrfModel;
use jointseg::template::{TemplateKind, TokenGrid};
use rand::rngs::StdRng;
use rand::Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("data")
        .join(name)
}

pub fn grid(rows: &[Vec<&str>]) -> TokenGrid {
    TokenGrid::new(
        rows.iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect(),
    )
    .unwrap()
}

/// Every label sequence of length `t` over 4 labels, in lexicographic order.
pub fn all_paths(t: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..t {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..4).map(move |y| {
                    let mut q = p.clone();
                    q.push(y);
                    q
                })
            })
            .collect();
    }
    out
}

/// Path score computed straight from template expansion and the weight
/// vector.
pub fn brute_path_score(model: &CrfModel, obs: &TokenGrid, path: &[usize]) -> f64 {
    let w = model.weights();
    let mut s = 0.0;
    for (t, &y) in path.iter().enumerate() {
        for tpl in model.templates().templates() {
            match tpl.kind() {
                TemplateKind::Unigram => {
                    let f = tpl.expand(obs, t).unwrap();
                    if let Some(base) = model.index().get(&f) {
                        s += w[base as usize + y];
                    }
                }
                TemplateKind::Transition => {
                    if t > 0 {
                        let base = model
                            .index()
                            .transitions()
                            .iter()
                            .find(|(id, _)| id == tpl.id())
                            .unwrap()
                            .1;
                        s += w[base as usize + 4 * path[t - 1] + y];
                    }
                }
            }
        }
    }
    s
}

/// Exhaustive argmax; ties keep the lexicographically smallest path.
pub fn brute_argmax(model: &CrfModel, obs: &TokenGrid) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for p in all_paths(obs.len()) {
        let s = brute_path_score(model, obs, &p);
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, p));
        }
    }
    best.unwrap().1
}

pub fn brute_log_z(model: &CrfModel, obs: &TokenGrid) -> f64 {
    let scores: Vec<f64> = all_paths(obs.len())
        .iter()
        .map(|p| brute_path_score(model, obs, p))
        .collect();
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + scores.iter().map(|s| (s - m).exp()).sum::<f64>().ln()
}

/// Random observation grid with `cols` columns over small alphabets so
/// features repeat.
pub fn random_obs(rng: &mut StdRng, len: usize, cols: usize) -> Vec<Vec<String>> {
    (0..len)
        .map(|_| {
            (0..cols)
                .map(|c| {
                    if c == 0 {
                        ["a", "b", "c", "d", "e"][rng.gen_range(0..5)].to_string()
                    } else {
                        ["B", "M", "E", "S"][rng.gen_range(0..4)].to_string()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn with_gold(obs: &[Vec<String>], gold: &[usize]) -> TokenGrid {
    TokenGrid::new(
        obs.iter()
            .zip(gold)
            .map(|(r, &y)| {
                let mut r = r.clone();
                r.push(["B", "M", "E", "S"][y].to_string());
                r
            })
            .collect(),
    )
    .unwrap()
}

// ---------------------------------------------------------------------
// MMSEG oracle: brute-force chunk enumeration over a plain string set and
// the rule cascade restated on integer keys. Among chunks of equal total
// length, a larger average means fewer words, and a smaller variance means
// a smaller sum of squared lengths.

pub struct MmsegOracle {
    pub words: HashSet<String>,
    pub freedom: Option<Vec<(char, f64)>>,
}

impl MmsegOracle {
    fn is_word(&self, w: &[char]) -> bool {
        w.len() == 1 || self.words.contains(&w.iter().collect::<String>())
    }

    fn score(&self, c: char) -> f64 {
        self.freedom
            .as_ref()
            .and_then(|t| t.iter().find(|(k, _)| *k == c).map(|(_, s)| *s))
            .unwrap_or(0.0)
    }

    /// All chunks of 1-3 words starting at the beginning of `text`.
    pub fn chunks(&self, text: &[char]) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let n = text.len();
        for a in 1..=n {
            if !self.is_word(&text[..a]) {
                continue;
            }
            out.push(vec![a]);
            for b in 1..=n - a {
                if !self.is_word(&text[a..a + b]) {
                    continue;
                }
                out.push(vec![a, b]);
                for c in 1..=n - a - b {
                    if self.is_word(&text[a + b..a + b + c]) {
                        out.push(vec![a, b, c]);
                    }
                }
            }
        }
        out
    }

    fn freedom_of(&self, text: &[char], lens: &[usize]) -> f64 {
        let mut pos = 0;
        let mut s = 0.0;
        for &l in lens {
            if l == 1 {
                s += self.score(text[pos]);
            }
            pos += l;
        }
        s
    }

    /// First-word length chosen at the start of `text`.
    pub fn pick_first(&self, text: &[char]) -> usize {
        let mut cands = self.chunks(text);
        let max_total = cands.iter().map(|c| c.iter().sum::<usize>()).max().unwrap();
        cands.retain(|c| c.iter().sum::<usize>() == max_total);
        let min_n = cands.iter().map(Vec::len).min().unwrap();
        cands.retain(|c| c.len() == min_n);
        let sq = |c: &Vec<usize>| c.iter().map(|l| l * l).sum::<usize>();
        let min_sq = cands.iter().map(sq).min().unwrap();
        cands.retain(|c| sq(c) == min_sq);
        let best_free = cands
            .iter()
            .map(|c| self.freedom_of(text, c))
            .fold(f64::NEG_INFINITY, f64::max);
        cands.retain(|c| self.freedom_of(text, c) == best_free);
        cands.iter().map(|c| c[0]).max().unwrap()
    }

    pub fn segment(&self, text: &[char]) -> Vec<usize> {
        let mut pos = 0;
        let mut out = vec![];
        while pos < text.len() {
            let l = self.pick_first(&text[pos..]);
            out.push(l);
            pos += l;
        }
        out
    }
}

/// Random lexicon over a tiny alphabet so words actually occur in text.
pub fn random_case(rng: &mut StdRng) -> (Vec<String>, Vec<char>) {
    let alphabet = ['a', 'b', 'c', 'd'];
    let n_words = rng.gen_range(0..=12);
    let words = (0..n_words)
        .map(|_| {
            let len = rng.gen_range(1..=4);
            (0..len).map(|_| alphabet[rng.gen_range(0..4)]).collect()
        })
        .collect();
    let len = rng.gen_range(1..=10);
    let text = (0..len).map(|_| alphabet[rng.gen_range(0..4)]).collect();
    (words, text)
}
