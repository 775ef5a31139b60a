//! Text model file.
//!
//! ```text
//! jointseg-crf-model
//! version 1
//! preset exp4
//! l2_sigma 1
//! max_iterations 300
//! gradient_tolerance 0.00001
//! feature_cutoff 1
//! iterations 57
//! objective 1234.5
//! fingerprint <sha256 hex>
//! columns 2
//! labels B M E S
//! templates 16
//! U00:%x[-1,0]
//! ...
//! B
//! transitions 1
//! <16 weights>\tB
//! features 52311
//! <4 weights>\tU00:中
//! ...
//! end
//! ```
//!
//! Weights are written in Rust's shortest round-trip decimal form, so
//! loading restores them bit for bit. Transition blocks precede unigram
//! features in slot order, matching [`FeatureIndex`].

use std::io::{self, Write};
use std::path::Path;

use super::{CrfModel, FeatureIndex, LabelAlphabet, ModelMeta, TrainConfig, NUM_LABELS};
use crate::error::{Error, Result};
use crate::fsutil;
use crate::template::parse_named_templates;

pub const MODEL_MAGIC: &str = "jointseg-crf-model";
pub const MODEL_VERSION: u32 = 1;

fn write_weights(w: &mut dyn Write, ws: &[f64]) -> io::Result<()> {
    for (i, x) in ws.iter().enumerate() {
        if i > 0 {
            w.write_all(b" ")?;
        }
        write!(w, "{x}")?;
    }
    Ok(())
}

pub fn write_model(model: &CrfModel, w: &mut dyn Write) -> io::Result<()> {
    let m = &model.meta;
    let c = &m.config;
    writeln!(w, "{MODEL_MAGIC}")?;
    writeln!(w, "version {MODEL_VERSION}")?;
    writeln!(w, "preset {}", model.templates.name)?;
    writeln!(w, "l2_sigma {}", c.l2_sigma)?;
    writeln!(w, "max_iterations {}", c.max_iterations)?;
    writeln!(w, "gradient_tolerance {}", c.gradient_tolerance)?;
    writeln!(w, "feature_cutoff {}", c.feature_cutoff)?;
    writeln!(w, "iterations {}", m.iterations)?;
    writeln!(w, "objective {}", m.objective)?;
    writeln!(w, "fingerprint {}", m.fingerprint)?;
    writeln!(w, "columns {}", m.columns)?;
    let labels: Vec<&str> = LabelAlphabet.labels().iter().map(|t| t.as_str()).collect();
    writeln!(w, "labels {}", labels.join(" "))?;
    let templates = model.templates.render();
    writeln!(w, "templates {}", model.templates.templates().len())?;
    w.write_all(templates.as_bytes())?;

    let ws = &model.weights;
    writeln!(w, "transitions {}", model.index.transitions().len())?;
    for (id, base) in model.index.transitions() {
        let b = *base as usize;
        write_weights(w, &ws[b..b + NUM_LABELS * NUM_LABELS])?;
        writeln!(w, "\t{id}")?;
    }
    writeln!(w, "features {}", model.index.num_unigram_features())?;
    for (f, base) in model.index.unigram_features() {
        let b = base as usize;
        write_weights(w, &ws[b..b + NUM_LABELS])?;
        writeln!(w, "\t{f}")?;
    }
    writeln!(w, "end")
}

pub fn save_model(model: &CrfModel, path: impl AsRef<Path>) -> Result<()> {
    fsutil::write_atomic(path.as_ref(), |w| write_model(model, w))
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        self.it
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| format_err("unexpected end of file (truncated model?)"))
    }

    fn field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (n, line) = self.next()?;
        let value = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| format_err(format!("line {n}: expected '{key} <value>'")))?;
        value
            .parse()
            .map_err(|_| format_err(format!("line {n}: invalid value for {key}: {value:?}")))
    }

    fn weighted(&mut self, width: usize, out: &mut Vec<f64>) -> Result<String> {
        let (n, line) = self.next()?;
        let (ws, key) = line
            .split_once('\t')
            .ok_or_else(|| format_err(format!("line {n}: expected '<weights>\\t<feature>'")))?;
        let before = out.len();
        for tok in ws.split(' ') {
            let x: f64 = tok
                .parse()
                .map_err(|_| format_err(format!("line {n}: invalid weight {tok:?}")))?;
            if !x.is_finite() {
                return Err(format_err(format!("line {n}: weight is not finite")));
            }
            out.push(x);
        }
        if out.len() - before != width {
            return Err(format_err(format!(
                "line {n}: expected {width} weights, found {}",
                out.len() - before
            )));
        }
        Ok(key.to_owned())
    }
}

pub fn read_model(text: &str) -> Result<CrfModel> {
    let mut lines = Lines {
        it: text.lines().enumerate(),
    };
    let (_, magic) = lines.next()?;
    if magic != MODEL_MAGIC {
        return Err(format_err("not a model file (bad magic)"));
    }
    let version: u32 = lines.field("version")?;
    if version != MODEL_VERSION {
        return Err(format_err(format!(
            "unsupported model version {version} (expected {MODEL_VERSION})"
        )));
    }
    let preset: String = lines.field("preset")?;
    let config = TrainConfig {
        l2_sigma: lines.field("l2_sigma")?,
        max_iterations: lines.field("max_iterations")?,
        gradient_tolerance: lines.field("gradient_tolerance")?,
        feature_cutoff: lines.field("feature_cutoff")?,
    };
    let iterations = lines.field("iterations")?;
    let objective = lines.field("objective")?;
    let fingerprint = lines.field("fingerprint")?;
    let columns: usize = lines.field("columns")?;
    let labels: String = lines.field("labels")?;
    let expected: Vec<&str> = LabelAlphabet.labels().iter().map(|t| t.as_str()).collect();
    if labels != expected.join(" ") {
        return Err(format_err(format!("unsupported label set {labels:?}")));
    }

    let n_templates: usize = lines.field("templates")?;
    let mut tpl_text = String::new();
    for _ in 0..n_templates {
        tpl_text.push_str(lines.next()?.1);
        tpl_text.push('\n');
    }
    let templates = parse_named_templates(&preset, &tpl_text)
        .map_err(|e| format_err(format!("template block: {e}")))?;
    if templates.templates().len() != n_templates {
        return Err(format_err("template block contains blank or comment lines"));
    }
    if templates.max_col().is_some_and(|c| c >= columns) {
        return Err(format_err(
            "templates reference more columns than the model has",
        ));
    }

    let mut weights = Vec::new();
    let n_trans: usize = lines.field("transitions")?;
    let mut trans_ids = Vec::with_capacity(n_trans);
    for _ in 0..n_trans {
        trans_ids.push(lines.weighted(NUM_LABELS * NUM_LABELS, &mut weights)?);
    }
    let expected_ids: Vec<&str> = templates.transitions().map(|t| t.id()).collect();
    if trans_ids != expected_ids {
        return Err(format_err(
            "transition blocks do not match the transition templates",
        ));
    }
    let n_feats: usize = lines.field("features")?;
    let mut feats = Vec::with_capacity(n_feats);
    for _ in 0..n_feats {
        feats.push(lines.weighted(NUM_LABELS, &mut weights)?);
    }
    let (n, end) = lines.next()?;
    if end != "end" {
        return Err(format_err(format!("line {n}: expected 'end'")));
    }
    if lines.it.next().is_some() {
        return Err(format_err("trailing data after 'end'"));
    }

    let index = FeatureIndex::from_parts(trans_ids, feats);
    if index.num_unigram_features() != n_feats {
        return Err(format_err("duplicate feature strings"));
    }
    debug_assert_eq!(index.num_slots(), weights.len());
    Ok(CrfModel {
        templates,
        index,
        weights,
        meta: ModelMeta {
            config,
            columns,
            iterations,
            objective,
            fingerprint,
        },
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<CrfModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| format_err("model file is not UTF-8"))?;
    read_model(text)
}
