//! Linear-chain CRF over BMES labels.
//!
//! A position's score for label `y` is the sum of the weights
//! `w[base(f) + y]` of every unigram feature `f` expanded at that position.
//! Adjacent labels `(y', y)` add `w[base(t) + 4*y' + y]` for every transition
//! template `t`. Slots for transition templates come first, followed by
//! unigram features in order of first occurrence in the training data.

mod lattice;
mod lbfgs;
mod model_io;
mod objective;

use indexmap::IndexMap;
use sha2::{Digest, Sha256};

use crate::corpus::{Tag, TagSeq};
use crate::error::{Error, Result};
use crate::template::{TemplateSet, TokenGrid};

pub use lattice::{log_sum_exp, Lattice};
pub use lbfgs::{Lbfgs, LbfgsOutcome};
pub use model_io::{load_model, read_model, save_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use objective::{log_likelihood_and_gradient, CompiledCorpus, Objective};

pub const NUM_LABELS: usize = 4;

/// The fixed label set `B, M, E, S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LabelAlphabet;

impl LabelAlphabet {
    pub fn labels(&self) -> &'static [Tag; NUM_LABELS] {
        &Tag::ALL
    }

    pub fn len(&self) -> usize {
        NUM_LABELS
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, tag: Tag) -> usize {
        tag.index()
    }

    pub fn label(&self, index: usize) -> Option<Tag> {
        Tag::from_index(index)
    }
}

/// Maps feature strings to weight slots.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureIndex {
    transitions: Vec<(String, u32)>,
    unigrams: IndexMap<String, u32>,
    num_slots: usize,
}

impl FeatureIndex {
    pub(crate) fn from_parts(transition_ids: Vec<String>, unigrams: Vec<String>) -> Self {
        let mut next = 0u32;
        let mut slot = |width: usize| {
            let base = next;
            next += width as u32;
            base
        };
        let transitions = transition_ids
            .into_iter()
            .map(|id| (id, slot(NUM_LABELS * NUM_LABELS)))
            .collect();
        let unigrams = unigrams
            .into_iter()
            .map(|f| (f, slot(NUM_LABELS)))
            .collect();
        FeatureIndex {
            transitions,
            unigrams,
            num_slots: next as usize,
        }
    }

    /// Base slot of a unigram feature string.
    pub fn get(&self, feature: &str) -> Option<u32> {
        self.unigrams.get(feature).copied()
    }

    pub fn unigram_features(&self) -> impl Iterator<Item = (&str, u32)> {
        self.unigrams.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// `(template id, base slot)` of every transition template.
    pub fn transitions(&self) -> &[(String, u32)] {
        &self.transitions
    }

    pub fn num_unigram_features(&self) -> usize {
        self.unigrams.len()
    }

    pub fn num_slots(&self) -> usize {
        self.num_slots
    }
}

/// Indexes the unigram features of `grids` that occur at least `cutoff`
/// times. The last column of every grid is the gold label and is never
/// referenced by templates.
pub fn build_index(
    grids: &[TokenGrid],
    templates: &TemplateSet,
    cutoff: u32,
) -> Result<FeatureIndex> {
    let width = observation_width(grids)?;
    templates.validate_columns(width)?;
    let mut counts: IndexMap<String, u32> = IndexMap::new();
    let mut buf = String::new();
    for g in grids {
        for pos in 0..g.len() {
            for t in templates.unigrams() {
                buf.clear();
                t.expand_into(g, pos, &mut buf);
                match counts.get_mut(buf.as_str()) {
                    Some(c) => *c += 1,
                    None => {
                        counts.insert(buf.clone(), 1);
                    }
                }
            }
        }
    }
    let kept: Vec<String> = counts
        .into_iter()
        .filter(|&(_, c)| c >= cutoff)
        .map(|(f, _)| f)
        .collect();
    if kept.is_empty() {
        return Err(Error::Config(format!(
            "no feature occurs at least {cutoff} time(s) in the training data"
        )));
    }
    let transitions = templates.transitions().map(|t| t.id().to_owned()).collect();
    Ok(FeatureIndex::from_parts(transitions, kept))
}

/// Number of observation columns shared by all training grids.
fn observation_width(grids: &[TokenGrid]) -> Result<usize> {
    let first = grids
        .first()
        .ok_or_else(|| Error::invalid("no training sentences"))?;
    if let Some(i) = grids.iter().position(|g| g.width() != first.width()) {
        return Err(Error::invalid(format!(
            "sentence {i} has {} columns, expected {}",
            grids[i].width(),
            first.width()
        )));
    }
    if first.width() < 2 {
        return Err(Error::invalid(
            "training data needs at least one observation column and a gold column",
        ));
    }
    Ok(first.width() - 1)
}

/// Gold labels from the last column.
pub(crate) fn gold_labels(grid: &TokenGrid, sentence: usize) -> Result<Vec<u8>> {
    let last = grid.width() - 1;
    grid.column(last)
        .map(|s| {
            s.parse::<Tag>().map(|t| t.index() as u8).map_err(|_| {
                Error::invalid(format!(
                    "sentence {sentence}: gold label {s:?} is not B, M, E or S"
                ))
            })
        })
        .collect()
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Scale of the Gaussian prior; the penalty is `|w|^2 / (2 sigma^2)`.
    pub l2_sigma: f64,
    pub max_iterations: usize,
    /// Stop once `|grad| <= gradient_tolerance * max(1, |w|)`.
    pub gradient_tolerance: f64,
    /// Minimum number of occurrences for a feature to be indexed.
    pub feature_cutoff: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_sigma: 1.0,
            max_iterations: 300,
            gradient_tolerance: 1e-5,
            feature_cutoff: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l2_sigma.is_nan() || self.l2_sigma <= 0.0 {
            return Err(Error::Config(format!(
                "l2_sigma must be positive, got {}",
                self.l2_sigma
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if !self.gradient_tolerance.is_finite() || self.gradient_tolerance <= 0.0 {
            return Err(Error::Config(format!(
                "gradient_tolerance must be positive, got {}",
                self.gradient_tolerance
            )));
        }
        Ok(())
    }
}

/// Provenance recorded alongside the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMeta {
    pub config: TrainConfig,
    /// Observation columns the model expects at decoding time.
    pub columns: usize,
    pub iterations: usize,
    pub objective: f64,
    /// SHA-256 of the training grids.
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    pub(crate) templates: TemplateSet,
    pub(crate) index: FeatureIndex,
    pub(crate) weights: Vec<f64>,
    pub(crate) meta: ModelMeta,
}

/// Progress of one accepted optimizer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationReport {
    pub iteration: usize,
    pub objective: f64,
    pub gradient_norm: f64,
}

impl CrfModel {
    /// A zero-weight model over the features of `grids`.
    pub fn init(
        grids: &[TokenGrid],
        templates: &TemplateSet,
        config: &TrainConfig,
    ) -> Result<Self> {
        config.validate()?;
        let columns = observation_width(grids)?;
        let index = build_index(grids, templates, config.feature_cutoff)?;
        Ok(CrfModel {
            templates: templates.clone(),
            weights: vec![0.0; index.num_slots()],
            index,
            meta: ModelMeta {
                config: config.clone(),
                columns,
                iterations: 0,
                objective: f64::NAN,
                fingerprint: fingerprint(grids),
            },
        })
    }

    pub fn alphabet(&self) -> LabelAlphabet {
        LabelAlphabet
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    pub fn index(&self) -> &FeatureIndex {
        &self.index
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn meta(&self) -> &ModelMeta {
        &self.meta
    }

    /// Replaces the weights; the length must match the slot count and all
    /// values must be finite.
    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        if weights.len() != self.index.num_slots() {
            return Err(Error::invalid(format!(
                "expected {} weights, got {}",
                self.index.num_slots(),
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::Numerical(format!("weight {i} is not finite")));
        }
        self.weights = weights;
        Ok(())
    }

    fn check_columns(&self, grid: &TokenGrid) -> Result<()> {
        if grid.width() != self.meta.columns {
            return Err(Error::invalid(format!(
                "model expects {} observation column(s), input has {}",
                self.meta.columns,
                grid.width()
            )));
        }
        Ok(())
    }

    pub(crate) fn lattice(&self, grid: &TokenGrid) -> Result<Lattice> {
        self.check_columns(grid)?;
        let feats = objective::compile_features(&self.index, &self.templates, grid);
        Ok(Lattice::new(&self.index, &self.weights, &feats))
    }

    /// Highest-scoring label sequence; ties go to the lowest label index.
    pub fn viterbi(&self, grid: &TokenGrid) -> Result<TagSeq> {
        let best = self.lattice(grid)?.viterbi();
        Ok(TagSeq(
            best.into_iter()
                .map(|y| Tag::from_index(y).expect("label index in range"))
                .collect(),
        ))
    }

    /// Per-position label distributions in `B, M, E, S` order.
    pub fn marginals(&self, grid: &TokenGrid) -> Result<Vec<[f64; NUM_LABELS]>> {
        let lattice = self.lattice(grid)?;
        let fb = lattice.forward_backward();
        if !fb.log_z.is_finite() {
            return Err(Error::Numerical("partition function is not finite".into()));
        }
        Ok(fb.node_marginals(&lattice))
    }
}

pub fn viterbi(model: &CrfModel, grid: &TokenGrid) -> Result<TagSeq> {
    model.viterbi(grid)
}

pub fn marginals(model: &CrfModel, grid: &TokenGrid) -> Result<Vec<[f64; NUM_LABELS]>> {
    model.marginals(grid)
}

/// SHA-256 over the cells of `grids`.
pub fn fingerprint(grids: &[TokenGrid]) -> String {
    let mut h = Sha256::new();
    for g in grids {
        for row in g.rows() {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    h.update(b"\t");
                }
                h.update(cell.as_bytes());
            }
            h.update(b"\n");
        }
        h.update(b"\n");
    }
    format!("{:x}", h.finalize())
}

/// Trains a model with L-BFGS on the L2-penalized negative log-likelihood.
pub fn train(
    grids: &[TokenGrid],
    templates: &TemplateSet,
    config: &TrainConfig,
) -> Result<CrfModel> {
    train_with_progress(grids, templates, config, |_| {})
}

/// Like [`train`], calling `progress` after every accepted iteration.
pub fn train_with_progress<F>(
    grids: &[TokenGrid],
    templates: &TemplateSet,
    config: &TrainConfig,
    mut progress: F,
) -> Result<CrfModel>
where
    F: FnMut(&IterationReport),
{
    if grids.is_empty() {
        return Err(Error::invalid("empty training corpus"));
    }
    let mut model = CrfModel::init(grids, templates, config)?;
    let corpus = CompiledCorpus::compile(&model.index, &model.templates, grids)?;
    let objective = Objective::new(&corpus, &model.index, config.l2_sigma);
    let lbfgs = Lbfgs {
        max_iterations: config.max_iterations,
        gradient_tolerance: config.gradient_tolerance,
        ..Lbfgs::default()
    };
    let outcome = lbfgs.minimize(
        vec![0.0; model.index.num_slots()],
        |w| objective.evaluate(w),
        |iteration, objective, gradient_norm| {
            progress(&IterationReport {
                iteration,
                objective,
                gradient_norm,
            })
        },
    )?;
    if !outcome.objective.is_finite() {
        return Err(Error::Numerical("training objective diverged".into()));
    }
    model.set_weights(outcome.x)?;
    model.meta.iterations = outcome.iterations;
    model.meta.objective = outcome.objective;
    Ok(model)
}
