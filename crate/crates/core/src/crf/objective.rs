use rayon::prelude::*;

use super::lattice::Lattice;
use super::{gold_labels, CrfModel, FeatureIndex, NUM_LABELS};
use crate::error::{Error, Result};
use crate::template::{TemplateSet, TokenGrid};

const L: usize = NUM_LABELS;

// Sentences are evaluated in parallel in batches of this size and reduced
// sequentially, so results do not depend on the thread count.
const BATCH: usize = 256;

/// Base slots of the indexed unigram features at each position.
#[derive(Debug, Clone, Default)]
pub(crate) struct SentenceFeatures {
    offsets: Vec<u32>,
    bases: Vec<u32>,
}

impl SentenceFeatures {
    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn at(&self, t: usize) -> &[u32] {
        &self.bases[self.offsets[t] as usize..self.offsets[t + 1] as usize]
    }
}

/// Expands the unigram templates at every row of `grid` and keeps the
/// features present in `index`. Only the columns the templates reference
/// are read, so a trailing gold column is harmless.
pub(crate) fn compile_features(
    index: &FeatureIndex,
    templates: &TemplateSet,
    grid: &TokenGrid,
) -> SentenceFeatures {
    let mut offsets = Vec::with_capacity(grid.len() + 1);
    let mut bases = Vec::new();
    let mut buf = String::new();
    offsets.push(0);
    for pos in 0..grid.len() {
        for t in templates.unigrams() {
            buf.clear();
            t.expand_into(grid, pos, &mut buf);
            if let Some(b) = index.get(&buf) {
                bases.push(b);
            }
        }
        offsets.push(bases.len() as u32);
    }
    SentenceFeatures { offsets, bases }
}

/// Training sentences reduced to feature slots and gold label indices.
#[derive(Debug, Clone)]
pub struct CompiledCorpus {
    sentences: Vec<(SentenceFeatures, Vec<u8>)>,
}

impl CompiledCorpus {
    pub fn compile(
        index: &FeatureIndex,
        templates: &TemplateSet,
        grids: &[TokenGrid],
    ) -> Result<Self> {
        let sentences = grids
            .par_iter()
            .enumerate()
            .map(|(i, g)| {
                let gold = gold_labels(g, i)?;
                Ok((compile_features(index, templates, g), gold))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledCorpus { sentences })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// L2-penalized negative log-likelihood of a compiled corpus.
pub struct Objective<'a> {
    corpus: &'a CompiledCorpus,
    index: &'a FeatureIndex,
    l2_sigma: f64,
}

struct SentenceStats {
    log_z: f64,
    gold_score: f64,
    nodes: Vec<[f64; L]>,
    edges: [[f64; L]; L],
}

impl<'a> Objective<'a> {
    pub fn new(corpus: &'a CompiledCorpus, index: &'a FeatureIndex, l2_sigma: f64) -> Self {
        Objective {
            corpus,
            index,
            l2_sigma,
        }
    }

    fn sentence_stats(&self, w: &[f64], feats: &SentenceFeatures, gold: &[u8]) -> SentenceStats {
        let lattice = Lattice::new(self.index, w, feats);
        let fb = lattice.forward_backward();
        let gold: Vec<usize> = gold.iter().map(|&y| y as usize).collect();
        SentenceStats {
            log_z: fb.log_z,
            gold_score: lattice.path_score(&gold),
            nodes: fb.node_marginals(&lattice),
            edges: fb.edge_marginal_sums(&lattice),
        }
    }

    /// Objective value and gradient at `w`.
    pub fn evaluate(&self, w: &[f64]) -> Result<(f64, Vec<f64>)> {
        assert_eq!(w.len(), self.index.num_slots(), "weight vector length");
        let mut grad = vec![0.0; w.len()];
        let mut nll = 0.0;
        for (b, batch) in self.corpus.sentences.chunks(BATCH).enumerate() {
            let stats: Vec<SentenceStats> = batch
                .par_iter()
                .map(|(f, g)| self.sentence_stats(w, f, g))
                .collect();
            for (k, ((feats, gold), s)) in batch.iter().zip(&stats).enumerate() {
                let i = b * BATCH + k;
                if !s.log_z.is_finite() || !s.gold_score.is_finite() {
                    return Err(Error::Numerical(format!(
                        "non-finite likelihood in sentence {i}"
                    )));
                }
                nll += s.log_z - s.gold_score;
                for (t, &y_gold) in gold.iter().enumerate() {
                    for &base in feats.at(t) {
                        let g = &mut grad[base as usize..base as usize + L];
                        for (gy, p) in g.iter_mut().zip(&s.nodes[t]) {
                            *gy += p;
                        }
                        g[y_gold as usize] -= 1.0;
                    }
                }
                for &(_, base) in self.index.transitions() {
                    let g = &mut grad[base as usize..base as usize + L * L];
                    for p in 0..L {
                        for c in 0..L {
                            g[p * L + c] += s.edges[p][c];
                        }
                    }
                    for t in 1..gold.len() {
                        g[gold[t - 1] as usize * L + gold[t] as usize] -= 1.0;
                    }
                }
            }
        }
        let inv_var = 1.0 / (self.l2_sigma * self.l2_sigma);
        let mut penalty = 0.0;
        for (g, &x) in grad.iter_mut().zip(w) {
            penalty += x * x;
            *g += x * inv_var;
        }
        nll += 0.5 * penalty * inv_var;
        if !nll.is_finite() {
            return Err(Error::Numerical("objective is not finite".into()));
        }
        Ok((nll, grad))
    }
}

/// Penalized negative log-likelihood of `grids` (gold labels in the last
/// column) under `model`, with its gradient.
pub fn log_likelihood_and_gradient(
    model: &CrfModel,
    grids: &[TokenGrid],
) -> Result<(f64, Vec<f64>)> {
    for (i, g) in grids.iter().enumerate() {
        if g.width() != model.meta.columns + 1 {
            return Err(Error::invalid(format!(
                "sentence {i} has {} columns, expected {} observation columns plus gold",
                g.width(),
                model.meta.columns
            )));
        }
    }
    let corpus = CompiledCorpus::compile(&model.index, &model.templates, grids)?;
    Objective::new(&corpus, &model.index, model.meta.config.l2_sigma).evaluate(&model.weights)
}
