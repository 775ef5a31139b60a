use super::objective::SentenceFeatures;
use super::{FeatureIndex, NUM_LABELS};

const L: usize = NUM_LABELS;

/// `ln(sum(exp(xs)))` without overflow.
#[inline]
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Label scores of one sentence: per-position unary scores plus the
/// shared transition matrix `trans[prev][cur]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    unary: Vec<[f64; L]>,
    trans: [[f64; L]; L],
}

pub(crate) struct ForwardBackward {
    alpha: Vec<[f64; L]>,
    beta: Vec<[f64; L]>,
    pub log_z: f64,
}

impl Lattice {
    pub(crate) fn new(index: &FeatureIndex, weights: &[f64], feats: &SentenceFeatures) -> Self {
        let mut trans = [[0.0; L]; L];
        for &(_, base) in index.transitions() {
            let w = &weights[base as usize..base as usize + L * L];
            for (p, row) in trans.iter_mut().enumerate() {
                for (c, t) in row.iter_mut().enumerate() {
                    *t += w[p * L + c];
                }
            }
        }
        let unary = (0..feats.len())
            .map(|t| {
                let mut u = [0.0; L];
                for &base in feats.at(t) {
                    let w = &weights[base as usize..base as usize + L];
                    for y in 0..L {
                        u[y] += w[y];
                    }
                }
                u
            })
            .collect();
        Lattice { unary, trans }
    }

    pub fn from_scores(unary: Vec<[f64; L]>, trans: [[f64; L]; L]) -> Self {
        Lattice { unary, trans }
    }

    pub fn len(&self) -> usize {
        self.unary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unary.is_empty()
    }

    pub fn unary(&self) -> &[[f64; L]] {
        &self.unary
    }

    pub fn transitions(&self) -> &[[f64; L]; L] {
        &self.trans
    }

    /// Unnormalized log-score of a label path.
    pub fn path_score(&self, labels: &[usize]) -> f64 {
        let mut s = 0.0;
        for (t, &y) in labels.iter().enumerate() {
            s += self.unary[t][y];
            if t > 0 {
                s += self.trans[labels[t - 1]][y];
            }
        }
        s
    }

    /// Argmax path. At every step ties go to the lowest label index.
    #[allow(clippy::needless_range_loop)]
    pub fn viterbi(&self) -> Vec<usize> {
        let n = self.len();
        if n == 0 {
            return Vec::new();
        }
        let mut delta = vec![[0.0; L]; n];
        let mut back = vec![[0usize; L]; n];
        delta[0] = self.unary[0];
        for t in 1..n {
            for y in 0..L {
                let mut best = 0;
                let mut best_score = delta[t - 1][0] + self.trans[0][y];
                for p in 1..L {
                    let s = delta[t - 1][p] + self.trans[p][y];
                    if s > best_score {
                        best = p;
                        best_score = s;
                    }
                }
                delta[t][y] = best_score + self.unary[t][y];
                back[t][y] = best;
            }
        }
        let mut y = argmax(&delta[n - 1]);
        let mut path = vec![0; n];
        for t in (0..n).rev() {
            path[t] = y;
            y = back[t][y];
        }
        path
    }

    pub(crate) fn forward_backward(&self) -> ForwardBackward {
        let n = self.len();
        let mut alpha = vec![[0.0; L]; n];
        let mut beta = vec![[0.0; L]; n];
        if n == 0 {
            return ForwardBackward {
                alpha,
                beta,
                log_z: 0.0,
            };
        }
        alpha[0] = self.unary[0];
        let mut buf = [0.0; L];
        for t in 1..n {
            for y in 0..L {
                for p in 0..L {
                    buf[p] = alpha[t - 1][p] + self.trans[p][y];
                }
                alpha[t][y] = self.unary[t][y] + log_sum_exp(&buf);
            }
        }
        for t in (0..n - 1).rev() {
            for y in 0..L {
                for c in 0..L {
                    buf[c] = self.trans[y][c] + self.unary[t + 1][c] + beta[t + 1][c];
                }
                beta[t][y] = log_sum_exp(&buf);
            }
        }
        let log_z = log_sum_exp(&alpha[n - 1]);
        ForwardBackward { alpha, beta, log_z }
    }

    /// Log partition function.
    pub fn log_partition(&self) -> f64 {
        self.forward_backward().log_z
    }

    /// Per-position label marginals.
    pub fn marginals(&self) -> Vec<[f64; L]> {
        self.forward_backward().node_marginals(self)
    }
}

impl ForwardBackward {
    pub fn node_marginals(&self, _lattice: &Lattice) -> Vec<[f64; L]> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(a, b)| {
                let mut m = [0.0; L];
                for y in 0..L {
                    m[y] = (a[y] + b[y] - self.log_z).exp();
                }
                m
            })
            .collect()
    }

    /// Expected transition counts summed over the sentence.
    pub fn edge_marginal_sums(&self, lattice: &Lattice) -> [[f64; L]; L] {
        let mut out = [[0.0; L]; L];
        for t in 1..lattice.len() {
            for (p, row) in out.iter_mut().enumerate() {
                for (c, e) in row.iter_mut().enumerate() {
                    *e += (self.alpha[t - 1][p]
                        + lattice.trans[p][c]
                        + lattice.unary[t][c]
                        + self.beta[t][c]
                        - self.log_z)
                        .exp();
                }
            }
        }
        out
    }
}

fn argmax(xs: &[f64; L]) -> usize {
    let mut best = 0;
    for y in 1..L {
        if xs[y] > xs[best] {
            best = y;
        }
    }
    best
}
