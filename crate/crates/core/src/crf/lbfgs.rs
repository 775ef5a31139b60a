//! Limited-memory BFGS with a backtracking Armijo line search.
//!
//! Every accepted step satisfies the sufficient-decrease condition, so the
//! objective never increases from one iteration to the next.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Lbfgs {
    /// Number of correction pairs kept.
    pub memory: usize,
    pub max_iterations: usize,
    /// Converged once `|g| <= gradient_tolerance * max(1, |x|)`.
    pub gradient_tolerance: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for Lbfgs {
    fn default() -> Self {
        Lbfgs {
            memory: 5,
            max_iterations: 300,
            gradient_tolerance: 1e-5,
            armijo: 1e-4,
            max_backtracks: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub objective: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl Lbfgs {
    /// Minimizes `f` from `x0`. `f` returns the value and gradient;
    /// `on_iteration(k, value, |g|)` runs after each accepted step.
    pub fn minimize<F, C>(
        &self,
        x0: Vec<f64>,
        mut f: F,
        mut on_iteration: C,
    ) -> Result<LbfgsOutcome>
    where
        F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
        C: FnMut(usize, f64, f64),
    {
        let mut x = x0;
        let (mut fx, mut g) = f(&x)?;
        if !fx.is_finite() {
            return Err(Error::Numerical("initial objective is not finite".into()));
        }
        let mut history: VecDeque<Pair> = VecDeque::with_capacity(self.memory);
        let mut gnorm = norm(&g);
        let mut iterations = 0;
        let converged = |gnorm: f64, x: &[f64]| gnorm <= self.gradient_tolerance * norm(x).max(1.0);

        while iterations < self.max_iterations {
            if converged(gnorm, &x) {
                return Ok(LbfgsOutcome {
                    x,
                    objective: fx,
                    gradient_norm: gnorm,
                    iterations,
                    converged: true,
                });
            }
            let mut d = self.direction(&g, &history);
            let mut slope = dot(&g, &d);
            if slope.is_nan() || slope >= 0.0 {
                history.clear();
                d = g.iter().map(|v| -v).collect();
                slope = -gnorm * gnorm;
            }
            // Without curvature information start from a unit-length step.
            let mut step = if history.is_empty() {
                1.0 / norm(&d)
            } else {
                1.0
            };

            let mut accepted = None;
            for _ in 0..self.max_backtracks {
                let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
                match f(&xn) {
                    Ok((fxn, gn)) if fxn.is_finite() && fxn <= fx + self.armijo * step * slope => {
                        accepted = Some((xn, fxn, gn));
                        break;
                    }
                    Ok(_) | Err(Error::Numerical(_)) => step *= 0.5,
                    Err(e) => return Err(e),
                }
            }
            let Some((xn, fxn, gn)) = accepted else {
                if history.is_empty() {
                    // No progress possible even along steepest descent.
                    break;
                }
                history.clear();
                continue;
            };

            let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
                if history.len() == self.memory {
                    history.pop_front();
                }
                history.push_back(Pair {
                    s,
                    y,
                    rho: 1.0 / sy,
                });
            }
            x = xn;
            fx = fxn;
            g = gn;
            gnorm = norm(&g);
            iterations += 1;
            on_iteration(iterations, fx, gnorm);
        }
        let done = converged(gnorm, &x);
        Ok(LbfgsOutcome {
            x,
            objective: fx,
            gradient_norm: gnorm,
            iterations,
            converged: done,
        })
    }

    // Two-loop recursion: returns -H g.
    fn direction(&self, g: &[f64], history: &VecDeque<Pair>) -> Vec<f64> {
        let mut q: Vec<f64> = g.to_vec();
        let mut alphas = Vec::with_capacity(history.len());
        for p in history.iter().rev() {
            let a = p.rho * dot(&p.s, &q);
            for (qi, yi) in q.iter_mut().zip(&p.y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some(last) = history.back() {
            let gamma = 1.0 / (last.rho * dot(&last.y, &last.y));
            for qi in q.iter_mut() {
                *qi *= gamma;
            }
        }
        for (p, a) in history.iter().zip(alphas.iter().rev()) {
            let b = p.rho * dot(&p.y, &q);
            for (qi, si) in q.iter_mut().zip(&p.s) {
                *qi += (a - b) * si;
            }
        }
        for qi in q.iter_mut() {
            *qi = -*qi;
        }
        q
    }
}
