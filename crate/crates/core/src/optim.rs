//! Backtracking line-search minimizer for smooth convex objectives.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSearch {
    /// Step multiplier applied on each rejected trial, in (0, 1).
    pub shrink: f64,
    /// Sufficient-decrease constant, in (0, 1).
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch { shrink: 0.5, armijo: 1e-4, max_backtracks: 60 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverMethod {
    /// Limited-memory BFGS directions.
    Lbfgs { memory: usize },
    /// Plain steepest descent.
    GradientDescent,
}

impl Default for SolverMethod {
    fn default() -> Self {
        SolverMethod::Lbfgs { memory: 8 }
    }
}

pub(crate) struct Outcome {
    pub iterations: usize,
    pub grad_sup: f64,
    pub converged: bool,
}

pub(crate) struct Settings {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub line_search: LineSearch,
    pub method: SolverMethod,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup(a: &[f64]) -> f64 {
    crate::numeric::sup_norm(a)
}

/// Minimizes `eval` starting at `x`, which is updated in place.
///
/// `eval(x, grad)` returns the objective and writes the gradient. Entries
/// with a zero gradient component everywhere (fixed coordinates) are never
/// moved because every direction is built from gradients.
pub(crate) fn minimize(
    x: &mut [f64],
    mut eval: impl FnMut(&[f64], &mut [f64]) -> f64,
    settings: &Settings,
) -> Outcome {
    let n = x.len();
    let memory = match settings.method {
        SolverMethod::Lbfgs { memory } => memory,
        SolverMethod::GradientDescent => 0,
    };
    let ls = settings.line_search;

    let mut g = vec![0.0; n];
    let mut f = eval(x, &mut g);
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(memory);
    let mut dir = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    let mut last_step = 1.0f64;
    let mut iterations = 0;

    while iterations < settings.max_iters {
        let gs = sup(&g);
        if gs <= settings.grad_tol {
            return Outcome { iterations, grad_sup: gs, converged: true };
        }
        iterations += 1;

        let quasi_newton = !pairs.is_empty();
        if quasi_newton {
            two_loop(&g, &pairs, &mut dir);
        } else {
            for (d, gi) in dir.iter_mut().zip(&g) {
                *d = -gi;
            }
        }
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            pairs.clear();
            for (d, gi) in dir.iter_mut().zip(&g) {
                *d = -gi;
            }
            slope = dot(&g, &dir);
        }

        let mut alpha = if !pairs.is_empty() {
            1.0
        } else if memory > 0 && iterations == 1 {
            1.0 / gs.max(1.0)
        } else {
            (2.0 * last_step).min(1e6)
        };

        let mut accepted = None;
        for _ in 0..ls.max_backtracks {
            for i in 0..n {
                trial[i] = x[i] + alpha * dir[i];
            }
            let ft = eval(&trial, &mut g_trial);
            if ft.is_finite() {
                let decrease = ft <= f + ls.armijo * alpha * slope;
                // For convex objectives φ(α) ≤ φ(0) + α φ'(α), so a small
                // enough terminal slope certifies sufficient decrease.
                let certified = dot(&g_trial, &dir) <= ls.armijo * slope;
                if decrease || certified {
                    accepted = Some(ft);
                    break;
                }
            }
            alpha *= ls.shrink;
        }

        let Some(ft) = accepted else {
            if !pairs.is_empty() {
                pairs.clear();
                continue;
            }
            let gs = sup(&g);
            return Outcome { iterations, grad_sup: gs, converged: gs <= settings.grad_tol };
        };

        if memory > 0 {
            let s: Vec<f64> = (0..n).map(|i| trial[i] - x[i]).collect();
            let y: Vec<f64> = (0..n).map(|i| g_trial[i] - g[i]).collect();
            let sy = dot(&s, &y);
            if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
                if pairs.len() == memory {
                    pairs.pop_front();
                }
                pairs.push_back((s, y, 1.0 / sy));
            }
        }
        last_step = alpha;
        x.copy_from_slice(&trial);
        std::mem::swap(&mut g, &mut g_trial);
        f = ft;
    }

    let gs = sup(&g);
    Outcome { iterations, grad_sup: gs, converged: gs <= settings.grad_tol }
}

fn two_loop(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, out: &mut [f64]) {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = vec![0.0; pairs.len()];
    for (k, (s, y, rho)) in pairs.iter().enumerate().rev() {
        let a = rho * dot(s, &q);
        alphas[k] = a;
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
    }
    let (s, y, _) = pairs.back().expect("nonempty history");
    let gamma = dot(s, y) / dot(y, y);
    for qi in q.iter_mut() {
        *qi *= gamma;
    }
    for (k, (s, y, rho)) in pairs.iter().enumerate() {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (alphas[k] - b) * si;
        }
    }
    for (o, qi) in out.iter_mut().zip(q) {
        *o = -qi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(x: &[f64], g: &mut [f64]) -> f64 {
        // Σ (i+1) (x_i - 1)^2
        let mut f = 0.0;
        for i in 0..x.len() {
            let w = (i + 1) as f64;
            f += w * (x[i] - 1.0).powi(2);
            g[i] = 2.0 * w * (x[i] - 1.0);
        }
        f
    }

    fn settings(method: SolverMethod) -> Settings {
        Settings { max_iters: 10_000, grad_tol: 1e-10, line_search: LineSearch::default(), method }
    }

    #[test]
    fn both_methods_reach_the_minimum() {
        for method in [SolverMethod::default(), SolverMethod::GradientDescent] {
            let mut x = vec![0.0; 6];
            let out = minimize(&mut x, quadratic, &settings(method));
            assert!(out.converged, "{method:?}");
            assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn iteration_cap_is_reported() {
        let mut x = vec![0.0; 6];
        let mut s = settings(SolverMethod::GradientDescent);
        s.max_iters = 2;
        let out = minimize(&mut x, quadratic, &s);
        assert!(!out.converged);
        assert_eq!(out.iterations, 2);
    }
}
