//! Finite p-Dirichlet problems and the decomposition `f = u + h` into a part
//! vanishing on the ball's boundary and a p-harmonic part.
//!
//! The objective is the in-ball Dirichlet energy
//! `E(v) = Σ_{(g,s) in ball} |v(g s^{-1}) - v(g)|^p`, minimized over the
//! interior values with the boundary clamped. For `1 < p < 2` the integrand
//! is replaced by `(x² + ε²)^{p/2}` during the descent; reported residuals
//! always use the exact kernel.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{check_p, in_ball_energy, p_laplacian_raw, GraphFunction, TailRule};
use crate::group::{CayleyBall, OUT_OF_BALL};
use crate::numeric::spread;
use crate::optim::{minimize, Settings};

pub use crate::optim::{LineSearch, SolverMethod};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop once the gradient sup-norm is at most this.
    pub grad_tol: f64,
    /// Smoothing width for `1 < p < 2`; `0` disables smoothing.
    pub smoothing_eps: f64,
    pub line_search: LineSearch,
    /// `None` starts from `v = 0`; `Some(seed)` from uniform `[-1, 1]` values.
    pub seed: Option<u64>,
    pub method: SolverMethod,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 100_000,
            grad_tol: 1e-10,
            smoothing_eps: 1e-9,
            line_search: LineSearch::default(),
            seed: None,
            method: SolverMethod::default(),
        }
    }
}

impl SolverOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.max_iters < 1 {
            return bad("max_iters must be >= 1");
        }
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return bad("grad_tol must be positive");
        }
        if !(self.smoothing_eps >= 0.0 && self.smoothing_eps.is_finite()) {
            return bad("smoothing_eps must be >= 0");
        }
        let ls = &self.line_search;
        if !(ls.shrink > 0.0 && ls.shrink < 1.0) || !(ls.armijo > 0.0 && ls.armijo < 1.0) {
            return bad("line search shrink and armijo must lie in (0, 1)");
        }
        if ls.max_backtracks == 0 {
            return bad("line search needs at least one trial step");
        }
        if let SolverMethod::Lbfgs { memory } = self.method {
            if memory == 0 {
                return bad("L-BFGS memory must be >= 1");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Exact (unsmoothed) energy of the returned function.
    pub objective: f64,
    /// Gradient sup-norm of the minimized objective at exit.
    pub grad_sup: f64,
    /// Max `|Δ_p h|` over the interior.
    pub residual: f64,
    pub converged: bool,
}

/// `Σ` over in-ball ordered pairs of `|v(g s^{-1}) - v(g)|^p`.
pub fn dirichlet_energy(v: &GraphFunction, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    Ok(in_ball_energy(v.ball(), v.values(), p))
}

/// Energy and gradient of the (possibly smoothed) objective; only free
/// coordinates get a gradient.
fn energy_and_gradient(ball: &CayleyBall, free: &[bool], p: f64, eps: f64, x: &[f64], grad: &mut [f64]) -> f64 {
    let smooth = p < 2.0 && eps > 0.0;
    let eps2 = eps * eps;
    let offset = if smooth { eps.powf(p) } else { 0.0 };
    let half = 0.5 * p;
    let mut energy = 0.0;
    for i in 0..ball.len() {
        let xi = x[i];
        let mut gi = 0.0;
        for &j in ball.neighbor_row(i) {
            if j == OUT_OF_BALL {
                continue;
            }
            let d = x[j as usize] - xi;
            let (phi, dphi) = if p == 2.0 {
                (d * d, 2.0 * d)
            } else if smooth {
                let r = d * d + eps2;
                let a = r.powf(half - 1.0);
                (a * r - offset, p * d * a)
            } else {
                let a = d.abs().powf(p - 1.0);
                (a * d.abs(), p * a * d.signum())
            };
            energy += phi;
            gi += dphi;
        }
        grad[i] = if free[i] { -2.0 * gi } else { 0.0 };
    }
    energy
}

fn interior_residual(ball: &CayleyBall, values: &[f64], p: f64) -> f64 {
    (0..ball.len())
        .filter(|&i| ball.is_interior(i))
        .map(|i| p_laplacian_raw(ball, values, p, i).abs())
        .fold(0.0, f64::max)
}

/// Minimizes the energy over the interior with the given starting values;
/// boundary entries of `x` stay fixed.
fn minimize_interior(ball: &CayleyBall, x: &mut [f64], p: f64, opts: &SolverOptions) -> SolveReport {
    let free: Vec<bool> = (0..ball.len()).map(|i| ball.is_interior(i)).collect();
    let settings = Settings {
        max_iters: opts.max_iters,
        grad_tol: opts.grad_tol,
        line_search: opts.line_search,
        method: opts.method,
    };
    let out = minimize(x, |v, g| energy_and_gradient(ball, &free, p, opts.smoothing_eps, v, g), &settings);
    SolveReport {
        iterations: out.iterations,
        objective: in_ball_energy(ball, x, p),
        grad_sup: out.grad_sup,
        residual: interior_residual(ball, x, p),
        converged: out.converged,
    }
}

fn seeded_interior(ball: &CayleyBall, seed: Option<u64>) -> impl FnMut(usize) -> f64 + '_ {
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    move |i| match rng.as_mut() {
        Some(r) if ball.is_interior(i) => r.gen_range(-1.0..=1.0),
        _ => 0.0,
    }
}

/// Minimizer of the Dirichlet energy with `boundary_values` clamped on the
/// ball's boundary.
pub fn solve_dirichlet(
    ball: &Arc<CayleyBall>,
    boundary_values: &BTreeMap<usize, f64>,
    p: f64,
    opts: &SolverOptions,
) -> Result<(GraphFunction, SolveReport)> {
    check_p(p)?;
    opts.validate()?;
    if ball.interior().is_empty() {
        return Err(Error::EmptyInterior);
    }
    let mut init = seeded_interior(ball, opts.seed);
    let mut x = vec![0.0; ball.len()];
    for (i, xi) in x.iter_mut().enumerate() {
        let start = init(i);
        if ball.is_interior(i) {
            *xi = start;
        } else {
            let &b = boundary_values.get(&i).ok_or(Error::MissingBoundaryValue(i))?;
            if !b.is_finite() {
                return Err(Error::NonFinite(i));
            }
            *xi = b;
        }
    }
    let report = minimize_interior(ball, &mut x, p, opts);
    Ok((GraphFunction::new(ball.clone(), x)?, report))
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Part vanishing on the boundary (and outside the ball).
    pub u: GraphFunction,
    /// p-harmonic part on the interior.
    pub h: GraphFunction,
    pub report: SolveReport,
}

/// `f = u + h`: `u` minimizes the energy of `f - v` over `v` supported in
/// the interior and `h = f - u`.
pub fn royden_decompose(f: &GraphFunction, p: f64, opts: &SolverOptions) -> Result<Decomposition> {
    check_p(p)?;
    opts.validate()?;
    let ball = f.ball().clone();
    if ball.radius() < 2 {
        return Err(Error::RadiusTooSmall { need: 2, have: ball.radius() });
    }
    if ball.interior().is_empty() {
        return Err(Error::EmptyInterior);
    }
    let mut h: Vec<f64> = {
        let mut init = seeded_interior(&ball, opts.seed);
        (0..ball.len()).map(|i| f.value(i) - init(i)).collect()
    };
    let report = minimize_interior(&ball, &mut h, p, opts);
    let u: Vec<f64> = f.values().iter().zip(&h).map(|(a, b)| a - b).collect();
    let u = GraphFunction::new(ball.clone(), u)?.with_tail(TailRule::ZeroOutside)?;
    let h = GraphFunction::new(ball, h)?;
    Ok(Decomposition { u, h, report })
}

/// Runs the decomposition once per seed and measures how far the harmonic
/// parts are from differing by constants: the largest `sup - inf` of
/// `h_i - h_j` over all pairs.
pub fn decomposition_unique_up_to_constant(
    f: &GraphFunction,
    p: f64,
    opts: &SolverOptions,
    seeds: &[u64],
    tol: f64,
) -> Result<(bool, f64)> {
    if seeds.len() < 2 {
        return Err(Error::InvalidParameter("need at least two seeds".into()));
    }
    let hs = seeds
        .iter()
        .map(|&s| royden_decompose(f, p, &opts.with_seed(s)).map(|d| d.h.into_values()))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            let diff: Vec<f64> = hs[i].iter().zip(&hs[j]).map(|(a, b)| a - b).collect();
            worst = worst.max(spread(&diff));
        }
    }
    Ok((worst <= tol, worst))
}

/// Finite-scale verdict: the harmonic part of `f` is constant within `tol`.
pub fn reduced_class_is_trivial(f: &GraphFunction, p: f64, opts: &SolverOptions, tol: f64) -> Result<bool> {
    let d = royden_decompose(f, p, opts)?;
    Ok(spread(d.h.values()) <= tol)
}
