//! The Markov operator `P = |S|^{-1} Σ_s s`, its norm, the truncated
//! Neumann series `F_K(x) = -Σ_{k≤K} x*P^k`, and the construction of a
//! nonconstant harmonic function of finite energy on a free group.
//!
//! For a function `h1` that is constant on each of two unions of branches,
//! `x = h1*(P - I)` is finitely supported. With `h2 = F_K(x)` and
//! `h = h1 - h2 = h1 + Σ_{k≤K} x*P^k` the harmonic defect telescopes to
//! `h*(P - I) = x*P^{K+1}`, which decays like `‖P‖^{K+1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{GraphFunction, PartialFunction, TailRule};
use crate::group::{free_ball_size, GroupSpec, DEFAULT_VERTEX_BUDGET};
use crate::numeric::{signed_pow, spread};
use crate::solver::{royden_decompose, SolverOptions};
use crate::walk::{markov_zero_outside, support_radius, weighted_lp_mass, weighted_lp_norm, FreeBranchQuotient, WalkSpace};

/// `(f*P)(g)` wherever every neighbour of `g` resolves.
pub fn apply_markov(f: &GraphFunction) -> PartialFunction {
    let ball = f.ball();
    let deg = ball.degree();
    let mut values = vec![0.0; f.len()];
    let mut defined = vec![false; f.len()];
    for i in 0..f.len() {
        let mut acc = 0.0;
        let mut ok = true;
        for s in 0..deg {
            match f.neighbor_value(i, s) {
                Some(v) => acc += v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            values[i] = acc / deg as f64;
            defined[i] = true;
        }
    }
    PartialFunction { values, defined }
}

/// Like [`apply_markov`] but fails on the first unresolvable vertex.
pub fn apply_markov_full(f: &GraphFunction) -> Result<GraphFunction> {
    let out = apply_markov(f);
    if let Some(i) = out.defined.iter().position(|d| !d) {
        let s = (0..f.ball().degree()).find(|&s| f.neighbor_value(i, s).is_none()).unwrap_or(0);
        return Err(Error::Unresolvable { vertex: i, generator: s });
    }
    let tail = f.tail().clone();
    GraphFunction::new(f.ball().clone(), out.values)?.with_tail(match tail {
        TailRule::ZeroOutside => TailRule::ZeroOutside,
        _ => TailRule::Unknown,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    /// Power iteration for `p = 2`: a certified lower bound on `‖P‖_2`.
    Certified,
    /// Best ratio found for `p ≠ 2`: a lower bound with no convergence guarantee.
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub kind: EstimateKind,
    /// Successive ratios agreed to `1e-12` relative before the budget ran out.
    pub stabilized: bool,
    pub iterations: usize,
}

const NORM_RTOL: f64 = 1e-12;

/// Lower bound on `‖P‖_p` from the operator `Q` sending functions supported
/// on interior cells to their image under `P` (which stays inside the space).
///
/// Runs the ℓ^p power method `x ← ψ_q(Q^T ψ_p(Q x))` with `ψ_r(y) =
/// |y|^{r-2} y`; for `p = 2` this is power iteration on `Q^T Q`. Every
/// iterate's ratio `‖Qx‖_p / ‖x‖_p` is a valid lower bound, so the maximum
/// seen is returned.
pub fn operator_norm_estimate<W: WalkSpace>(space: &W, p: f64, iters: usize) -> Result<NormEstimate> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    if iters == 0 {
        return Err(Error::InvalidParameter("iters must be >= 1".into()));
    }
    let n = space.num_cells();
    let interior: Vec<bool> = (0..n).map(|c| space.is_interior(c)).collect();
    if !interior.iter().any(|&b| b) {
        return Err(Error::EmptyInterior);
    }
    let q = if p > 1.0 { p / (p - 1.0) } else { f64::INFINITY };
    let kind = if p == 2.0 { EstimateKind::Certified } else { EstimateKind::Heuristic };

    let mut x: Vec<f64> = interior.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mut y = vec![0.0; n];
    let mut best = 0.0f64;
    let mut previous = f64::NAN;
    let mut stabilized = false;
    let mut done = 0;
    for it in 0..iters {
        done = it + 1;
        let norm_x = weighted_lp_norm(space, &x, p);
        markov_zero_outside(space, &x, &mut y);
        let ratio = weighted_lp_norm(space, &y, p) / norm_x;
        best = best.max(ratio);
        if (ratio - previous).abs() <= NORM_RTOL * ratio {
            stabilized = true;
            break;
        }
        previous = ratio;
        if p == 1.0 {
            break;
        }
        for v in y.iter_mut() {
            *v = signed_pow(*v, p);
        }
        markov_zero_outside(space, &y, &mut x);
        for (c, v) in x.iter_mut().enumerate() {
            *v = if interior[c] { signed_pow(*v, q) } else { 0.0 };
        }
        let norm = weighted_lp_norm(space, &x, p);
        if !(norm > 0.0 && norm.is_finite()) {
            break;
        }
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
    Ok(NormEstimate { value: best, kind, stabilized, iterations: done })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeumannSum {
    /// `-Σ_{k≤K} rhs*P^k`.
    pub sum: Vec<f64>,
    /// `‖rhs‖_p ρ^{K+1} / (1 - ρ)`.
    pub tail_bound: f64,
    /// `‖rhs*P^k‖_p` for `k = 0..=K`, i.e. the partial-sum increments.
    pub increments: Vec<f64>,
}

/// Truncated Neumann series `F_K(rhs) = -Σ_{k=0}^{K} rhs*P^k`.
///
/// `rhs` is finitely supported (zero outside the space); its support radius
/// plus `K` must fit in the space so that no iterate is truncated.
pub fn neumann_apply<W: WalkSpace>(space: &W, rhs: &[f64], terms: usize, p: f64, rho: f64) -> Result<NeumannSum> {
    if space.spec().is_amenable() {
        return Err(Error::Amenable(space.spec().to_string()));
    }
    if !(rho < 1.0) {
        return Err(Error::NotContracting(rho));
    }
    if rhs.len() != space.num_cells() {
        return Err(Error::InvalidParameter("rhs has the wrong number of cells".into()));
    }
    let support = support_radius(space, rhs).unwrap_or(0);
    let need = support + terms;
    if space.radius() < need {
        return Err(Error::RadiusTooSmall { need, have: space.radius() });
    }
    let mut term = rhs.to_vec();
    let mut next = vec![0.0; rhs.len()];
    let mut sum = vec![0.0; rhs.len()];
    let mut increments = Vec::with_capacity(terms + 1);
    for k in 0..=terms {
        for (s, t) in sum.iter_mut().zip(&term) {
            *s -= t;
        }
        increments.push(weighted_lp_norm(space, &term, p));
        if k < terms {
            markov_zero_outside(space, &term, &mut next);
            std::mem::swap(&mut term, &mut next);
        }
    }
    let tail_bound = weighted_lp_norm(space, rhs, p) * rho.powi(terms as i32 + 1) / (1.0 - rho);
    Ok(NeumannSum { sum, tail_bound, increments })
}

/// Neumann series on an explicit ball, with `ρ` estimated on the same ball.
pub fn neumann_apply_fn(rhs: &GraphFunction, terms: usize, p: f64) -> Result<(GraphFunction, f64)> {
    let ball = rhs.ball();
    let rho = operator_norm_estimate(ball.as_ref(), p, 2000)?.value;
    let out = neumann_apply(ball.as_ref(), rhs.values(), terms, p, rho)?;
    let f = GraphFunction::new(ball.clone(), out.sum)?.with_tail(TailRule::ZeroOutside)?;
    Ok((f, out.tail_bound))
}

/// Two disjoint unions of branches left after removing a ball.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndsPartition {
    pub removed: Vec<usize>,
    /// Branches through the first generator.
    pub x1: Vec<usize>,
    /// All other branches.
    pub x2: Vec<usize>,
}

fn check_free<W: WalkSpace>(space: &W) -> Result<()> {
    match space.spec() {
        GroupSpec::Free { .. } => Ok(()),
        other if other.is_amenable() => Err(Error::Amenable(other.to_string())),
        other => Err(Error::InvalidGroup(other.to_string())),
    }
}

/// Removes the radius-`r` ball and splits the rest into the first
/// generator's branch and everything else.
pub fn build_ends_partition<W: WalkSpace>(space: &W, removal_radius: usize) -> Result<EndsPartition> {
    check_free(space)?;
    if space.radius() <= removal_radius + 1 {
        return Err(Error::RadiusTooSmall { need: removal_radius + 2, have: space.radius() });
    }
    let mut part = EndsPartition { removed: Vec::new(), x1: Vec::new(), x2: Vec::new() };
    for c in 0..space.num_cells() {
        if space.level(c) <= removal_radius {
            part.removed.push(c);
        } else if space.branch(c) == Some(0) {
            part.x1.push(c);
        } else {
            part.x2.push(c);
        }
    }
    Ok(part)
}

/// `2` on `X1`, `1` on `X2`, `0` on the removed ball.
fn two_level_function<W: WalkSpace>(space: &W, part: &EndsPartition) -> Vec<f64> {
    let mut h1 = vec![0.0; space.num_cells()];
    for &c in &part.x1 {
        h1[c] = 2.0;
    }
    for &c in &part.x2 {
        h1[c] = 1.0;
    }
    h1
}

/// `h1*(P - I)`, continuing `h1` past the outer sphere by its branch value.
fn two_level_defect<W: WalkSpace>(space: &W, h1: &[f64]) -> Vec<f64> {
    let inv = 1.0 / space.degree() as f64;
    (0..space.num_cells())
        .map(|c| {
            let mut acc = 0.0;
            space.for_each_neighbor(c, |n, k| acc += k as f64 * n.map_or(h1[c], |n| h1[n]));
            acc * inv - h1[c]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Explicit ball when it fits the vertex budget, lumped model otherwise.
    Auto,
    Explicit,
    Quotient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicReport {
    pub group: String,
    pub p: f64,
    pub radius: usize,
    pub removal_radius: usize,
    pub terms: usize,
    pub backend: Backend,
    pub rho: NormEstimate,
    /// Cells whose level is at most this are certified exact.
    pub certified_level: usize,
    /// `‖h1*(I - P)‖_p`.
    pub defect_norm: f64,
    /// `‖h*(P - I)‖_p` over the certified region.
    pub residual: f64,
    pub tail_bound: f64,
    pub residual_within_bound: bool,
    /// Support of `h1*(P - I)` equals the vertices adjacent to the cut.
    pub support_matches: bool,
    /// Number of group elements in that support.
    pub support_size: f64,
    /// `sup h - inf h` over the certified region.
    pub spread: f64,
    /// `‖h2‖_p`.
    pub h2_norm: f64,
    /// `Σ |h2|^p` per sphere, levels `0..=R`.
    pub h2_shell_mass: Vec<f64>,
}

/// A harmonic function on a free-group ball, stored per cell.
#[derive(Debug, Clone)]
pub struct HarmonicConstruction {
    pub labels: Vec<String>,
    pub levels: Vec<usize>,
    pub multiplicities: Vec<f64>,
    pub h: Vec<f64>,
    pub h1: Vec<f64>,
    /// The explicit ball and `h` on it, when that backend ran.
    pub function: Option<GraphFunction>,
    pub report: HarmonicReport,
}

fn construct_on<W: WalkSpace>(
    space: &W,
    p: f64,
    removal_radius: usize,
    terms: usize,
) -> Result<(Vec<f64>, Vec<f64>, HarmonicReport)> {
    let radius = space.radius();
    let need = removal_radius + terms + 2;
    if radius < need {
        return Err(Error::RadiusTooSmall { need, have: radius });
    }
    let part = build_ends_partition(space, removal_radius)?;
    let rho = operator_norm_estimate(space, p, 5000)?;
    let h1 = two_level_function(space, &part);
    let defect = two_level_defect(space, &h1);
    let neumann = neumann_apply(space, &defect, terms, p, rho.value)?;

    // h = h1 - h2 with h2 = F_K(h1*(P - I)) = neumann.sum
    let h2 = neumann.sum;
    let h: Vec<f64> = h1.iter().zip(&h2).map(|(a, b)| a - b).collect();

    let certified_level = radius - 1;
    let certified = |c: usize| space.level(c) <= certified_level;
    let hp = {
        let inv = 1.0 / space.degree() as f64;
        (0..space.num_cells())
            .map(|c| {
                if !certified(c) {
                    return 0.0;
                }
                let mut acc = 0.0;
                space.for_each_neighbor(c, |n, k| {
                    let v = match n {
                        Some(n) => h[n],
                        // outside: h2 vanishes, h1 keeps its branch value
                        None => h1[c],
                    };
                    acc += k as f64 * v;
                });
                acc * inv - h[c]
            })
            .collect::<Vec<f64>>()
    };
    let residual = weighted_lp_mass(space, &hp, p, certified).powf(1.0 / p);

    let expected_support: Vec<bool> = (0..space.num_cells())
        .map(|c| {
            let l = space.level(c);
            l == removal_radius || l == removal_radius + 1
        })
        .collect();
    let support_matches = defect.iter().zip(&expected_support).all(|(&v, &e)| (v != 0.0) == e);
    let support_size = (0..space.num_cells())
        .filter(|&c| defect[c] != 0.0)
        .map(|c| space.multiplicity(c))
        .sum();

    let region: Vec<f64> = (0..space.num_cells()).filter(|&c| certified(c)).map(|c| h[c]).collect();
    let mut shells = vec![0.0; radius + 1];
    for (c, &v) in h2.iter().enumerate() {
        shells[space.level(c)] += space.multiplicity(c) * v.abs().powf(p);
    }
    let report = HarmonicReport {
        group: space.spec().to_string(),
        p,
        radius,
        removal_radius,
        terms,
        backend: Backend::Auto,
        rho,
        certified_level,
        defect_norm: weighted_lp_norm(space, &defect, p),
        residual,
        tail_bound: neumann.tail_bound,
        residual_within_bound: residual <= neumann.tail_bound,
        support_matches,
        support_size,
        spread: spread(&region),
        h2_norm: weighted_lp_norm(space, &h2, p),
        h2_shell_mass: shells,
    };
    Ok((h, h1, report))
}

/// Builds `h = h1 - F_K(h1*(P - I))` on the radius-`R` ball of a free group
/// with the radius-`r` ball removed.
pub fn construct_harmonic(
    spec: GroupSpec,
    p: f64,
    radius: usize,
    removal_radius: usize,
    terms: usize,
    backend: Backend,
) -> Result<HarmonicConstruction> {
    crate::function::check_p(p)?;
    let rank = match spec {
        GroupSpec::Free { rank } => rank,
        other if other.is_amenable() => return Err(Error::Amenable(other.to_string())),
        other => return Err(Error::InvalidGroup(other.to_string())),
    };
    let explicit = match backend {
        Backend::Explicit => true,
        Backend::Quotient => false,
        Backend::Auto => free_ball_size(rank, radius) <= DEFAULT_VERTEX_BUDGET as u128,
    };
    let chosen = if explicit { Backend::Explicit } else { Backend::Quotient };
    if explicit {
        let ball = crate::group::make_group(spec)?.build_ball(radius)?.into_shared();
        let (h, h1, mut report) = construct_on(ball.as_ref(), p, removal_radius, terms)?;
        report.backend = chosen;
        let function = GraphFunction::new(ball.clone(), h.clone())?;
        Ok(HarmonicConstruction {
            labels: ball.elements().iter().map(|e| e.to_string()).collect(),
            levels: (0..ball.len()).map(|i| ball.distance(i)).collect(),
            multiplicities: vec![1.0; ball.len()],
            h,
            h1,
            function: Some(function),
            report,
        })
    } else {
        let q = FreeBranchQuotient::new(rank, radius)?;
        let (h, h1, mut report) = construct_on(&q, p, removal_radius, terms)?;
        report.backend = chosen;
        Ok(HarmonicConstruction {
            labels: (0..q.num_cells()).map(|c| q.cell_label(c)).collect(),
            levels: (0..q.num_cells()).map(|c| q.level(c)).collect(),
            multiplicities: (0..q.num_cells()).map(|c| q.multiplicity(c)).collect(),
            h,
            h1,
            function: None,
            report,
        })
    }
}

/// Decomposes `h` and reports whether its p-harmonic part is nonconstant:
/// `sup - inf ≥ 0.1` plus the decomposition residual.
pub fn degree_of_freedom_check(h: &GraphFunction, p: f64, opts: &SolverOptions) -> Result<(bool, f64)> {
    let d = royden_decompose(h, p, opts)?;
    let width = spread(d.h.values());
    Ok((width >= 0.1 + d.report.residual, width))
}
