//! Finite-scale checks of the amenability, Sobolev and isoperimetric
//! inequalities, the mean-value bound, and the explicit example on `Z`.
//!
//! Ratio searches share one engine: a list of deterministic candidates
//! (indicators of sub-balls, which include `δ_e`) followed by seeded random
//! trials, each a function with finite support inside the ball and zero
//! outside. Energies of candidates are summed over the support only; the
//! witness of the maximum is re-evaluated through the dense kernels.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{check_p, dp_energy, lp_norm, GraphFunction, TailRule};
use crate::group::{make_group, CayleyBall, Element, GroupSpec, OUT_OF_BALL};
use crate::numeric::{abs_pow, CompensatedSum};
use crate::sampling::{random_connected_set, random_sparse_function, trial_rng};

/// Relative slack for comparisons that are exact ties in real arithmetic.
const TIE: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Følner profiles

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FolnerRecord {
    pub k: usize,
    pub size: usize,
    pub boundary_size: usize,
    /// `|∂G_k| / |G_k|`.
    pub ratio: f64,
    /// `‖f_k‖_{D(p)}` with `f_k = χ_k / |G_k|^{1/p}`.
    pub folner_norm: f64,
    /// `‖f_k‖_{D(p)}^p`.
    pub folner_energy: f64,
    /// Ordered pairs `(x, s)` with `x ∈ G_k`, `x s ∉ G_k`.
    pub cut_pairs: usize,
    /// `2 |∂G_k| / |G_k|`.
    pub literal_bound: f64,
    /// `2 |S| |∂G_k| / |G_k|`.
    pub corrected_bound: f64,
    pub literal_holds: bool,
    pub corrected_holds: bool,
}

/// Følner data for the balls `G_k = B_k`, `k = 1..=k_max`.
pub fn folner_profile(spec: GroupSpec, k_max: usize, p: f64) -> Result<Vec<FolnerRecord>> {
    check_p(p)?;
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let ball = make_group(spec)?.build_ball(k_max + 1)?.into_shared();
    let deg = ball.degree() as f64;
    (1..=k_max)
        .map(|k| {
            let set = ball.sub_ball(k);
            let boundary = ball.subset_boundary(&set)?;
            let member: Vec<bool> = (0..ball.len()).map(|i| ball.distance(i) <= k).collect();
            let cut_pairs = set
                .iter()
                .map(|&x| ball.neighbor_row(x).iter().filter(|&&j| j == OUT_OF_BALL || !member[j as usize]).count())
                .sum();
            let size = set.len();
            let fk = GraphFunction::indicator(ball.clone(), &set).map(|v| v / (size as f64).powf(1.0 / p))?;
            let folner_energy = dp_energy(&fk, p)?;
            let ratio = boundary.len() as f64 / size as f64;
            let literal_bound = 2.0 * ratio;
            let corrected_bound = 2.0 * deg * ratio;
            Ok(FolnerRecord {
                k,
                size,
                boundary_size: boundary.len(),
                ratio,
                folner_norm: folner_energy.powf(1.0 / p),
                folner_energy,
                cut_pairs,
                literal_bound,
                corrected_bound,
                literal_holds: folner_energy <= literal_bound * (1.0 + TIE),
                corrected_holds: folner_energy <= corrected_bound * (1.0 + TIE),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Ratio searches

/// Which inequality a report estimates the constant of.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckKind {
    /// `‖u‖_p / ‖u‖_{D(p)}`.
    Gerl { p: f64 },
    /// `‖f‖_{d/(d-1)} / ‖f‖_{D(1)}`.
    SobolevSd { d: f64 },
    /// `‖f‖_{pd/(d-p)} / ‖f‖_{D(p)}`.
    SobolevPd { p: f64, d: f64 },
    /// `|A|^{d-1} / |∂A|^d`.
    Isoperimetric { d: f64 },
}

impl CheckKind {
    pub fn id(&self) -> &'static str {
        match self {
            CheckKind::Gerl { .. } => "gerl",
            CheckKind::SobolevSd { .. } => "sobolev_sd",
            CheckKind::SobolevPd { .. } => "sobolev_pd",
            CheckKind::Isoperimetric { .. } => "isoperimetric",
        }
    }

    /// `(r, p)` for `‖f‖_r / ‖f‖_{D(p)}`.
    fn exponents(&self) -> Option<(f64, f64)> {
        match *self {
            CheckKind::Gerl { p } => Some((p, p)),
            CheckKind::SobolevSd { d } => Some((d / (d - 1.0), 1.0)),
            CheckKind::SobolevPd { p, d } => Some((p * d / (d - p), p)),
            CheckKind::Isoperimetric { .. } => None,
        }
    }
}

/// Sparse function (or vertex set, with unit values) attaining the maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub vertices: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub label: String,
    pub ratio: f64,
}

/// Same search repeated on a smaller ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub radius: usize,
    pub constant: f64,
    /// `max / min` of the two constants.
    pub change: f64,
    pub limit: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub kind: CheckKind,
    pub group: String,
    pub radius: usize,
    pub trials: usize,
    pub seed: u64,
    /// Largest ratio over all candidates.
    pub constant: f64,
    pub witness: Witness,
    pub pass: bool,
    pub ceiling: Option<f64>,
    pub stability: Option<Stability>,
    /// Lower bound the constant must reach on an amenable group.
    pub divergence_bound: Option<f64>,
    pub skipped: usize,
    pub notes: Vec<String>,
    pub samples: Vec<Sample>,
}

impl InequalityReport {
    /// Sets `pass` to `constant ≤ ceiling` (and any stability verdict).
    pub fn with_ceiling(mut self, ceiling: f64) -> Self {
        self.ceiling = Some(ceiling);
        self.pass = self.verdict();
        self
    }

    /// Compares against the same search on a smaller ball: stable when the
    /// larger constant is at most `limit` times the smaller.
    pub fn with_reference(mut self, reference: &InequalityReport, limit: f64) -> Self {
        let (a, b) = (self.constant, reference.constant);
        let change = a.max(b) / a.min(b);
        self.stability = Some(Stability {
            radius: reference.radius,
            constant: b,
            change,
            limit,
            stable: change <= limit,
        });
        self.pass = self.verdict();
        self
    }

    fn verdict(&self) -> bool {
        let mut ok = self.constant.is_finite();
        if let Some(c) = self.ceiling {
            ok &= self.constant <= c;
        }
        if let Some(s) = &self.stability {
            ok &= s.stable;
        }
        if let Some(b) = self.divergence_bound {
            ok &= self.constant >= b * (1.0 - TIE);
        }
        ok
    }

    /// Recomputes the witness ratio with the dense kernels on `ball`.
    pub fn reevaluate(&self, ball: &Arc<CayleyBall>) -> Result<f64> {
        if ball.radius() != self.radius || ball.group().spec().to_string() != self.group {
            return Err(Error::DomainMismatch);
        }
        let w = &self.witness;
        match self.kind.exponents() {
            Some((r, p)) => {
                let mut values = vec![0.0; ball.len()];
                for (&v, &x) in w.vertices.iter().zip(&w.values) {
                    values[v] = x;
                }
                let f = GraphFunction::new(ball.clone(), values)?.with_tail(TailRule::ZeroOutside)?;
                Ok(lp_norm(&f, r)? / dp_energy(&f, p)?.powf(1.0 / p))
            }
            None => {
                let CheckKind::Isoperimetric { d } = self.kind else { unreachable!() };
                let boundary = ball.subset_boundary(&w.vertices)?;
                Ok(iso_ratio(w.vertices.len(), boundary.len(), d))
            }
        }
    }
}

/// `Σ_g Σ_s |u(g s^{-1}) - u(g)|^p` for `u` supported on `support`, zero
/// elsewhere in the group. A pair leaving the support is matched by its
/// mirror pair entering it, so it contributes `2|u(g)|^p`.
fn support_energy(ball: &CayleyBall, support: &[(usize, f64)], member: &[f64], p: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for &(g, ug) in support {
        for &j in ball.neighbor_row(g) {
            let inside = j != OUT_OF_BALL && !member[j as usize].is_nan();
            if inside {
                acc.add(abs_pow(member[j as usize] - ug, p));
            } else {
                acc.add(2.0 * abs_pow(ug, p));
            }
        }
    }
    acc.value()
}

fn support_ratio(ball: &CayleyBall, support: &[(usize, f64)], r: f64, p: f64) -> Option<f64> {
    let mut member = vec![f64::NAN; ball.len()];
    for &(g, v) in support {
        member[g] = v;
    }
    let energy = support_energy(ball, support, &member, p);
    if energy <= 0.0 {
        return None;
    }
    let mass: f64 = support.iter().map(|&(_, v)| abs_pow(v, r)).collect::<CompensatedSum>().value();
    Some(mass.powf(1.0 / r) / energy.powf(1.0 / p))
}

fn iso_ratio(size: usize, boundary: usize, d: f64) -> f64 {
    (size as f64).powf(d - 1.0) / (boundary as f64).powf(d)
}

/// A candidate generator: `fixed` deterministic functions, then `trials`
/// random ones, each produced on demand from its index.
struct Search<'a> {
    ball: &'a CayleyBall,
    fixed: Vec<(String, Vec<(usize, f64)>)>,
    trials: usize,
    seed: u64,
    allowed: Vec<bool>,
    max_size: usize,
    range: std::ops::Range<f64>,
}

impl Search<'_> {
    fn candidate(&self, index: usize) -> (String, Vec<(usize, f64)>) {
        if index < self.fixed.len() {
            return self.fixed[index].clone();
        }
        let t = (index - self.fixed.len()) as u64;
        let mut rng = trial_rng(self.seed, t);
        let f = random_sparse_function(self.ball, &self.allowed, self.max_size, self.range.clone(), &mut rng);
        (format!("trial {t}"), f)
    }

    fn run(&self, evaluate: impl Fn(&[(usize, f64)]) -> Option<f64> + Sync) -> (Vec<Option<f64>>, Option<usize>) {
        let total = self.fixed.len() + self.trials;
        let ratios: Vec<Option<f64>> = (0..total)
            .into_par_iter()
            .map(|i| evaluate(&self.candidate(i).1).filter(|r| r.is_finite()))
            .collect();
        // first index wins ties, independent of scheduling
        let best = ratios
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|r| (i, r)))
            .fold(None::<(usize, f64)>, |acc, (i, r)| match acc {
                Some((_, b)) if b >= r => acc,
                _ => Some((i, r)),
            })
            .map(|(i, _)| i);
        (ratios, best)
    }
}

fn sub_ball_indicators(ball: &CayleyBall, max_k: usize) -> Vec<(String, Vec<(usize, f64)>)> {
    (0..=max_k.min(ball.radius()))
        .map(|k| (format!("ball k={k}"), ball.sub_ball(k).into_iter().map(|v| (v, 1.0)).collect()))
        .collect()
}

fn interior_mask(ball: &CayleyBall) -> (Vec<bool>, usize) {
    let allowed: Vec<bool> = (0..ball.len()).map(|i| ball.is_interior(i)).collect();
    let n = allowed.iter().filter(|&&a| a).count();
    (allowed, n)
}

fn norm_ratio_search(ball: &CayleyBall, kind: CheckKind, trials: usize, seed: u64) -> Result<InequalityReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let (r, p) = kind.exponents().expect("norm ratio");
    let (allowed, interior) = interior_mask(ball);
    if interior == 0 {
        return Err(Error::EmptyInterior);
    }
    let search = Search {
        ball,
        fixed: sub_ball_indicators(ball, ball.radius()),
        trials,
        seed,
        allowed,
        max_size: (interior / 2).max(1),
        range: -1.0..1.0,
    };
    let (ratios, best) = search.run(|f| support_ratio(ball, f, r, p));
    finish(ball, kind, &search, ratios, best, 1.0)
}

fn finish(
    ball: &CayleyBall,
    kind: CheckKind,
    search: &Search<'_>,
    ratios: Vec<Option<f64>>,
    best: Option<usize>,
    unit: f64,
) -> Result<InequalityReport> {
    let best = best.ok_or_else(|| Error::InvalidParameter("every candidate was degenerate".into()))?;
    let (label, f) = search.candidate(best);
    let samples: Vec<Sample> = ratios
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|ratio| Sample { label: search.candidate_label(i), ratio }))
        .collect();
    let report = InequalityReport {
        id: kind.id().to_string(),
        kind,
        group: ball.group().spec().to_string(),
        radius: ball.radius(),
        trials: search.trials,
        seed: search.seed,
        constant: ratios[best].unwrap_or(0.0),
        witness: Witness {
            label,
            vertices: f.iter().map(|&(v, _)| v).collect(),
            values: f.iter().map(|&(_, x)| x * unit).collect(),
        },
        pass: true,
        ceiling: None,
        stability: None,
        divergence_bound: None,
        skipped: ratios.iter().filter(|r| r.is_none()).count(),
        notes: Vec::new(),
        samples,
    };
    Ok(report)
}

impl Search<'_> {
    fn candidate_label(&self, index: usize) -> String {
        if index < self.fixed.len() {
            self.fixed[index].0.clone()
        } else {
            format!("trial {}", index - self.fixed.len())
        }
    }
}

/// Empirical `C_p` in `‖u‖_p ≤ C_p ‖u‖_{D(p)}`.
///
/// Candidates are the normalized ball indicators `f_k` (`k = 0` is `δ_e`)
/// and `trials` random functions. On an amenable family the report passes
/// when the constant reaches `(|G_k| / (2|∂G_k|))^{1/p}` for the largest
/// `k ≤ R - 1`; otherwise when the same search on the radius `R - 2` ball
/// gives a constant within 20%.
pub fn gerl_ratio_search(ball: &Arc<CayleyBall>, p: f64, trials: usize, seed: u64) -> Result<InequalityReport> {
    check_p(p)?;
    let kind = CheckKind::Gerl { p };
    let report = norm_ratio_search(ball, kind, trials, seed)?;
    let spec = ball.group().spec();
    if spec.is_amenable() {
        let k = ball.radius().checked_sub(1).filter(|&k| k >= 1).ok_or(Error::RadiusTooSmall { need: 2, have: ball.radius() })?;
        let set = ball.sub_ball(k);
        let boundary = ball.subset_boundary(&set)?;
        let bound = (set.len() as f64 / (2.0 * boundary.len() as f64)).powf(1.0 / p);
        let mut report = report;
        report.divergence_bound = Some(bound);
        report.notes.push(format!("amenable: f_{k} must certify ratio ≥ {bound}"));
        report.pass = report.verdict();
        Ok(report)
    } else {
        let small = ball.radius().checked_sub(2).filter(|&r| r >= 2).ok_or(Error::RadiusTooSmall { need: 4, have: ball.radius() })?;
        let reference_ball = ball.group().build_ball(small)?;
        let reference = norm_ratio_search(&reference_ball, kind, trials, seed)?;
        Ok(report.with_reference(&reference, 1.2))
    }
}

/// Empirical `C` in `‖f‖_{d/(d-1)} ≤ C ‖f‖_{D(1)}` over sub-ball
/// indicators and random functions.
pub fn sobolev_sd_check(ball: &Arc<CayleyBall>, d: f64, trials: usize, seed: u64) -> Result<InequalityReport> {
    if !(d > 1.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(format!("d must exceed 1, got {d}")));
    }
    norm_ratio_search(ball, CheckKind::SobolevSd { d }, trials, seed)
}

/// Empirical `C'` in `‖f‖_{pd/(d-p)} ≤ C' ‖f‖_{D(p)}`. Exponents `p > 2`
/// are accepted with a note in the report.
pub fn sobolev_pd_check(ball: &Arc<CayleyBall>, p: f64, d: f64, trials: usize, seed: u64) -> Result<InequalityReport> {
    check_p(p)?;
    if !(d > p && d.is_finite()) {
        return Err(Error::InvalidParameter(format!("need d > p, got d={d}, p={p}")));
    }
    let mut report = norm_ratio_search(ball, CheckKind::SobolevPd { p, d }, trials, seed)?;
    if p > 2.0 {
        report.notes.push("p > 2: beyond the hypothesis p ≤ 2".into());
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Isoperimetry

/// Finite sets fed to [`isoperimetric_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetFamily {
    /// `B_k` for `k < R`.
    Balls,
    /// Cubes of side `n` in `Z^d` that fit strictly inside the ball.
    Boxes,
    RandomConnected { count: usize, seed: u64 },
    Explicit { sets: Vec<Vec<usize>> },
}

/// Lattice cubes `[-m, n-1-m]^d` with `m = ⌊(n-1)/2⌋` inside distance `R-1`.
fn lattice_boxes(ball: &CayleyBall) -> Result<Vec<(String, Vec<usize>)>> {
    let GroupSpec::FreeAbelian { rank } = ball.group().spec() else {
        return Err(Error::InvalidParameter("boxes need a free abelian group".into()));
    };
    let mut out = Vec::new();
    for n in 1.. {
        let m = (n - 1) / 2;
        let far = (n - 1 - m) as usize * rank;
        if far + 1 > ball.radius() {
            break;
        }
        let lo = -(m as i64);
        let side = n as usize;
        let mut set = Vec::with_capacity(side.pow(rank as u32));
        let mut coords = vec![lo; rank];
        'outer: loop {
            set.push(ball.index_of(&Element::Lattice(coords.clone())).expect("box inside ball"));
            for c in coords.iter_mut() {
                *c += 1;
                if *c < lo + n as i64 {
                    continue 'outer;
                }
                *c = lo;
            }
            break;
        }
        set.sort_unstable();
        out.push((format!("box n={n}"), set));
    }
    Ok(out)
}

/// Empirical `C` in `|A|^{d-1} ≤ C |∂A|^d` over a family of finite sets.
pub fn isoperimetric_check(ball: &Arc<CayleyBall>, d: f64, family: &SetFamily) -> Result<InequalityReport> {
    if !(d >= 1.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(format!("d must be at least 1, got {d}")));
    }
    let (sets, trials, seed): (Vec<(String, Vec<usize>)>, usize, u64) = match family {
        SetFamily::Balls => {
            ((0..ball.radius()).map(|k| (format!("ball k={k}"), ball.sub_ball(k))).collect(), 0, 0)
        }
        SetFamily::Boxes => (lattice_boxes(ball)?, 0, 0),
        SetFamily::Explicit { sets } => {
            (sets.iter().enumerate().map(|(i, s)| (format!("set {i}"), s.clone())).collect(), 0, 0)
        }
        SetFamily::RandomConnected { count, seed } => {
            if *count == 0 {
                return Err(Error::InvalidParameter("count must be at least 1".into()));
            }
            let allowed: Vec<bool> = (0..ball.len()).map(|i| ball.distance(i) < ball.radius()).collect();
            let max_size = (allowed.iter().filter(|&&a| a).count() / 2).max(1);
            let sets = (0..*count)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(*seed, t as u64);
                    let size = rand::Rng::gen_range(&mut rng, 1..=max_size);
                    (format!("trial {t}"), random_connected_set(ball, &allowed, size, &mut rng))
                })
                .collect();
            (sets, *count, *seed)
        }
    };
    let kind = CheckKind::Isoperimetric { d };
    let mut ratios = Vec::with_capacity(sets.len());
    for (_, set) in &sets {
        if set.is_empty() {
            ratios.push(None);
            continue;
        }
        let boundary = ball.subset_boundary(set)?;
        ratios.push(Some(iso_ratio(set.len(), boundary.len(), d)));
    }
    let best = ratios
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|r| (i, r)))
        .fold(None::<(usize, f64)>, |acc, (i, r)| match acc {
            Some((_, b)) if b >= r => acc,
            _ => Some((i, r)),
        })
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidParameter("every set was empty".into()))?;
    let samples = sets
        .iter()
        .zip(&ratios)
        .filter_map(|((label, _), r)| r.map(|ratio| Sample { label: label.clone(), ratio }))
        .collect();
    let (label, set) = sets[best].clone();
    Ok(InequalityReport {
        id: kind.id().to_string(),
        kind,
        group: ball.group().spec().to_string(),
        radius: ball.radius(),
        trials,
        seed,
        constant: ratios[best].unwrap_or(0.0),
        witness: Witness { label, values: vec![1.0; set.len()], vertices: set },
        pass: true,
        ceiling: None,
        stability: None,
        divergence_bound: None,
        skipped: ratios.iter().filter(|r| r.is_none()).count(),
        notes: Vec::new(),
        samples,
    })
}

// ---------------------------------------------------------------------------
// Mean-value bound

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanValueCheck {
    /// `‖f^t‖_{D(1)}`.
    pub lhs: f64,
    /// `2t Σ_g f^{t-1}(g) Σ_s |f(g s^{-1}) - f(g)|`.
    pub rhs: f64,
    pub pass: bool,
}

/// Both sides of `‖f^t‖_{D(1)} ≤ 2t Σ_g f^{t-1}(g) Σ_s |(f*(s-1))(g)|` for a
/// nonnegative `f` supported in the interior of its ball (zero beyond).
pub fn mean_value_bound_check(f: &GraphFunction, t: f64) -> Result<MeanValueCheck> {
    if !(t >= 2.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must be at least 2, got {t}")));
    }
    let ball = f.ball();
    for (i, &v) in f.values().iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(i));
        }
        if v < 0.0 {
            return Err(Error::NegativeValue { vertex: i, value: v });
        }
        if v != 0.0 && !ball.is_interior(i) {
            return Err(Error::InvalidParameter(format!("support must lie in the interior (vertex {i})")));
        }
    }
    let power = GraphFunction::new(ball.clone(), f.values().iter().map(|v| v.powf(t)).collect())?
        .with_tail(TailRule::ZeroOutside)?;
    let lhs = dp_energy(&power, 1.0)?;
    let mut rhs = CompensatedSum::new();
    for (g, &fg) in f.values().iter().enumerate() {
        if fg == 0.0 {
            continue;
        }
        let variation: f64 = ball.neighbor_row(g).iter().map(|&j| (f.values()[j as usize] - fg).abs()).sum();
        rhs.add(fg.powf(t - 1.0) * variation);
    }
    let rhs = 2.0 * t * rhs.value();
    Ok(MeanValueCheck { lhs, rhs, pass: lhs <= rhs + 1e-12 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanValueSuite {
    pub group: String,
    pub radius: usize,
    pub trials: usize,
    pub seed: u64,
    pub exponents: Vec<f64>,
    pub checks: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` seen.
    pub worst_ratio: f64,
    pub pass: bool,
}

/// Random nonnegative functions (values uniform in `[0, 1)` on random
/// connected interior supports), each checked for every `t` in `exponents`.
pub fn mean_value_suite(ball: &Arc<CayleyBall>, exponents: &[f64], trials: usize, seed: u64) -> Result<MeanValueSuite> {
    let (allowed, interior) = interior_mask(ball);
    if interior == 0 {
        return Err(Error::EmptyInterior);
    }
    let results: Vec<Result<Vec<MeanValueCheck>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let support = random_sparse_function(ball, &allowed, (interior / 2).max(1), 0.0..1.0, &mut rng);
            let mut values = vec![0.0; ball.len()];
            for (v, x) in support {
                values[v] = x;
            }
            let f = GraphFunction::new(ball.clone(), values)?;
            exponents.iter().map(|&t| mean_value_bound_check(&f, t)).collect()
        })
        .collect();
    let mut checks = 0;
    let mut violations = 0;
    let mut worst_ratio = 0.0f64;
    for r in results {
        for c in r? {
            checks += 1;
            violations += usize::from(!c.pass);
            if c.rhs > 0.0 {
                worst_ratio = worst_ratio.max(c.lhs / c.rhs);
            }
        }
    }
    Ok(MeanValueSuite {
        group: ball.group().spec().to_string(),
        radius: ball.radius(),
        trials,
        seed,
        exponents: exponents.to_vec(),
        checks,
        violations,
        worst_ratio,
        pass: violations == 0,
    })
}

// ---------------------------------------------------------------------------
// The example f(n) = n^{-1/p} on Z

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZExampleReport {
    pub p: f64,
    pub p_prime: f64,
    pub n: u64,
    /// `Σ_{n=1}^N |f(n)|^p`, the harmonic partial sum.
    pub lp_partial: f64,
    /// `lp_partial(N) - lp_partial(⌊N/2⌋)`.
    pub lp_half_gain: f64,
    pub lp_diverging: bool,
    /// `Σ_{n=1}^N |f(n)|^{p'}`.
    pub lpprime_partial: f64,
    /// `Σ_{n=⌊N/2⌋}^{N} |f(n)|^{p'}`.
    pub lpprime_tail: f64,
    pub lpprime_tail_ratio: f64,
    pub cauchy_eps: f64,
    pub lpprime_cauchy: bool,
    /// `Σ_{n=1}^N |f(n-1) - f(n)|^p`.
    pub difference_sum: f64,
    /// `1 + Σ_{n=2}^N (n-1)^{-2}`.
    pub comparison_sum: f64,
    /// `1 + π²/6`.
    pub limit: f64,
    pub bound_holds: bool,
    pub in_dp: bool,
    pub pass: bool,
}

pub const DEFAULT_CAUCHY_EPS: f64 = 0.05;

/// `f(n-1) - f(n)` for `f(n) = n^{-1/p}` (`f(0) = 0`), without cancellation.
fn z_step(n: u64, p: f64) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let x = n as f64;
    // (n-1)^{-1/p} - n^{-1/p} = n^{-1/p} ((1 - 1/n)^{-1/p} - 1)
    x.powf(-1.0 / p) * (-(-1.0 / x).ln_1p() / p).exp_m1()
}

pub fn z_example(p: f64, p_prime: f64, n: u64, cauchy_eps: f64) -> Result<ZExampleReport> {
    check_p(p)?;
    if !(p_prime > p && p_prime.is_finite()) {
        return Err(Error::InvalidParameter(format!("need p' > p, got p'={p_prime}, p={p}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if !(cauchy_eps > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let half = n / 2;
    let mut lp = CompensatedSum::new();
    let mut lp_half = 0.0;
    let mut lq = CompensatedSum::new();
    let mut lq_tail = CompensatedSum::new();
    let mut diff = CompensatedSum::new();
    let mut comparison = CompensatedSum::new();
    comparison.add(1.0);
    let mut bound_holds = true;
    for k in 1..=n {
        let x = k as f64;
        lp.add(1.0 / x);
        if k == half {
            lp_half = lp.value();
        }
        let q = x.powf(-p_prime / p);
        lq.add(q);
        if k >= half.max(1) {
            lq_tail.add(q);
        }
        let step = abs_pow(z_step(k, p), p);
        diff.add(step);
        if k >= 2 {
            let c = 1.0 / ((x - 1.0) * (x - 1.0));
            bound_holds &= step <= c;
            comparison.add(c);
        }
    }
    let limit = 1.0 + std::f64::consts::PI.powi(2) / 6.0;
    let difference_sum = diff.value();
    let comparison_sum = comparison.value();
    bound_holds &= difference_sum <= comparison_sum && comparison_sum < limit;
    let lp_partial = lp.value();
    let lp_half_gain = lp_partial - lp_half;
    let lpprime_partial = lq.value();
    let lpprime_tail = lq_tail.value();
    let lpprime_tail_ratio = lpprime_tail / lpprime_partial;
    let lpprime_cauchy = lpprime_tail_ratio <= cauchy_eps;
    Ok(ZExampleReport {
        p,
        p_prime,
        n,
        lp_partial,
        lp_half_gain,
        lp_diverging: lp_half_gain >= 0.6,
        lpprime_partial,
        lpprime_tail,
        lpprime_tail_ratio,
        cauchy_eps,
        lpprime_cauchy,
        difference_sum,
        comparison_sum,
        limit,
        bound_holds,
        in_dp: bound_holds,
        pass: bound_holds,
    })
}

// ---------------------------------------------------------------------------
// Maximum principle

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleScan {
    /// `max |Δ_p h|` over the interior.
    pub harmonic_residual: f64,
    pub harmonic: bool,
    pub max: f64,
    pub min: f64,
    pub boundary_max: f64,
    pub boundary_min: f64,
    pub constant: bool,
    pub pass: bool,
}

/// Whether the extremes of `h` over the ball are attained on the
/// non-interior vertices, within `tol`. Region = interior of the ball.
pub fn max_principle_scan(h: &GraphFunction, p: f64, tol: f64) -> Result<MaxPrincipleScan> {
    check_p(p)?;
    let ball = h.ball();
    let interior = ball.interior();
    let (harmonic, harmonic_residual) = crate::function::is_p_harmonic(h, p, &interior, tol)?;
    let fold = |it: &mut dyn Iterator<Item = f64>| {
        it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (min, max) = fold(&mut h.values().iter().copied());
    let (boundary_min, boundary_max) =
        fold(&mut (0..ball.len()).filter(|&i| !ball.is_interior(i)).map(|i| h.value(i)));
    let constant = max - min <= tol;
    let pass = constant || (max <= boundary_max + tol && min >= boundary_min - tol);
    Ok(MaxPrincipleScan { harmonic_residual, harmonic, max, min, boundary_max, boundary_min, constant, pass })
}
