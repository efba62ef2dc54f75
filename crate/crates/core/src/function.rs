//! Real-valued functions on Cayley balls and the difference kernels built on
//! them: translation differences `f*(s-1)`, `ℓ^p` and Dirichlet norms, the
//! p-Laplacian and the pairing `⟨Δ_p h, f⟩`.
//!
//! Every sum runs over ordered pairs `(g, s)`, so an undirected edge
//! contributes twice. A function on a ball is extended beyond it by its
//! [`TailRule`]; pairs whose far endpoint cannot be resolved are left out of
//! every sum.

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::{CayleyBall, Group, GroupSpec, OUT_OF_BALL};
use crate::numeric::{abs_pow, compensated_sum, signed_pow, CompensatedSum};

/// How a function continues outside its ball.
#[derive(Clone, Default)]
pub enum TailRule {
    /// Unknown outside the ball.
    #[default]
    Unknown,
    /// Zero outside the ball: a finitely supported function on the group.
    ZeroOutside,
    /// Closed form `n ↦ value` on `Z`.
    Formula(Arc<dyn Fn(i64) -> f64 + Send + Sync>),
}

impl fmt::Debug for TailRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailRule::Unknown => write!(f, "Unknown"),
            TailRule::ZeroOutside => write!(f, "ZeroOutside"),
            TailRule::Formula(_) => write!(f, "Formula(..)"),
        }
    }
}

/// Conjugate exponent pair with `1/p + 1/q = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    p: f64,
    q: f64,
}

impl Exponents {
    pub fn new(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Exponents { p, q: p / (p - 1.0) })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must be > 1, got {p}")));
    }
    Ok(())
}

fn check_norm_exponent(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("norm exponent must be >= 1, got {p}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct GraphFunction {
    ball: Arc<CayleyBall>,
    values: Vec<f64>,
    tail: TailRule,
}

impl GraphFunction {
    pub fn new(ball: Arc<CayleyBall>, values: Vec<f64>) -> Result<Self> {
        if values.len() != ball.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                ball.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(GraphFunction { ball, values, tail: TailRule::Unknown })
    }

    pub fn from_fn(ball: Arc<CayleyBall>, mut f: impl FnMut(usize) -> f64) -> Result<Self> {
        let values = (0..ball.len()).map(&mut f).collect();
        Self::new(ball, values)
    }

    pub fn zeros(ball: Arc<CayleyBall>) -> Self {
        let n = ball.len();
        GraphFunction { ball, values: vec![0.0; n], tail: TailRule::Unknown }
    }

    pub fn constant(ball: Arc<CayleyBall>, c: f64) -> Self {
        let n = ball.len();
        GraphFunction { ball, values: vec![c; n], tail: TailRule::Unknown }
    }

    /// `δ_g`, finitely supported.
    pub fn delta(ball: Arc<CayleyBall>, g: usize) -> Self {
        let mut f = Self::zeros(ball);
        f.values[g] = 1.0;
        f.tail = TailRule::ZeroOutside;
        f
    }

    /// Indicator of a vertex set, finitely supported.
    pub fn indicator(ball: Arc<CayleyBall>, set: &[usize]) -> Self {
        let mut f = Self::zeros(ball);
        for &i in set {
            f.values[i] = 1.0;
        }
        f.tail = TailRule::ZeroOutside;
        f
    }

    pub fn with_tail(mut self, tail: TailRule) -> Result<Self> {
        if let TailRule::Formula(_) = tail {
            if self.ball.group().spec() != (GroupSpec::FreeAbelian { rank: 1 }) {
                return Err(Error::InvalidParameter("formula tails are only defined on Z".into()));
            }
        }
        self.tail = tail;
        Ok(self)
    }

    pub fn ball(&self) -> &Arc<CayleyBall> {
        &self.ball
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at `g_i · s^{-1}`, resolved in the ball or through the tail rule.
    pub fn neighbor_value(&self, i: usize, s: usize) -> Option<f64> {
        match self.ball.neighbor(i, s) {
            Some(j) => Some(self.values[j]),
            None => self.tail_value(i, s),
        }
    }

    fn tail_value(&self, i: usize, s: usize) -> Option<f64> {
        match &self.tail {
            TailRule::Unknown => None,
            TailRule::ZeroOutside => Some(0.0),
            TailRule::Formula(f) => {
                let n = self.ball.group().neighbor(self.ball.element(i), s);
                n.as_integer().map(|x| f(x))
            }
        }
    }

    pub fn same_domain(&self, other: &GraphFunction) -> bool {
        Arc::ptr_eq(&self.ball, &other.ball)
            || (self.ball.group().spec() == other.ball.group().spec()
                && self.ball.radius() == other.ball.radius()
                && self.ball.len() == other.ball.len())
    }

    /// Pointwise combination on a shared ball. The result keeps a
    /// finitely-supported tail only when both inputs have one.
    pub fn zip_with(&self, other: &GraphFunction, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_domain(other) {
            return Err(Error::DomainMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect();
        let tail = match (&self.tail, &other.tail) {
            (TailRule::ZeroOutside, TailRule::ZeroOutside) => TailRule::ZeroOutside,
            _ => TailRule::Unknown,
        };
        let mut out = GraphFunction::new(self.ball.clone(), values)?;
        out.tail = tail;
        Ok(out)
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self.values.iter().map(|&x| op(x)).collect();
        let mut out = GraphFunction::new(self.ball.clone(), values)?;
        out.tail = self.tail.clone();
        Ok(out)
    }

    pub fn ball_ref(&self) -> String {
        format!("{}/R={}", self.ball.group().spec(), self.ball.radius())
    }

    pub fn to_json(&self) -> Value {
        json!({ "ball_ref": self.ball_ref(), "values": self.values })
    }

    /// `(normal form, value)` rows for CSV export.
    pub fn rows(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        self.ball.elements().iter().map(|e| e.to_string()).zip(self.values.iter().copied())
    }
}

/// A function defined only on part of a ball.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFunction {
    pub values: Vec<f64>,
    pub defined: Vec<bool>,
}

impl PartialFunction {
    pub fn defined_values(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .zip(&self.defined)
            .enumerate()
            .filter(|(_, (_, &d))| d)
            .map(|(i, (&v, _))| (i, v))
    }

    pub fn is_total(&self) -> bool {
        self.defined.iter().all(|&d| d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    /// Leave unresolvable vertices undefined.
    Partial,
    /// Fail if any vertex is unresolvable.
    Full,
}

/// `g ↦ f(g s^{-1}) - f(g)`.
pub fn translate_diff(f: &GraphFunction, s: usize, coverage: Coverage) -> Result<PartialFunction> {
    let n = f.len();
    if s >= f.ball.degree() {
        return Err(Error::InvalidParameter(format!("generator index {s} out of range")));
    }
    let mut values = vec![0.0; n];
    let mut defined = vec![false; n];
    for i in 0..n {
        match f.neighbor_value(i, s) {
            Some(v) => {
                values[i] = v - f.values[i];
                defined[i] = true;
            }
            None if coverage == Coverage::Full => {
                return Err(Error::Unresolvable { vertex: i, generator: s })
            }
            None => {}
        }
    }
    Ok(PartialFunction { values, defined })
}

/// `(Σ_g |f(g)|^p)^{1/p}` over the ball (all of the group when the tail is zero).
pub fn lp_norm(f: &GraphFunction, p: f64) -> Result<f64> {
    check_norm_exponent(p)?;
    Ok(crate::numeric::lp_norm_of(&f.values, p))
}

/// `Σ_s ‖f*(s-1)‖_p^p` over every resolvable ordered pair.
///
/// For a zero tail this is the exact sum over the whole group: the pairs
/// `(g', s)` with `g'` outside the ball and `g' s^{-1}` inside mirror the
/// in-ball vertices' outward pairs.
pub fn dp_energy(f: &GraphFunction, p: f64) -> Result<f64> {
    check_norm_exponent(p)?;
    let ball = &f.ball;
    let deg = ball.degree();
    let zero_tail = matches!(f.tail, TailRule::ZeroOutside);
    let mut acc = CompensatedSum::new();
    for i in 0..f.len() {
        let fi = f.values[i];
        for s in 0..deg {
            match ball.neighbor(i, s) {
                Some(j) => acc.add(abs_pow(f.values[j] - fi, p)),
                None => {
                    if let Some(v) = f.tail_value(i, s) {
                        acc.add(abs_pow(v - fi, p));
                        if zero_tail {
                            acc.add(abs_pow(fi, p));
                        }
                    }
                }
            }
        }
    }
    Ok(acc.value())
}

/// Quotient norm `‖f‖_{D(p)}`.
pub fn dp_seminorm(f: &GraphFunction, p: f64) -> Result<f64> {
    Ok(dp_energy(f, p)?.powf(1.0 / p))
}

/// `‖f‖_{D^p} = (Σ_s ‖f*(s-1)‖_p^p + |f(e)|^p)^{1/p}`.
pub fn dp_norm(f: &GraphFunction, p: f64) -> Result<f64> {
    Ok((dp_energy(f, p)? + abs_pow(f.values[0], p)).powf(1.0 / p))
}

/// `Δ_p f(g) = Σ_s |f(g s^{-1}) - f(g)|^{p-2} (f(g s^{-1}) - f(g))`.
pub fn p_laplacian(f: &GraphFunction, p: f64, g: usize) -> Result<f64> {
    check_p(p)?;
    let fg = f.values[g];
    let mut acc = 0.0;
    for s in 0..f.ball.degree() {
        let v = f
            .neighbor_value(g, s)
            .ok_or(Error::Unresolvable { vertex: g, generator: s })?;
        acc += signed_pow(v - fg, p);
    }
    Ok(acc)
}

/// `Δ_p` on raw values at an interior vertex (no tail lookups).
#[inline]
pub(crate) fn p_laplacian_raw(ball: &CayleyBall, values: &[f64], p: f64, g: usize) -> f64 {
    let fg = values[g];
    ball.neighbor_row(g)
        .iter()
        .filter(|&&j| j != OUT_OF_BALL)
        .map(|&j| signed_pow(values[j as usize] - fg, p))
        .sum()
}

/// `⟨Δ_p h, f⟩ = Σ_g Σ_s |(h*(s-1))(g)|^{p-2} (h*(s-1))(g) · (f*(s-1))(g)`.
pub fn pairing(h: &GraphFunction, f: &GraphFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    if !h.same_domain(f) {
        return Err(Error::DomainMismatch);
    }
    let ball = &h.ball;
    let both_zero = matches!(h.tail, TailRule::ZeroOutside) && matches!(f.tail, TailRule::ZeroOutside);
    let mut acc = CompensatedSum::new();
    for i in 0..h.len() {
        let (hi, fi) = (h.values[i], f.values[i]);
        for s in 0..ball.degree() {
            match ball.neighbor(i, s) {
                Some(j) => acc.add(signed_pow(h.values[j] - hi, p) * (f.values[j] - fi)),
                None => {
                    if let (Some(hv), Some(fv)) = (h.tail_value(i, s), f.tail_value(i, s)) {
                        acc.add(signed_pow(hv - hi, p) * (fv - fi));
                        if both_zero {
                            acc.add(signed_pow(hi, p) * fi);
                        }
                    }
                }
            }
        }
    }
    Ok(acc.value())
}

/// Max of `|Δ_p f|` over `region`; harmonic when that is at most `tol`.
pub fn is_p_harmonic(f: &GraphFunction, p: f64, region: &[usize], tol: f64) -> Result<(bool, f64)> {
    let mut worst = 0.0f64;
    for &g in region {
        worst = worst.max(p_laplacian(f, p, g)?.abs());
    }
    Ok((worst <= tol, worst))
}

/// Gradient of `v ↦ Σ_{in-ball (g,s)} |v(g s^{-1}) - v(g)|^p`:
/// `-2p Σ_s |d|^{p-2} d` over in-ball neighbours of each vertex.
pub fn dp_energy_gradient(f: &GraphFunction, p: f64) -> Result<Vec<f64>> {
    check_p(p)?;
    Ok((0..f.len())
        .map(|i| -2.0 * p * p_laplacian_raw(&f.ball, &f.values, p, i))
        .collect())
}

/// `‖·‖_{D(1)}`-style sum `Σ_g Σ_s |f(g s^{-1}) - f(g)|^p` restricted to
/// in-ball ordered pairs, straight from values.
pub(crate) fn in_ball_energy(ball: &CayleyBall, values: &[f64], p: f64) -> f64 {
    compensated_sum((0..ball.len()).flat_map(|i| {
        let vi = values[i];
        ball.neighbor_row(i)
            .iter()
            .filter(|&&j| j != OUT_OF_BALL)
            .map(move |&j| abs_pow(values[j as usize] - vi, p))
    }))
}

/// Generator index of `s` in the ball's group, by label.
pub fn generator_by_label(group: &Group, label: &str) -> Option<usize> {
    (0..group.degree()).find(|&s| group.label(s) == label)
}
