//! State spaces for the simple random walk: explicit Cayley balls and an
//! exact lumped model of free-group balls.
//!
//! A [`WalkSpace`] is a finite set of cells, each standing for
//! `multiplicity` group elements that every function of interest treats
//! alike. The explicit ball has one element per cell. [`FreeBranchQuotient`]
//! lumps a free-group ball by (first letter, word length), which is exact for
//! functions that depend only on those two quantities; such functions are
//! closed under the Markov operator, so every Neumann iterate of a lumped
//! input stays lumped.

use crate::error::{Error, Result};
use crate::group::{CayleyBall, Element, GroupSpec};
use crate::numeric::{abs_pow, CompensatedSum};

pub trait WalkSpace: Sync {
    fn spec(&self) -> GroupSpec;
    fn radius(&self) -> usize;
    fn num_cells(&self) -> usize;
    /// `|S|`.
    fn degree(&self) -> usize;
    /// Word length of the cell's elements.
    fn level(&self, c: usize) -> usize;
    /// Number of group elements in the cell.
    fn multiplicity(&self, c: usize) -> f64;
    /// Cell is interior when every neighbour of its elements is in range.
    fn is_interior(&self, c: usize) -> bool;
    /// Calls `f(neighbour, count)` for the neighbours `g s^{-1}` of one
    /// element of cell `c`, grouped by cell; `None` is out of range.
    fn for_each_neighbor(&self, c: usize, f: impl FnMut(Option<usize>, u32));
    /// First letter (as a generator index) of a free-group cell; `None` for
    /// the identity and for other families.
    fn branch(&self, c: usize) -> Option<usize>;
    fn cell_label(&self, c: usize) -> String;
}

impl WalkSpace for CayleyBall {
    fn spec(&self) -> GroupSpec {
        self.group().spec()
    }

    fn radius(&self) -> usize {
        CayleyBall::radius(self)
    }

    fn num_cells(&self) -> usize {
        self.len()
    }

    fn degree(&self) -> usize {
        CayleyBall::degree(self)
    }

    fn level(&self, c: usize) -> usize {
        self.distance(c)
    }

    fn multiplicity(&self, _c: usize) -> f64 {
        1.0
    }

    fn is_interior(&self, c: usize) -> bool {
        CayleyBall::is_interior(self, c)
    }

    #[inline]
    fn for_each_neighbor(&self, c: usize, mut f: impl FnMut(Option<usize>, u32)) {
        for s in 0..CayleyBall::degree(self) {
            f(self.neighbor(c, s), 1);
        }
    }

    fn branch(&self, c: usize) -> Option<usize> {
        match self.element(c) {
            Element::Word(w) => w.first().map(|&l| letter_generator(l)),
            _ => None,
        }
    }

    fn cell_label(&self, c: usize) -> String {
        self.element(c).to_string()
    }
}

/// Generator index of a free-group letter (`a, A, b, B, ...`).
fn letter_generator(letter: i8) -> usize {
    2 * (letter.unsigned_abs() as usize - 1) + usize::from(letter < 0)
}

/// The radius-`R` ball of `F_k` lumped by first letter and word length.
///
/// Cell 0 is the identity; cell `1 + b R + (n - 1)` holds the
/// `(2k-1)^{n-1}` reduced words of length `n` whose first letter is
/// generator `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeBranchQuotient {
    rank: usize,
    radius: usize,
    labels: Vec<String>,
}

impl FreeBranchQuotient {
    pub fn new(rank: usize, radius: usize) -> Result<Self> {
        let group = crate::group::make_group(GroupSpec::Free { rank })?;
        if radius == 0 {
            return Err(Error::RadiusTooSmall { need: 1, have: 0 });
        }
        let labels = (0..2 * rank).map(|s| group.label(s).to_string()).collect();
        Ok(FreeBranchQuotient { rank, radius, labels })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Cell of words of length `level` starting with generator `branch`.
    pub fn cell(&self, branch: usize, level: usize) -> usize {
        debug_assert!(branch < 2 * self.rank && (1..=self.radius).contains(&level));
        1 + branch * self.radius + (level - 1)
    }

    fn decode(&self, c: usize) -> Option<(usize, usize)> {
        (c > 0).then(|| ((c - 1) / self.radius, (c - 1) % self.radius + 1))
    }
}

impl WalkSpace for FreeBranchQuotient {
    fn spec(&self) -> GroupSpec {
        GroupSpec::Free { rank: self.rank }
    }

    fn radius(&self) -> usize {
        self.radius
    }

    fn num_cells(&self) -> usize {
        1 + 2 * self.rank * self.radius
    }

    fn degree(&self) -> usize {
        2 * self.rank
    }

    fn level(&self, c: usize) -> usize {
        self.decode(c).map_or(0, |(_, n)| n)
    }

    fn multiplicity(&self, c: usize) -> f64 {
        match self.decode(c) {
            None => 1.0,
            Some((_, n)) => ((2 * self.rank - 1) as f64).powi(n as i32 - 1),
        }
    }

    fn is_interior(&self, c: usize) -> bool {
        self.level(c) < self.radius
    }

    #[inline]
    fn for_each_neighbor(&self, c: usize, mut f: impl FnMut(Option<usize>, u32)) {
        let d = 2 * self.rank;
        match self.decode(c) {
            None => {
                for b in 0..d {
                    f(Some(self.cell(b, 1)), 1);
                }
            }
            Some((_, n)) => {
                f(Some(if n == 1 { 0 } else { c - 1 }), 1);
                f((n < self.radius).then_some(c + 1), (d - 1) as u32);
            }
        }
    }

    fn branch(&self, c: usize) -> Option<usize> {
        self.decode(c).map(|(b, _)| b)
    }

    fn cell_label(&self, c: usize) -> String {
        match self.decode(c) {
            None => "e".to_string(),
            Some((b, n)) => format!("{}/{}", self.labels[b], n),
        }
    }
}

/// `f ↦ f*P`, `(f*P)(g) = |S|^{-1} Σ_s f(g s^{-1})`, with `f = 0` outside
/// the space.
pub fn markov_zero_outside<W: WalkSpace>(space: &W, f: &[f64], out: &mut [f64]) {
    let inv = 1.0 / space.degree() as f64;
    for (c, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        space.for_each_neighbor(c, |n, k| {
            if let Some(n) = n {
                acc += k as f64 * f[n];
            }
        });
        *o = acc * inv;
    }
}

/// `(Σ_g |f(g)|^p)^{1/p}` over the group elements the cells stand for.
pub fn weighted_lp_norm<W: WalkSpace>(space: &W, f: &[f64], p: f64) -> f64 {
    weighted_lp_mass(space, f, p, |_| true).powf(1.0 / p)
}

/// `Σ |f(g)|^p` over the cells selected by `keep`.
pub fn weighted_lp_mass<W: WalkSpace>(space: &W, f: &[f64], p: f64, keep: impl Fn(usize) -> bool) -> f64 {
    let mut acc = CompensatedSum::new();
    for (c, &v) in f.iter().enumerate() {
        if v != 0.0 && keep(c) {
            acc.add(space.multiplicity(c) * abs_pow(v, p));
        }
    }
    acc.value()
}

/// Largest level carrying a nonzero value, `None` for the zero function.
pub fn support_radius<W: WalkSpace>(space: &W, f: &[f64]) -> Option<usize> {
    f.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(c, _)| space.level(c)).max()
}
