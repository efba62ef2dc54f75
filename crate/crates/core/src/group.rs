//! Word models for finitely generated groups and finite balls of their
//! Cayley graphs.
//!
//! Three families are supported: free abelian groups `Z^d`, free groups
//! `F_k` and the discrete Heisenberg group. Each carries a symmetric
//! generating set listed as `s_0, s_0^{-1}, s_1, s_1^{-1}, ...`, so the
//! inverse of generator `i` is always generator `i ^ 1`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Default cap on the number of vertices a ball may hold.
pub const DEFAULT_VERTEX_BUDGET: usize = 2_000_000;

/// Marker stored in the adjacency table for neighbours outside the ball.
pub const OUT_OF_BALL: u32 = u32::MAX;

const MAX_FREE_RANK: usize = 26;
const MAX_ABELIAN_RANK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GroupSpec {
    FreeAbelian { rank: usize },
    Free { rank: usize },
    Heisenberg,
}

impl GroupSpec {
    pub fn is_amenable(&self) -> bool {
        !matches!(self, GroupSpec::Free { .. })
    }

    /// Number of generators in the symmetric generating set.
    pub fn degree(&self) -> usize {
        match *self {
            GroupSpec::FreeAbelian { rank } | GroupSpec::Free { rank } => 2 * rank,
            GroupSpec::Heisenberg => 4,
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::FreeAbelian { rank } => write!(f, "z^{rank}"),
            GroupSpec::Free { rank } => write!(f, "free:{rank}"),
            GroupSpec::Heisenberg => write!(f, "heisenberg"),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || Error::InvalidGroup(format!("cannot parse group '{s}' (expected z^d, free:k or heisenberg)"));
        if s == "heisenberg" {
            return Ok(GroupSpec::Heisenberg);
        }
        if s == "z" {
            return Ok(GroupSpec::FreeAbelian { rank: 1 });
        }
        if let Some(rank) = s.strip_prefix("z^") {
            let rank = rank.parse().map_err(|_| bad())?;
            return Ok(GroupSpec::FreeAbelian { rank });
        }
        if let Some(rank) = s.strip_prefix("free:") {
            let rank = rank.parse().map_err(|_| bad())?;
            return Ok(GroupSpec::Free { rank });
        }
        Err(bad())
    }
}

/// A group element in canonical normal form.
///
/// Two elements are equal iff their normal forms are identical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    /// Integer coordinates in `Z^d`.
    Lattice(Vec<i64>),
    /// Reduced word; letter `+i` is the i-th generator (1-based), `-i` its inverse.
    Word(Vec<i8>),
    /// `x^a y^b z^c` stored as `[a, b, c]`.
    Heisenberg([i64; 3]),
}

impl Element {
    /// Coordinate of a `Z` element; `None` for every other shape.
    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Element::Lattice(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Lattice(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Element::Word(w) if w.is_empty() => write!(f, "e"),
            Element::Word(w) => {
                for &l in w {
                    write!(f, "{}", letter_char(l))?;
                }
                Ok(())
            }
            Element::Heisenberg([a, b, c]) => write!(f, "({a} {b} {c})"),
        }
    }
}

fn letter_char(letter: i8) -> char {
    let base = (letter.unsigned_abs() - 1) as u8;
    if letter > 0 {
        (b'a' + base) as char
    } else {
        (b'A' + base) as char
    }
}

/// A finitely generated group with its symmetric generating set.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    spec: GroupSpec,
    generators: Vec<Element>,
    labels: Vec<String>,
}

pub fn make_group(spec: GroupSpec) -> Result<Group> {
    Group::new(spec)
}

impl Group {
    pub fn new(spec: GroupSpec) -> Result<Self> {
        let (generators, labels) = match spec {
            GroupSpec::FreeAbelian { rank } => {
                if rank == 0 || rank > MAX_ABELIAN_RANK {
                    return Err(Error::InvalidGroup(format!(
                        "free abelian rank must be in 1..={MAX_ABELIAN_RANK}, got {rank}"
                    )));
                }
                let mut gens = Vec::with_capacity(2 * rank);
                let mut labels = Vec::with_capacity(2 * rank);
                for i in 0..rank {
                    for sign in [1i64, -1] {
                        let mut v = vec![0; rank];
                        v[i] = sign;
                        gens.push(Element::Lattice(v));
                        labels.push(format!("{}{}", if sign > 0 { '+' } else { '-' }, i + 1));
                    }
                }
                (gens, labels)
            }
            GroupSpec::Free { rank } => {
                if !(2..=MAX_FREE_RANK).contains(&rank) {
                    return Err(Error::InvalidGroup(format!(
                        "free group rank must be in 2..={MAX_FREE_RANK}, got {rank}"
                    )));
                }
                let mut gens = Vec::with_capacity(2 * rank);
                let mut labels = Vec::with_capacity(2 * rank);
                for i in 1..=rank as i8 {
                    for l in [i, -i] {
                        gens.push(Element::Word(vec![l]));
                        labels.push(letter_char(l).to_string());
                    }
                }
                (gens, labels)
            }
            GroupSpec::Heisenberg => {
                let gens = vec![
                    Element::Heisenberg([1, 0, 0]),
                    Element::Heisenberg([-1, 0, 0]),
                    Element::Heisenberg([0, 1, 0]),
                    Element::Heisenberg([0, -1, 0]),
                ];
                let labels = ["x", "X", "y", "Y"].iter().map(|s| s.to_string()).collect();
                (gens, labels)
            }
        };
        Ok(Group { spec, generators, labels })
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn identity(&self) -> Element {
        match self.spec {
            GroupSpec::FreeAbelian { rank } => Element::Lattice(vec![0; rank]),
            GroupSpec::Free { .. } => Element::Word(Vec::new()),
            GroupSpec::Heisenberg => Element::Heisenberg([0; 3]),
        }
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn degree(&self) -> usize {
        self.generators.len()
    }

    pub fn label(&self, generator: usize) -> &str {
        &self.labels[generator]
    }

    /// Index of the inverse of generator `s`.
    #[inline]
    pub fn inverse_generator(s: usize) -> usize {
        s ^ 1
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        match (a, b) {
            (Element::Lattice(x), Element::Lattice(y)) => {
                Element::Lattice(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (Element::Word(x), Element::Word(y)) => {
                let mut w = x.clone();
                for &l in y {
                    if w.last() == Some(&-l) {
                        w.pop();
                    } else {
                        w.push(l);
                    }
                }
                Element::Word(w)
            }
            (Element::Heisenberg([a1, b1, c1]), Element::Heisenberg([a2, b2, c2])) => {
                Element::Heisenberg([a1 + a2, b1 + b2, c1 + c2 + a1 * b2])
            }
            _ => panic!("mixed element shapes in one group"),
        }
    }

    pub fn inv(&self, a: &Element) -> Element {
        match a {
            Element::Lattice(x) => Element::Lattice(x.iter().map(|v| -v).collect()),
            Element::Word(w) => Element::Word(w.iter().rev().map(|l| -l).collect()),
            // (a,b,c)^{-1} = (-a, -b, -c + ab)
            Element::Heisenberg([a, b, c]) => Element::Heisenberg([-a, -b, -c + a * b]),
        }
    }

    /// `g · s^{-1}`: the neighbour of `g` along generator `s` in the
    /// convention used by every difference operator in this crate.
    pub fn neighbor(&self, g: &Element, s: usize) -> Element {
        self.mul(g, &self.generators[Self::inverse_generator(s)])
    }

    pub fn build_ball(&self, radius: usize) -> Result<CayleyBall> {
        CayleyBall::build(self.clone(), radius, DEFAULT_VERTEX_BUDGET)
    }

    pub fn build_ball_with_budget(&self, radius: usize, budget: usize) -> Result<CayleyBall> {
        CayleyBall::build(self.clone(), radius, budget)
    }
}

/// The radius-`R` ball of a Cayley graph.
///
/// Vertices are numbered in breadth-first discovery order from the identity
/// (vertex 0), visiting generators in their fixed order. `neighbors` holds,
/// for each vertex `i` and generator `s`, the index of `g_i · s^{-1}` or
/// [`OUT_OF_BALL`].
#[derive(Debug, Clone)]
pub struct CayleyBall {
    group: Group,
    radius: usize,
    elements: Vec<Element>,
    distance: Vec<u32>,
    neighbors: Vec<u32>,
    interior: Vec<bool>,
    index: HashMap<Element, u32>,
}

pub fn build_ball(group: &Group, radius: usize) -> Result<CayleyBall> {
    group.build_ball(radius)
}

impl CayleyBall {
    fn build(group: Group, radius: usize, budget: usize) -> Result<Self> {
        let deg = group.degree();
        let identity = group.identity();
        let mut elements = vec![identity.clone()];
        let mut distance = vec![0u32];
        let mut index = HashMap::new();
        index.insert(identity, 0u32);

        let mut head = 0;
        while head < elements.len() {
            let d = distance[head];
            if d as usize >= radius {
                // BFS order: every remaining vertex sits on the outer sphere.
                break;
            }
            let g = elements[head].clone();
            for s in 0..deg {
                let n = group.neighbor(&g, s);
                if !index.contains_key(&n) {
                    if elements.len() >= budget {
                        return Err(Error::VertexBudget { radius, budget });
                    }
                    index.insert(n.clone(), elements.len() as u32);
                    elements.push(n);
                    distance.push(d + 1);
                }
            }
            head += 1;
        }

        let n = elements.len();
        let mut neighbors = vec![OUT_OF_BALL; n * deg];
        for (i, g) in elements.iter().enumerate() {
            for s in 0..deg {
                let nb = group.neighbor(g, s);
                if let Some(&j) = index.get(&nb) {
                    neighbors[i * deg + s] = j;
                }
            }
        }
        let interior = (0..n)
            .map(|i| neighbors[i * deg..(i + 1) * deg].iter().all(|&j| j != OUT_OF_BALL))
            .collect();

        Ok(CayleyBall { group, radius, elements, distance, neighbors, interior, index })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.group.degree()
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn index_of(&self, g: &Element) -> Option<usize> {
        self.index.get(g).map(|&i| i as usize)
    }

    /// Word length of vertex `i`.
    pub fn distance(&self, i: usize) -> usize {
        self.distance[i] as usize
    }

    /// Index of `g_i · s^{-1}`, if it lies in the ball.
    #[inline]
    pub fn neighbor(&self, i: usize, s: usize) -> Option<usize> {
        let j = self.neighbors[i * self.degree() + s];
        (j != OUT_OF_BALL).then_some(j as usize)
    }

    /// Raw adjacency row of vertex `i` (entries may be [`OUT_OF_BALL`]).
    #[inline]
    pub fn neighbor_row(&self, i: usize) -> &[u32] {
        let deg = self.degree();
        &self.neighbors[i * deg..(i + 1) * deg]
    }

    pub fn is_interior(&self, i: usize) -> bool {
        self.interior[i]
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.interior[i]).collect()
    }

    pub fn boundary(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.interior[i]).collect()
    }

    /// Vertices of word length at most `r`.
    pub fn sub_ball(&self, r: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.distance(i) <= r).collect()
    }

    pub fn sphere(&self, r: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.distance(i) == r).collect()
    }

    /// `|B_r|` for every `r` up to the ball radius.
    pub fn ball_sizes(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.radius + 1];
        for &d in &self.distance {
            counts[d as usize] += 1;
        }
        let mut acc = 0;
        counts
            .into_iter()
            .map(|c| {
                acc += c;
                acc
            })
            .collect()
    }

    /// The inner boundary `∂A = {x ∈ A : x s ∉ A for some s ∈ S}`.
    ///
    /// Membership of `x s` is decided in the group, so every vertex of `A`
    /// must lie strictly inside the ball.
    pub fn subset_boundary(&self, set: &[usize]) -> Result<Vec<usize>> {
        let mut member = vec![false; self.len()];
        for &x in set {
            if x >= self.len() {
                return Err(Error::InvalidParameter(format!("vertex {x} not in ball")));
            }
            if self.distance(x) >= self.radius {
                return Err(Error::BoundaryUndecidable { vertex: x });
            }
            member[x] = true;
        }
        let mut out: Vec<usize> = set
            .iter()
            .copied()
            .filter(|&x| {
                // x s = neighbour along s^{-1}; S symmetric, so scanning all rows suffices.
                self.neighbor_row(x).iter().any(|&j| j == OUT_OF_BALL || !member[j as usize])
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// JSON document `{family, radius, n_vertices, edges, boundary}`; edges
    /// are ordered in-ball pairs `[i, label(s), j]` with `j = i · s^{-1}`.
    pub fn to_json(&self) -> Value {
        let deg = self.degree();
        let mut edges = Vec::new();
        for i in 0..self.len() {
            for s in 0..deg {
                if let Some(j) = self.neighbor(i, s) {
                    edges.push(json!([i, self.group.label(s), j]));
                }
            }
        }
        json!({
            "family": self.group.spec().to_string(),
            "radius": self.radius,
            "n_vertices": self.len(),
            "edges": edges,
            "boundary": self.boundary(),
        })
    }

    pub fn into_shared(self) -> Arc<CayleyBall> {
        Arc::new(self)
    }
}

/// Closed form `|B_R|` for the free group of rank `k`.
pub fn free_ball_size(rank: usize, radius: usize) -> u128 {
    let d = 2 * rank as u128;
    let mut total = 1u128;
    let mut sphere = d;
    for _ in 0..radius {
        total += sphere;
        sphere *= d - 1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(d: usize) -> Group {
        make_group(GroupSpec::FreeAbelian { rank: d }).unwrap()
    }

    fn free(k: usize) -> Group {
        make_group(GroupSpec::Free { rank: k }).unwrap()
    }

    fn heis() -> Group {
        make_group(GroupSpec::Heisenberg).unwrap()
    }

    /// Heisenberg element as an upper unitriangular integer matrix.
    fn matrix(e: &Element) -> [[i64; 3]; 3] {
        match e {
            Element::Heisenberg([a, b, c]) => [[1, *a, *c], [0, 1, *b], [0, 0, 1]],
            _ => unreachable!(),
        }
    }

    fn matmul(x: [[i64; 3]; 3], y: [[i64; 3]; 3]) -> [[i64; 3]; 3] {
        let mut out = [[0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        out
    }

    #[test]
    fn parse_and_reject() {
        assert_eq!("z^2".parse::<GroupSpec>().unwrap(), GroupSpec::FreeAbelian { rank: 2 });
        assert_eq!("free:3".parse::<GroupSpec>().unwrap(), GroupSpec::Free { rank: 3 });
        assert_eq!("Heisenberg".parse::<GroupSpec>().unwrap(), GroupSpec::Heisenberg);
        assert!("sl3".parse::<GroupSpec>().is_err());
        assert!(make_group(GroupSpec::FreeAbelian { rank: 0 }).is_err());
        assert!(make_group(GroupSpec::Free { rank: 1 }).is_err());
    }

    #[test]
    fn free_cancellation() {
        let g = free(2);
        let a = &g.generators()[0];
        let a_inv = &g.generators()[1];
        assert_eq!(g.mul(a, a_inv), g.identity());
        let w = Element::Word(vec![1, 2, -1, -2]);
        assert_eq!(g.mul(&w, &g.inv(&w)), g.identity());
    }

    #[test]
    fn abelian_commutes() {
        let g = z(2);
        let x = Element::Lattice(vec![1, 0]);
        let y = Element::Lattice(vec![0, 1]);
        assert_eq!(g.mul(&x, &y), Element::Lattice(vec![1, 1]));
        assert_eq!(g.mul(&x, &y), g.mul(&y, &x));
    }

    #[test]
    fn heisenberg_matches_matrix_model() {
        let g = heis();
        let gens = g.generators().to_vec();
        // brute force over all words of length <= 4
        let mut words: Vec<Vec<usize>> = vec![vec![]];
        let mut frontier = words.clone();
        for _ in 0..4 {
            frontier = frontier
                .iter()
                .flat_map(|w| (0..4).map(move |s| [w.as_slice(), &[s]].concat()))
                .collect();
            words.extend(frontier.iter().cloned());
        }
        for w in &words {
            let mut el = g.identity();
            let mut m = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
            for &s in w {
                el = g.mul(&el, &gens[s]);
                m = matmul(m, matrix(&gens[s]));
            }
            assert_eq!(matrix(&el), m);
            assert_eq!(g.mul(&el, &g.inv(&el)), g.identity());
        }
        let x = &gens[0];
        let y = &gens[2];
        let xy = g.mul(x, y);
        let yx = g.mul(y, x);
        assert_eq!(xy, Element::Heisenberg([1, 1, 1]));
        assert_eq!(yx, Element::Heisenberg([1, 1, 0]));
        // x y = y x z
        assert_eq!(xy, g.mul(&yx, &Element::Heisenberg([0, 0, 1])));
    }

    #[test]
    fn z_ball_is_a_path() {
        let b = z(1).build_ball(3).unwrap();
        assert_eq!(b.len(), 7);
        let mut coords: Vec<i64> = b.elements().iter().map(|e| e.as_integer().unwrap()).collect();
        coords.sort();
        assert_eq!(coords, (-3..=3).collect::<Vec<_>>());
        let mut interior: Vec<i64> =
            b.interior().iter().map(|&i| b.element(i).as_integer().unwrap()).collect();
        interior.sort();
        assert_eq!(interior, (-2..=2).collect::<Vec<_>>());
        assert_eq!(b.element(0), &Element::Lattice(vec![0]));
    }

    #[test]
    fn small_ball_sizes() {
        assert_eq!(free(2).build_ball(2).unwrap().len(), 17);
        assert_eq!(heis().build_ball(1).unwrap().len(), 5);
        assert_eq!(free_ball_size(2, 2), 17);
    }

    #[test]
    fn free_ball_matches_brute_force_words() {
        // enumerate all reduced words of length <= 3 over {a, A, b, B}
        let mut all = vec![vec![]];
        let mut frontier: Vec<Vec<i8>> = vec![vec![]];
        for _ in 0..3 {
            let mut next = Vec::new();
            for w in &frontier {
                for l in [1i8, -1, 2, -2] {
                    if w.last() != Some(&-l) {
                        let mut w2 = w.clone();
                        w2.push(l);
                        next.push(w2);
                    }
                }
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        let ball = free(2).build_ball(3).unwrap();
        assert_eq!(ball.len(), all.len());
        for w in all {
            assert!(ball.index_of(&Element::Word(w)).is_some());
        }
    }

    #[test]
    fn budget_is_enforced() {
        let err = free(2).build_ball_with_budget(6, 100).unwrap_err();
        assert!(matches!(err, Error::VertexBudget { .. }));
    }

    #[test]
    fn adjacency_is_involutive_everywhere() {
        for g in [z(1), z(2), z(3), free(2), free(3), heis()] {
            let b = g.build_ball(4).unwrap();
            for i in 0..b.len() {
                for s in 0..b.degree() {
                    if let Some(j) = b.neighbor(i, s) {
                        assert_eq!(b.neighbor(j, Group::inverse_generator(s)), Some(i));
                    }
                }
                if b.is_interior(i) {
                    assert!((0..b.degree()).all(|s| b.neighbor(i, s).is_some()));
                }
            }
        }
    }

    #[test]
    fn subset_boundary_examples() {
        let zb = z(1).build_ball(6).unwrap();
        let k = 3;
        let set: Vec<usize> =
            (0..zb.len()).filter(|&i| zb.element(i).as_integer().unwrap().abs() <= k).collect();
        let bd: Vec<i64> = zb
            .subset_boundary(&set)
            .unwrap()
            .iter()
            .map(|&i| zb.element(i).as_integer().unwrap())
            .collect();
        let mut bd = bd;
        bd.sort();
        assert_eq!(bd, vec![-3, 3]);

        for g in [z(2), free(2), heis()] {
            let b = g.build_ball(2).unwrap();
            assert_eq!(b.subset_boundary(&[0]).unwrap(), vec![0]);
        }

        let fb = free(2).build_ball(5).unwrap();
        for r in 1..=4 {
            let bd = fb.subset_boundary(&fb.sub_ball(r)).unwrap();
            assert_eq!(bd.len(), 4 * 3usize.pow(r as u32 - 1));
            assert_eq!(bd, fb.sphere(r));
        }
    }

    #[test]
    fn subset_boundary_rejects_outer_sphere() {
        let b = z(1).build_ball(3).unwrap();
        let outer = b.sphere(3);
        assert!(matches!(
            b.subset_boundary(&outer),
            Err(Error::BoundaryUndecidable { .. })
        ));
    }

    #[test]
    fn json_shape() {
        let b = z(1).build_ball(1).unwrap();
        let v = b.to_json();
        assert_eq!(v["family"], "z^1");
        assert_eq!(v["n_vertices"], 3);
        assert_eq!(v["edges"].as_array().unwrap().len(), 4);
        assert_eq!(v["boundary"].as_array().unwrap().len(), 2);
    }
}
