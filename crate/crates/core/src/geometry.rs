//! Exact halfspace machinery over the rationals.
//!
//! Two finite point sets are strictly separable iff the system
//! `w·x - b >= 1` (positives), `w·x - b <= -1` (negatives) is feasible, which
//! is decided here by Fourier–Motzkin elimination with exact arithmetic.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use itertools::Itertools;
use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::model::{Dataset, LabeledPair, RealizabilityOracle};
use crate::{Error, Result};

pub type Rational = BigRational;
pub type Point = Vec<Rational>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).fold(Rational::zero(), |acc, t| acc + t)
}

pub const DEFAULT_CONSTRAINT_CAP: usize = 20_000;

/// `coef · v <= rhs`, with the original constraints it was derived from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Row {
    coef: Vec<Rational>,
    rhs: Rational,
    history: u128,
}

impl Row {
    /// Scales so the first nonzero coefficient has absolute value 1.
    fn normalized(mut self) -> Self {
        if let Some(lead) = self.coef.iter().find(|c| !c.is_zero()).map(|c| c.abs()) {
            for c in &mut self.coef {
                *c /= &lead;
            }
            self.rhs /= &lead;
        }
        self
    }
}

/// Fourier–Motzkin on `rows` over `vars` unknowns. Returns a feasible point
/// or `None`.
fn fourier_motzkin(rows: Vec<Row>, vars: usize, cap: usize) -> Result<Option<Vec<Rational>>> {
    // Chernikov's rule: after t eliminations a row built from more than t + 1
    // originals is implied by others. Only sound while histories are exact.
    let track = rows.len() <= 128;
    let mut stages: Vec<Vec<Row>> = Vec::with_capacity(vars);
    let mut cur = rows;
    for (t, var) in (0..vars).rev().enumerate() {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in &cur {
            match r.coef[var].numer().sign() {
                num::bigint::Sign::Plus => pos.push(r),
                num::bigint::Sign::Minus => neg.push(r),
                num::bigint::Sign::NoSign => rest.push(r.clone()),
            }
        }
        let mut next: HashMap<(Vec<Rational>, Rational), u128> = HashMap::new();
        for r in rest {
            insert_row(&mut next, r);
        }
        for p in &pos {
            for n in &neg {
                let history = p.history | n.history;
                if track && history.count_ones() as usize > t + 2 {
                    continue;
                }
                // p has coefficient a > 0, n has -c < 0: c·p + a·n drops var
                let a = p.coef[var].clone();
                let c = -n.coef[var].clone();
                let coef: Vec<Rational> =
                    p.coef.iter().zip(&n.coef).map(|(x, y)| &c * x + &a * y).collect();
                let rhs = &c * &p.rhs + &a * &n.rhs;
                let row = Row { coef, rhs, history }.normalized();
                if row.coef.iter().all(Zero::is_zero) {
                    if row.rhs.is_negative() {
                        return Ok(None);
                    }
                    continue;
                }
                insert_row(&mut next, row);
                if next.len() > cap {
                    return Err(Error::ConstraintCap(cap));
                }
            }
        }
        stages.push(cur);
        cur = next.into_iter().map(|((coef, rhs), history)| Row { coef, rhs, history }).collect();
    }
    if cur.iter().any(|r| r.rhs.is_negative()) {
        return Ok(None);
    }
    // back-substitute: stage j bounds only the variable it eliminated once
    // the later ones are fixed
    let mut x = vec![Rational::zero(); vars];
    for (t, var) in (0..vars).enumerate() {
        let rows = &stages[vars - 1 - t];
        let (mut lo, mut hi): (Option<Rational>, Option<Rational>) = (None, None);
        for r in rows {
            let a = &r.coef[var];
            if a.is_zero() {
                continue;
            }
            let others: Rational = r
                .coef
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != var)
                .map(|(i, c)| c * &x[i])
                .fold(Rational::zero(), |acc, v| acc + v);
            let bound = (&r.rhs - others) / a;
            if a.is_positive() {
                hi = Some(hi.map_or(bound.clone(), |h| h.min(bound)));
            } else {
                lo = Some(lo.map_or(bound.clone(), |l| l.max(bound)));
            }
        }
        let zero = Rational::zero();
        x[var] = match (lo, hi) {
            (Some(l), _) if l > zero => l,
            (_, Some(h)) if h < zero => h,
            _ => zero,
        };
    }
    Ok(Some(x))
}

fn insert_row(map: &mut HashMap<(Vec<Rational>, Rational), u128>, r: Row) {
    map.entry((r.coef, r.rhs))
        .and_modify(|h| {
            if r.history.count_ones() < h.count_ones() {
                *h = r.history;
            }
        })
        .or_insert(r.history);
}

/// A strict separator: `w·x > b` on positives and `w·x < b` on negatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separator {
    pub w: Vec<Rational>,
    pub b: Rational,
}

impl Separator {
    pub fn separates(&self, positives: &[Point], negatives: &[Point]) -> bool {
        positives.iter().all(|x| dot(&self.w, x) > self.b)
            && negatives.iter().all(|x| dot(&self.w, x) < self.b)
    }
}

pub fn strictly_separable(positives: &[Point], negatives: &[Point]) -> Result<Option<Separator>> {
    strictly_separable_capped(positives, negatives, DEFAULT_CONSTRAINT_CAP)
}

pub fn strictly_separable_capped(
    positives: &[Point],
    negatives: &[Point],
    cap: usize,
) -> Result<Option<Separator>> {
    let Some(d) = positives.iter().chain(negatives).map(Vec::len).next() else {
        return Ok(Some(Separator { w: Vec::new(), b: Rational::zero() }));
    };
    if positives.iter().chain(negatives).any(|x| x.len() != d) {
        return Err(Error::InvalidParameter("points of different dimension".into()));
    }
    // unknowns (w_1..w_d, b)
    let mut rows = Vec::new();
    for (i, x) in positives.iter().enumerate() {
        let mut coef: Vec<Rational> = x.iter().map(|c| -c.clone()).collect();
        coef.push(Rational::one());
        rows.push(Row { coef, rhs: int(-1), history: 1u128 << (i % 128) });
    }
    for (i, x) in negatives.iter().enumerate() {
        let mut coef = x.clone();
        coef.push(-Rational::one());
        rows.push(Row { coef, rhs: int(-1), history: 1u128 << ((positives.len() + i) % 128) });
    }
    let rows = rows.into_iter().map(Row::normalized).collect();
    Ok(fourier_motzkin(rows, d + 1, cap)?.map(|mut v| {
        let b = v.pop().expect("d + 1 unknowns");
        Separator { w: v, b }
    }))
}

/// Linear separators over a fixed list of rational points.
pub struct HalfspaceOracle {
    points: Vec<Point>,
    dim: usize,
    cap: usize,
    cache: Mutex<HashMap<Vec<LabeledPair>, bool>>,
}

impl fmt::Debug for HalfspaceOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HalfspaceOracle").field("dim", &self.dim).field("points", &self.points.len()).finish()
    }
}

impl HalfspaceOracle {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::InvalidParameter("halfspace domain needs points of dimension >= 1".into()));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidParameter("points of different dimension".into()));
        }
        Ok(Self { points, dim, cap: DEFAULT_CONSTRAINT_CAP, cache: Mutex::new(HashMap::new()) })
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn split(&self, support: &[LabeledPair]) -> (Vec<Point>, Vec<Point>) {
        let (pos, neg): (Vec<_>, Vec<_>) = support.iter().partition(|p| p.y);
        let pts = |v: Vec<&LabeledPair>| v.into_iter().map(|p| self.points[p.x].clone()).collect();
        (pts(pos), pts(neg))
    }
}

impl RealizabilityOracle for HalfspaceOracle {
    fn domain_size(&self) -> usize {
        self.points.len()
    }

    fn is_realizable(&self, support: &[LabeledPair]) -> Result<bool> {
        if let Some(&hit) = self.cache.lock().expect("cache lock").get(support) {
            return Ok(hit);
        }
        let (pos, neg) = self.split(support);
        let sep = strictly_separable_capped(&pos, &neg, self.cap)?;
        if let Some(s) = &sep {
            if !s.separates(&pos, &neg) {
                return Err(Error::Oracle("elimination returned a non-separating witness".into()));
            }
        }
        let ans = sep.is_some();
        self.cache.lock().expect("cache lock").insert(support.to_vec(), ans);
        Ok(ans)
    }

    fn describe(&self) -> String {
        format!("halfspaces in dimension {} over {} points", self.dim, self.points.len())
    }
}

pub fn basis_vector(d: usize, i: usize) -> Point {
    (0..d).map(|j| if i == j { int(1) } else { int(0) }).collect()
}

/// Average of the basis vectors outside `l` (0-based indices).
pub fn face_centroid(d: usize, l: &[usize]) -> Point {
    let weight = rat(1, (d - l.len()) as i64);
    (0..d).map(|j| if l.contains(&j) { int(0) } else { weight.clone() }).collect()
}

/// All `k`-subsets of `0..d` in lexicographic order.
pub fn face_index(d: usize, k: usize) -> Vec<Vec<usize>> {
    (0..d).combinations(k).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceDomain {
    pub d: usize,
    pub k: usize,
    /// The `d` basis vectors, then one centroid per entry of `faces`.
    pub points: Vec<Point>,
    pub faces: Vec<Vec<usize>>,
    /// Set when `k = d - 1`: every centroid coincides with a basis vector.
    pub degenerate: bool,
}

impl FaceDomain {
    pub fn centroid_id(&self, face: &[usize]) -> Option<usize> {
        self.faces.iter().position(|f| f == face).map(|i| self.d + i)
    }
}

pub fn simplex_face_domain(d: usize, k: usize) -> Result<FaceDomain> {
    if k == 0 || k >= d {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= d - 1, got d = {d}, k = {k}")));
    }
    let faces = face_index(d, k);
    let points = (0..d)
        .map(|i| basis_vector(d, i))
        .chain(faces.iter().map(|l| face_centroid(d, l)))
        .collect();
    Ok(FaceDomain { d, k, points, faces, degenerate: k == d - 1 })
}

/// The basis vectors labeled 1 followed by the centroids of the faces in `s`
/// labeled 0. Point ids refer to [`simplex_face_domain`].
pub fn halfspace_family_dataset(dom: &FaceDomain, s: &[Vec<usize>]) -> Result<Dataset> {
    let mut pairs: Vec<LabeledPair> = (0..dom.d).map(|i| LabeledPair::new(i, true)).collect();
    for l in s {
        let id = dom
            .centroid_id(l)
            .ok_or_else(|| Error::InvalidParameter(format!("{l:?} is not a {}-subset of 0..{}", dom.k, dom.d)))?;
        pairs.push(LabeledPair::new(id, false));
    }
    Ok(Dataset::from_pairs(pairs))
}

/// Separator for the family after deleting the basis vectors in `l`:
/// the sum of the other basis vectors, threshold `1 - 1/(2(d - k))`.
pub fn face_separator(d: usize, l: &[usize]) -> Separator {
    let k = l.len();
    let w = (0..d).map(|j| if l.contains(&j) { int(0) } else { int(1) }).collect();
    let b = int(1) - rat(1, 2 * (d - k) as i64);
    Separator { w, b }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    LInf,
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    let root = |n: &BigInt| {
        let r = n.sqrt();
        (&r * &r == *n).then_some(r)
    };
    Some(Rational::new(root(q.numer())?, root(q.denom())?))
}

/// Smallest signed distance `s·(w·x - b) / ||w||` over labeled points.
pub fn margin(sep: &Separator, points: &[(Point, bool)], norm: Norm) -> Result<Rational> {
    let scale = match norm {
        Norm::L1 => sep.w.iter().map(|c| c.abs()).fold(Rational::zero(), |a, c| a + c),
        Norm::LInf => sep.w.iter().map(|c| c.abs()).max().unwrap_or_else(Rational::zero),
        Norm::L2 => {
            let sq = dot(&sep.w, &sep.w);
            rational_sqrt(&sq).ok_or_else(|| Error::Unsupported("Euclidean norm of w is irrational".into()))?
        }
    };
    if scale.is_zero() {
        return Err(Error::InvalidParameter("w is zero".into()));
    }
    let mut best: Option<Rational> = None;
    for (x, y) in points {
        let v = dot(&sep.w, x) - &sep.b;
        let signed = if *y { v } else { -v };
        if !signed.is_positive() {
            return Err(Error::InvalidParameter("the halfspace does not separate the points".into()));
        }
        best = Some(best.map_or(signed.clone(), |b| b.min(signed)));
    }
    best.map(|m| m / scale).ok_or_else(|| Error::InvalidParameter("no points".into()))
}
