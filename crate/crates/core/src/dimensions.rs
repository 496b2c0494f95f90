//! Exact combinatorial dimensions by bounded exhaustive search.
//!
//! VC, star, hollow star and eluder searches only ask realizability questions,
//! so they run on oracle classes too. Littlestone dimension and minimum
//! identification sets need the explicit version space.
//!
//! Star and hollow star sets are sets of labeled pairs on distinct points.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::hypset::HypSet;
use crate::model::{ClassHandle, FiniteClass, LabeledPair, PointId};
use crate::{Error, Result};

/// A dimension value, or the sentinel for "larger than the search cap".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Value(usize),
    CapExceeded,
}

impl Dim {
    pub fn value(self) -> Option<usize> {
        match self {
            Dim::Value(v) => Some(v),
            Dim::CapExceeded => None,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Value(v) => write!(f, "{v}"),
            Dim::CapExceeded => f.write_str("cap-exceeded"),
        }
    }
}

impl Serialize for Dim {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dim::Value(v) => s.serialize_u64(*v as u64),
            Dim::CapExceeded => s.serialize_str("cap-exceeded"),
        }
    }
}

impl<'de> Deserialize<'de> for Dim {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(usize),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(v) => Ok(Dim::Value(v)),
            Raw::S(s) if s == "cap-exceeded" => Ok(Dim::CapExceeded),
            Raw::S(s) => Err(serde::de::Error::custom(format!("bad dimension value {s:?}"))),
        }
    }
}

/// A search result: the value and a certificate for it. When the cap is
/// exceeded the witness has size `cap + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Found<W> {
    pub value: Dim,
    pub witness: W,
}

fn finish<W>(best: W, size: usize, cap: usize) -> Found<W> {
    let value = if size > cap { Dim::CapExceeded } else { Dim::Value(size) };
    Found { value, witness: best }
}

fn with_pair(set: &[LabeledPair], p: LabeledPair) -> Vec<LabeledPair> {
    let mut v = set.to_vec();
    v.push(p);
    v
}

fn flip_at(set: &[LabeledPair], i: usize) -> Vec<LabeledPair> {
    let mut v = set.to_vec();
    v[i] = v[i].flipped();
    v
}

fn distinct_points(set: &[LabeledPair]) -> bool {
    let mut xs: Vec<_> = set.iter().map(|p| p.x).collect();
    xs.sort_unstable();
    xs.windows(2).all(|w| w[0] != w[1])
}

fn all_flips_realizable(class: &ClassHandle, set: &[LabeledPair]) -> Result<bool> {
    for i in 0..set.len() {
        if !class.realizable(&flip_at(set, i))? {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------- VC

pub fn is_shattered(class: &ClassHandle, points: &[PointId]) -> Result<bool> {
    if points.len() >= usize::BITS as usize {
        return Err(Error::InvalidParameter("too many points to enumerate labelings".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Ok(false);
    }
    if let ClassHandle::Finite(c) = class {
        let mut patterns: Vec<Vec<bool>> =
            c.rows().iter().map(|r| points.iter().map(|&x| r[x]).collect()).collect();
        patterns.sort_unstable();
        patterns.dedup();
        return Ok(patterns.len() == 1 << points.len());
    }
    for mask in 0..(1usize << points.len()) {
        let labeling: Vec<_> = points
            .iter()
            .enumerate()
            .map(|(i, &x)| LabeledPair::new(x, mask >> i & 1 == 1))
            .collect();
        if !class.realizable(&labeling)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest shattered subset of the domain.
pub fn vc_dimension(class: &ClassHandle, cap: usize) -> Result<Found<Vec<PointId>>> {
    fn dfs(
        class: &ClassHandle,
        cur: &mut Vec<PointId>,
        best: &mut Vec<PointId>,
        cap: usize,
    ) -> Result<()> {
        if cur.len() > best.len() {
            *best = cur.clone();
        }
        if cur.len() > cap {
            return Ok(());
        }
        let start = cur.last().map_or(0, |&x| x + 1);
        for x in start..class.domain_size() {
            cur.push(x);
            if is_shattered(class, cur)? {
                dfs(class, cur, best, cap)?;
            }
            cur.pop();
            if best.len() > cap {
                break;
            }
        }
        Ok(())
    }
    let mut best = Vec::new();
    dfs(class, &mut Vec::new(), &mut best, cap)?;
    let size = best.len();
    Ok(finish(best, size, cap))
}

// ---------------------------------------------------------------- star

pub fn is_star_set(class: &ClassHandle, set: &[LabeledPair]) -> Result<bool> {
    Ok(distinct_points(set) && class.realizable(set)? && all_flips_realizable(class, set)?)
}

pub fn is_hollow_star_set(class: &ClassHandle, set: &[LabeledPair]) -> Result<bool> {
    Ok(distinct_points(set) && !class.realizable(set)? && all_flips_realizable(class, set)?)
}

/// Visits every star set (points strictly increasing) of size at most
/// `limit`. Star sets are closed under taking subsets, so extending only
/// star sets reaches all of them.
fn for_each_star_set(
    class: &ClassHandle,
    limit: usize,
    visit: &mut dyn FnMut(&[LabeledPair]) -> Result<bool>,
) -> Result<()> {
    fn go(
        class: &ClassHandle,
        cur: &mut Vec<LabeledPair>,
        limit: usize,
        visit: &mut dyn FnMut(&[LabeledPair]) -> Result<bool>,
    ) -> Result<bool> {
        if !visit(cur)? {
            return Ok(false);
        }
        if cur.len() == limit {
            return Ok(true);
        }
        let start = cur.last().map_or(0, |p| p.x + 1);
        for x in start..class.domain_size() {
            for y in [false, true] {
                let p = LabeledPair::new(x, y);
                let ext = with_pair(cur, p);
                if class.realizable(&ext)?
                    && class.realizable(&with_pair(cur, p.flipped()))?
                    && all_flips_realizable_but_last(class, &ext)?
                {
                    cur.push(p);
                    let more = go(class, cur, limit, visit)?;
                    cur.pop();
                    if !more {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
    go(class, &mut Vec::new(), limit, visit).map(|_| ())
}

fn all_flips_realizable_but_last(class: &ClassHandle, set: &[LabeledPair]) -> Result<bool> {
    for i in 0..set.len().saturating_sub(1) {
        if !class.realizable(&flip_at(set, i))? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn star_number(class: &ClassHandle, cap: usize) -> Result<Found<Vec<LabeledPair>>> {
    let mut best: Vec<LabeledPair> = Vec::new();
    for_each_star_set(class, cap + 1, &mut |s| {
        if s.len() > best.len() {
            best = s.to_vec();
        }
        Ok(best.len() <= cap)
    })?;
    let size = best.len();
    Ok(finish(best, size, cap))
}

pub fn hollow_star_number(class: &ClassHandle, cap: usize) -> Result<Found<Vec<LabeledPair>>> {
    // dropping the largest point of a hollow star set leaves a star set
    let mut best: Vec<LabeledPair> = Vec::new();
    for_each_star_set(class, cap, &mut |s| {
        if s.len() < best.len() {
            return Ok(true);
        }
        let start = s.last().map_or(0, |p| p.x + 1);
        for x in start..class.domain_size() {
            for y in [false, true] {
                let cand = with_pair(s, LabeledPair::new(x, y));
                if !class.realizable(&cand)? && all_flips_realizable(class, &cand)? {
                    best = cand;
                    return Ok(best.len() <= cap);
                }
            }
        }
        Ok(true)
    })?;
    let size = best.len();
    Ok(finish(best, size, cap))
}

// ---------------------------------------------------------------- eluder

/// Every element is ambiguous given the pairs before it.
pub fn is_eluder_sequence(class: &ClassHandle, seq: &[LabeledPair]) -> Result<bool> {
    for (i, p) in seq.iter().enumerate() {
        let prefix = &seq[..i];
        if !class.realizable(&with_pair(prefix, *p))?
            || !class.realizable(&with_pair(prefix, p.flipped()))?
        {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn eluder_dimension(class: &ClassHandle, cap: usize) -> Result<Found<Vec<LabeledPair>>> {
    let mut seq = match class {
        ClassHandle::Finite(c) => eluder_finite(c),
        ClassHandle::Oracle(_) => eluder_oracle(class)?,
    };
    let size = seq.len();
    seq.truncate(cap + 1);
    Ok(finish(seq, size, cap))
}

fn eluder_finite(c: &FiniteClass) -> Vec<LabeledPair> {
    fn go(
        c: &FiniteClass,
        vs: &HypSet,
        memo: &mut HashMap<HypSet, (usize, Option<LabeledPair>)>,
    ) -> usize {
        if let Some(&(v, _)) = memo.get(vs) {
            return v;
        }
        let mut best = (0, None);
        for x in 0..c.domain_size() {
            let zero = vs.intersection(c.agreeing(LabeledPair::new(x, false)));
            let one = vs.intersection(c.agreeing(LabeledPair::new(x, true)));
            if zero.is_empty() || one.is_empty() {
                continue;
            }
            for (y, next) in [(false, zero), (true, one)] {
                let v = 1 + go(c, &next, memo);
                if v > best.0 {
                    best = (v, Some(LabeledPair::new(x, y)));
                }
            }
        }
        memo.insert(vs.clone(), best);
        best.0
    }
    let mut memo = HashMap::new();
    let mut vs = c.all();
    go(c, &vs, &mut memo);
    let mut seq = Vec::new();
    while let Some(&(_, Some(p))) = memo.get(&vs) {
        seq.push(p);
        vs.intersect_with(c.agreeing(p));
    }
    seq
}

fn eluder_oracle(class: &ClassHandle) -> Result<Vec<LabeledPair>> {
    type Memo = HashMap<Vec<LabeledPair>, (usize, Option<LabeledPair>)>;
    fn go(class: &ClassHandle, state: &[LabeledPair], memo: &mut Memo) -> Result<usize> {
        if let Some(&(v, _)) = memo.get(state) {
            return Ok(v);
        }
        let mut best = (0, None);
        for x in 0..class.domain_size() {
            if state.iter().any(|p| p.x == x) {
                continue;
            }
            let zero = LabeledPair::new(x, false);
            if !class.realizable(&with_pair(state, zero))?
                || !class.realizable(&with_pair(state, zero.flipped()))?
            {
                continue;
            }
            for p in [zero, zero.flipped()] {
                let mut next = with_pair(state, p);
                next.sort_unstable();
                let v = 1 + go(class, &next, memo)?;
                if v > best.0 {
                    best = (v, Some(p));
                }
            }
        }
        memo.insert(state.to_vec(), best);
        Ok(best.0)
    }
    let mut memo = Memo::new();
    go(class, &[], &mut memo)?;
    let mut state: Vec<LabeledPair> = Vec::new();
    let mut seq = Vec::new();
    while let Some(&(_, Some(p))) = memo.get(&state) {
        seq.push(p);
        state.push(p);
        state.sort_unstable();
    }
    Ok(seq)
}

// ---------------------------------------------------------------- Littlestone

/// A mistake tree: each internal node queries a point, its children continue
/// the path with that point labeled 0 and 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MistakeTree {
    Leaf,
    Node { x: PointId, zero: Box<MistakeTree>, one: Box<MistakeTree> },
}

impl MistakeTree {
    pub fn depth(&self) -> usize {
        match self {
            MistakeTree::Leaf => 0,
            MistakeTree::Node { zero, one, .. } => 1 + zero.depth().max(one.depth()),
        }
    }
}

/// Checks that `tree` is a complete tree of the given depth whose every
/// root-to-leaf path is realizable.
pub fn verify_mistake_tree(class: &ClassHandle, tree: &MistakeTree, depth: usize) -> Result<bool> {
    fn go(
        class: &ClassHandle,
        t: &MistakeTree,
        depth: usize,
        path: &mut Vec<LabeledPair>,
    ) -> Result<bool> {
        match (t, depth) {
            (MistakeTree::Leaf, 0) => class.realizable(path),
            (MistakeTree::Node { x, zero, one }, d) if d > 0 => {
                for (y, child) in [(false, zero), (true, one)] {
                    path.push(LabeledPair::new(*x, y));
                    let ok = go(class, child, d - 1, path)?;
                    path.pop();
                    if !ok {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(false),
        }
    }
    go(class, tree, depth, &mut Vec::new())
}

pub fn littlestone_dimension(class: &FiniteClass) -> Found<MistakeTree> {
    fn ldim(c: &FiniteClass, vs: &HypSet, memo: &mut HashMap<HypSet, usize>) -> usize {
        if vs.count() <= 1 {
            return 0;
        }
        if let Some(&v) = memo.get(vs) {
            return v;
        }
        let mut best = 0;
        for x in 0..c.domain_size() {
            let zero = vs.intersection(c.agreeing(LabeledPair::new(x, false)));
            let one = vs.intersection(c.agreeing(LabeledPair::new(x, true)));
            if zero.is_empty() || one.is_empty() {
                continue;
            }
            let v = 1 + ldim(c, &zero, memo).min(ldim(c, &one, memo));
            best = best.max(v);
        }
        memo.insert(vs.clone(), best);
        best
    }
    fn build(
        c: &FiniteClass,
        vs: &HypSet,
        depth: usize,
        memo: &mut HashMap<HypSet, usize>,
    ) -> MistakeTree {
        if depth == 0 {
            return MistakeTree::Leaf;
        }
        for x in 0..c.domain_size() {
            let zero = vs.intersection(c.agreeing(LabeledPair::new(x, false)));
            let one = vs.intersection(c.agreeing(LabeledPair::new(x, true)));
            if zero.is_empty() || one.is_empty() {
                continue;
            }
            if ldim(c, &zero, memo) + 1 >= depth && ldim(c, &one, memo) + 1 >= depth {
                return MistakeTree::Node {
                    x,
                    zero: Box::new(build(c, &zero, depth - 1, memo)),
                    one: Box::new(build(c, &one, depth - 1, memo)),
                };
            }
        }
        unreachable!("a version space of Littlestone dimension {depth} has a splitting point")
    }
    let mut memo = HashMap::new();
    let all = class.all();
    let value = ldim(class, &all, &mut memo);
    let witness = build(class, &all, value, &mut memo);
    Found { value: Dim::Value(value), witness }
}

// ---------------------------------------------------------------- MIS

/// Whether restricting the class to `points` keeps hypotheses distinct.
pub fn identifies(class: &FiniteClass, points: &[PointId]) -> bool {
    let mut seen: Vec<Vec<bool>> =
        class.rows().iter().map(|r| points.iter().map(|&x| r[x]).collect()).collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len() == class.len()
}

/// Smallest identifying subset, first in lexicographic order among those of
/// minimum size.
pub fn min_identification_set(class: &FiniteClass) -> Vec<PointId> {
    use itertools::Itertools;
    for size in 0..=class.domain_size() {
        if let Some(t) =
            (0..class.domain_size()).combinations(size).find(|t| identifies(class, t))
        {
            return t;
        }
    }
    unreachable!("rows are distinct, so the whole domain identifies")
}

// ---------------------------------------------------------------- report

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimReport {
    pub hypotheses: Option<usize>,
    pub vc: Found<Vec<PointId>>,
    pub littlestone: Option<Found<MistakeTree>>,
    pub star: Found<Vec<LabeledPair>>,
    pub hollow_star: Found<Vec<LabeledPair>>,
    pub eluder: Found<Vec<LabeledPair>>,
    pub mis: Option<Found<Vec<PointId>>>,
}

impl DimReport {
    pub fn compute(class: &ClassHandle, cap: usize) -> Result<Self> {
        let finite = class.as_finite();
        Ok(Self {
            hypotheses: finite.map(FiniteClass::len),
            vc: vc_dimension(class, cap)?,
            littlestone: finite.map(littlestone_dimension),
            star: star_number(class, cap)?,
            hollow_star: hollow_star_number(class, cap)?,
            eluder: eluder_dimension(class, cap)?,
            mis: finite.map(|c| {
                let t = min_identification_set(c);
                Found { value: Dim::Value(t.len()), witness: t }
            }),
        })
    }

    /// Re-checks every witness against the class.
    pub fn verify(&self, class: &ClassHandle) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidWitness(what.to_string()));
        let size_ok = |d: Dim, len: usize| match d {
            Dim::Value(v) => v == len,
            Dim::CapExceeded => true,
        };
        if !size_ok(self.vc.value, self.vc.witness.len()) || !is_shattered(class, &self.vc.witness)? {
            return bad("vc");
        }
        if !size_ok(self.star.value, self.star.witness.len())
            || !is_star_set(class, &self.star.witness)?
        {
            return bad("star");
        }
        if !size_ok(self.hollow_star.value, self.hollow_star.witness.len())
            || (!self.hollow_star.witness.is_empty()
                && !is_hollow_star_set(class, &self.hollow_star.witness)?)
        {
            return bad("hollow star");
        }
        if !size_ok(self.eluder.value, self.eluder.witness.len())
            || !is_eluder_sequence(class, &self.eluder.witness)?
        {
            return bad("eluder");
        }
        if let Some(ls) = &self.littlestone {
            let depth = ls.value.value().unwrap_or(0);
            if !verify_mistake_tree(class, &ls.witness, depth)? {
                return bad("littlestone");
            }
        }
        if let (Some(mis), Some(c)) = (&self.mis, class.as_finite()) {
            if !identifies(c, &mis.witness) {
                return bad("mis");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_util::*;

    fn all_labelings(m: usize) -> ClassHandle {
        let rows = (0..1usize << m).map(|b| (0..m).map(|i| b >> i & 1 == 1).collect()).collect();
        FiniteClass::new(m, rows).unwrap().into()
    }

    fn singleton() -> ClassHandle {
        FiniteClass::new(3, vec![vec![true, false, true]]).unwrap().into()
    }

    #[test]
    fn thresholds_four() {
        let c = ClassHandle::from(thresholds(4));
        let r = DimReport::compute(&c, 10).unwrap();
        assert_eq!(r.vc.value, Dim::Value(1));
        assert_eq!(r.star.value, Dim::Value(2));
        assert_eq!(r.hollow_star.value, Dim::Value(2));
        assert_eq!(r.eluder.value, Dim::Value(4));
        assert_eq!(r.littlestone.as_ref().unwrap().value, Dim::Value(2));
        assert_eq!(r.mis.as_ref().unwrap().value, Dim::Value(4));
        r.verify(&c).unwrap();
        assert!(is_eluder_sequence(&c, &[p(4, 1), p(3, 1), p(2, 1), p(1, 1)]).unwrap());
    }

    #[test]
    fn thresholds_eight_star_and_hollow() {
        let c = ClassHandle::from(thresholds(8));
        assert_eq!(star_number(&c, 10).unwrap().value, Dim::Value(2));
        assert_eq!(hollow_star_number(&c, 10).unwrap().value, Dim::Value(2));
        assert!(is_star_set(&c, &[p(2, 0), p(5, 1)]).unwrap());
        assert!(is_hollow_star_set(&c, &[p(2, 1), p(5, 0)]).unwrap());
    }

    #[test]
    fn all_labelings_three() {
        let c = all_labelings(3);
        let r = DimReport::compute(&c, 10).unwrap();
        assert_eq!(r.vc.value, Dim::Value(3));
        assert_eq!(r.star.value, Dim::Value(3));
        assert_eq!(r.hollow_star.value, Dim::Value(0));
        r.verify(&c).unwrap();
    }

    #[test]
    fn singleton_class_is_zero_everywhere() {
        let c = singleton();
        let r = DimReport::compute(&c, 10).unwrap();
        assert_eq!(r.eluder.value, Dim::Value(0));
        assert_eq!(r.littlestone.as_ref().unwrap().value, Dim::Value(0));
        assert_eq!(r.mis.as_ref().unwrap().witness, Vec::<usize>::new());
        assert_eq!(r.vc.value, Dim::Value(0));
    }

    #[test]
    fn caps_report_sentinel_with_oversized_witness() {
        let c = all_labelings(3);
        let vc = vc_dimension(&c, 1).unwrap();
        assert_eq!(vc.value, Dim::CapExceeded);
        assert_eq!(vc.witness.len(), 2);
        let e = eluder_dimension(&ClassHandle::from(thresholds(4)), 2).unwrap();
        assert_eq!(e.value, Dim::CapExceeded);
        assert_eq!(e.witness.len(), 3);
        let s = star_number(&c, 2).unwrap();
        assert_eq!(s.value, Dim::CapExceeded);
        assert_eq!(s.witness.len(), 3);
        let h = hollow_star_number(&ClassHandle::from(thresholds(5)), 1).unwrap();
        assert_eq!(h.value, Dim::CapExceeded);
        assert_eq!(h.witness.len(), 2);
    }

    #[test]
    fn oracle_paths_match_on_thresholds() {
        let c = ClassHandle::from(thresholds(5));
        let o = c.to_oracle();
        for (a, b) in [
            (vc_dimension(&c, 9).unwrap().value, vc_dimension(&o, 9).unwrap().value),
            (star_number(&c, 9).unwrap().value, star_number(&o, 9).unwrap().value),
            (eluder_dimension(&c, 9).unwrap().value, eluder_dimension(&o, 9).unwrap().value),
        ] {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn dim_serializes_as_number_or_sentinel() {
        assert_eq!(serde_json::to_string(&Dim::Value(3)).unwrap(), "3");
        assert_eq!(serde_json::to_string(&Dim::CapExceeded).unwrap(), "\"cap-exceeded\"");
        assert_eq!(serde_json::from_str::<Dim>("\"cap-exceeded\"").unwrap(), Dim::CapExceeded);
    }
}
