//! Hypothesis classes, datasets with item identity, version spaces and
//! realizability.
//!
//! Domain points are dense ids `0..m`. A [`Dataset`] is an ordered multiset of
//! labeled pairs where every item keeps a stable id; deletion queries name item
//! ids, and realizability only ever looks at the distinct surviving pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::hypset::HypSet;
use crate::{Error, Result};

pub type PointId = usize;
pub type ItemId = usize;
pub type HypIndex = usize;

/// A domain point together with a binary label.
///
/// The derived ordering (point first, `false < true`) is the canonical
/// lexicographic order used by encodings and critical sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabeledPair {
    pub x: PointId,
    #[serde(with = "bit")]
    pub y: bool,
}

impl LabeledPair {
    pub fn new(x: PointId, y: bool) -> Self {
        Self { x, y }
    }

    pub fn flipped(self) -> Self {
        Self { x: self.x, y: !self.y }
    }
}

impl fmt::Display for LabeledPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, u8::from(self.y))
    }
}

/// Serializes labels as the integers 0 and 1.
pub mod bit {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(y: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*y))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(D::Error::custom(format!("label must be 0 or 1, got {other}"))),
        }
    }
}

/// Sorts and deduplicates a list of pairs into its support.
pub fn support_of(pairs: impl IntoIterator<Item = LabeledPair>) -> Vec<LabeledPair> {
    let mut v: Vec<_> = pairs.into_iter().collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn has_coincident_conflict(sorted_support: &[LabeledPair]) -> bool {
    sorted_support.windows(2).any(|w| w[0].x == w[1].x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    pub pair: LabeledPair,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    items: Vec<Item>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a dataset whose item ids are the 1-based positions.
    pub fn from_pairs(pairs: impl IntoIterator<Item = LabeledPair>) -> Self {
        let items = pairs
            .into_iter()
            .enumerate()
            .map(|(i, pair)| Item { id: i + 1, pair })
            .collect();
        Self { items }
    }

    pub fn from_items(items: Vec<Item>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for item in &items {
            if !seen.insert(item.id) {
                return Err(Error::DuplicateIndex(item.id));
            }
        }
        Ok(Self { items })
    }

    /// Appends a pair under the next unused id and returns that id.
    pub fn push(&mut self, pair: LabeledPair) -> ItemId {
        let id = self.items.iter().map(|it| it.id).max().unwrap_or(0) + 1;
        self.items.push(Item { id, pair });
        id
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn pairs(&self) -> impl Iterator<Item = LabeledPair> + '_ {
        self.items.iter().map(|it| it.pair)
    }

    pub fn ids(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.items.iter().map(|it| it.id)
    }

    pub fn position_of(&self, id: ItemId) -> Option<usize> {
        self.items.iter().position(|it| it.id == id)
    }

    pub fn get(&self, id: ItemId) -> Option<&Item> {
        self.items.iter().find(|it| it.id == id)
    }

    /// Occurrence count of every distinct pair.
    pub fn support(&self) -> BTreeMap<LabeledPair, usize> {
        let mut counts = BTreeMap::new();
        for it in &self.items {
            *counts.entry(it.pair).or_insert(0) += 1;
        }
        counts
    }

    /// Distinct pairs in canonical order.
    pub fn distinct_pairs(&self) -> Vec<LabeledPair> {
        support_of(self.pairs())
    }

    fn check_query(&self, q: &Query) -> Result<()> {
        match q.indices().find(|id| self.get(*id).is_none()) {
            Some(id) => Err(Error::UnknownItem(id)),
            None => Ok(()),
        }
    }

    /// `D \ D_I`: drops the queried items, keeping every other id.
    pub fn remove(&self, q: &Query) -> Result<Dataset> {
        self.check_query(q)?;
        let items = self.items.iter().filter(|it| !q.contains(it.id)).copied().collect();
        Ok(Dataset { items })
    }

    /// `D_I`: the queried items themselves, in dataset order.
    pub fn deletion(&self, q: &Query) -> Result<Vec<Item>> {
        self.check_query(q)?;
        Ok(self.items.iter().filter(|it| q.contains(it.id)).copied().collect())
    }

    /// Concatenation; items of `other` are renumbered after `self`.
    pub fn concat(&self, other: &Dataset) -> Dataset {
        let mut out = self.clone();
        for pair in other.pairs() {
            out.push(pair);
        }
        out
    }
}

/// An index set `I` of item ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    indices: BTreeSet<ItemId>,
}

impl Query {
    pub fn new(ids: impl IntoIterator<Item = ItemId>) -> Result<Self> {
        let mut indices = BTreeSet::new();
        for id in ids {
            if !indices.insert(id) {
                return Err(Error::DuplicateIndex(id));
            }
        }
        Ok(Self { indices })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn all(data: &Dataset) -> Self {
        Self { indices: data.ids().collect() }
    }

    pub fn indices(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, id: ItemId) -> bool {
        self.indices.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// An explicit hypothesis class: one bit-row per hypothesis over `m` points.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteClass {
    m: usize,
    rows: Vec<Vec<bool>>,
    // masks[x][y]: hypotheses labeling x with y
    masks: Vec<[HypSet; 2]>,
}

impl fmt::Debug for FiniteClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteClass")
            .field("m", &self.m)
            .field("hypotheses", &self.rows.len())
            .finish()
    }
}

impl FiniteClass {
    /// Rows are deduplicated keeping first occurrences, so indices follow the
    /// input order of distinct rows.
    pub fn new(m: usize, rows: Vec<Vec<bool>>) -> Result<Self> {
        let mut distinct: Vec<Vec<bool>> = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != m {
                return Err(Error::InvalidParameter(format!(
                    "hypothesis row has length {}, domain has {m} points",
                    row.len()
                )));
            }
            if !distinct.contains(&row) {
                distinct.push(row);
            }
        }
        if distinct.is_empty() {
            return Err(Error::InvalidParameter("a class needs at least one hypothesis".into()));
        }
        let n = distinct.len();
        let masks = (0..m)
            .map(|x| {
                let ones = HypSet::from_indices(n, (0..n).filter(|&h| distinct[h][x]));
                let zeros = HypSet::from_indices(n, (0..n).filter(|&h| !distinct[h][x]));
                [zeros, ones]
            })
            .collect();
        Ok(Self { m, rows: distinct, masks })
    }

    pub fn domain_size(&self) -> usize {
        self.m
    }

    /// Number of (distinct) hypotheses.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    pub fn label(&self, h: HypIndex, x: PointId) -> bool {
        self.rows[h][x]
    }

    pub fn all(&self) -> HypSet {
        HypSet::full(self.rows.len())
    }

    /// Hypotheses agreeing with a single pair.
    pub fn agreeing(&self, pair: LabeledPair) -> &HypSet {
        &self.masks[pair.x][usize::from(pair.y)]
    }

    pub fn consistent_set(&self, pairs: impl IntoIterator<Item = LabeledPair>) -> HypSet {
        let mut vs = self.all();
        for p in pairs {
            vs.intersect_with(self.agreeing(p));
        }
        vs
    }

    fn check_points(&self, pairs: &[LabeledPair]) -> Result<()> {
        match pairs.iter().find(|p| p.x >= self.m) {
            Some(p) => Err(Error::InvalidParameter(format!(
                "point {} outside a domain of {} points",
                p.x, self.m
            ))),
            None => Ok(()),
        }
    }
}

/// `H(D)`, the hypotheses consistent with a dataset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VersionSpace {
    members: HypSet,
}

impl VersionSpace {
    pub fn from_set(members: HypSet) -> Self {
        Self { members }
    }

    pub fn from_indices(class: &FiniteClass, indices: impl IntoIterator<Item = HypIndex>) -> Self {
        Self { members: HypSet::from_indices(class.len(), indices) }
    }

    pub fn set(&self) -> &HypSet {
        &self.members
    }

    pub fn members(&self) -> Vec<HypIndex> {
        self.members.iter().collect()
    }

    pub fn contains(&self, h: HypIndex) -> bool {
        self.members.contains(h)
    }

    pub fn len(&self) -> usize {
        self.members.count()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn intersection(&self, other: &VersionSpace) -> VersionSpace {
        Self { members: self.members.intersection(&other.members) }
    }

    pub fn lex_min(&self) -> Option<HypIndex> {
        self.members.first()
    }
}

/// A black box deciding realizability of a finite labeled support.
///
/// Implementations must be deterministic and monotone under taking subsets.
/// The support handed in is sorted, deduplicated and free of coincident
/// opposite labels.
pub trait RealizabilityOracle: Send + Sync + fmt::Debug {
    fn domain_size(&self) -> usize;

    fn is_realizable(&self, support: &[LabeledPair]) -> Result<bool>;

    fn describe(&self) -> String;
}

/// Exposes a finite class through the oracle interface only, deciding
/// realizability by a direct row scan rather than the precomputed masks.
#[derive(Debug, Clone)]
pub struct FiniteOracle(pub Arc<FiniteClass>);

impl RealizabilityOracle for FiniteOracle {
    fn domain_size(&self) -> usize {
        self.0.domain_size()
    }

    fn is_realizable(&self, support: &[LabeledPair]) -> Result<bool> {
        self.0.check_points(support)?;
        Ok(self.0.rows().iter().any(|row| support.iter().all(|p| row[p.x] == p.y)))
    }

    fn describe(&self) -> String {
        format!("oracle view of a finite class ({} hypotheses)", self.0.len())
    }
}

#[derive(Clone, Debug)]
pub enum ClassHandle {
    Finite(Arc<FiniteClass>),
    Oracle(Arc<dyn RealizabilityOracle>),
}

impl From<FiniteClass> for ClassHandle {
    fn from(class: FiniteClass) -> Self {
        ClassHandle::Finite(Arc::new(class))
    }
}

impl ClassHandle {
    pub fn oracle(oracle: impl RealizabilityOracle + 'static) -> Self {
        ClassHandle::Oracle(Arc::new(oracle))
    }

    pub fn as_finite(&self) -> Option<&FiniteClass> {
        match self {
            ClassHandle::Finite(c) => Some(c),
            ClassHandle::Oracle(_) => None,
        }
    }

    pub fn finite(&self) -> Result<&FiniteClass> {
        self.as_finite()
            .ok_or_else(|| Error::Unsupported("needs an explicit finite class".into()))
    }

    /// The same class seen only through [`RealizabilityOracle`].
    pub fn to_oracle(&self) -> ClassHandle {
        match self {
            ClassHandle::Finite(c) => ClassHandle::Oracle(Arc::new(FiniteOracle(c.clone()))),
            ClassHandle::Oracle(_) => self.clone(),
        }
    }

    pub fn domain_size(&self) -> usize {
        match self {
            ClassHandle::Finite(c) => c.domain_size(),
            ClassHandle::Oracle(o) => o.domain_size(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ClassHandle::Finite(c) => {
                format!("finite class, {} points, {} hypotheses", c.domain_size(), c.len())
            }
            ClassHandle::Oracle(o) => o.describe(),
        }
    }

    /// Realizability of an arbitrary list of pairs; duplicates are ignored.
    pub fn realizable(&self, pairs: &[LabeledPair]) -> Result<bool> {
        let support = support_of(pairs.iter().copied());
        if let Some(p) = support.iter().find(|p| p.x >= self.domain_size()) {
            return Err(Error::InvalidParameter(format!(
                "point {} outside a domain of {} points",
                p.x,
                self.domain_size()
            )));
        }
        if has_coincident_conflict(&support) {
            return Ok(false);
        }
        match self {
            ClassHandle::Finite(c) => Ok(!c.consistent_set(support).is_empty()),
            ClassHandle::Oracle(o) => o.is_realizable(&support),
        }
    }
}

pub fn is_realizable(class: &ClassHandle, data: &Dataset) -> Result<bool> {
    class.realizable(&data.distinct_pairs())
}

pub fn version_space(class: &FiniteClass, data: &Dataset) -> VersionSpace {
    VersionSpace::from_set(class.consistent_set(data.pairs()))
}

pub fn remove(data: &Dataset, q: &Query) -> Result<Dataset> {
    data.remove(q)
}

/// Lexicographically smallest minimizer of the count-weighted 0-1 loss.
pub fn erm_lexmin(class: &FiniteClass, data: &Dataset) -> HypIndex {
    let support = data.support();
    (0..class.len())
        .min_by_key(|&h| {
            support
                .iter()
                .filter(|(p, _)| class.label(h, p.x) != p.y)
                .map(|(_, c)| *c)
                .sum::<usize>()
        })
        .expect("classes are nonempty")
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;

    /// Thresholds `h_t(x) = 1[x >= t]` over points `1..=m` (ids `0..m`),
    /// hypothesis index `t - 1`.
    pub fn thresholds(m: usize) -> FiniteClass {
        let rows = (1..=m + 1).map(|t| (1..=m).map(|x| x >= t).collect()).collect();
        FiniteClass::new(m, rows).unwrap()
    }

    /// Pair in the 1-based point notation used by the examples.
    pub fn p(x: usize, y: u8) -> LabeledPair {
        LabeledPair::new(x - 1, y == 1)
    }

    pub fn ds(pairs: &[(usize, u8)]) -> Dataset {
        Dataset::from_pairs(pairs.iter().map(|&(x, y)| p(x, y)))
    }
}
