//! Central-memory schemes: store everything, and the bounded-deletion scheme
//! built from k-critical sets.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cost::{count_bits, CostModel};
use crate::model::{
    erm_lexmin, support_of, ClassHandle, Dataset, FiniteClass, HypIndex, Item, LabeledPair,
};
use crate::schemes::CentralScheme;
use crate::{Error, Result};

fn survivors(aux: &Dataset, deletion: &[Item]) -> Result<Dataset> {
    let mut items = aux.items().to_vec();
    for d in deletion {
        match items.iter().position(|it| it.id == d.id) {
            Some(pos) => {
                items.remove(pos);
            }
            None => return Err(Error::UnknownItem(d.id)),
        }
    }
    Dataset::from_items(items)
}

/// Keeps the whole dataset and retrains on every query.
#[derive(Clone, Debug)]
pub struct TrivialScheme {
    pub class: ClassHandle,
}

impl TrivialScheme {
    pub fn new(class: ClassHandle) -> Self {
        Self { class }
    }
}

impl CentralScheme for TrivialScheme {
    type Output = bool;
    type Aux = Dataset;

    fn name(&self) -> &'static str {
        "trivial"
    }

    fn learn(&self, data: &Dataset) -> Result<(bool, Dataset)> {
        Ok((crate::model::is_realizable(&self.class, data)?, data.clone()))
    }

    fn unlearn(&self, deletion: &[Item], aux: &Dataset) -> Result<bool> {
        crate::model::is_realizable(&self.class, &survivors(aux, deletion)?)
    }

    fn aux_bits(&self, aux: &Dataset) -> usize {
        CostModel::for_domain(self.class.domain_size()).dataset_bits(aux.len())
    }
}

/// Keeps the whole dataset and reruns lex-min ERM on every query.
#[derive(Clone, Debug)]
pub struct TrivialErmScheme {
    pub class: Arc<FiniteClass>,
}

impl TrivialErmScheme {
    pub fn new(class: Arc<FiniteClass>) -> Self {
        Self { class }
    }
}

impl CentralScheme for TrivialErmScheme {
    type Output = HypIndex;
    type Aux = Dataset;

    fn name(&self) -> &'static str {
        "trivial-erm"
    }

    fn learn(&self, data: &Dataset) -> Result<(HypIndex, Dataset)> {
        Ok((erm_lexmin(&self.class, data), data.clone()))
    }

    fn unlearn(&self, deletion: &[Item], aux: &Dataset) -> Result<HypIndex> {
        Ok(erm_lexmin(&self.class, &survivors(aux, deletion)?))
    }

    fn aux_bits(&self, aux: &Dataset) -> usize {
        CostModel::for_domain(self.class.domain_size()).dataset_bits(aux.len())
    }
}

/// Greedy minimal unrealizable subset of the distinct pairs of an
/// unrealizable dataset, scanning pairs in canonical order.
pub fn minimal_unrealizable_core(class: &ClassHandle, data: &Dataset) -> Result<Vec<LabeledPair>> {
    core_of(class, &data.distinct_pairs())
}

fn core_of(class: &ClassHandle, support: &[LabeledPair]) -> Result<Vec<LabeledPair>> {
    if class.realizable(support)? {
        return Err(Error::Precondition("data is realizable, it has no unrealizable core".into()));
    }
    let mut cur = support.to_vec();
    let mut i = 0;
    while i < cur.len() {
        let mut rest = cur.clone();
        rest.remove(i);
        if class.realizable(&rest)? {
            i += 1;
        } else {
            cur = rest;
        }
    }
    Ok(cur)
}

fn minus(support: &[LabeledPair], removed: &[LabeledPair]) -> Vec<LabeledPair> {
    support.iter().filter(|p| !removed.contains(p)).copied().collect()
}

/// Whether deleting every copy of `set` makes `support` realizable while no
/// proper subset of `set` does.
pub fn is_critical(class: &ClassHandle, support: &[LabeledPair], set: &[LabeledPair]) -> Result<bool> {
    if !class.realizable(&minus(support, set))? {
        return Ok(false);
    }
    // realizability is monotone, so checking maximal proper subsets suffices
    for i in 0..set.len() {
        let mut smaller = set.to_vec();
        smaller.remove(i);
        if class.realizable(&minus(support, &smaller))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All critical sets of size at most `k`, each sorted, in sorted order.
///
/// Every critical set meets every unrealizable core of what is left after
/// removing any of its subsets, so branching on the pairs of one core per
/// prefix reaches all of them.
pub fn enumerate_critical_sets(
    class: &ClassHandle,
    data: &Dataset,
    k: usize,
) -> Result<Vec<Vec<LabeledPair>>> {
    let support = data.distinct_pairs();
    if class.realizable(&support)? {
        return Err(Error::Precondition("data is realizable, nothing is critical".into()));
    }
    let mut found = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([Vec::<LabeledPair>::new()]);
    seen.insert(Vec::new());
    while let Some(prefix) = queue.pop_front() {
        let rest = minus(&support, &prefix);
        if class.realizable(&rest)? {
            if is_critical(class, &support, &prefix)? {
                found.insert(prefix);
            }
            continue;
        }
        if prefix.len() == k {
            continue;
        }
        for p in core_of(class, &rest)? {
            let mut next = prefix.clone();
            next.push(p);
            next.sort_unstable();
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// Aux of the bounded-deletion scheme.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalIndex {
    pub base_realizable: bool,
    pub k: usize,
    pub n: usize,
    pub critical_sets: Vec<Vec<LabeledPair>>,
    /// Multiplicity in the dataset of every pair used by a critical set.
    pub pair_counts: BTreeMap<LabeledPair, usize>,
}

/// Supports deletions of at most `k` items by storing all critical sets of
/// size at most `k`.
#[derive(Clone, Debug)]
pub struct BoundedScheme {
    pub class: ClassHandle,
    pub k: usize,
}

impl BoundedScheme {
    pub fn new(class: ClassHandle, k: usize) -> Self {
        Self { class, k }
    }
}

impl CentralScheme for BoundedScheme {
    type Output = bool;
    type Aux = CriticalIndex;

    fn name(&self) -> &'static str {
        "bounded"
    }

    fn learn(&self, data: &Dataset) -> Result<(bool, CriticalIndex)> {
        let base_realizable = crate::model::is_realizable(&self.class, data)?;
        let mut index = CriticalIndex {
            base_realizable,
            k: self.k,
            n: data.len(),
            critical_sets: Vec::new(),
            pair_counts: BTreeMap::new(),
        };
        if !base_realizable {
            index.critical_sets = enumerate_critical_sets(&self.class, data, self.k)?;
            let support = data.support();
            for p in index.critical_sets.iter().flatten() {
                index.pair_counts.insert(*p, support[p]);
            }
        }
        Ok((base_realizable, index))
    }

    fn unlearn(&self, deletion: &[Item], aux: &CriticalIndex) -> Result<bool> {
        if deletion.len() > aux.k {
            return Err(Error::QueryTooLarge { size: deletion.len(), k: aux.k });
        }
        if aux.base_realizable {
            return Ok(true);
        }
        let mut removed: BTreeMap<LabeledPair, usize> = BTreeMap::new();
        for it in deletion {
            *removed.entry(it.pair).or_insert(0) += 1;
        }
        let gone = |p: &LabeledPair| {
            aux.pair_counts.get(p).is_some_and(|c| removed.get(p).copied().unwrap_or(0) >= *c)
        };
        Ok(aux.critical_sets.iter().any(|set| set.iter().all(gone)))
    }

    /// Flag bit; then each set as a size header and its pairs, closed by an
    /// empty header; then the multiplicity of each distinct pair in order of
    /// first appearance.
    fn aux_bits(&self, aux: &CriticalIndex) -> usize {
        if aux.base_realizable {
            return 1;
        }
        let cost = CostModel::for_domain(self.class.domain_size());
        let header = count_bits(aux.k);
        let sets: usize = aux.critical_sets.iter().map(|s| header + s.len() * cost.pair_bits()).sum();
        let distinct = support_of(aux.critical_sets.iter().flatten().copied()).len();
        1 + sets + header + distinct * count_bits(aux.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_util::*;
    use crate::model::Query;

    fn thr4() -> ClassHandle {
        thresholds(4).into()
    }

    fn del(d: &Dataset, ids: &[usize]) -> Vec<Item> {
        d.deletion(&Query::new(ids.iter().copied()).unwrap()).unwrap()
    }

    #[test]
    fn trivial_examples() {
        let s = TrivialScheme::new(thr4());
        let d = ds(&[(1, 1), (2, 0)]);
        let (ans, aux) = s.learn(&d).unwrap();
        assert!(!ans);
        assert!(s.unlearn(&del(&d, &[1]), &aux).unwrap());
        assert!(!s.unlearn(&[], &aux).unwrap());
        assert_eq!(s.aux_bits(&aux), 2 + 2 * 3);
        let bogus = [Item { id: 9, pair: p(1, 1) }];
        assert!(matches!(s.unlearn(&bogus, &aux), Err(Error::UnknownItem(9))));
    }

    #[test]
    fn core_examples() {
        let c = thr4();
        assert_eq!(
            minimal_unrealizable_core(&c, &ds(&[(1, 1), (2, 0), (3, 1), (4, 0)])).unwrap(),
            vec![p(3, 1), p(4, 0)]
        );
        assert_eq!(minimal_unrealizable_core(&c, &ds(&[(2, 0), (2, 1)])).unwrap(), vec![p(2, 0), p(2, 1)]);
        assert!(minimal_unrealizable_core(&c, &ds(&[(2, 1)])).is_err());
    }

    #[test]
    fn critical_set_examples() {
        let c = thr4();
        let d = ds(&[(1, 1), (2, 0), (3, 1), (4, 0)]);
        assert_eq!(
            enumerate_critical_sets(&c, &d, 2).unwrap(),
            vec![vec![p(1, 1), p(3, 1)], vec![p(1, 1), p(4, 0)], vec![p(2, 0), p(4, 0)]]
        );
        assert!(enumerate_critical_sets(&c, &d, 1).unwrap().is_empty());
        assert_eq!(
            enumerate_critical_sets(&c, &ds(&[(2, 0), (2, 1)]), 1).unwrap(),
            vec![vec![p(2, 0)], vec![p(2, 1)]]
        );
    }

    #[test]
    fn bounded_examples() {
        let s = BoundedScheme::new(thr4(), 2);
        let d = ds(&[(1, 1), (2, 0), (3, 1), (4, 0)]);
        let (ans, aux) = s.learn(&d).unwrap();
        assert!(!ans);
        assert!(s.unlearn(&del(&d, &[2, 4]), &aux).unwrap());
        assert!(!s.unlearn(&del(&d, &[1]), &aux).unwrap());
        assert!(matches!(
            s.unlearn(&del(&d, &[1, 2, 3]), &aux),
            Err(Error::QueryTooLarge { size: 3, k: 2 })
        ));

        let s = BoundedScheme::new(thr4(), 1);
        let d = ds(&[(2, 1), (2, 1), (2, 0)]);
        let (_, aux) = s.learn(&d).unwrap();
        assert!(!s.unlearn(&del(&d, &[1]), &aux).unwrap());
        assert!(s.unlearn(&del(&d, &[3]), &aux).unwrap());
    }

    #[test]
    fn realizable_data_costs_one_bit() {
        let s = BoundedScheme::new(thr4(), 3);
        let (ans, aux) = s.learn(&ds(&[(2, 1), (1, 0)])).unwrap();
        assert!(ans);
        assert_eq!(s.aux_bits(&aux), 1);
    }
}
