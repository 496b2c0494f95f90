//! Ticketed schemes: the Merkle-tree scheme over any mergeable encoding, and
//! the chain scheme for the class that labels `[d]` freely and everything
//! beyond `d` as 0.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::compression::{Mergeable, VsEncoding, VsMergeable, ErmMergeable};
use crate::cost::{ceil_log2, count_bits, CostModel};
use crate::model::{ClassHandle, Dataset, FiniteClass, Item, LabeledPair, PointId};
use crate::schemes::TicketedScheme;
use crate::{Error, Result};

/// Ticket of leaf `leaf` (0-based): the encodings of the siblings along its
/// root-to-leaf path, ordered from the root down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerkleTicket {
    pub leaf: usize,
    pub siblings: Vec<VsEncoding>,
}

/// Leaves hold single items, padded with empty leaves to a power of two;
/// every node stores the encoding of the items below it.
#[derive(Clone, Debug)]
pub struct MerkleScheme<M> {
    pub tester: M,
    name: &'static str,
    cost: CostModel,
}

impl MerkleScheme<VsMergeable> {
    pub fn realizability(class: ClassHandle) -> Self {
        let cost = CostModel::for_domain(class.domain_size());
        Self { tester: VsMergeable::new(class), name: "merkle", cost }
    }
}

impl MerkleScheme<ErmMergeable> {
    pub fn erm(class: Arc<FiniteClass>) -> Self {
        let cost = CostModel::for_domain(class.domain_size());
        Self { tester: ErmMergeable::new(class), name: "erm-merkle", cost }
    }
}

impl<M: Mergeable> MerkleScheme<M> {
    pub fn cost(&self) -> CostModel {
        self.cost
    }

    /// Node encodings in heap layout: root at 1, children of `v` at `2v` and
    /// `2v + 1`, leaf `i` at `leaves + i`. Index 0 is unused.
    pub fn build_tree(&self, data: &Dataset) -> Result<Vec<VsEncoding>> {
        let leaves = data.len().max(1).next_power_of_two();
        let pairs: Vec<LabeledPair> = data.pairs().collect();
        let mut nodes = vec![self.tester.identity(); 2 * leaves];
        for (v, node) in nodes.iter_mut().enumerate().skip(1) {
            let level = usize::BITS - 1 - v.leading_zeros();
            let width = leaves >> level;
            let lo = (v - (1 << level)) * width;
            let hi = (lo + width).min(pairs.len());
            if lo < hi {
                *node = self.tester.encode(&Dataset::from_pairs(pairs[lo..hi].iter().copied()))?;
            }
        }
        Ok(nodes)
    }
}

impl<M> TicketedScheme for MerkleScheme<M>
where
    M: Mergeable,
    M::Output: Clone + std::fmt::Debug + PartialEq + Into<crate::schemes::Answer>,
{
    type Output = M::Output;
    type Aux = M::Output;
    type Ticket = MerkleTicket;

    fn name(&self) -> &'static str {
        self.name
    }

    fn learn(&self, data: &Dataset) -> Result<(M::Output, M::Output, Vec<MerkleTicket>)> {
        let nodes = self.build_tree(data)?;
        let leaves = nodes.len() / 2;
        let answer = self.tester.decode(&nodes[1])?;
        let tickets = (0..data.len())
            .map(|leaf| {
                let mut siblings = Vec::new();
                let mut v = leaves + leaf;
                while v > 1 {
                    siblings.push(nodes[v ^ 1].clone());
                    v /= 2;
                }
                siblings.reverse();
                MerkleTicket { leaf, siblings }
            })
            .collect();
        Ok((answer.clone(), answer, tickets))
    }

    fn unlearn(
        &self,
        deletion: &[Item],
        tickets: &[MerkleTicket],
        aux: &M::Output,
    ) -> Result<M::Output> {
        if tickets.len() < deletion.len() {
            return Err(Error::MissingTicket(deletion[tickets.len()].id));
        }
        if tickets.len() > deletion.len() {
            return Err(Error::InconsistentTicket("more tickets than deleted items".into()));
        }
        let Some(first) = tickets.first() else {
            return Ok(aux.clone());
        };
        let depth = first.siblings.len();
        let leaves = 1usize << depth;
        let mut by_leaf = BTreeMap::new();
        for t in tickets {
            if t.siblings.len() != depth || t.leaf >= leaves {
                return Err(Error::InconsistentTicket(format!("ticket of leaf {} has the wrong shape", t.leaf)));
            }
            if by_leaf.insert(t.leaf, t).is_some() {
                return Err(Error::InconsistentTicket(format!("leaf {} deleted twice", t.leaf)));
            }
        }
        // maximal untouched subtrees: each one's sibling holds a deleted leaf
        // whose ticket carries the subtree's encoding
        let mut acc = self.tester.identity();
        let mut stack = vec![(1usize, 0usize, 0usize)];
        while let Some((v, level, lo)) = stack.pop() {
            let width = leaves >> level;
            if by_leaf.range(lo..lo + width).next().is_none() {
                let sib_lo = if v % 2 == 0 { lo + width } else { lo - width };
                let (_, t) = by_leaf.range(sib_lo..sib_lo + width).next().expect("parent is touched");
                acc = self.tester.merge(&acc, &t.siblings[level - 1])?;
            } else if width > 1 {
                stack.push((2 * v, level + 1, lo));
                stack.push((2 * v + 1, level + 1, lo + width / 2));
            }
        }
        self.tester.decode(&acc)
    }

    fn aux_bits(&self, _aux: &M::Output) -> usize {
        self.tester.output_bits()
    }

    fn ticket_bits(&self, ticket: &MerkleTicket) -> usize {
        ticket.siblings.len() + ticket.siblings.iter().map(|e| self.cost.encoding_bits(e)).sum::<usize>()
    }
}

/// A point of the conflict sequence with its label counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub x: PointId,
    pub n0: usize,
    pub n1: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainAux {
    pub first: Option<ChainRecord>,
    pub second: Option<ChainRecord>,
    pub n: usize,
}

/// Ticket of an item sitting on the conflict sequence: its own record and the
/// next one. Items off the sequence get an empty ticket.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainTicket {
    pub current: Option<ChainRecord>,
    pub next: Option<ChainRecord>,
    pub n: usize,
}

/// Scheme for the class over `domain` points that labels the first `d`
/// points arbitrarily and every later point 0.
///
/// The conflict sequence lists, in increasing order, the free points carrying
/// both labels and the later points carrying label 1. Data is realizable iff
/// the sequence is empty, and deleting keeps it so iff every listed point
/// loses one whole side (the 1 side for later points).
#[derive(Clone, Debug)]
pub struct ChainScheme {
    pub d: usize,
    pub domain: usize,
}

impl ChainScheme {
    pub fn new(d: usize, domain: usize) -> Result<Self> {
        if d > domain {
            return Err(Error::InvalidParameter(format!("d = {d} exceeds the domain size {domain}")));
        }
        Ok(Self { d, domain })
    }

    fn record_bits(&self, n: usize) -> usize {
        ceil_log2(self.domain) + 2 * count_bits(n)
    }

    fn discharged(&self, r: &ChainRecord, removed: &BTreeMap<LabeledPair, usize>) -> bool {
        let gone = |y: bool, total: usize| removed.get(&LabeledPair::new(r.x, y)).copied().unwrap_or(0) >= total;
        if r.x < self.d {
            gone(false, r.n0) || gone(true, r.n1)
        } else {
            gone(true, r.n1)
        }
    }

    pub fn conflict_sequence(&self, data: &Dataset) -> Result<Vec<ChainRecord>> {
        let mut counts: BTreeMap<PointId, (usize, usize)> = BTreeMap::new();
        for p in data.pairs() {
            if p.x >= self.domain {
                return Err(Error::InvalidParameter(format!("point {} outside the domain", p.x)));
            }
            let c = counts.entry(p.x).or_default();
            if p.y {
                c.1 += 1;
            } else {
                c.0 += 1;
            }
        }
        Ok(counts
            .into_iter()
            .filter(|&(x, (n0, n1))| n1 > 0 && (x >= self.d || n0 > 0))
            .map(|(x, (n0, n1))| ChainRecord { x, n0, n1 })
            .collect())
    }
}

impl TicketedScheme for ChainScheme {
    type Output = bool;
    type Aux = ChainAux;
    type Ticket = ChainTicket;

    fn name(&self) -> &'static str {
        "chain"
    }

    fn learn(&self, data: &Dataset) -> Result<(bool, ChainAux, Vec<ChainTicket>)> {
        let seq = self.conflict_sequence(data)?;
        let n = data.len();
        let aux = ChainAux { first: seq.first().copied(), second: seq.get(1).copied(), n };
        let tickets = data
            .pairs()
            .map(|p| match seq.iter().position(|r| r.x == p.x) {
                Some(i) => ChainTicket { current: Some(seq[i]), next: seq.get(i + 1).copied(), n },
                None => ChainTicket { current: None, next: None, n },
            })
            .collect();
        Ok((seq.is_empty(), aux, tickets))
    }

    fn unlearn(&self, deletion: &[Item], tickets: &[ChainTicket], aux: &ChainAux) -> Result<bool> {
        let mut removed: BTreeMap<LabeledPair, usize> = BTreeMap::new();
        for it in deletion {
            *removed.entry(it.pair).or_insert(0) += 1;
        }
        let mut visited = BTreeSet::new();
        let mut cur = aux.first;
        let mut step = 0;
        while let Some(r) = cur {
            if !self.discharged(&r, &removed) || !visited.insert(r.x) {
                return Ok(false);
            }
            cur = if step == 0 {
                aux.second
            } else {
                let j = deletion
                    .iter()
                    .position(|it| it.pair.x == r.x)
                    .expect("a discharged point lost at least one item");
                let t = tickets.get(j).ok_or(Error::MissingTicket(deletion[j].id))?;
                if t.current != Some(r) {
                    return Err(Error::InconsistentTicket(format!("item {} does not carry point {}", deletion[j].id, r.x)));
                }
                t.next
            };
            step += 1;
        }
        Ok(true)
    }

    fn aux_bits(&self, aux: &ChainAux) -> usize {
        2 + 2 * self.record_bits(aux.n)
    }

    fn ticket_bits(&self, t: &ChainTicket) -> usize {
        match (t.current, t.next) {
            (None, _) => 1,
            (Some(_), None) => 2 + self.record_bits(t.n),
            (Some(_), Some(_)) => 2 + 2 * self.record_bits(t.n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::vs_encode;
    use crate::model::test_util::*;
    use crate::model::Query;

    fn run<S: TicketedScheme>(s: &S, d: &Dataset, ids: &[usize]) -> S::Output {
        let (_, aux, tickets) = s.learn(d).unwrap();
        let q = Query::new(ids.iter().copied()).unwrap();
        let deletion = d.deletion(&q).unwrap();
        let ts: Vec<_> = deletion.iter().map(|it| tickets[d.position_of(it.id).unwrap()].clone()).collect();
        s.unlearn(&deletion, &ts, &aux).unwrap()
    }

    #[test]
    fn merkle_ticket_layout_for_eight_leaves() {
        let class = ClassHandle::from(thresholds(8));
        let s = MerkleScheme::realizability(class.clone());
        let d = ds(&[(8, 1), (7, 1), (6, 1), (1, 0), (5, 1), (2, 0), (3, 0), (4, 1)]);
        let (_, _, tickets) = s.learn(&d).unwrap();
        let enc = |r: std::ops::Range<usize>| {
            vs_encode(&class, &Dataset::from_pairs(d.pairs().skip(r.start).take(r.len()))).unwrap()
        };
        // leaf 5 in 1-based numbering
        assert_eq!(tickets[4], MerkleTicket { leaf: 4, siblings: vec![enc(0..4), enc(6..8), enc(5..6)] });
    }

    #[test]
    fn merkle_single_item_and_full_deletion() {
        let s = MerkleScheme::realizability(thresholds(8).into());
        let d = ds(&[(3, 1)]);
        let (ans, aux, tickets) = s.learn(&d).unwrap();
        assert!(ans && aux);
        assert!(tickets[0].siblings.is_empty());
        let d = ds(&[(3, 1), (3, 0), (5, 1)]);
        assert!(run(&s, &d, &[1, 2, 3]));
        assert!(!run(&s, &d, &[]));
        assert!(run(&s, &d, &[2]));
        assert!(!run(&s, &d, &[3]));
    }

    #[test]
    fn merkle_rejects_missing_tickets() {
        let s = MerkleScheme::realizability(thresholds(4).into());
        let d = ds(&[(3, 1), (3, 0)]);
        let (_, aux, _) = s.learn(&d).unwrap();
        let deletion = d.deletion(&Query::new([1]).unwrap()).unwrap();
        assert!(matches!(s.unlearn(&deletion, &[], &aux), Err(Error::MissingTicket(1))));
    }

    #[test]
    fn erm_merkle_examples() {
        let s = MerkleScheme::erm(Arc::new(thresholds(4)));
        let d = ds(&[(2, 1), (3, 1)]);
        assert_eq!(run(&s, &d, &[1]), 0);
        assert_eq!(run(&s, &d, &[]), 0);
        let d = ds(&[(4, 1), (1, 0)]);
        assert_eq!(run(&s, &d, &[]), 1);
        assert_eq!(run(&s, &d, &[2]), 0);
        assert!(s.learn(&ds(&[(2, 1), (2, 0)])).is_err());
    }

    #[test]
    fn chain_examples() {
        let s = ChainScheme::new(2, 4).unwrap();
        let d = ds(&[(1, 0), (1, 1), (3, 1), (4, 0)]);
        assert!(run(&s, &d, &[1, 3]));
        assert!(!run(&s, &d, &[]));
        assert!(!run(&s, &d, &[1]));
        assert!(run(&s, &ds(&[(3, 1)]), &[1]));
    }
}
