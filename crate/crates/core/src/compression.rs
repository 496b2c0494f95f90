//! Version-space compression and mergeable encodings.
//!
//! [`vs_encode`] keeps an eluder subsequence of the input, prunes it to a
//! star-sized set and then canonicalizes, so equal version spaces always get
//! equal encodings. That makes [`merge`] well defined and lets encodings be
//! compared structurally.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::hypset::HypSet;
use crate::model::{
    ClassHandle, Dataset, FiniteClass, HypIndex, Item, LabeledPair, PointId,
    VersionSpace,
};
use crate::schemes::CentralScheme;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "pairs", rename_all = "lowercase")]
pub enum VsEncoding {
    /// Sorted, duplicate-free pairs with a nonempty version space.
    Realizable(Vec<LabeledPair>),
    /// Stands for the coincident pair `{(x0,0),(x0,1)}` on the first point.
    Unrealizable,
}

impl VsEncoding {
    pub fn identity() -> Self {
        VsEncoding::Realizable(Vec::new())
    }

    pub fn is_realizable(&self) -> bool {
        matches!(self, VsEncoding::Realizable(_))
    }

    /// The labeled pairs this encoding stands for.
    pub fn pairs(&self) -> Vec<LabeledPair> {
        match self {
            VsEncoding::Realizable(p) => p.clone(),
            VsEncoding::Unrealizable => vec![LabeledPair::new(0, false), LabeledPair::new(0, true)],
        }
    }

    /// Number of pairs charged by the cost model.
    pub fn stored_pairs(&self) -> usize {
        match self {
            VsEncoding::Realizable(p) => p.len(),
            VsEncoding::Unrealizable => 2,
        }
    }
}

fn with_pair(set: &[LabeledPair], p: LabeledPair) -> Vec<LabeledPair> {
    let mut v = set.to_vec();
    v.push(p);
    v
}

/// Keeps the items that still split the version space of what was kept
/// before them; stops right after the first item that contradicts it.
pub fn eluder_subsequence(class: &ClassHandle, data: &Dataset) -> Result<Vec<LabeledPair>> {
    let mut kept = Vec::new();
    for p in data.pairs() {
        let agrees = class.realizable(&with_pair(&kept, p))?;
        let flipped = class.realizable(&with_pair(&kept, p.flipped()))?;
        if agrees && !flipped {
            continue;
        }
        kept.push(p);
        if !agrees {
            break;
        }
    }
    Ok(kept)
}

/// Drops, in order, each pair whose removal leaves the version space as it
/// is. For a realizable set that means the flipped pair is already ruled out;
/// for an unrealizable one the rest must stay unrealizable.
pub fn star_prune(class: &ClassHandle, kept: &[LabeledPair]) -> Result<Vec<LabeledPair>> {
    let mut cur = kept.to_vec();
    let realizable = class.realizable(&cur)?;
    let mut i = 0;
    while i < cur.len() {
        let z = cur[i];
        let mut rest = cur.clone();
        rest.remove(i);
        let redundant = if realizable {
            !class.realizable(&with_pair(&rest, z.flipped()))?
        } else {
            !class.realizable(&rest)?
        };
        if redundant {
            cur = rest;
        } else {
            i += 1;
        }
    }
    Ok(cur)
}

/// Pairs forced by the version space of `set` that the whole class does not
/// already force, in lexicographic order, then pruned.
fn canonicalize(class: &ClassHandle, set: &[LabeledPair]) -> Result<Vec<LabeledPair>> {
    let mut forced = Vec::new();
    for x in 0..class.domain_size() {
        for y in [false, true] {
            let p = LabeledPair::new(x, y);
            if class.realizable(&with_pair(set, p))?
                && !class.realizable(&with_pair(set, p.flipped()))?
                && class.realizable(&[p.flipped()])?
            {
                forced.push(p);
            }
        }
    }
    star_prune(class, &forced)
}

pub fn vs_encode(class: &ClassHandle, data: &Dataset) -> Result<VsEncoding> {
    let kept = eluder_subsequence(class, data)?;
    let pruned = star_prune(class, &kept)?;
    if !class.realizable(&pruned)? {
        return Ok(VsEncoding::Unrealizable);
    }
    Ok(VsEncoding::Realizable(canonicalize(class, &pruned)?))
}

pub fn vs_decode(class: &FiniteClass, enc: &VsEncoding) -> VersionSpace {
    match enc {
        VsEncoding::Realizable(pairs) => {
            VersionSpace::from_set(class.consistent_set(pairs.iter().copied()))
        }
        VsEncoding::Unrealizable => VersionSpace::from_set(HypSet::empty(class.len())),
    }
}

/// The canonical dataset of a hypothesis subset, or
/// [`Error::NotAVersionSpace`] when no dataset has exactly `vs` as its
/// version space.
pub fn canonical_dataset(class: &FiniteClass, vs: &VersionSpace) -> Result<VsEncoding> {
    if vs.is_empty() {
        return Ok(VsEncoding::Unrealizable);
    }
    let members = vs.set();
    let mut set = Vec::new();
    for x in 0..class.domain_size() {
        for y in [false, true] {
            let p = LabeledPair::new(x, y);
            if members.is_subset(class.agreeing(p)) && !class.agreeing(p.flipped()).is_empty() {
                set.push(p);
            }
        }
    }
    let target = class.consistent_set(set.iter().copied());
    let mut i = 0;
    while i < set.len() {
        let mut rest = set.clone();
        rest.remove(i);
        if class.consistent_set(rest.iter().copied()) == target {
            set = rest;
        } else {
            i += 1;
        }
    }
    if &target != members {
        return Err(Error::NotAVersionSpace);
    }
    Ok(VsEncoding::Realizable(set))
}

pub fn merge(class: &ClassHandle, a: &VsEncoding, b: &VsEncoding) -> Result<VsEncoding> {
    match class {
        ClassHandle::Finite(c) => {
            canonical_dataset(c, &vs_decode(c, a).intersection(&vs_decode(c, b)))
        }
        ClassHandle::Oracle(_) => match (a, b) {
            (VsEncoding::Realizable(x), VsEncoding::Realizable(y)) => {
                vs_encode(class, &Dataset::from_pairs(x.iter().chain(y).copied()))
            }
            _ => Ok(VsEncoding::Unrealizable),
        },
    }
}

/// Realizability answer carried by an encoding.
pub fn mergeable_decode(enc: &VsEncoding) -> bool {
    enc.is_realizable()
}

/// A permutation-invariant encoding with a merge law
/// `merge(encode(S1), encode(S2)) = encode(S1 ∪ S2)`.
pub trait Mergeable {
    type Output;

    fn encode(&self, data: &Dataset) -> Result<VsEncoding>;

    fn merge(&self, a: &VsEncoding, b: &VsEncoding) -> Result<VsEncoding>;

    fn decode(&self, enc: &VsEncoding) -> Result<Self::Output>;

    /// Encoding of the empty dataset.
    fn identity(&self) -> VsEncoding {
        VsEncoding::identity()
    }

    fn domain_size(&self) -> usize;

    /// Bits needed to store a decoded output.
    fn output_bits(&self) -> usize;
}

/// Mergeable realizability testing.
#[derive(Clone, Debug)]
pub struct VsMergeable {
    pub class: ClassHandle,
}

impl VsMergeable {
    pub fn new(class: ClassHandle) -> Self {
        Self { class }
    }
}

impl Mergeable for VsMergeable {
    type Output = bool;

    fn encode(&self, data: &Dataset) -> Result<VsEncoding> {
        vs_encode(&self.class, data)
    }

    fn merge(&self, a: &VsEncoding, b: &VsEncoding) -> Result<VsEncoding> {
        merge(&self.class, a, b)
    }

    fn decode(&self, enc: &VsEncoding) -> Result<bool> {
        Ok(mergeable_decode(enc))
    }

    fn domain_size(&self) -> usize {
        self.class.domain_size()
    }

    fn output_bits(&self) -> usize {
        1
    }
}

/// Mergeable lex-min ERM on realizable inputs: decode returns the smallest
/// hypothesis index in the encoded version space.
#[derive(Clone, Debug)]
pub struct ErmMergeable {
    pub class: Arc<FiniteClass>,
    handle: ClassHandle,
}

impl ErmMergeable {
    pub fn new(class: Arc<FiniteClass>) -> Self {
        let handle = ClassHandle::Finite(class.clone());
        Self { class, handle }
    }
}

impl Mergeable for ErmMergeable {
    type Output = HypIndex;

    fn encode(&self, data: &Dataset) -> Result<VsEncoding> {
        vs_encode(&self.handle, data)
    }

    fn merge(&self, a: &VsEncoding, b: &VsEncoding) -> Result<VsEncoding> {
        merge(&self.handle, a, b)
    }

    fn decode(&self, enc: &VsEncoding) -> Result<HypIndex> {
        vs_decode(&self.class, enc)
            .lex_min()
            .ok_or_else(|| Error::Precondition("ERM merge law needs realizable data".into()))
    }

    fn domain_size(&self) -> usize {
        self.class.domain_size()
    }

    fn output_bits(&self) -> usize {
        crate::cost::ceil_log2(self.class.len())
    }
}

/// The dataset labeling every domain point as `h` does.
pub fn full_graph_dataset(class: &FiniteClass, h: HypIndex) -> Dataset {
    Dataset::from_pairs((0..class.domain_size()).map(|x| LabeledPair::new(x, class.label(h, x))))
}

/// Recovers the version space behind an encoding using only a mergeable
/// realizability tester: `h` survives iff merging in its full graph keeps the
/// data realizable.
pub fn mergeable_to_vs_decode<M: Mergeable<Output = bool>>(
    class: &FiniteClass,
    tester: &M,
    enc: &VsEncoding,
) -> Result<VersionSpace> {
    let mut members = Vec::new();
    for h in 0..class.len() {
        let graph = tester.encode(&full_graph_dataset(class, h))?;
        if tester.decode(&tester.merge(enc, &graph)?)? {
            members.push(h);
        }
    }
    Ok(VersionSpace::from_indices(class, members))
}

/// Version-space compression built from a central unlearning scheme.
///
/// The scheme learns on the identification-set points with both labels,
/// followed by an eluder subsequence of `S`; its aux is the encoding.
pub struct LuVsAdapter<'a, S> {
    pub scheme: &'a S,
    pub class: &'a FiniteClass,
    pub mis: Vec<PointId>,
}

impl<'a, S: CentralScheme<Output = bool>> LuVsAdapter<'a, S> {
    pub fn new(scheme: &'a S, class: &'a FiniteClass) -> Self {
        let mis = crate::dimensions::min_identification_set(class);
        Self { scheme, class, mis }
    }

    /// The dataset handed to the scheme.
    pub fn learning_set(&self, s: &Dataset) -> Result<Dataset> {
        let handle = ClassHandle::Finite(Arc::new(self.class.clone()));
        let head = self.mis.iter().flat_map(|&t| [LabeledPair::new(t, false), LabeledPair::new(t, true)]);
        let tail = eluder_subsequence(&handle, s)?;
        Ok(Dataset::from_pairs(head.chain(tail)))
    }

    pub fn encode(&self, s: &Dataset) -> Result<S::Aux> {
        Ok(self.scheme.learn(&self.learning_set(s)?)?.1)
    }

    pub fn decode(&self, aux: &S::Aux) -> Result<VersionSpace> {
        let mut members = Vec::new();
        for h in 0..self.class.len() {
            // delete the label h disagrees with at every identification point
            let deletion: Vec<Item> = self
                .mis
                .iter()
                .enumerate()
                .map(|(j, &t)| {
                    let wrong = !self.class.label(h, t);
                    Item { id: 2 * j + 1 + usize::from(wrong), pair: LabeledPair::new(t, wrong) }
                })
                .collect();
            if self.scheme.unlearn(&deletion, aux)? {
                members.push(h);
            }
        }
        Ok(VersionSpace::from_indices(self.class, members))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_util::*;
    use crate::model::version_space;

    fn thr(m: usize) -> ClassHandle {
        thresholds(m).into()
    }

    fn pairs(v: &[(usize, u8)]) -> Vec<LabeledPair> {
        v.iter().map(|&(x, y)| p(x, y)).collect()
    }

    #[test]
    fn eluder_subsequence_examples() {
        let c = thr(4);
        assert_eq!(
            eluder_subsequence(&c, &ds(&[(4, 1), (4, 1), (3, 1)])).unwrap(),
            pairs(&[(4, 1), (3, 1)])
        );
        assert!(eluder_subsequence(&c, &Dataset::new()).unwrap().is_empty());
        assert_eq!(
            eluder_subsequence(&c, &ds(&[(1, 1), (2, 0), (3, 0)])).unwrap(),
            pairs(&[(1, 1), (2, 0)])
        );
    }

    #[test]
    fn star_prune_examples() {
        let c = thr(4);
        assert_eq!(star_prune(&c, &pairs(&[(2, 1), (3, 1), (4, 1)])).unwrap(), pairs(&[(2, 1)]));
        assert!(star_prune(&c, &[]).unwrap().is_empty());
        let both = pairs(&[(1, 0), (2, 1)]);
        assert_eq!(star_prune(&c, &both).unwrap(), both);
    }

    #[test]
    fn encode_decode_examples() {
        let c = thr(4);
        let f = thresholds(4);
        let e = vs_encode(&c, &ds(&[(2, 1), (3, 1)])).unwrap();
        assert_eq!(e, VsEncoding::Realizable(pairs(&[(2, 1)])));
        assert_eq!(vs_decode(&f, &e).members(), vec![0, 1]);

        let e = vs_encode(&c, &ds(&[(3, 0), (3, 1)])).unwrap();
        assert_eq!(e, VsEncoding::Unrealizable);
        assert!(vs_decode(&f, &e).is_empty());

        let e = vs_encode(&c, &Dataset::new()).unwrap();
        assert_eq!(e, VsEncoding::identity());
        assert_eq!(vs_decode(&f, &e).len(), 5);
    }

    #[test]
    fn canonical_dataset_examples() {
        let f = thresholds(4);
        let vs = VersionSpace::from_indices(&f, [0, 1]);
        assert_eq!(canonical_dataset(&f, &vs).unwrap(), VsEncoding::Realizable(pairs(&[(2, 1)])));
        let empty = VersionSpace::from_indices(&f, []);
        assert_eq!(canonical_dataset(&f, &empty).unwrap(), VsEncoding::Unrealizable);
        assert_eq!(VsEncoding::Unrealizable.pairs(), vec![p(1, 0), p(1, 1)]);
        assert_eq!(canonical_dataset(&f, &VersionSpace::from_set(f.all())).unwrap(), VsEncoding::identity());
        // {h_1, h_3} is not the version space of any dataset
        let gap = VersionSpace::from_indices(&f, [0, 2]);
        assert!(matches!(canonical_dataset(&f, &gap), Err(Error::NotAVersionSpace)));
    }

    #[test]
    fn merge_examples() {
        let c = thr(4);
        let enc = |v: &[(usize, u8)]| vs_encode(&c, &ds(v)).unwrap();
        assert_eq!(merge(&c, &enc(&[(4, 1)]), &enc(&[(3, 1)])).unwrap(), enc(&[(4, 1), (3, 1)]));
        let e = enc(&[(2, 1)]);
        assert_eq!(merge(&c, &e, &VsEncoding::identity()).unwrap(), e);
        assert_eq!(merge(&c, &enc(&[(1, 1)]), &enc(&[(2, 0)])).unwrap(), VsEncoding::Unrealizable);
        let o = c.to_oracle();
        assert_eq!(merge(&o, &enc(&[(4, 1)]), &enc(&[(3, 1)])).unwrap(), enc(&[(4, 1), (3, 1)]));
    }

    #[test]
    fn mergeable_decode_recovers_version_space() {
        let c = thr(4);
        let f = thresholds(4);
        let t = VsMergeable::new(c.clone());
        let e = vs_encode(&c, &ds(&[(2, 1)])).unwrap();
        assert_eq!(mergeable_to_vs_decode(&f, &t, &e).unwrap().members(), vec![0, 1]);
        assert!(mergeable_to_vs_decode(&f, &t, &VsEncoding::Unrealizable).unwrap().is_empty());
        assert_eq!(mergeable_to_vs_decode(&f, &t, &VsEncoding::identity()).unwrap().len(), 5);
    }

    #[test]
    fn encoding_json_shape() {
        let e = VsEncoding::Realizable(vec![LabeledPair::new(1, true)]);
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"kind":"realizable","pairs":[{"x":1,"y":1}]}"#
        );
        assert_eq!(serde_json::to_string(&VsEncoding::Unrealizable).unwrap(), r#"{"kind":"unrealizable"}"#);
    }

    #[test]
    fn encoding_matches_version_space_on_small_thresholds() {
        let f = thresholds(4);
        let c = thr(4);
        let d = ds(&[(4, 1), (1, 0), (3, 1)]);
        assert_eq!(vs_decode(&f, &vs_encode(&c, &d).unwrap()), version_space(&f, &d));
    }
}
