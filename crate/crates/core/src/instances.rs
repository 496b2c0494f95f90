//! Hypothesis classes used throughout, and lower-bound instances: families of
//! datasets indexed by a secret bit string together with deletion queries
//! whose answers reveal the secret one bit at a time.
//!
//! Item ids of every generated dataset only depend on secret bits that are
//! already recovered when a query needs them, so a query plan is a function
//! of the bits decoded so far.

use std::sync::Arc;

use itertools::Itertools;
use rand::Rng;
use serde::Serialize;

use crate::dimensions::{is_eluder_sequence, is_shattered};
use crate::geometry::{simplex_face_domain, FaceDomain, HalfspaceOracle};
use crate::model::{
    erm_lexmin, is_realizable, ClassHandle, Dataset, FiniteClass, ItemId, LabeledPair, PointId,
    Query, RealizabilityOracle,
};
use crate::schemes::Answer;
use crate::{Error, Result};

/// Thresholds `h_t(x) = 1[x >= t]`, `t = 1..=m+1`, over points `1..=m`.
/// Point `x` has id `x - 1` and `h_t` has index `t - 1`.
pub fn thresholds_1d(m: usize) -> Result<FiniteClass> {
    if m == 0 {
        return Err(Error::InvalidParameter("thresholds need m >= 1".into()));
    }
    FiniteClass::new(m, (1..=m + 1).map(|t| (1..=m).map(|x| x >= t).collect()).collect())
}

/// Parities `f_a(x) = <a, x> mod 2` over `{0,1}^d`. Bit strings are read as
/// binary numbers, first coordinate most significant, for both point ids and
/// hypothesis indices.
pub fn parity_class(d: usize) -> Result<FiniteClass> {
    if !(1..=4).contains(&d) {
        return Err(Error::InvalidParameter(format!("parity needs 1 <= d <= 4, got {d}")));
    }
    let size = 1usize << d;
    let rows = (0..size)
        .map(|a| (0..size).map(|x| (a & x).count_ones() % 2 == 1).collect())
        .collect();
    FiniteClass::new(size, rows)
}

pub fn all_labelings(m: usize) -> Result<FiniteClass> {
    if m > 10 {
        return Err(Error::InvalidParameter(format!("2^{m} hypotheses is too many to list")));
    }
    FiniteClass::new(m, (0..1usize << m).map(|b| (0..m).map(|i| b >> i & 1 == 1).collect()).collect())
}

/// Every labeling of `m` points, as an oracle: a support is realizable iff it
/// never gives one point both labels.
#[derive(Clone, Copy, Debug)]
pub struct AllLabelingsOracle {
    pub m: usize,
}

impl RealizabilityOracle for AllLabelingsOracle {
    fn domain_size(&self) -> usize {
        self.m
    }

    fn is_realizable(&self, _support: &[LabeledPair]) -> Result<bool> {
        // coincident conflicts are rejected before the oracle is asked
        Ok(true)
    }

    fn describe(&self) -> String {
        format!("all labelings of {} points", self.m)
    }
}

/// All labelings of the first `d` points, every later point labeled 0.
pub fn tilu_ub_class(d: usize, domain: usize) -> Result<FiniteClass> {
    if d > 4 {
        return Err(Error::InvalidParameter(format!("explicit class limited to d <= 4, got {d}")));
    }
    if domain < d || domain == 0 {
        return Err(Error::InvalidParameter(format!("domain {domain} smaller than d = {d}")));
    }
    FiniteClass::new(domain, (0..1usize << d).map(|b| (0..domain).map(|x| x < d && b >> x & 1 == 1).collect()).collect())
}

/// `h` uniformly random rows over `m` points; duplicates are dropped.
pub fn random_class(rng: &mut impl Rng, m: usize, h: usize) -> Result<FiniteClass> {
    let rows = (0..h.max(1)).map(|_| (0..m).map(|_| rng.gen_bool(0.5)).collect()).collect();
    FiniteClass::new(m, rows)
}

/// A dataset family `D(z) = base ∪ {added_i : z_i = 1}` with one base
/// deletion `removals[i]` per secret bit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Recipe {
    pub base: Vec<LabeledPair>,
    pub added: Vec<LabeledPair>,
    /// Base item ids (1-based positions in `base`).
    pub removals: Vec<Vec<ItemId>>,
    /// Secret indices in recovery order.
    pub order: Vec<usize>,
    /// Whether query `i` also deletes the added pairs recovered before it.
    pub cumulative: bool,
}

impl Recipe {
    fn p(&self) -> usize {
        self.added.len()
    }

    /// Base first, then one copy of each present added pair per unit of
    /// `copies`, in recovery order.
    fn dataset(&self, z: &[bool], copies: usize) -> Dataset {
        let mut pairs = self.base.clone();
        for &i in &self.order {
            if z[i] {
                pairs.extend(std::iter::repeat_n(self.added[i], copies));
            }
        }
        Dataset::from_pairs(pairs)
    }

    /// Query for secret index `i`, deleting `copies` items of every earlier
    /// present pair when cumulative.
    fn query(&self, i: usize, known: &[Option<bool>], copies: usize) -> Result<Query> {
        let mut ids = self.removals[i].clone();
        let mut next = self.base.len() + 1;
        for &j in &self.order {
            if j == i {
                break;
            }
            let present = known[j].ok_or_else(|| {
                Error::Mismatch(format!("bit {j} is needed before bit {i} but is unknown"))
            })?;
            if present {
                if self.cumulative {
                    ids.extend(next..next + copies);
                }
                next += copies;
            }
        }
        Query::new(ids)
    }

    fn check_shape(&self) -> Result<()> {
        let p = self.p();
        let ok = self.removals.len() == p
            && self.order.iter().copied().sorted().eq(0..p)
            && self.removals.iter().flatten().all(|&id| (1..=self.base.len()).contains(&id));
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("malformed recipe".into()))
        }
    }
}

#[derive(Clone, Debug)]
pub enum InstanceKind {
    /// Survivor realizable iff the bit is 0.
    Recipe(Recipe),
    /// Per point `x_i`: `(x_i, 1)` then `(x_i, z_i)`. Survivor realizable iff
    /// the bit is 1.
    Shatter { points: Vec<PointId> },
    /// ERM version of a recipe: present pairs get `copies - 1` extra copies,
    /// the first bit in order is fixed to 0, and bit `i` is 1 iff the ERM
    /// labels `added[i]`'s point with its label.
    Erm { recipe: Recipe, copies: usize, erm_class: Arc<FiniteClass> },
}

#[derive(Clone, Debug)]
pub struct LbInstance {
    pub name: String,
    pub class: ClassHandle,
    pub p: usize,
    pub kind: InstanceKind,
}

impl LbInstance {
    pub fn is_erm(&self) -> bool {
        matches!(self.kind, InstanceKind::Erm { .. })
    }

    /// Secret indices in the order the adversary recovers them.
    pub fn order(&self) -> Vec<usize> {
        match &self.kind {
            InstanceKind::Recipe(r) => r.order.clone(),
            InstanceKind::Shatter { points } => (0..points.len()).collect(),
            InstanceKind::Erm { recipe, .. } => recipe.order[1..].to_vec(),
        }
    }

    /// Bits fixed by the construction, known before any query.
    pub fn fixed_bits(&self) -> Vec<Option<bool>> {
        let mut known = vec![None; self.p];
        if let InstanceKind::Erm { recipe, .. } = &self.kind {
            known[recipe.order[0]] = Some(false);
        }
        known
    }

    fn check_secret(&self, z: &[bool]) -> Result<()> {
        if z.len() != self.p {
            return Err(Error::InvalidParameter(format!("secret has {} bits, instance needs {}", z.len(), self.p)));
        }
        if let InstanceKind::Erm { recipe, .. } = &self.kind {
            if z[recipe.order[0]] {
                return Err(Error::InvalidParameter("the first bit of an ERM instance is fixed to 0".into()));
            }
        }
        Ok(())
    }

    pub fn dataset_of(&self, z: &[bool]) -> Result<Dataset> {
        self.check_secret(z)?;
        Ok(match &self.kind {
            InstanceKind::Recipe(r) => r.dataset(z, 1),
            InstanceKind::Shatter { points } => Dataset::from_pairs(
                points
                    .iter()
                    .map(|&x| LabeledPair::new(x, true))
                    .chain(points.iter().zip(z).map(|(&x, &b)| LabeledPair::new(x, b))),
            ),
            InstanceKind::Erm { recipe, copies, .. } => recipe.dataset(z, *copies),
        })
    }

    pub fn query(&self, i: usize, known: &[Option<bool>]) -> Result<Query> {
        match &self.kind {
            InstanceKind::Recipe(r) => r.query(i, known, 1),
            InstanceKind::Shatter { points } => Query::new((1..=points.len()).filter(|&id| id != i + 1)),
            InstanceKind::Erm { recipe, copies, .. } => recipe.query(i, known, *copies),
        }
    }

    pub fn decode(&self, i: usize, answer: Answer) -> Result<bool> {
        match (&self.kind, answer) {
            (InstanceKind::Recipe(_), Answer::Realizable(b)) => Ok(!b),
            (InstanceKind::Shatter { .. }, Answer::Realizable(b)) => Ok(b),
            (InstanceKind::Erm { recipe, erm_class, .. }, Answer::Hypothesis(h)) => {
                let target = recipe.added[i];
                Ok(erm_class.label(h, target.x) == target.y)
            }
            (_, a) => Err(Error::Mismatch(format!("instance {} cannot decode answer {a:?}", self.name))),
        }
    }

    /// The answer of learning from scratch on the survivors.
    pub fn retrain_answer(&self, data: &Dataset) -> Result<Answer> {
        match &self.kind {
            InstanceKind::Erm { erm_class, .. } => Ok(Answer::Hypothesis(erm_lexmin(erm_class, data))),
            _ => Ok(Answer::Realizable(is_realizable(&self.class, data)?)),
        }
    }

    /// Runs the whole plan against retraining and checks every decoded bit.
    pub fn is_sound_for(&self, z: &[bool]) -> Result<bool> {
        let data = self.dataset_of(z)?;
        let known: Vec<Option<bool>> = z.iter().map(|&b| Some(b)).collect();
        for i in self.order() {
            let survivors = data.remove(&self.query(i, &known)?)?;
            if self.decode(i, self.retrain_answer(&survivors)?)? != z[i] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Distinct item ids ever deleted, for every secret.
    pub fn queried_items(&self, z: &[bool]) -> Result<Vec<ItemId>> {
        let known: Vec<Option<bool>> = z.iter().map(|&b| Some(b)).collect();
        let mut ids = Vec::new();
        for i in self.order() {
            ids.extend(self.query(i, &known)?.indices());
        }
        Ok(ids.into_iter().sorted().dedup().collect())
    }
}

/// Smallest `s` with `s >= r * m^(1/r)`, i.e. `s^r >= m * r^r`.
pub fn code_size(inv_beta: usize, m: usize) -> usize {
    let target = (m as u128) * (inv_beta as u128).pow(inv_beta as u32);
    (1usize..).find(|&s| (s as u128).pow(inv_beta as u32) >= target).expect("unbounded search")
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Class of `m` hypotheses over `x_1..x_m` (ids `0..m`) and a code block
/// (ids `m..`). `h_i` labels `x_i` and the code subset `σ(i)` with 1,
/// everything else with 0; `σ` lists the `1/β`-subsets of the code block in
/// lexicographic order.
pub fn vclb_instance(inv_beta: usize, m: usize) -> Result<LbInstance> {
    if inv_beta == 0 || m == 0 {
        return Err(Error::InvalidParameter("need 1/β >= 1 and m >= 1".into()));
    }
    let s = code_size(inv_beta, m);
    if s < inv_beta || binomial(s, inv_beta) < m as u128 {
        return Err(Error::InvalidParameter(format!("C({s}, {inv_beta}) < {m}: code block too small")));
    }
    let sigma: Vec<Vec<usize>> = (0..s).combinations(inv_beta).take(m).collect();
    let rows = (0..m)
        .map(|i| {
            (0..m).map(|j| j == i).chain((0..s).map(|c| sigma[i].contains(&c))).collect()
        })
        .collect();
    let class = FiniteClass::new(m + s, rows)?;
    let recipe = Recipe {
        base: (0..s).map(|c| LabeledPair::new(m + c, false)).collect(),
        added: (0..m).map(|i| LabeledPair::new(i, false)).collect(),
        removals: sigma.iter().map(|set| set.iter().map(|c| c + 1).collect()).collect(),
        order: (0..m).collect(),
        cumulative: false,
    };
    recipe.check_shape()?;
    Ok(LbInstance { name: format!("vclb(1/β={inv_beta}, m={m})"), class: class.into(), p: m, kind: InstanceKind::Recipe(recipe) })
}

/// Bit `i` decides whether `(x_i, y_i)` of an eluder sequence is present next
/// to the always-present `(x_i, ¬y_i)`. Bits are recovered from the last one
/// down; query `i` keeps only the conflict at `x_i` and the earlier prefix.
pub fn eluder_lb_instance(class: &ClassHandle, witness: &[LabeledPair], n: usize) -> Result<LbInstance> {
    if !is_eluder_sequence(class, witness)? {
        return Err(Error::InvalidWitness("not an eluder sequence".into()));
    }
    let p = (n / 2).min(witness.len());
    let seq = &witness[..p];
    let recipe = Recipe {
        base: seq.iter().map(|q| q.flipped()).collect(),
        added: seq.to_vec(),
        removals: (0..p).map(|i| (1..=p).filter(|&id| id != i + 1).collect()).collect(),
        order: (0..p).rev().collect(),
        cumulative: true,
    };
    Ok(LbInstance { name: format!("eluder(p={p})"), class: class.clone(), p, kind: InstanceKind::Recipe(recipe) })
}

pub fn shatter_lb_instance(class: &ClassHandle, points: &[PointId]) -> Result<LbInstance> {
    if !is_shattered(class, points)? {
        return Err(Error::InvalidWitness(format!("{points:?} is not shattered")));
    }
    Ok(LbInstance {
        name: format!("shatter(d={})", points.len()),
        class: class.clone(),
        p: points.len(),
        kind: InstanceKind::Shatter { points: points.to_vec() },
    })
}

/// One bit per `k`-subset `L` of `0..d`: whether the centroid of the face
/// opposite `L` is present with label 0. Query `L` deletes the basis vectors
/// in `L`.
pub fn halfspace_lb_instance(d: usize, k: usize) -> Result<(LbInstance, FaceDomain)> {
    if k < 2 || k + 2 > d {
        return Err(Error::InvalidParameter(format!("need 2 <= k <= d - 2, got d = {d}, k = {k}")));
    }
    let dom = simplex_face_domain(d, k)?;
    let oracle = HalfspaceOracle::new(dom.points.clone())?;
    let recipe = Recipe {
        base: (0..d).map(|i| LabeledPair::new(i, true)).collect(),
        added: (0..dom.faces.len()).map(|f| LabeledPair::new(d + f, false)).collect(),
        removals: dom.faces.iter().map(|l| l.iter().map(|i| i + 1).collect()).collect(),
        order: (0..dom.faces.len()).collect(),
        cumulative: false,
    };
    let inst = LbInstance {
        name: format!("halfspace(d={d}, k={k})"),
        class: ClassHandle::oracle(oracle),
        p: dom.faces.len(),
        kind: InstanceKind::Recipe(recipe),
    };
    Ok((inst, dom))
}

/// Largest exhaustive check of the structural condition.
pub const WHITEBOX_MAX_BITS: usize = 12;

/// Whether every survivor of the cumulative plan is realizable exactly when
/// its bit is 0, over all secrets.
pub fn recipe_structure_holds(class: &ClassHandle, recipe: &Recipe) -> Result<bool> {
    let p = recipe.p();
    let cumulative = Recipe { cumulative: true, ..recipe.clone() };
    for bits in 0..1usize << p {
        let z: Vec<bool> = (0..p).map(|i| bits >> i & 1 == 1).collect();
        let known: Vec<Option<bool>> = z.iter().map(|&b| Some(b)).collect();
        let data = cumulative.dataset(&z, 1);
        for &i in &recipe.order {
            let survivors = data.remove(&cumulative.query(i, &known, 1)?)?;
            if is_realizable(class, &survivors)? == z[i] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Turns a realizability recipe into an ERM instance: with `L` extra copies
/// of every present pair, the lex-min ERM after query `i` labels `x_i` with
/// `y_i` exactly when `z_i = 1`.
///
/// `L` is the largest symmetric difference between a later removal set and
/// the first one.
pub fn whitebox_erm_reduction(inst: &LbInstance) -> Result<LbInstance> {
    let InstanceKind::Recipe(recipe) = &inst.kind else {
        return Err(Error::Precondition("white-box reduction needs a base-plus-added recipe".into()));
    };
    let class = inst.class.finite()?;
    if recipe.p() < 2 {
        return Err(Error::Precondition("need at least two secret bits".into()));
    }
    if recipe.p() > WHITEBOX_MAX_BITS {
        return Err(Error::Precondition(format!(
            "structural condition unverifiable: {} bits exceed the exhaustive limit {WHITEBOX_MAX_BITS}",
            recipe.p()
        )));
    }
    if !recipe_structure_holds(&inst.class, recipe)? {
        return Err(Error::Precondition("structural condition fails".into()));
    }
    let first: Vec<ItemId> = recipe.removals[recipe.order[0]].clone();
    let l = recipe.order[1..]
        .iter()
        .map(|&i| {
            let u = &recipe.removals[i];
            let extra = u.iter().filter(|id| !first.contains(id)).count();
            let missing = first.iter().filter(|id| !u.contains(id)).count();
            extra.max(missing)
        })
        .max()
        .unwrap_or(0);
    Ok(LbInstance {
        name: format!("erm-whitebox[{}](L={l})", inst.name),
        class: inst.class.clone(),
        p: inst.p,
        kind: InstanceKind::Erm {
            recipe: Recipe { cumulative: true, ..recipe.clone() },
            copies: l + 1,
            erm_class: Arc::new(class.clone()),
        },
    })
}

/// The `L` used by a reduced instance.
pub fn whitebox_extra_copies(inst: &LbInstance) -> Option<usize> {
    match &inst.kind {
        InstanceKind::Erm { copies, .. } => Some(copies - 1),
        _ => None,
    }
}
