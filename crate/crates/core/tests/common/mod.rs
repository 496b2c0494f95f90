//! Brute-force reference implementations used by the integration tests.
//! They only read hypothesis rows and never call the library's searches.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use unlearn_core::{Dataset, FiniteClass, LabeledPair};

pub fn lp(x: usize, y: bool) -> LabeledPair {
    LabeledPair::new(x, y)
}

pub fn consistent(row: &[bool], pairs: &[LabeledPair]) -> bool {
    pairs.iter().all(|p| row[p.x] == p.y)
}

pub fn brute_vs(class: &FiniteClass, pairs: &[LabeledPair]) -> Vec<usize> {
    (0..class.len()).filter(|&h| consistent(&class.rows()[h], pairs)).collect()
}

pub fn brute_realizable(class: &FiniteClass, pairs: &[LabeledPair]) -> bool {
    class.rows().iter().any(|r| consistent(r, pairs))
}

/// Lowest-index hypothesis among those with the fewest mistakes.
pub fn brute_erm(class: &FiniteClass, pairs: &[LabeledPair]) -> usize {
    let loss = |h: usize| pairs.iter().filter(|p| class.rows()[h][p.x] != p.y).count();
    (0..class.len()).min_by_key(|&h| (loss(h), h)).unwrap()
}

pub fn pairs_of(d: &Dataset) -> Vec<LabeledPair> {
    d.pairs().collect()
}

pub fn survivors(d: &Dataset, deleted: &[usize]) -> Vec<LabeledPair> {
    d.items().iter().filter(|it| !deleted.contains(&it.id)).map(|it| it.pair).collect()
}

pub fn rand_class(rng: &mut impl Rng, m: usize, h: usize) -> FiniteClass {
    let rows = (0..h).map(|_| (0..m).map(|_| rng.gen_bool(0.5)).collect()).collect();
    FiniteClass::new(m, rows).unwrap()
}

pub fn rand_dataset(rng: &mut impl Rng, m: usize, n: usize) -> Dataset {
    Dataset::from_pairs((0..n).map(|_| lp(rng.gen_range(0..m), rng.gen_bool(0.5))))
}

/// A dataset drawn near a random hypothesis, so realizable data is common.
pub fn rand_dataset_near(rng: &mut impl Rng, class: &FiniteClass, n: usize, noise: f64) -> Dataset {
    let h = rng.gen_range(0..class.len());
    let m = class.domain_size();
    Dataset::from_pairs((0..n).map(|_| {
        let x = rng.gen_range(0..m);
        lp(x, class.rows()[h][x] ^ rng.gen_bool(noise))
    }))
}

/// All subsets of `items`, as vectors in input order.
pub fn subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    (0..1usize << items.len())
        .map(|mask| (0..items.len()).filter(|i| mask >> i & 1 == 1).map(|i| items[i].clone()).collect())
        .collect()
}

pub fn subsets_up_to<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    subsets(items).into_iter().filter(|s| s.len() <= k).collect()
}

pub fn all_pairs(m: usize) -> Vec<LabeledPair> {
    (0..m).flat_map(|x| [lp(x, false), lp(x, true)]).collect()
}

fn labelings(points: &[usize]) -> Vec<Vec<LabeledPair>> {
    (0..1usize << points.len())
        .map(|mask| points.iter().enumerate().map(|(i, &x)| lp(x, mask >> i & 1 == 1)).collect())
        .collect()
}

fn flips_realizable(class: &FiniteClass, set: &[LabeledPair]) -> bool {
    (0..set.len()).all(|i| {
        let mut s = set.to_vec();
        s[i] = s[i].flipped();
        brute_realizable(class, &s)
    })
}

pub fn brute_vc(class: &FiniteClass) -> usize {
    let points: Vec<usize> = (0..class.domain_size()).collect();
    subsets(&points)
        .into_iter()
        .filter(|s| labelings(s).iter().all(|l| brute_realizable(class, l)))
        .map(|s| s.len())
        .max()
        .unwrap_or(0)
}

fn brute_star_like(class: &FiniteClass, hollow: bool) -> usize {
    let points: Vec<usize> = (0..class.domain_size()).collect();
    let mut best = 0;
    for s in subsets(&points) {
        if s.len() <= best {
            continue;
        }
        for l in labelings(&s) {
            if brute_realizable(class, &l) != hollow && flips_realizable(class, &l) {
                best = s.len();
                break;
            }
        }
    }
    best
}

pub fn brute_star(class: &FiniteClass) -> usize {
    brute_star_like(class, false)
}

pub fn brute_hollow_star(class: &FiniteClass) -> usize {
    brute_star_like(class, true)
}

/// Longest sequence of pairs each of which splits the current version space.
pub fn brute_eluder(class: &FiniteClass) -> usize {
    fn go(class: &FiniteClass, vs: Vec<usize>, memo: &mut HashMap<Vec<usize>, usize>) -> usize {
        if let Some(&v) = memo.get(&vs) {
            return v;
        }
        let mut best = 0;
        for x in 0..class.domain_size() {
            let ones: Vec<usize> = vs.iter().copied().filter(|&h| class.rows()[h][x]).collect();
            let zeros: Vec<usize> = vs.iter().copied().filter(|&h| !class.rows()[h][x]).collect();
            if ones.is_empty() || zeros.is_empty() {
                continue;
            }
            best = best.max(1 + go(class, ones, memo)).max(1 + go(class, zeros, memo));
        }
        memo.insert(vs, best);
        best
    }
    go(class, (0..class.len()).collect(), &mut HashMap::new())
}

pub fn brute_littlestone(class: &FiniteClass) -> usize {
    fn go(class: &FiniteClass, vs: Vec<usize>, memo: &mut HashMap<Vec<usize>, usize>) -> usize {
        if let Some(&v) = memo.get(&vs) {
            return v;
        }
        let mut best = 0;
        for x in 0..class.domain_size() {
            let ones: Vec<usize> = vs.iter().copied().filter(|&h| class.rows()[h][x]).collect();
            let zeros: Vec<usize> = vs.iter().copied().filter(|&h| !class.rows()[h][x]).collect();
            if ones.is_empty() || zeros.is_empty() {
                continue;
            }
            best = best.max(1 + go(class, ones, memo).min(go(class, zeros, memo)));
        }
        memo.insert(vs, best);
        best
    }
    go(class, (0..class.len()).collect(), &mut HashMap::new())
}

pub fn brute_mis(class: &FiniteClass) -> usize {
    let points: Vec<usize> = (0..class.domain_size()).collect();
    subsets(&points)
        .into_iter()
        .filter(|s| {
            let mut restr: Vec<Vec<bool>> =
                class.rows().iter().map(|r| s.iter().map(|&x| r[x]).collect()).collect();
            restr.sort();
            restr.dedup();
            restr.len() == class.len()
        })
        .map(|s| s.len())
        .min()
        .unwrap()
}

pub fn ceil_log2(n: usize) -> usize {
    (0..).find(|&b| (1usize << b) >= n).unwrap()
}

/// Bits `0..p` of `bits`, least significant first.
pub fn secret(bits: usize, p: usize) -> Vec<bool> {
    (0..p).map(|i| bits >> i & 1 == 1).collect()
}
