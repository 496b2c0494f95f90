//! Adversaries that recover a lower-bound instance's secret through a
//! scheme's learn and unlearn calls only.

use rand::Rng;
use serde::Serialize;

use crate::instances::LbInstance;
use crate::model::ItemId;
use crate::schemes::{Answer, Scheme};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub bit: usize,
    pub query: Vec<ItemId>,
    pub answer: Answer,
    pub decoded: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdversaryRun {
    pub instance: String,
    pub scheme: String,
    pub n: usize,
    pub recovered: Vec<bool>,
    pub transcript: Vec<Step>,
    pub aux_bits: usize,
    pub max_ticket_bits: usize,
    /// Total ticket bits of the items any query touched.
    pub queried_ticket_bits: usize,
}

impl AdversaryRun {
    pub fn succeeded(&self, z: &[bool]) -> bool {
        self.recovered == z
    }
}

/// Learns `dataset_of(z)` with `scheme` and decodes every bit in the
/// instance's order, each query built only from bits decoded before it.
pub fn run_adversary(inst: &LbInstance, scheme: &dyn Scheme, z: &[bool]) -> Result<AdversaryRun> {
    let data = inst.dataset_of(z)?;
    let deployment = scheme.deploy(&data)?;
    let mut known = inst.fixed_bits();
    let mut transcript = Vec::new();
    let mut touched = Vec::new();
    for i in inst.order() {
        let q = inst.query(i, &known)?;
        let answer = deployment.unlearn(&q)?;
        let decoded = inst.decode(i, answer)?;
        known[i] = Some(decoded);
        touched.extend(q.indices());
        transcript.push(Step { bit: i, query: q.indices().collect(), answer, decoded });
    }
    let tickets = deployment.ticket_bits();
    touched.sort_unstable();
    touched.dedup();
    let queried_ticket_bits = touched
        .iter()
        .filter_map(|id| data.position_of(*id))
        .filter_map(|pos| tickets.get(pos))
        .sum();
    Ok(AdversaryRun {
        instance: inst.name.clone(),
        scheme: scheme.name(),
        n: data.len(),
        recovered: known.into_iter().map(|b| b.unwrap_or(false)).collect(),
        transcript,
        aux_bits: deployment.aux_bits(),
        max_ticket_bits: tickets.iter().copied().max().unwrap_or(0),
        queried_ticket_bits,
    })
}

/// Aux sizes seen over random secrets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FloorReport {
    pub p: usize,
    pub trials: usize,
    pub recovered_all: bool,
    pub min_aux_bits: usize,
    pub mean_aux_bits: f64,
    /// Number of distinct secrets drawn.
    pub distinct_secrets: usize,
}

/// Runs the adversary on `trials` uniformly random secrets.
pub fn information_floor(
    inst: &LbInstance,
    scheme: &dyn Scheme,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<FloorReport> {
    let fixed = inst.fixed_bits();
    let mut recovered_all = true;
    let mut sizes = Vec::with_capacity(trials);
    let mut secrets = std::collections::BTreeSet::new();
    for _ in 0..trials {
        let z: Vec<bool> = fixed.iter().map(|f| f.unwrap_or_else(|| rng.gen_bool(0.5))).collect();
        let run = run_adversary(inst, scheme, &z)?;
        recovered_all &= run.succeeded(&z);
        sizes.push(run.aux_bits);
        secrets.insert(z);
    }
    Ok(FloorReport {
        p: inst.p,
        trials,
        recovered_all,
        min_aux_bits: sizes.iter().copied().min().unwrap_or(0),
        mean_aux_bits: sizes.iter().sum::<usize>() as f64 / trials.max(1) as f64,
        distinct_secrets: secrets.len(),
    })
}
