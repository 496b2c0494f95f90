//! Measured memory against theoretical bounds.
//!
//! Every bound is evaluated from dimensions computed in the same call, never
//! from assumed values.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cost::{ceil_log2, count_bits, CostModel};
use crate::dimensions::{eluder_dimension, hollow_star_number, star_number, vc_dimension, Dim};
use crate::model::{ClassHandle, Dataset};
use crate::schemes::SchemeSpec;
use crate::{Error, Result};

/// Multiplier of the chain scheme bound `c·(log2 d + log2 n + log2 |X|)`.
/// Its records use `2 + 2·(ceil(log2 |X|) + 2·count_bits(n))` bits, which
/// stays below the bound whenever `d >= 2` and `n >= 1`.
pub const CHAIN_CONSTANT: f64 = 8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub scheme: String,
    pub class: String,
    pub n: usize,
    pub k: Option<usize>,
    pub aux_bits: usize,
    pub max_ticket_bits: Option<usize>,
    pub mean_ticket_bits: Option<f64>,
    pub bound: f64,
    pub formula: String,
    pub pass: bool,
    pub dims: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub v: u32,
    pub records: Vec<Record>,
}

fn dim_value(d: Dim, what: &str) -> Result<usize> {
    d.value()
        .ok_or_else(|| Error::Precondition(format!("{what} exceeds the search cap; raise --cap")))
}

pub fn merkle_ticket_bound(cost: &CostModel, star: usize, n: usize) -> usize {
    let depth = ceil_log2(n);
    (cost.header_bits() + star.max(2) * cost.pair_bits()) * depth + depth
}

pub fn bounded_aux_bound(cost: &CostModel, hollow: usize, k: usize, n: usize) -> usize {
    let s = hollow.max(2);
    s.pow(k as u32 + 1) * (k * cost.pair_bits() + count_bits(n)) + 1
}

pub fn chain_bound(d: usize, n: usize, domain: usize) -> f64 {
    let lg = |v: usize| (v.max(1) as f64).log2();
    CHAIN_CONSTANT * (lg(d) + lg(n) + lg(domain))
}

/// Learns `data` with the scheme and checks its memory against the bound
/// for that scheme.
pub fn measure(
    spec: &SchemeSpec,
    class: &ClassHandle,
    class_desc: &str,
    data: &Dataset,
    cap: usize,
) -> Result<Record> {
    let scheme = spec.build(class)?;
    let deployment = scheme.deploy(data)?;
    let aux = deployment.aux_bits();
    let tickets = deployment.ticket_bits();
    let max_ticket = tickets.iter().copied().max();
    let mean_ticket = (!tickets.is_empty())
        .then(|| tickets.iter().sum::<usize>() as f64 / tickets.len() as f64);
    let cost = CostModel::for_domain(class.domain_size());
    let n = data.len();
    let mut dims = BTreeMap::new();
    let (bound, formula, pass, k) = match spec {
        SchemeSpec::Trivial | SchemeSpec::TrivialErm => {
            let b = cost.dataset_bits(n);
            (b as f64, "count_bits(n) + n·z_bits".to_string(), aux == b, None)
        }
        SchemeSpec::Bounded { k } => {
            let hollow = dim_value(hollow_star_number(class, cap)?.value, "hollow star number")?;
            dims.insert("hollow_star".into(), hollow);
            let b = bounded_aux_bound(&cost, hollow, *k, n);
            (b as f64, "max(s∘,2)^(k+1)·(k·z_bits + count_bits(n)) + 1".into(), aux <= b, Some(*k))
        }
        SchemeSpec::Merkle | SchemeSpec::ErmMerkle => {
            let star = dim_value(star_number(class, cap)?.value, "star number")?;
            dims.insert("star".into(), star);
            let b = merkle_ticket_bound(&cost, star, n);
            let aux_ok = match spec {
                SchemeSpec::Merkle => aux == 1,
                _ => {
                    let h = class.finite()?.len();
                    dims.insert("hypotheses".into(), h);
                    aux <= ceil_log2(h)
                }
            };
            let formula = "(header + max(s,2)·z_bits)·ceil(log2 n) + ceil(log2 n)".to_string();
            (b as f64, formula, aux_ok && max_ticket.unwrap_or(0) <= b, None)
        }
        SchemeSpec::Chain { d } => {
            let vc = dim_value(vc_dimension(class, cap)?.value, "VC dimension")?;
            dims.insert("vc".into(), vc);
            let b = chain_bound(*d, n, class.domain_size());
            let worst = aux.max(max_ticket.unwrap_or(0));
            (b, format!("{CHAIN_CONSTANT}·(log2 d + log2 n + log2 |X|)"), (worst as f64) <= b, None)
        }
    };
    if let Ok(e) = eluder_dimension(class, cap) {
        if let Some(v) = e.value.value() {
            dims.insert("eluder".into(), v);
        }
    }
    Ok(Record {
        scheme: spec.name().to_string(),
        class: class_desc.to_string(),
        n,
        k,
        aux_bits: aux,
        max_ticket_bits: max_ticket,
        mean_ticket_bits: mean_ticket,
        bound,
        formula,
        pass,
        dims,
    })
}

impl Report {
    pub fn new(mut records: Vec<Record>) -> Self {
        records.sort_by(|a, b| (&a.scheme, &a.class, a.n).cmp(&(&b.scheme, &b.class, b.n)));
        Self { v: 1, records }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:<28} {:>6} {:>4} {:>8} {:>8} {:>10} {:>5}",
            "scheme", "class", "n", "k", "aux", "ticket", "bound", "pass"
        );
        for r in &self.records {
            let k = r.k.map_or("-".to_string(), |k| k.to_string());
            let t = r.max_ticket_bits.map_or("-".to_string(), |t| t.to_string());
            let _ = writeln!(
                out,
                "{:<12} {:<28} {:>6} {:>4} {:>8} {:>8} {:>10.2} {:>5}",
                r.scheme,
                r.class,
                r.n,
                k,
                r.aux_bits,
                t,
                r.bound,
                if r.pass { "yes" } else { "NO" }
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_util::*;

    #[test]
    fn bound_arithmetic() {
        let cost = CostModel::for_domain(8);
        assert_eq!(cost.header_bits(), 4);
        assert_eq!(cost.pair_bits(), 4);
        assert_eq!(merkle_ticket_bound(&cost, 2, 64), (4 + 8) * 6 + 6);
        let cost = CostModel::for_domain(4);
        assert_eq!(bounded_aux_bound(&cost, 2, 2, 4), 8 * (2 * 3 + 3) + 1);
    }

    #[test]
    fn empty_report() {
        let r = Report::new(vec![]);
        assert_eq!(r.to_table().lines().count(), 1);
        assert_eq!(r.to_json(), "{\n  \"v\": 1,\n  \"records\": []\n}");
    }

    #[test]
    fn bounded_record_on_thresholds() {
        let class = ClassHandle::from(thresholds(4));
        let d = ds(&[(1, 1), (2, 0), (3, 1), (4, 0)]);
        let r = measure(&SchemeSpec::Bounded { k: 2 }, &class, "thresholds(m=4)", &d, 8).unwrap();
        assert!(r.pass);
        assert_eq!(r.dims["hollow_star"], 2);
    }
}
