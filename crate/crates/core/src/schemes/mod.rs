//! Learning-unlearning schemes.
//!
//! A central scheme keeps one aux blob; a ticketed scheme additionally hands
//! every item a ticket that is presented again when that item is deleted.
//! Both are exact: the answer after a deletion always equals the answer of
//! learning from scratch on the survivors.

pub mod central;
pub mod ticketed;

use std::collections::HashMap;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::model::{Dataset, HypIndex, Item, ItemId, Query};
use crate::{Error, Result};

pub use central::{
    enumerate_critical_sets, minimal_unrealizable_core, BoundedScheme, CriticalIndex,
    TrivialErmScheme, TrivialScheme,
};
pub use ticketed::{ChainAux, ChainRecord, ChainScheme, ChainTicket, MerkleScheme, MerkleTicket};

pub trait CentralScheme {
    type Output: Clone + Debug + PartialEq + Into<Answer>;
    type Aux: Clone + Debug;

    fn name(&self) -> &'static str;

    fn learn(&self, data: &Dataset) -> Result<(Self::Output, Self::Aux)>;

    /// Answer on the survivors, given the deleted items `D_I`.
    fn unlearn(&self, deletion: &[Item], aux: &Self::Aux) -> Result<Self::Output>;

    fn aux_bits(&self, aux: &Self::Aux) -> usize;
}

pub trait TicketedScheme {
    type Output: Clone + Debug + PartialEq + Into<Answer>;
    type Aux: Clone + Debug;
    type Ticket: Clone + Debug;

    fn name(&self) -> &'static str;

    /// Returns the answer, the aux blob and one ticket per item, in item order.
    #[allow(clippy::type_complexity)]
    fn learn(&self, data: &Dataset) -> Result<(Self::Output, Self::Aux, Vec<Self::Ticket>)>;

    /// `tickets[j]` must be the ticket issued for `deletion[j]`.
    fn unlearn(
        &self,
        deletion: &[Item],
        tickets: &[Self::Ticket],
        aux: &Self::Aux,
    ) -> Result<Self::Output>;

    fn aux_bits(&self, aux: &Self::Aux) -> usize;

    fn ticket_bits(&self, ticket: &Self::Ticket) -> usize;
}

/// Answer of either learning task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Realizable(bool),
    Hypothesis(HypIndex),
}

impl From<bool> for Answer {
    fn from(b: bool) -> Self {
        Answer::Realizable(b)
    }
}

impl From<HypIndex> for Answer {
    fn from(h: HypIndex) -> Self {
        Answer::Hypothesis(h)
    }
}

/// A scheme that has learned one dataset and now serves deletion queries.
pub trait Deployment {
    fn answer(&self) -> Answer;

    fn unlearn(&self, q: &Query) -> Result<Answer>;

    fn aux_bits(&self) -> usize;

    /// Bit size of every issued ticket, empty for central schemes.
    fn ticket_bits(&self) -> Vec<usize>;
}

/// Object-safe front for both scheme kinds.
pub trait Scheme {
    fn name(&self) -> String;

    fn deploy<'a>(&'a self, data: &Dataset) -> Result<Box<dyn Deployment + 'a>>;
}

/// Runs a central scheme behind [`Scheme`].
#[derive(Clone, Debug)]
pub struct Central<S>(pub S);

struct CentralDeployment<'a, S: CentralScheme> {
    scheme: &'a S,
    data: Dataset,
    answer: S::Output,
    aux: S::Aux,
}

impl<S: CentralScheme> Scheme for Central<S> {
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    fn deploy<'a>(&'a self, data: &Dataset) -> Result<Box<dyn Deployment + 'a>> {
        let (answer, aux) = self.0.learn(data)?;
        Ok(Box::new(CentralDeployment { scheme: &self.0, data: data.clone(), answer, aux }))
    }
}

impl<S: CentralScheme> Deployment for CentralDeployment<'_, S> {
    fn answer(&self) -> Answer {
        self.answer.clone().into()
    }

    fn unlearn(&self, q: &Query) -> Result<Answer> {
        let deletion = self.data.deletion(q)?;
        Ok(self.scheme.unlearn(&deletion, &self.aux)?.into())
    }

    fn aux_bits(&self) -> usize {
        self.scheme.aux_bits(&self.aux)
    }

    fn ticket_bits(&self) -> Vec<usize> {
        Vec::new()
    }
}

/// Runs a ticketed scheme behind [`Scheme`]; each item's owner keeps its
/// ticket and presents it on deletion.
#[derive(Clone, Debug)]
pub struct Ticketed<S>(pub S);

struct TicketedDeployment<'a, S: TicketedScheme> {
    scheme: &'a S,
    data: Dataset,
    answer: S::Output,
    aux: S::Aux,
    tickets: HashMap<ItemId, S::Ticket>,
}

impl<S: TicketedScheme> Scheme for Ticketed<S> {
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    fn deploy<'a>(&'a self, data: &Dataset) -> Result<Box<dyn Deployment + 'a>> {
        let (answer, aux, tickets) = self.0.learn(data)?;
        let tickets = data.ids().zip(tickets).collect();
        Ok(Box::new(TicketedDeployment { scheme: &self.0, data: data.clone(), answer, aux, tickets }))
    }
}

impl<S: TicketedScheme> Deployment for TicketedDeployment<'_, S> {
    fn answer(&self) -> Answer {
        self.answer.clone().into()
    }

    fn unlearn(&self, q: &Query) -> Result<Answer> {
        let deletion = self.data.deletion(q)?;
        let tickets = deletion
            .iter()
            .map(|it| self.tickets.get(&it.id).cloned().ok_or(Error::MissingTicket(it.id)))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.scheme.unlearn(&deletion, &tickets, &self.aux)?.into())
    }

    fn aux_bits(&self) -> usize {
        self.scheme.aux_bits(&self.aux)
    }

    fn ticket_bits(&self) -> Vec<usize> {
        self.data.ids().map(|id| self.scheme.ticket_bits(&self.tickets[&id])).collect()
    }
}

/// A scheme chosen by name, e.g. from the command line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum SchemeSpec {
    Trivial,
    TrivialErm,
    Bounded { k: usize },
    Merkle,
    ErmMerkle,
    Chain { d: usize },
}

impl SchemeSpec {
    pub fn parse(name: &str, k: Option<usize>, d: Option<usize>) -> Result<Self> {
        let need = |v: Option<usize>, flag: &str| {
            v.ok_or_else(|| Error::InvalidParameter(format!("scheme {name} needs {flag}")))
        };
        Ok(match name {
            "trivial" => SchemeSpec::Trivial,
            "trivial-erm" => SchemeSpec::TrivialErm,
            "bounded" => SchemeSpec::Bounded { k: need(k, "k")? },
            "merkle" => SchemeSpec::Merkle,
            "erm-merkle" => SchemeSpec::ErmMerkle,
            "chain" => SchemeSpec::Chain { d: need(d, "d")? },
            other => return Err(Error::InvalidParameter(format!("unknown scheme {other:?}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeSpec::Trivial => "trivial",
            SchemeSpec::TrivialErm => "trivial-erm",
            SchemeSpec::Bounded { .. } => "bounded",
            SchemeSpec::Merkle => "merkle",
            SchemeSpec::ErmMerkle => "erm-merkle",
            SchemeSpec::Chain { .. } => "chain",
        }
    }

    pub fn is_erm(&self) -> bool {
        matches!(self, SchemeSpec::TrivialErm | SchemeSpec::ErmMerkle)
    }

    pub fn build(&self, class: &crate::model::ClassHandle) -> Result<Box<dyn Scheme>> {
        let finite = || class.as_finite().map(|c| std::sync::Arc::new(c.clone()));
        let need_finite = || {
            finite().ok_or_else(|| Error::Unsupported(format!("{} needs an explicit finite class", self.name())))
        };
        Ok(match self {
            SchemeSpec::Trivial => Box::new(Central(TrivialScheme::new(class.clone()))),
            SchemeSpec::TrivialErm => Box::new(Central(TrivialErmScheme::new(need_finite()?))),
            SchemeSpec::Bounded { k } => Box::new(Central(BoundedScheme::new(class.clone(), *k))),
            SchemeSpec::Merkle => Box::new(Ticketed(MerkleScheme::realizability(class.clone()))),
            SchemeSpec::ErmMerkle => Box::new(Ticketed(MerkleScheme::erm(need_finite()?))),
            SchemeSpec::Chain { d } => {
                let domain = class.domain_size();
                if let Some(c) = class.as_finite() {
                    if *c != crate::instances::tilu_ub_class(*d, domain)? {
                        return Err(Error::Unsupported(format!(
                            "chain scheme needs the class free on the first {d} points and 0 elsewhere"
                        )));
                    }
                }
                Box::new(Ticketed(ChainScheme::new(*d, domain)?))
            }
        })
    }
}
