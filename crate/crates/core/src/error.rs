use crate::model::ItemId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown item id {0}")]
    UnknownItem(ItemId),

    #[error("item id {0} appears twice in the query")]
    DuplicateIndex(ItemId),

    #[error("realizability oracle failed: {0}")]
    Oracle(String),

    #[error("search cap exceeded: a witness of size {0} exists")]
    CapExceeded(usize),

    #[error("hypothesis set is not a version space")]
    NotAVersionSpace,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("query deletes {size} items but the scheme supports at most k = {k}")]
    QueryTooLarge { size: usize, k: usize },

    #[error("missing ticket for item {0}")]
    MissingTicket(ItemId),

    #[error("inconsistent ticket: {0}")]
    InconsistentTicket(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation not supported for this class: {0}")]
    Unsupported(String),

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    #[error("elimination produced more than {0} constraints")]
    ConstraintCap(usize),

    #[error("scheme and query plan do not fit: {0}")]
    Mismatch(String),
}
