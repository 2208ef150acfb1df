use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("newick syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown taxon label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate taxon label `{0}`")]
    DuplicateLabel(String),

    #[error("taxon label `{0}` missing from tree")]
    MissingLabel(String),

    #[error("empty taxon label")]
    EmptyLabel,

    #[error("internal node with {0} neighbours; binary tree required")]
    NonBinary(usize),

    #[error("leaf sets differ")]
    LeafSetMismatch,

    #[error("label set is not a subset of the tree's leaves")]
    NotSubset,

    #[error("subtrees share leaf `{0}`")]
    OverlappingLeafSets(String),

    #[error("{n} taxa exceeds the enumeration cap of {cap}")]
    TooManyTaxa { n: usize, cap: usize },

    #[error("need at least {need} taxa, got {got}")]
    TooFewTaxa { need: usize, got: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("quartet set is not compatible")]
    Incompatible,
}

pub type Result<T> = std::result::Result<T, Error>;
