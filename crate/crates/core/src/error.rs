use alloc::string::String;

use thiserror::Error;

use crate::group::DualElement;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cyclic factor order {0} is below 2")]
    OrderTooSmall(u64),

    #[error("group has no cyclic factors")]
    EmptyGroup,

    #[error("group size {size} exceeds the configured maximum {max}")]
    GroupTooLarge { size: u128, max: usize },

    #[error("cannot parse group `{input}`: {reason}")]
    GroupSyntax { input: String, reason: &'static str },

    #[error("expected {expected} residues, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("residue {residue} out of range for factor of order {order}")]
    ResidueOutOfRange { residue: u64, order: u64 },

    #[error("index {index} out of range for a group of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("expected a function with {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },

    #[error("entry {index} is not finite")]
    NonFinite { index: usize },

    #[error("all entries are zero")]
    AllZero,

    #[error("mean is {mean}, expected 1 (pass normalize to rescale)")]
    NotNormalized { mean: f64 },

    #[error("family is empty")]
    EmptyFamily,

    #[error("functional {index} has sup-norm {norm} > 1")]
    FunctionalTooLarge { index: usize, norm: f64 },

    #[error("riesz factor has eps {0}, expected -1, 0 or 1")]
    InvalidEps(i8),

    #[error("{name} = {value} is outside {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("multinomial expansion has {count} terms, cap is {cap}")]
    TermCapExceeded { count: u128, cap: u64 },

    #[error("exceeded the limit of {limit} iterations")]
    NonTermination { limit: usize },

    #[error("dual solver stopped after {iterations} iterations with KKT residual {residual}")]
    DualNotConverged { iterations: usize, residual: f64 },

    #[error("bound violated: {what} ({value} > {bound})")]
    BoundViolated {
        what: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("no cover of size at most {budget} found; {witness:?} is not reachable")]
    CoverConstruction { witness: DualElement, budget: usize },

    #[error("{witness:?} is not a signed sum of at most {max_len} cover elements")]
    TupleNotFound {
        witness: DualElement,
        max_len: usize,
    },

    #[error("every cyclic factor must have order 2")]
    NotElementaryAbelian,
}

pub type Result<T> = core::result::Result<T, Error>;
