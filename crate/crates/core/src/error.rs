use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operands live in different fields ({0} vs {1})")]
    MixedField(String, String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field {0} is not enumerable")]
    NotEnumerable(String),
    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("strand labels are not non-decreasing along cycles: {0:?}")]
    NonMonotoneComponents(Vec<usize>),
    #[error("invalid local trivialization: {0}")]
    InvalidTrivialization(String),
    #[error("not an augmentation: {0}")]
    NotAnAugmentation(String),
    #[error("no vector outside the union of the stalk hyperplanes")]
    NoTransverseVector,
    #[error("search space of {size} tuples exceeds the budget of {budget}")]
    BudgetExceeded { size: u128, budget: u128 },
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
