use thiserror::Error;

use crate::exact::ExactError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("multiplicity chain broken at level {level}: {prev} does not divide {next}")]
    Divisibility { level: usize, prev: u64, next: u64 },
    #[error("multiplicities must strictly increase (level {level})")]
    NotIncreasing { level: usize },
    #[error("multiplicity at level {0} overflows u64")]
    Overflow(usize),
    #[error("bad growth rule `{0}`")]
    Growth(String),
    #[error("not a single cylinder: {0}")]
    NotACylinder(String),
    #[error("objects live over different systems")]
    MismatchedSystems,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("band violation: {0}")]
    Band(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
