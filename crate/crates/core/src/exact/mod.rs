//! Exact scalar arithmetic.
//!
//! Values live in the ℚ-vector space spanned by 1 and a finite set of
//! declared irrational generators. Every generator carries an enclosure
//! oracle producing nested rational intervals, and order questions are
//! settled by refining those enclosures until zero is excluded.
//!
//! All answers are conditional on the declared ℚ-linear independence of
//! `1, θ₁, …, θ_k`; the library never tries to prove it.

mod circle;
mod generator;
mod parse;
mod supernatural;
mod symbolic;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

pub use circle::CircleValue;
pub use generator::{GenId, GeneratorTable, Interval, Oracle};
pub use supernatural::{supernatural_ops, Exponent, SupernaturalNumber, SupernaturalRelations};
pub use symbolic::SymbolicReal;

pub type Rational = BigRational;

/// Default number of enclosure halvings granted to a sign decision.
pub const DEFAULT_REFINE_BUDGET: u32 = 64;

/// Hard ceiling for refinement loops whose termination follows from the
/// independence declaration (floor, exact comparison). Hitting it means
/// the declared generators are in fact dependent.
pub const MAX_REFINEMENT: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("operands belong to different generator tables")]
    MismatchedTables,
    #[error("refine budget must be at least 1")]
    ZeroBudget,
    #[error("sign undecided after {budget} halvings; last enclosure [{lo}, {hi}]")]
    BudgetExhausted {
        budget: u32,
        lo: Rational,
        hi: Rational,
    },
    #[error("tie at 1/2: {0} is a half-integer")]
    TieAtHalf(Rational),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator `{0}` declared twice")]
    DuplicateGenerator(String),
    #[error("invalid generator oracle: {0}")]
    InvalidOracle(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}
