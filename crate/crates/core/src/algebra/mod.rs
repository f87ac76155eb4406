//! GF(p), GF(p²) and the supersingular curve y² = x³ + 1 over GF(p), p ≡ 2 (mod 3).

mod curve;
mod field;
mod fp2;
pub mod numtheory;

use num_bigint::BigUint;
use thiserror::Error;

pub use curve::{point_add, scalar_mul, setup_curve, CurveContext, CurvePoint, Fp2Point};
pub use field::{FieldElement, FieldOps, PrimeField};
pub use fp2::{fp2_mul, fp2_pow, Fp2Element};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("{0} is not an odd prime above 3")]
    NotPrime(BigUint),
    #[error("{0} is not congruent to 2 mod 3")]
    WrongResidueClass(BigUint),
    #[error("subgroup order {0} is not prime")]
    SubgroupOrderNotPrime(BigUint),
    #[error("subgroup order does not divide p + 1")]
    OrderDoesNotDivide,
    #[error("no generator found among the candidate points")]
    NoGenerator,
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("operands belong to different fields")]
    ModulusMismatch,
    #[error("malformed encoding: {0}")]
    Encoding(&'static str),
}
