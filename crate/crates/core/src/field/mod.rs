//! Exact scalars: multivariate rational functions over Q in the fiber
//! coordinate, base variables and parameters, with an optional square root.

pub mod frac;
pub mod matrix;
pub mod parse;
pub mod poly;
pub mod series;
pub mod tower;
pub mod upoly;

pub use frac::Frac;
pub use matrix::Matrix;
pub use parse::{parse_form, parse_scalar};
pub use poly::Poly;
pub use series::{laurent_expand, resultant_trace, Laurent, Point};
pub use tower::{Field, RationalFunction, ScalarTower};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole at the evaluation point")]
    PoleAtPoint,
    #[error("degenerate divisor: polynomial is not squarefree")]
    DegenerateDivisor,
    #[error("pole on divisor: denominator shares a root with the divisor")]
    PoleOnDivisor,
}

/// Canonical representative of a quotient. Elements are kept reduced at all
/// times, so this only checks the denominator and divides.
pub fn normalize(num: &RationalFunction, den: &RationalFunction) -> Result<RationalFunction, FieldError> {
    if den.is_zero() {
        return Err(FieldError::Malformed("zero denominator".into()));
    }
    Ok(num * &den.inv()?)
}
