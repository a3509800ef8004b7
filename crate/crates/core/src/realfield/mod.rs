//! Reals as exact rational combinations of a finite symbol basis.

mod basis;
pub mod rational;
mod vector;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use basis::{Coords, Symbol, SymbolBasis, RELATION_BOUND, RELATION_TOL, UNIT};
pub use vector::RealVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("vectors belong to different symbol bases")]
    BasisMismatch,
    #[error("product {0} * {1} is not in the product table")]
    Unrepresentable(String, String),
    #[error("duplicate symbol name {0:?}")]
    DuplicateSymbol(String),
    #[error("invalid symbol name {0:?}")]
    BadSymbolName(String),
    #[error("symbol {name:?} has invalid witness {value}")]
    BadWitness { name: String, value: f64 },
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("cannot parse rational {0:?}")]
    BadRational(String),
    #[error("cannot parse expression {0:?}")]
    BadExpression(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// Wire form of a vector: symbol name to `"p/q"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct VectorRepr {
    pub coords: BTreeMap<String, String>,
}
