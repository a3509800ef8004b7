//! f-sequences, exponent probes, almost periods and the Kronecker engine.

pub mod almost_period;
pub mod breaker;
pub mod fseq;
pub mod kronecker;
pub mod orbit;
pub mod probe;

use thiserror::Error;

use crate::groups::GroupError;
use crate::realfield::FieldError;

pub use almost_period::{scan_almost_periods, AlmostPeriodReport};
pub use breaker::{build_breaker_sequence, BreakerSequence, BreakerSpec};
pub use fseq::{find_f_sequences, CauchyCheck, FSequence, SearchConfig, SearchResult, TOL_ORBIT};
pub use kronecker::{kronecker_solve, Direction, KroneckerQuery, KroneckerSolution};
pub use orbit::{
    Forward, LinearTorusOrbit, Orbit, PlanarAccumulation, Point, Rescaled, SpiralOrbit,
};
pub use probe::{
    induced_circle_map, probe_exponent, ExponentProbeReport, InducedValue, ProbeConfig, Rejection,
    Verdict, GAP_MIN, TOL_LIMIT,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExponentError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("targets violate relation {relation:?} (residual {residual:.3e})")]
    IncompatibleTargets { relation: Vec<i64>, residual: f64 },
    #[error("{label} is not an f-sequence: {detail}")]
    NotFSequence { label: String, detail: String },
    #[error("{label} does not converge: tail spread {spread:.3e}")]
    NonConvergent { label: String, spread: f64 },
    #[error("{first} and {second} present the same point but differ by {gap:.3e}")]
    IllDefined {
        first: String,
        second: String,
        gap: f64,
    },
}

impl From<FieldError> for ExponentError {
    fn from(e: FieldError) -> Self {
        ExponentError::Group(e.into())
    }
}
