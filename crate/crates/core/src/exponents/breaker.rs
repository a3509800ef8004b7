//! Sequences along which the frequency traces converge while a further
//! trace alternates between two values.

use num_traits::ToPrimitive;
use serde::Serialize;

use super::fseq::{CauchyCheck, FSequence};
use super::kronecker::{kronecker_solve, Direction, KroneckerQuery, KroneckerSolution};
use super::orbit::{Orbit, Point};
use super::probe::{GAP_MIN, TOL_LIMIT};
use super::ExponentError;
use crate::groups::FinGenSubgroup;
use crate::realfield::RealVector;
use crate::torus::{circle_dist, frac, signed_offset};

#[derive(Debug, Clone)]
pub struct BreakerSpec {
    pub label: String,
    /// Frequencies whose traces must converge to `frequency_targets`.
    pub frequencies: Vec<RealVector>,
    pub frequency_targets: Vec<f64>,
    /// The trace to break: odd indices aim at the first target, even at
    /// the second. `None` builds a plain convergent sequence.
    pub gamma: Option<(RealVector, [f64; 2])>,
    /// Index of the first term; term `i` has tolerance `1/i`.
    pub first_index: usize,
    pub length: usize,
    /// Added to every solved time.
    pub time_offset: f64,
    /// Smallest `|t|` of the first term.
    pub t_start: f64,
    pub direction: Direction,
    pub search_bound: f64,
    /// Where the orbit values are claimed to converge; defaults to the
    /// orbit value at the last term.
    pub limit_point: Option<Point>,
    /// Declared orbit bound for term `i` is `bound_scale / i`.
    pub bound_scale: f64,
    pub gap_min: f64,
    pub tol_evidence: f64,
}

impl BreakerSpec {
    pub fn new(
        label: impl Into<String>,
        frequencies: Vec<RealVector>,
        frequency_targets: Vec<f64>,
    ) -> Self {
        BreakerSpec {
            label: label.into(),
            frequencies,
            frequency_targets,
            gamma: None,
            first_index: 20,
            length: 12,
            time_offset: 0.0,
            t_start: 0.0,
            direction: Direction::Forward,
            search_bound: 1e13,
            limit_point: None,
            bound_scale: 2.0,
            gap_min: GAP_MIN,
            tol_evidence: TOL_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BreakerSequence {
    pub fseq: FSequence,
    /// `frac(gamma t_i)` for every term (empty without gamma).
    pub gamma_trace: Vec<f64>,
    pub check: CauchyCheck,
    pub solutions: Vec<KroneckerSolution>,
}

/// Exact integer relations among the given reals, as i64 rows.
fn relations(vs: &[RealVector]) -> Result<Vec<Vec<i64>>, ExponentError> {
    let g = FinGenSubgroup::new(vs[0].basis(), vs.to_vec())?;
    Ok(g.relations()
        .iter()
        .map(|r| r.iter().map(|v| v.to_i64().unwrap_or(i64::MAX)).collect())
        .collect())
}

fn compatible(rels: &[Vec<i64>], targets: &[f64]) -> Option<Vec<i64>> {
    rels.iter()
        .find(|rel| {
            let s: f64 = rel.iter().zip(targets).map(|(&l, x)| l as f64 * x).sum();
            signed_offset(s, 0.0).abs() > super::kronecker::TOL_COMPAT
        })
        .cloned()
}

pub fn build_breaker_sequence(
    orbit: &dyn Orbit,
    spec: &BreakerSpec,
) -> Result<BreakerSequence, ExponentError> {
    let mut freqs = spec.frequencies.clone();
    let mut tuples = vec![spec.frequency_targets.clone()];
    if let Some((gamma, [g0, g1])) = &spec.gamma {
        if circle_dist(*g0, *g1) < spec.gap_min {
            return Err(ExponentError::NotFound(format!(
                "gamma targets {g0} and {g1} are closer than {}",
                spec.gap_min
            )));
        }
        freqs.push(gamma.clone());
        let mut a = spec.frequency_targets.clone();
        a.push(*g0);
        let mut b = spec.frequency_targets.clone();
        b.push(*g1);
        tuples = vec![a, b];
        let rels = relations(&freqs)?;
        for tuple in &tuples {
            if let Some(rel) = compatible(&rels, tuple) {
                return Err(ExponentError::NotFound(format!(
                    "the gamma trace is pinned by the relation {rel:?}; it cannot alternate while the other traces converge"
                )));
            }
        }
    }
    let mut times = Vec::with_capacity(spec.length);
    let mut bounds = Vec::with_capacity(spec.length);
    let mut solutions = Vec::with_capacity(spec.length);
    let mut floor = spec.t_start;
    for i in spec.first_index..spec.first_index + spec.length {
        let eps = 1.0 / i as f64;
        let targets = if tuples.len() == 2 {
            &tuples[(i + 1) % 2]
        } else {
            &tuples[0]
        };
        let mut q = KroneckerQuery::new(freqs.clone(), targets.clone(), eps, spec.search_bound);
        q.t_min = floor.max(i as f64 + 1.0);
        q.direction = spec.direction;
        let s = kronecker_solve(&q)?;
        floor = s.t.abs() + 1.0;
        times.push(s.t + spec.time_offset);
        bounds.push(spec.bound_scale * eps);
        solutions.push(s);
    }
    let target = spec
        .limit_point
        .clone()
        .unwrap_or_else(|| orbit.eval(*times.last().expect("length >= 1")));
    let fseq = FSequence::new(orbit, spec.label.clone(), times, target, Some(bounds));
    let check = fseq.cauchy_check(orbit, spec.tol_evidence);
    if !check.passed {
        return Err(ExponentError::NotFSequence {
            label: spec.label.clone(),
            detail: check.detail,
        });
    }
    let gamma_trace = match &spec.gamma {
        Some((g, _)) => {
            let gv = g.eval();
            fseq.times.iter().map(|&t| frac(gv * t)).collect()
        }
        None => Vec::new(),
    };
    Ok(BreakerSequence {
        fseq,
        gamma_trace,
        check,
        solutions,
    })
}
