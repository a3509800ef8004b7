//! Truncated solenoids dual to a B-sequence and their linear flows.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

use crate::exponents::{ExponentError, FSequence, Orbit, ProbeConfig};
use crate::groups::{hnf::hnf, BSequence, FinGenSubgroup, GroupError};
use crate::realfield::{rational::rational_to_f64, RealVector, SymbolBasis};
use crate::torus::{circle_center, circle_dist, circle_spread, frac};

pub const TOL_CONSIST: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolenoidError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("point violates M_{stage} compatibility by {residual:.3e}")]
    InconsistentPoint { stage: usize, residual: f64 },
    #[error("points belong to different systems")]
    SystemMismatch,
    #[error("stage {stage}, coordinate {coord} does not converge: spread {spread:.3e}")]
    NonConvergent {
        stage: usize,
        coord: usize,
        spread: f64,
    },
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error("malformed system: {0}")]
    Malformed(String),
}

/// Inverse system of `kappa`-tori with integer bonding matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SolenoidSystem {
    kappa: usize,
    matrices: Vec<Vec<Vec<i64>>>,
    stage_bases: Vec<Vec<RealVector>>,
    witnesses: Vec<Vec<f64>>,
}

/// Coordinates on each stored torus, in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolenoidPoint {
    pub stages: Vec<Vec<f64>>,
}

impl SolenoidSystem {
    /// Uses the first `depth` stages of `seq` (all of them when `None`).
    pub fn from_b_sequence(seq: &BSequence, depth: Option<usize>) -> Result<Self, SolenoidError> {
        let depth = depth
            .unwrap_or(seq.stages.len())
            .min(seq.stages.len())
            .max(1);
        let stages = &seq.stages[..depth];
        let matrices = stages[1..]
            .iter()
            .map(|s| {
                crate::groups::matrix_to_i64(
                    s.matrix.as_ref().expect("later stages carry a matrix"),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(
            seq.kappa(),
            matrices,
            stages.iter().map(|s| s.basis.clone()).collect(),
        )
    }

    /// Checks `b_r^i = sum_s M_i[r][s] b_s^{i+1}` exactly and `det M_i != 0`.
    pub fn new(
        kappa: usize,
        matrices: Vec<Vec<Vec<i64>>>,
        stage_bases: Vec<Vec<RealVector>>,
    ) -> Result<Self, SolenoidError> {
        if stage_bases.is_empty() || matrices.len() + 1 != stage_bases.len() {
            return Err(SolenoidError::Malformed(
                "need one matrix between consecutive stages".into(),
            ));
        }
        if stage_bases.iter().any(|b| b.len() != kappa) {
            return Err(SolenoidError::Malformed(
                "every stage needs kappa basis vectors".into(),
            ));
        }
        for (i, m) in matrices.iter().enumerate() {
            if m.len() != kappa || m.iter().any(|r| r.len() != kappa) {
                return Err(SolenoidError::Malformed(format!(
                    "matrix {} is not kappa x kappa",
                    i + 1
                )));
            }
            let big: Vec<Vec<BigInt>> = m
                .iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect();
            if hnf(&big).rank() != kappa {
                return Err(SolenoidError::Malformed(format!(
                    "matrix {} is singular",
                    i + 1
                )));
            }
            let ctx = stage_bases[0][0].basis();
            for (r, row) in m.iter().enumerate() {
                let mut acc = RealVector::zero(ctx);
                for (c, b) in row.iter().zip(&stage_bases[i + 1]) {
                    acc = acc
                        .add(&b.scale_int(&BigInt::from(*c)))
                        .map_err(GroupError::from)?;
                }
                if acc != stage_bases[i][r] {
                    return Err(SolenoidError::Malformed(format!(
                        "stage identity fails at stage {}, row {r}",
                        i + 1
                    )));
                }
            }
        }
        let witnesses = stage_bases
            .iter()
            .map(|b| b.iter().map(RealVector::eval).collect())
            .collect();
        Ok(SolenoidSystem {
            kappa,
            matrices,
            stage_bases,
            witnesses,
        })
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn depth(&self) -> usize {
        self.stage_bases.len()
    }

    pub fn matrices(&self) -> &[Vec<Vec<i64>>] {
        &self.matrices
    }

    pub fn stage_bases(&self) -> &[Vec<RealVector>] {
        &self.stage_bases
    }

    pub fn context(&self) -> &Arc<SymbolBasis> {
        self.stage_bases[0][0].basis()
    }

    pub fn identity(&self) -> SolenoidPoint {
        SolenoidPoint {
            stages: vec![vec![0.0; self.kappa]; self.depth()],
        }
    }

    /// Largest `d_1(M_i x^{i+1}, x^i)` over stages and rows.
    pub fn residual(&self, x: &SolenoidPoint) -> (usize, f64) {
        let mut worst = (0, 0.0f64);
        for (i, m) in self.matrices.iter().enumerate() {
            for (r, row) in m.iter().enumerate() {
                let image: f64 = row
                    .iter()
                    .zip(&x.stages[i + 1])
                    .map(|(&a, c)| a as f64 * c)
                    .sum();
                let d = circle_dist(image, x.stages[i][r]);
                if d > worst.1 {
                    worst = (i + 1, d);
                }
            }
        }
        worst
    }

    pub fn check(&self, x: &SolenoidPoint, tol: f64) -> Result<(), SolenoidError> {
        if x.stages.len() != self.depth() || x.stages.iter().any(|s| s.len() != self.kappa) {
            return Err(SolenoidError::SystemMismatch);
        }
        let (stage, residual) = self.residual(x);
        if residual > tol {
            return Err(SolenoidError::InconsistentPoint { stage, residual });
        }
        Ok(())
    }

    /// The generators used by the flow: every stage basis vector.
    pub fn dual_group(&self) -> Result<FinGenSubgroup, SolenoidError> {
        let gens = self.stage_bases.iter().flatten().cloned().collect();
        Ok(FinGenSubgroup::new(self.context(), gens)?)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kappa": self.kappa,
            "matrices": self.matrices,
            "stage_bases": self.stage_bases.iter().map(|b| b.iter().map(RealVector::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "basis": serde_json::to_value(self.context().as_ref()).expect("basis serializes"),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, SolenoidError> {
        let bad = |m: &str| SolenoidError::Malformed(m.to_string());
        let ctx: SymbolBasis = serde_json::from_value(
            v.get("basis")
                .cloned()
                .ok_or_else(|| bad("missing basis"))?,
        )
        .map_err(|e| bad(&e.to_string()))?;
        let ctx = Arc::new(ctx);
        let kappa = v
            .get("kappa")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing kappa"))? as usize;
        let matrices: Vec<Vec<Vec<i64>>> = serde_json::from_value(
            v.get("matrices")
                .cloned()
                .ok_or_else(|| bad("missing matrices"))?,
        )
        .map_err(|e| bad(&e.to_string()))?;
        let stage_bases = v
            .get("stage_bases")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing stage_bases"))?
            .iter()
            .map(|stage| {
                stage
                    .as_array()
                    .ok_or_else(|| bad("stage basis must be a list"))?
                    .iter()
                    .map(|x| {
                        RealVector::from_json(&ctx, x).map_err(|e| SolenoidError::Group(e.into()))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(kappa, matrices, stage_bases)
    }
}

/// The linear flow whose stage-1 frequency vector is the first stage basis.
#[derive(Debug, Clone)]
pub struct LinearFlowSpec {
    pub system: SolenoidSystem,
}

impl LinearFlowSpec {
    pub fn new(system: SolenoidSystem) -> Self {
        LinearFlowSpec { system }
    }

    pub fn omega(&self) -> &[RealVector] {
        &self.system.stage_bases[0]
    }

    /// Stage `i`, coordinate `j`: `frac(t * b_j^i)`.
    pub fn pi_solenoid(&self, t: f64) -> SolenoidPoint {
        SolenoidPoint {
            stages: self
                .system
                .witnesses
                .iter()
                .map(|w| w.iter().map(|b| frac(t * b)).collect())
                .collect(),
        }
    }

    /// Exact coordinates when every stage basis vector is rational.
    pub fn pi_solenoid_exact(&self, t: &BigRational) -> Option<Vec<Vec<BigRational>>> {
        self.system
            .stage_bases
            .iter()
            .map(|stage| {
                stage
                    .iter()
                    .map(|b| {
                        let q = b.as_rational()? * t;
                        let f = &q - q.floor();
                        Some(if f < BigRational::zero() {
                            f + BigRational::from_integer(1.into())
                        } else {
                            f
                        })
                    })
                    .collect()
            })
            .collect()
    }

    pub fn flow_step(&self, t: f64, x: &SolenoidPoint) -> Result<SolenoidPoint, SolenoidError> {
        self.system.check(x, TOL_CONSIST)?;
        Ok(add(&self.pi_solenoid(t), x))
    }
}

fn add(x: &SolenoidPoint, y: &SolenoidPoint) -> SolenoidPoint {
    SolenoidPoint {
        stages: x
            .stages
            .iter()
            .zip(&y.stages)
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| frac(p + q)).collect())
            .collect(),
    }
}

pub fn point_add(
    system: &SolenoidSystem,
    x: &SolenoidPoint,
    y: &SolenoidPoint,
) -> Result<SolenoidPoint, SolenoidError> {
    system.check(x, TOL_CONSIST)?;
    system.check(y, TOL_CONSIST)?;
    Ok(add(x, y))
}

pub fn point_neg(x: &SolenoidPoint) -> SolenoidPoint {
    SolenoidPoint {
        stages: x
            .stages
            .iter()
            .map(|s| s.iter().map(|&c| frac(-c)).collect())
            .collect(),
    }
}

/// Sup of coordinatewise circle distances.
pub fn point_dist(x: &SolenoidPoint, y: &SolenoidPoint) -> f64 {
    x.stages
        .iter()
        .zip(&y.stages)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| circle_dist(*p, *q)))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct SolenoidLimit {
    pub point: SolenoidPoint,
    /// Tail spread per stage and coordinate.
    pub spreads: Vec<Vec<f64>>,
}

/// The image of the limit point of an f-sequence: each coordinate is the
/// limit of `frac(b_j^i t_k)`. The sequence is first re-verified as an
/// f-sequence with tolerance `cfg.tol_evidence`.
pub fn semiconjugacy_to_solenoid(
    orbit: &dyn Orbit,
    system: &SolenoidSystem,
    seq: &FSequence,
    cfg: &ProbeConfig,
) -> Result<SolenoidLimit, SolenoidError> {
    let check = seq.cauchy_check(orbit, cfg.tol_evidence);
    if !check.passed {
        return Err(ExponentError::NotFSequence {
            label: seq.label.clone(),
            detail: check.detail,
        }
        .into());
    }
    let tail = seq.tail_times();
    let mut stages = Vec::new();
    let mut spreads = Vec::new();
    for (i, w) in system.witnesses.iter().enumerate() {
        let mut coords = Vec::new();
        let mut sp = Vec::new();
        for (j, b) in w.iter().enumerate() {
            let values: Vec<f64> = tail.iter().map(|t| frac(b * t)).collect();
            let spread = circle_spread(&values);
            if spread > cfg.tol_limit {
                return Err(SolenoidError::NonConvergent {
                    stage: i + 1,
                    coord: j + 1,
                    spread,
                });
            }
            coords.push(circle_center(&values));
            sp.push(spread);
        }
        stages.push(coords);
        spreads.push(sp);
    }
    Ok(SolenoidLimit {
        point: SolenoidPoint { stages },
        spreads,
    })
}

/// Rational value of `x`, evaluated, for display.
pub fn exact_to_f64(stages: &[Vec<BigRational>]) -> Vec<Vec<f64>> {
    stages
        .iter()
        .map(|s| s.iter().map(rational_to_f64).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_b_sequence;
    use crate::realfield::rational::ratio;

    fn dyadic(depth: usize) -> LinearFlowSpec {
        let b = Arc::new(SymbolBasis::standard());
        let elems: Vec<RealVector> = (0..depth)
            .map(|k| {
                if k == 0 {
                    RealVector::zero(&b)
                } else {
                    RealVector::rational(&b, ratio(1, 1 << k)).unwrap()
                }
            })
            .collect();
        let seq = build_b_sequence(&[RealVector::parse(&b, "1").unwrap()], &elems).unwrap();
        LinearFlowSpec::new(SolenoidSystem::from_b_sequence(&seq, None).unwrap())
    }

    #[test]
    fn pi_examples() {
        let f = dyadic(3);
        assert_eq!(f.pi_solenoid(0.0), f.system.identity());
        assert_eq!(
            f.pi_solenoid(1.0).stages,
            vec![vec![0.0], vec![0.5], vec![0.25]]
        );
        assert_eq!(
            f.pi_solenoid(4.0).stages,
            vec![vec![0.0], vec![0.0], vec![0.0]]
        );
        let exact = f.pi_solenoid_exact(&ratio(1, 1)).unwrap();
        assert_eq!(exact_to_f64(&exact), vec![vec![0.0], vec![0.5], vec![0.25]]);
    }

    #[test]
    fn flow_and_addition() {
        let f = dyadic(3);
        let e = f.system.identity();
        assert_eq!(f.flow_step(1.0, &e).unwrap(), f.pi_solenoid(1.0));
        let x = f.pi_solenoid(1.0);
        assert_eq!(f.flow_step(0.0, &x).unwrap(), x);
        let s = point_add(&f.system, &x, &x).unwrap();
        assert_eq!(s.stages, vec![vec![0.0], vec![0.0], vec![0.5]]);
        assert!(f.system.check(&s, TOL_CONSIST).is_ok());
        assert_eq!(point_add(&f.system, &x, &point_neg(&x)).unwrap(), e);
        assert_eq!(point_add(&f.system, &x, &e).unwrap(), x);
    }

    #[test]
    fn inconsistent_point_is_rejected() {
        let f = dyadic(3);
        let bad = SolenoidPoint {
            stages: vec![vec![0.0], vec![0.3], vec![0.25]],
        };
        assert!(matches!(
            f.flow_step(1.0, &bad),
            Err(SolenoidError::InconsistentPoint { .. })
        ));
    }

    #[test]
    fn json_roundtrip() {
        let f = dyadic(4);
        let back = SolenoidSystem::from_json(&f.system.to_json()).unwrap();
        assert_eq!(back, f.system);
    }
}
