use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::{matrix_to_i64, rational_coordinates, rational_rank, FinGenSubgroup, GroupError};
use crate::realfield::{RealVector, SymbolBasis};

/// One stage of a B-sequence. `matrix` (absent on stage 1) expresses the
/// previous stage's basis in this one: `b_r^{i-1} = sum_s M[r][s] b_s^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub basis: Vec<RealVector>,
    pub matrix: Option<Vec<Vec<BigInt>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BSequence {
    pub b: Vec<RealVector>,
    pub elements: Vec<RealVector>,
    pub stages: Vec<Stage>,
}

/// Builds the finite B-sequence prefix over the elements `h_1 = 0, h_2, ...`.
pub fn build_b_sequence(
    b: &[RealVector],
    elements: &[RealVector],
) -> Result<BSequence, GroupError> {
    let Some(first) = elements.first() else {
        return Err(GroupError::BadPrefix);
    };
    if !first.is_zero() {
        return Err(GroupError::BadPrefix);
    }
    if b.is_empty() || rational_rank(b) != b.len() {
        return Err(GroupError::DependentB);
    }
    let ctx: Arc<SymbolBasis> = b[0].basis().clone();
    for (index, h) in elements.iter().enumerate() {
        if rational_coordinates(b, h).is_none() {
            return Err(GroupError::OutOfSpan { index });
        }
    }
    let kappa = b.len();
    let mut stages = vec![Stage {
        basis: b.to_vec(),
        matrix: None,
    }];
    for h in &elements[1..] {
        let prev = &stages.last().expect("stage 1 exists").basis;
        let prev_group = FinGenSubgroup::new(&ctx, prev.clone())?;
        if prev_group.contains(h)? {
            let identity = (0..kappa)
                .map(|r| {
                    (0..kappa)
                        .map(|s| {
                            if r == s {
                                BigInt::one()
                            } else {
                                BigInt::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            stages.push(Stage {
                basis: prev.clone(),
                matrix: Some(identity),
            });
            continue;
        }
        let mut gens = prev.clone();
        gens.push(h.clone());
        let next = FinGenSubgroup::new(&ctx, gens)?;
        debug_assert_eq!(next.torsion_free_rank(), kappa);
        let matrix = prev
            .iter()
            .map(|bv| {
                next.basis_coefficients(bv)
                    .map(|c| c.expect("previous stage lies in the next"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        stages.push(Stage {
            basis: next.basis().to_vec(),
            matrix: Some(matrix),
        });
    }
    Ok(BSequence {
        b: b.to_vec(),
        elements: elements.to_vec(),
        stages,
    })
}

impl BSequence {
    pub fn kappa(&self) -> usize {
        self.b.len()
    }

    pub fn context(&self) -> &Arc<SymbolBasis> {
        self.b[0].basis()
    }

    /// Bonding matrices `M_1, ..., M_{n-1}`.
    pub fn matrices(&self) -> Vec<&Vec<Vec<BigInt>>> {
        self.stages
            .iter()
            .filter_map(|s| s.matrix.as_ref())
            .collect()
    }

    /// The group generated by the element prefix together with B.
    pub fn group(&self) -> Result<FinGenSubgroup, GroupError> {
        let mut gens = self.b.clone();
        gens.extend(self.elements.iter().cloned());
        FinGenSubgroup::new(self.context(), gens)
    }

    /// Re-checks every stage identity exactly; returns the first failing
    /// (stage, row) pair.
    pub fn verify(&self) -> Result<(), (usize, usize)> {
        for i in 1..self.stages.len() {
            let m = self.stages[i].matrix.as_ref().ok_or((i, 0))?;
            for (r, row) in m.iter().enumerate() {
                let mut acc = RealVector::zero(self.context());
                for (c, bs) in row.iter().zip(&self.stages[i].basis) {
                    acc = acc.add(&bs.scale_int(c)).map_err(|_| (i, r))?;
                }
                if acc != self.stages[i - 1].basis[r] {
                    return Err((i, r));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<Value, GroupError> {
        let vecs = |vs: &[RealVector]| vs.iter().map(RealVector::to_json).collect::<Vec<_>>();
        let stages = self
            .stages
            .iter()
            .map(|s| {
                let m = s.matrix.as_ref().map(|m| matrix_to_i64(m)).transpose()?;
                Ok(json!({"basis": vecs(&s.basis), "matrix": m}))
            })
            .collect::<Result<Vec<_>, GroupError>>()?;
        Ok(json!({
            "basis": serde_json::to_value(self.context().as_ref()).expect("basis serializes"),
            "B": vecs(&self.b),
            "elements": vecs(&self.elements),
            "stages": stages,
        }))
    }

    /// Reads a sequence written by [`BSequence::to_json`], rebuilding it from
    /// `B` and `elements` and checking the stored stages agree.
    pub fn from_json(v: &Value) -> Result<Self, GroupError> {
        let ctx: SymbolBasis =
            serde_json::from_value(v.get("basis").cloned().unwrap_or(Value::Null))
                .map_err(|e| GroupError::Malformed(e.to_string()))?;
        let ctx = Arc::new(ctx);
        let read = |key: &str| -> Result<Vec<RealVector>, GroupError> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| GroupError::Malformed(format!("missing {key}")))?
                .iter()
                .map(|x| RealVector::from_json(&ctx, x).map_err(GroupError::from))
                .collect()
        };
        let seq = build_b_sequence(&read("B")?, &read("elements")?)?;
        if let Some(stored) = v.get("stages") {
            let ours = seq.to_json()?;
            if &ours["stages"] != stored {
                return Err(GroupError::Malformed(
                    "stored stages disagree with recomputation".into(),
                ));
            }
        }
        Ok(seq)
    }
}
