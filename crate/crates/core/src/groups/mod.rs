//! Finitely generated subgroups of the reals, B-sequences and the
//! equivalence decision.

mod bseq;
mod equivalence;
pub mod hnf;

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::realfield::{Coords, FieldError, RealVector, SymbolBasis};
pub use bseq::{build_b_sequence, BSequence, Stage};
pub use equivalence::{decide_equivalence, EquivalenceStatus, EquivalenceVerdict, Scalar};
use hnf::{hnf, Hnf, IntMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("B is not rationally independent")]
    DependentB,
    #[error("element {index} is outside the rational span of B")]
    OutOfSpan { index: usize },
    #[error("element list must be nonempty and start with 0")]
    BadPrefix,
    #[error("group is trivial")]
    Trivial,
    #[error("integer entry does not fit in 64 bits")]
    Overflow,
    #[error("malformed input: {0}")]
    Malformed(String),
}

/// A finitely generated subgroup of (R, +) with its lattice normal form.
#[derive(Debug, Clone)]
pub struct FinGenSubgroup {
    ctx: Arc<SymbolBasis>,
    generators: Vec<RealVector>,
    denom: BigInt,
    form: Hnf,
    lattice_basis: Vec<RealVector>,
}

impl PartialEq for FinGenSubgroup {
    /// Equality as subgroups, not as generator lists.
    fn eq(&self, other: &Self) -> bool {
        self.lattice_basis == other.lattice_basis
    }
}

fn common_denominator<'a>(vs: impl Iterator<Item = &'a RealVector>) -> BigInt {
    let mut d = BigInt::one();
    for v in vs {
        for q in v.coords().values() {
            d = d.lcm(q.denom());
        }
    }
    d
}

fn integer_row(v: &RealVector, denom: &BigInt, width: usize) -> Option<Vec<BigInt>> {
    let mut row = vec![BigInt::zero(); width];
    for (&k, q) in v.coords() {
        let s = q * BigRational::from_integer(denom.clone());
        if !s.is_integer() {
            return None;
        }
        row[k] = s.to_integer();
    }
    Some(row)
}

impl FinGenSubgroup {
    pub fn new(ctx: &Arc<SymbolBasis>, generators: Vec<RealVector>) -> Result<Self, GroupError> {
        for g in &generators {
            if g.basis().as_ref() != ctx.as_ref() {
                return Err(FieldError::BasisMismatch.into());
            }
        }
        let denom = common_denominator(generators.iter());
        let width = ctx.len();
        let a: IntMatrix = generators
            .iter()
            .map(|g| integer_row(g, &denom, width).expect("denominator clears every generator"))
            .collect();
        let form = hnf(&a);
        let dq = BigRational::from_integer(denom.clone());
        let lattice_basis = form
            .basis_rows()
            .iter()
            .map(|row| {
                let coords: Coords = row
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(k, v)| (k, BigRational::from_integer(v.clone()) / &dq))
                    .collect();
                RealVector::from_coords(ctx, coords)
            })
            .collect();
        Ok(FinGenSubgroup {
            ctx: ctx.clone(),
            generators,
            denom,
            form,
            lattice_basis,
        })
    }

    pub fn context(&self) -> &Arc<SymbolBasis> {
        &self.ctx
    }

    pub fn generators(&self) -> &[RealVector] {
        &self.generators
    }

    /// Canonical Z-basis, one vector per unit of rank.
    pub fn basis(&self) -> &[RealVector] {
        &self.lattice_basis
    }

    pub fn torsion_free_rank(&self) -> usize {
        self.form.rank()
    }

    pub fn is_trivial(&self) -> bool {
        self.form.rank() == 0
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denom
    }

    pub fn normal_form(&self) -> &Hnf {
        &self.form
    }

    fn check(&self, x: &RealVector) -> Result<(), GroupError> {
        if x.basis().as_ref() == self.ctx.as_ref() {
            Ok(())
        } else {
            Err(FieldError::BasisMismatch.into())
        }
    }

    /// Integer coefficients over the lattice basis, if `x` lies in the group.
    pub fn basis_coefficients(&self, x: &RealVector) -> Result<Option<Vec<BigInt>>, GroupError> {
        self.check(x)?;
        Ok(integer_row(x, &self.denom, self.ctx.len()).and_then(|row| self.form.solve(&row)))
    }

    /// Integer coefficients over the generators, if `x` lies in the group.
    pub fn generator_coefficients(
        &self,
        x: &RealVector,
    ) -> Result<Option<Vec<BigInt>>, GroupError> {
        self.check(x)?;
        Ok(integer_row(x, &self.denom, self.ctx.len())
            .and_then(|row| self.form.solve_original(&row)))
    }

    pub fn contains(&self, x: &RealVector) -> Result<bool, GroupError> {
        Ok(self.basis_coefficients(x)?.is_some())
    }

    /// Every element of `other` lies in `self`.
    pub fn contains_group(&self, other: &FinGenSubgroup) -> Result<bool, GroupError> {
        for g in other.basis() {
            if !self.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Integer relations among the generators (a basis of the left kernel).
    pub fn relations(&self) -> &[Vec<BigInt>] {
        self.form.kernel_rows()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "generators": self.generators.iter().map(RealVector::to_json).collect::<Vec<_>>(),
            "lattice_basis": self.lattice_basis.iter().map(RealVector::to_json).collect::<Vec<_>>(),
            "rank": self.torsion_free_rank(),
        })
    }

    /// Reads `{"generators": [...]}`; any cached fields are recomputed.
    pub fn from_json(ctx: &Arc<SymbolBasis>, v: &Value) -> Result<Self, GroupError> {
        let gens = v
            .get("generators")
            .and_then(Value::as_array)
            .ok_or_else(|| GroupError::Malformed("missing generators".into()))?;
        let gens = gens
            .iter()
            .map(|g| RealVector::from_json(ctx, g))
            .collect::<Result<Vec<_>, _>>()?;
        FinGenSubgroup::new(ctx, gens)
    }
}

/// Rational coordinates of `x` over the independent vectors `basis`, or
/// `None` if `x` is outside their span.
pub fn rational_coordinates(basis: &[RealVector], x: &RealVector) -> Option<Vec<BigRational>> {
    let width = x.basis().len();
    let k = basis.len();
    // columns: basis vectors; augmented with x
    let mut rows: Vec<Vec<BigRational>> = (0..width)
        .map(|s| {
            let mut r: Vec<BigRational> = basis.iter().map(|b| b.coord(s)).collect();
            r.push(x.coord(s));
            r
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut p = 0;
    for c in 0..k {
        let Some(i) = (p..width).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(p, i);
        let inv = rows[p][c].recip();
        rows[p].iter_mut().for_each(|v| *v *= &inv);
        for i in 0..width {
            if i != p && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let src = rows[p].clone();
                for (d, s) in rows[i].iter_mut().zip(&src) {
                    *d -= &f * s;
                }
            }
        }
        pivot_cols.push(c);
        p += 1;
    }
    if rows[p..].iter().any(|r| !r[k].is_zero()) {
        return None;
    }
    let mut out = vec![BigRational::zero(); k];
    for (r, &c) in pivot_cols.iter().enumerate() {
        out[c] = rows[r][k].clone();
    }
    Some(out)
}

/// Q-rank of a list of vectors.
pub fn rational_rank(vs: &[RealVector]) -> usize {
    match vs.first() {
        None => 0,
        Some(v) => {
            let denom = common_denominator(vs.iter());
            let rows: IntMatrix = vs
                .iter()
                .map(|x| integer_row(x, &denom, v.basis().len()).expect("cleared"))
                .collect();
            hnf(&rows).rank()
        }
    }
}

pub(crate) fn matrix_to_i64(m: &[Vec<BigInt>]) -> Result<Vec<Vec<i64>>, GroupError> {
    m.iter()
        .map(|r| {
            r.iter()
                .map(|v| v.to_i64().ok_or(GroupError::Overflow))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realfield::rational::ratio;

    fn ctx() -> Arc<SymbolBasis> {
        Arc::new(SymbolBasis::standard())
    }

    fn v(b: &Arc<SymbolBasis>, s: &str) -> RealVector {
        RealVector::parse(b, s).unwrap()
    }

    #[test]
    fn membership_examples() {
        let b = ctx();
        let g = FinGenSubgroup::new(&b, vec![v(&b, "1"), v(&b, "sqrt2")]).unwrap();
        assert!(g.contains(&v(&b, "3 - 2*sqrt2")).unwrap());
        assert!(!g.contains(&v(&b, "1/2")).unwrap());
        let h = FinGenSubgroup::new(&b, vec![v(&b, "2/3"), v(&b, "1/2")]).unwrap();
        assert!(h.contains(&v(&b, "1/6")).unwrap());
        let c = h.generator_coefficients(&v(&b, "1/6")).unwrap().unwrap();
        let back = h.generators()[0]
            .scale_int(&c[0])
            .add(&h.generators()[1].scale_int(&c[1]))
            .unwrap();
        assert_eq!(back, v(&b, "1/6"));
    }

    #[test]
    fn basis_examples() {
        let b = ctx();
        let g = FinGenSubgroup::new(&b, vec![v(&b, "1"), v(&b, "1/2")]).unwrap();
        assert_eq!(g.basis(), &[v(&b, "1/2")]);
        let g = FinGenSubgroup::new(&b, vec![v(&b, "1"), v(&b, "sqrt2")]).unwrap();
        assert_eq!(g.basis().len(), 2);
        let g = FinGenSubgroup::new(&b, vec![v(&b, "0")]).unwrap();
        assert!(g.basis().is_empty());
        assert_eq!(g.torsion_free_rank(), 0);
    }

    #[test]
    fn rank_examples() {
        let b = ctx();
        let g = FinGenSubgroup::new(&b, vec![v(&b, "1"), v(&b, "1/2"), v(&b, "1/3")]).unwrap();
        assert_eq!(g.torsion_free_rank(), 1);
        assert_eq!(g.basis(), &[v(&b, "1/6")]);
        assert_eq!(g.relations().len(), 2);
    }

    #[test]
    fn rational_coordinates_solve() {
        let b = ctx();
        let basis = [v(&b, "1 + sqrt2"), v(&b, "sqrt2")];
        let c = rational_coordinates(&basis, &v(&b, "1/2 + 3*sqrt2")).unwrap();
        assert_eq!(c, vec![ratio(1, 2), ratio(5, 2)]);
        assert!(rational_coordinates(&basis, &v(&b, "sqrt3")).is_none());
        assert_eq!(rational_rank(&[v(&b, "1"), v(&b, "2"), v(&b, "sqrt5")]), 2);
    }

    #[test]
    fn json_roundtrip() {
        let b = ctx();
        let g = FinGenSubgroup::new(&b, vec![v(&b, "2/3"), v(&b, "sqrt2")]).unwrap();
        let back = FinGenSubgroup::from_json(&b, &g.to_json()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.generators(), g.generators());
    }
}
