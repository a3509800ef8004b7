use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use super::{rational_coordinates, FinGenSubgroup, GroupError};
use crate::realfield::rational::{display_rational, format_rational};
use crate::realfield::{FieldError, RealVector};

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Rational(BigRational),
    Real(RealVector),
}

impl Scalar {
    fn act(&self, x: &RealVector) -> Result<RealVector, FieldError> {
        match self {
            Scalar::Rational(q) => Ok(x.scale(q)),
            Scalar::Real(a) => a.mul(x),
        }
    }

    pub fn eval(&self) -> f64 {
        match self {
            Scalar::Rational(q) => crate::realfield::rational::rational_to_f64(q),
            Scalar::Real(a) => a.eval(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Scalar::Rational(q) => json!({"rational": format_rational(q)}),
            Scalar::Real(a) => json!({"real": a.to_json()}),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => write!(f, "{}", display_rational(q)),
            Scalar::Real(a) => write!(f, "{a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EquivalenceStatus {
    /// `M = a N`, checked by exact membership in both directions.
    Equivalent {
        a: Scalar,
    },
    NotEquivalent {
        witness: String,
    },
    Undecided {
        bound: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceVerdict {
    pub status: EquivalenceStatus,
    pub notes: String,
}

impl EquivalenceVerdict {
    pub fn scalar(&self) -> Option<&Scalar> {
        match &self.status {
            EquivalenceStatus::Equivalent { a } => Some(a),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let status = match &self.status {
            EquivalenceStatus::Equivalent { a } => {
                json!({"status": "EQUIVALENT", "a": a.to_json(), "a_value": a.eval()})
            }
            EquivalenceStatus::NotEquivalent { witness } => {
                json!({"status": "NOT_EQUIVALENT", "witness": witness})
            }
            EquivalenceStatus::Undecided { bound } => {
                json!({"status": "UNDECIDED", "bound": bound})
            }
        };
        let mut v = status;
        v["notes"] = json!(self.notes);
        v
    }
}

/// Checks `a N = M` exactly: `a n` lies in `M` for each basis vector `n` of
/// `N`, and `M` lies in the group generated by `a N`.
fn verify(m: &FinGenSubgroup, n: &FinGenSubgroup, a: &Scalar) -> Result<bool, GroupError> {
    if let Scalar::Rational(q) = a {
        if q.is_zero() {
            return Ok(false);
        }
    }
    let scaled = n
        .basis()
        .iter()
        .map(|x| a.act(x))
        .collect::<Result<Vec<_>, _>>()?;
    for s in &scaled {
        if !m.contains(s)? {
            return Ok(false);
        }
    }
    let an = FinGenSubgroup::new(m.context(), scaled)?;
    an.contains_group(m)
}

/// Solves `x * n = m` for `x` in the symbol span, using the product table.
fn try_divide(m: &RealVector, n: &RealVector) -> Option<RealVector> {
    if n.is_zero() {
        return None;
    }
    let ctx = n.basis();
    let mut syms = Vec::new();
    let mut images = Vec::new();
    for (k, name) in ctx.names().enumerate() {
        let s = RealVector::symbol(ctx, name).ok()?;
        if let Ok(p) = s.mul(n) {
            syms.push(k);
            images.push(p);
        }
    }
    // `images` may be dependent; keep an independent subset greedily
    let mut chosen: Vec<usize> = Vec::new();
    let mut chosen_vecs: Vec<RealVector> = Vec::new();
    for (i, v) in images.iter().enumerate() {
        let mut trial = chosen_vecs.clone();
        trial.push(v.clone());
        if super::rational_rank(&trial) == trial.len() {
            chosen.push(i);
            chosen_vecs = trial;
        }
    }
    let c = rational_coordinates(&chosen_vecs, m)?;
    let coords = chosen.iter().zip(c).map(|(&i, q)| (syms[i], q)).collect();
    Some(RealVector::from_coords(ctx, coords))
}

fn scalar_from(x: RealVector) -> Scalar {
    match x.as_rational() {
        Some(q) => Scalar::Rational(q),
        None => Scalar::Real(x),
    }
}

/// The unique (up to sign) rational `a` that could give `M = a N`, when the
/// two groups span the same rational space.
fn rational_candidate(m: &FinGenSubgroup, n: &FinGenSubgroup) -> Option<BigRational> {
    let n0 = &n.basis()[0];
    let c = rational_coordinates(m.basis(), n0)?;
    // n0 = r * w with w primitive in M; a * n0 primitive forces a = 1/r
    let mut num_gcd = num_bigint::BigInt::zero();
    let mut den_lcm = num_bigint::BigInt::one();
    for q in &c {
        num_gcd = num_integer::Integer::gcd(&num_gcd, q.numer());
        den_lcm = num_integer::Integer::lcm(&den_lcm, q.denom());
    }
    if num_gcd.is_zero() {
        return None;
    }
    let r = BigRational::new(num_gcd, den_lcm);
    Some(r.recip().abs())
}

/// Decides whether `M = a N` for some nonzero real `a`.
pub fn decide_equivalence(
    m: &FinGenSubgroup,
    n: &FinGenSubgroup,
    candidate: Option<&RealVector>,
    search_bound: u32,
) -> Result<EquivalenceVerdict, GroupError> {
    if m.is_trivial() || n.is_trivial() {
        return Err(GroupError::Trivial);
    }
    let (rm, rn) = (m.torsion_free_rank(), n.torsion_free_rank());
    if rm != rn {
        return Ok(EquivalenceVerdict {
            status: EquivalenceStatus::NotEquivalent {
                witness: format!("torsion-free ranks differ: {rm} vs {rn}"),
            },
            notes: "scaling by a nonzero real preserves rank".into(),
        });
    }
    let equivalent = |a: Scalar, notes: String| EquivalenceVerdict {
        status: EquivalenceStatus::Equivalent { a },
        notes,
    };
    if let Some(c) = candidate {
        let a = scalar_from(c.clone());
        if verify(m, n, &a)? {
            return Ok(equivalent(
                a,
                "supplied candidate verified in both directions".into(),
            ));
        }
    }
    if let Some(q) = rational_candidate(m, n) {
        let a = Scalar::Rational(q);
        if verify(m, n, &a)? {
            return Ok(equivalent(
                a,
                "rational scalar verified in both directions".into(),
            ));
        }
    }
    if rm == 1 {
        let (g, h) = (&m.basis()[0], &n.basis()[0]);
        return Ok(match try_divide(g, h).map(scalar_from) {
            Some(a) if verify(m, n, &a).unwrap_or(false) => equivalent(a, "rank one: ratio of generators".into()),
            _ => EquivalenceVerdict {
                status: EquivalenceStatus::Undecided { bound: search_bound },
                notes: "rank one: the ratio of generators exists but is not representable in the symbol basis".into(),
            },
        });
    }
    // a * n0 must be an element of M; try small elements of M
    let n0 = &n.basis()[0];
    let bound = search_bound as i64;
    let k = m.basis().len();
    let mut coef = vec![-bound; k];
    loop {
        if coef.iter().any(|&c| c != 0) {
            let mut target = RealVector::zero(m.context());
            for (c, b) in coef.iter().zip(m.basis()) {
                target = target.add(&b.scale_int(&(*c).into()))?;
            }
            if let Some(a) = try_divide(&target, n0).map(scalar_from) {
                if let Ok(true) = verify(m, n, &a) {
                    return Ok(equivalent(
                        a,
                        format!("found by bounded search (|coefficients| <= {search_bound})"),
                    ));
                }
            }
        }
        let mut i = 0;
        loop {
            if i == k {
                return Ok(EquivalenceVerdict {
                    status: EquivalenceStatus::Undecided {
                        bound: search_bound,
                    },
                    notes: "no rational scalar exists and the bounded search found no real one"
                        .into(),
                });
            }
            if coef[i] < bound {
                coef[i] += 1;
                break;
            }
            coef[i] = -bound;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::realfield::rational::{int, ratio};
    use crate::realfield::SymbolBasis;

    fn ctx() -> Arc<SymbolBasis> {
        Arc::new(SymbolBasis::standard())
    }

    fn grp(b: &Arc<SymbolBasis>, s: &[&str]) -> FinGenSubgroup {
        FinGenSubgroup::new(
            b,
            s.iter().map(|x| RealVector::parse(b, x).unwrap()).collect(),
        )
        .unwrap()
    }

    fn rational_of(v: &EquivalenceVerdict) -> BigRational {
        match v.scalar() {
            Some(Scalar::Rational(q)) => q.clone(),
            other => panic!("expected rational scalar, got {other:?}"),
        }
    }

    #[test]
    fn scaled_rank_two() {
        let b = ctx();
        let m = grp(&b, &["1", "sqrt2"]);
        let n = grp(&b, &["3", "3*sqrt2"]);
        // N = 3 M, so M = (1/3) N
        assert_eq!(
            rational_of(&decide_equivalence(&m, &n, None, 2).unwrap()),
            ratio(1, 3)
        );
        assert_eq!(
            rational_of(&decide_equivalence(&n, &m, None, 2).unwrap()),
            int(3)
        );
    }

    #[test]
    fn reflexive_and_rank_one() {
        let b = ctx();
        let m = grp(&b, &["1"]);
        assert_eq!(
            rational_of(&decide_equivalence(&m, &m, None, 2).unwrap()),
            int(1)
        );
        let n = grp(&b, &["1", "1/2"]);
        assert_eq!(
            rational_of(&decide_equivalence(&m, &n, None, 2).unwrap()),
            int(2)
        );
    }

    #[test]
    fn rank_mismatch() {
        let b = ctx();
        let v = decide_equivalence(&grp(&b, &["1"]), &grp(&b, &["1", "sqrt2"]), None, 2).unwrap();
        assert!(matches!(v.status, EquivalenceStatus::NotEquivalent { .. }));
    }

    #[test]
    fn irrational_ratio_rank_one() {
        let b = ctx();
        // sqrt2 = sqrt2 * 1, representable through the unit rule
        let v = decide_equivalence(&grp(&b, &["sqrt2"]), &grp(&b, &["1"]), None, 2).unwrap();
        assert_eq!(
            v.scalar(),
            Some(&Scalar::Real(RealVector::parse(&b, "sqrt2").unwrap()))
        );
        // sqrt3 / sqrt2 needs a missing product
        let v = decide_equivalence(&grp(&b, &["sqrt3"]), &grp(&b, &["sqrt2"]), None, 2).unwrap();
        assert!(matches!(v.status, EquivalenceStatus::Undecided { .. }));
    }

    #[test]
    fn real_scalar_rank_two() {
        let b = ctx();
        // sqrt2 * <1, sqrt2> = <sqrt2, 2>
        let m = grp(&b, &["sqrt2", "2"]);
        let n = grp(&b, &["1", "sqrt2"]);
        let v = decide_equivalence(&m, &n, None, 2).unwrap();
        // any unit multiple of sqrt2 in Z[sqrt2] works, e.g. 2 + sqrt2
        let a = v.scalar().expect("equivalent");
        assert!(verify(&m, &n, a).unwrap());
        assert!(matches!(a, Scalar::Real(_)));
        let not = decide_equivalence(&grp(&b, &["1", "sqrt3"]), &n, None, 1).unwrap();
        assert!(matches!(not.status, EquivalenceStatus::Undecided { .. }));
    }

    #[test]
    fn supplied_candidate_errors_propagate() {
        let b = ctx();
        let m = grp(&b, &["1", "sqrt3"]);
        let n = grp(&b, &["1", "sqrt3"]);
        let c = RealVector::parse(&b, "sqrt2").unwrap();
        assert!(decide_equivalence(&m, &n, Some(&c), 1).is_err());
    }
}
