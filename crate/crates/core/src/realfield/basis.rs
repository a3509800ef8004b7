use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::rational::{format_rational, parse_rational};
use super::FieldError;

/// Sparse exact coordinates over a symbol basis, keyed by symbol index.
pub type Coords = BTreeMap<usize, BigRational>;

/// Name of the distinguished unit symbol.
pub const UNIT: &str = "1";

/// Bound on integer coefficients used by the independence sanity check.
pub const RELATION_BOUND: i64 = 50;
/// Tolerance of the independence sanity check.
pub const RELATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub value: f64,
}

impl Symbol {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Symbol {
            name: name.into(),
            value,
        }
    }
}

/// An ordered set of reals declared rationally independent, each with a
/// float witness. Optionally carries a partial multiplication table.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBasis {
    symbols: Vec<Symbol>,
    index: HashMap<String, usize>,
    unit: Option<usize>,
    products: BTreeMap<(usize, usize), Coords>,
}

impl SymbolBasis {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self, FieldError> {
        let mut index = HashMap::new();
        let mut unit = None;
        for (i, s) in symbols.iter().enumerate() {
            if s.name.is_empty()
                || s.name
                    .contains(|c: char| c.is_whitespace() || "+-*/()".contains(c))
                    && s.name != UNIT
            {
                return Err(FieldError::BadSymbolName(s.name.clone()));
            }
            if index.insert(s.name.clone(), i).is_some() {
                return Err(FieldError::DuplicateSymbol(s.name.clone()));
            }
            if s.name == UNIT {
                if s.value != 1.0 {
                    return Err(FieldError::BadWitness {
                        name: s.name.clone(),
                        value: s.value,
                    });
                }
                unit = Some(i);
            } else if !s.value.is_finite() || s.value == 0.0 {
                return Err(FieldError::BadWitness {
                    name: s.name.clone(),
                    value: s.value,
                });
            }
        }
        let basis = SymbolBasis {
            symbols,
            index,
            unit,
            products: BTreeMap::new(),
        };
        if let Some(rel) = basis.integer_relation(RELATION_BOUND, RELATION_TOL) {
            log::warn!(
                "symbol witnesses look rationally dependent: coefficients {:?} over {:?}",
                rel,
                basis.names().collect::<Vec<_>>()
            );
        }
        Ok(basis)
    }

    /// `{"1", sqrt2, sqrt3, sqrt5}`; enough for every worked example.
    pub fn standard() -> Self {
        SymbolBasis::new(vec![
            Symbol::new(UNIT, 1.0),
            Symbol::new("sqrt2", std::f64::consts::SQRT_2),
            Symbol::new("sqrt3", 3f64.sqrt()),
            Symbol::new("sqrt5", 5f64.sqrt()),
        ])
        .expect("standard basis is valid")
        .with_square_table()
    }

    /// Adds the entries `sqrtN * sqrtN = N` for every symbol named `sqrtN`.
    pub fn with_square_table(mut self) -> Self {
        let Some(u) = self.unit else { return self };
        let squares: Vec<(usize, i64)> = self
            .symbols
            .iter()
            .enumerate()
            .filter_map(|(i, s)| {
                s.name
                    .strip_prefix("sqrt")
                    .and_then(|n| n.parse().ok())
                    .map(|n| (i, n))
            })
            .collect();
        for (i, n) in squares {
            let mut c = Coords::new();
            c.insert(u, super::rational::int(n));
            self.products.insert((i, i), c);
        }
        self
    }

    /// Declares `a * b = value` (and the symmetric entry).
    pub fn with_product(
        mut self,
        a: &str,
        b: &str,
        value: &[(&str, BigRational)],
    ) -> Result<Self, FieldError> {
        let ia = self.require(a)?;
        let ib = self.require(b)?;
        let mut c = Coords::new();
        for (name, q) in value {
            let k = self.require(name)?;
            let e = c
                .entry(k)
                .or_insert_with(|| BigRational::from_integer(0.into()));
            *e += q;
        }
        c.retain(|_, q| *q != BigRational::from_integer(0.into()));
        self.products.insert((ia.min(ib), ia.max(ib)), c);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(|s| s.name.as_str())
    }

    pub fn witness(&self, i: usize) -> f64 {
        self.symbols[i].value
    }

    pub fn name(&self, i: usize) -> &str {
        &self.symbols[i].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub(crate) fn require(&self, name: &str) -> Result<usize, FieldError> {
        self.index_of(name)
            .ok_or_else(|| FieldError::UnknownSymbol(name.to_string()))
    }

    pub fn unit_index(&self) -> Option<usize> {
        self.unit
    }

    /// Product of two symbols, if the unit rule or the table defines it.
    pub fn symbol_product(&self, i: usize, j: usize) -> Option<Coords> {
        let one = || BigRational::from_integer(1.into());
        if Some(i) == self.unit {
            return Some(Coords::from([(j, one())]));
        }
        if Some(j) == self.unit {
            return Some(Coords::from([(i, one())]));
        }
        self.products.get(&(i.min(j), i.max(j))).cloned()
    }

    /// Searches for a nonzero integer vector `n` with `|n_i| <= bound` and
    /// `|sum n_i * witness_i| <= tol`. Exhaustive for up to three symbols,
    /// lattice-reduction heuristic beyond that.
    pub fn integer_relation(&self, bound: i64, tol: f64) -> Option<Vec<i64>> {
        let values: Vec<f64> = self.symbols.iter().map(|s| s.value).collect();
        match values.len() {
            0 | 1 => None,
            2 | 3 => exhaustive_relation(&values, bound, tol),
            _ => crate::lattice::integer_relation(&values, bound, tol),
        }
    }
}

fn exhaustive_relation(values: &[f64], bound: i64, tol: f64) -> Option<Vec<i64>> {
    let k = values.len();
    let mut n = vec![-bound; k];
    loop {
        let first_nonzero = n.iter().find(|&&c| c != 0);
        if matches!(first_nonzero, Some(&c) if c > 0) {
            let s: f64 = n.iter().zip(values).map(|(&c, &v)| c as f64 * v).sum();
            if s.abs() <= tol {
                return Some(n);
            }
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == k {
                return None;
            }
            if n[i] < bound {
                n[i] += 1;
                break;
            }
            n[i] = -bound;
            i += 1;
        }
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct ProductRepr {
    pub left: String,
    pub right: String,
    pub value: super::VectorRepr,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct BasisRepr {
    pub symbols: Vec<Symbol>,
    #[serde(default)]
    pub products: Vec<ProductRepr>,
}

impl Serialize for SymbolBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let products = self
            .products
            .iter()
            .map(|(&(a, b), c)| ProductRepr {
                left: self.name(a).to_string(),
                right: self.name(b).to_string(),
                value: super::VectorRepr {
                    coords: c
                        .iter()
                        .map(|(&k, q)| (self.name(k).to_string(), format_rational(q)))
                        .collect(),
                },
            })
            .collect();
        BasisRepr {
            symbols: self.symbols.clone(),
            products,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymbolBasis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = BasisRepr::deserialize(d)?;
        let mut basis = SymbolBasis::new(repr.symbols).map_err(D::Error::custom)?;
        for p in repr.products {
            let terms = p
                .value
                .coords
                .iter()
                .map(|(k, v)| parse_rational(v).map(|q| (k.as_str(), q)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(D::Error::custom)?;
            basis = basis
                .with_product(&p.left, &p.right, &terms)
                .map_err(D::Error::custom)?;
        }
        Ok(basis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_bad_witnesses() {
        let dup = SymbolBasis::new(vec![Symbol::new("a", 1.5), Symbol::new("a", 2.5)]);
        assert!(matches!(dup, Err(FieldError::DuplicateSymbol(_))));
        let zero = SymbolBasis::new(vec![Symbol::new("a", 0.0)]);
        assert!(matches!(zero, Err(FieldError::BadWitness { .. })));
        let unit = SymbolBasis::new(vec![Symbol::new(UNIT, 2.0)]);
        assert!(matches!(unit, Err(FieldError::BadWitness { .. })));
        let nan = SymbolBasis::new(vec![Symbol::new("a", f64::NAN)]);
        assert!(nan.is_err());
    }

    #[test]
    fn independence_check_flags_obvious_relation() {
        // 2 * 0.75 - 3 * 0.5 = 0
        let b = SymbolBasis::new(vec![Symbol::new("a", 0.75), Symbol::new("b", 0.5)]).unwrap();
        let rel = b.integer_relation(RELATION_BOUND, RELATION_TOL).unwrap();
        assert_eq!(rel[0] as f64 * 0.75 + rel[1] as f64 * 0.5, 0.0);
        assert!(SymbolBasis::standard()
            .integer_relation(RELATION_BOUND, RELATION_TOL)
            .is_none());
    }

    #[test]
    fn independence_check_large_basis_uses_reduction() {
        let b = SymbolBasis::new(vec![
            Symbol::new(UNIT, 1.0),
            Symbol::new("s2", 2f64.sqrt()),
            Symbol::new("s3", 3f64.sqrt()),
            Symbol::new("t", 3.0 * 2f64.sqrt() - 7.0 * 3f64.sqrt() + 5.0),
        ])
        .unwrap();
        let rel = b
            .integer_relation(RELATION_BOUND, RELATION_TOL)
            .expect("planted relation");
        let s: f64 = rel
            .iter()
            .zip(b.symbols())
            .map(|(&c, s)| c as f64 * s.value)
            .sum();
        assert!(s.abs() < 1e-9);
    }

    #[test]
    fn json_roundtrip_keeps_products() {
        let b = SymbolBasis::standard();
        let js = serde_json::to_string(&b).unwrap();
        let back: SymbolBasis = serde_json::from_str(&js).unwrap();
        assert_eq!(back, b);
        let sq = back.symbol_product(1, 1).unwrap();
        assert_eq!(sq.get(&0).unwrap(), &crate::realfield::rational::int(2));
    }
}
