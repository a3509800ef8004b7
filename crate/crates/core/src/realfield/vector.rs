use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::basis::{Coords, SymbolBasis};
use super::rational::{display_rational, format_rational, parse_rational, rational_to_f64};
use super::{FieldError, VectorRepr};

/// An element of the rational span of a [`SymbolBasis`].
#[derive(Clone)]
pub struct RealVector {
    basis: Arc<SymbolBasis>,
    coords: Coords,
}

impl PartialEq for RealVector {
    fn eq(&self, other: &Self) -> bool {
        same_basis(&self.basis, &other.basis) && self.coords == other.coords
    }
}

impl Eq for RealVector {}

fn same_basis(a: &Arc<SymbolBasis>, b: &Arc<SymbolBasis>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl RealVector {
    pub fn zero(basis: &Arc<SymbolBasis>) -> Self {
        RealVector {
            basis: basis.clone(),
            coords: Coords::new(),
        }
    }

    pub fn from_coords(basis: &Arc<SymbolBasis>, mut coords: Coords) -> Self {
        coords.retain(|_, q| !q.is_zero());
        debug_assert!(coords.keys().all(|&k| k < basis.len()));
        RealVector {
            basis: basis.clone(),
            coords,
        }
    }

    /// `q` times the symbol `name`.
    pub fn term(basis: &Arc<SymbolBasis>, name: &str, q: BigRational) -> Result<Self, FieldError> {
        let i = basis.require(name)?;
        Ok(Self::from_coords(basis, Coords::from([(i, q)])))
    }

    pub fn symbol(basis: &Arc<SymbolBasis>, name: &str) -> Result<Self, FieldError> {
        Self::term(basis, name, BigRational::one())
    }

    /// The rational `q` as a multiple of the unit symbol.
    pub fn rational(basis: &Arc<SymbolBasis>, q: BigRational) -> Result<Self, FieldError> {
        Self::term(basis, super::UNIT, q)
    }

    pub fn basis(&self) -> &Arc<SymbolBasis> {
        &self.basis
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> BigRational {
        self.coords
            .get(&i)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    /// The value as a rational, if only the unit coordinate is nonzero.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.basis.unit_index() {
            _ if self.coords.is_empty() => Some(BigRational::zero()),
            Some(u) if self.coords.len() == 1 => self.coords.get(&u).cloned(),
            _ => None,
        }
    }

    fn check(&self, other: &Self) -> Result<(), FieldError> {
        if same_basis(&self.basis, &other.basis) {
            Ok(())
        } else {
            Err(FieldError::BasisMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        let mut coords = self.coords.clone();
        for (&k, q) in &other.coords {
            let e = coords.entry(k).or_insert_with(BigRational::zero);
            *e += q;
        }
        Ok(Self::from_coords(&self.basis, coords))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RealVector {
            basis: self.basis.clone(),
            coords: self.coords.iter().map(|(&k, q)| (k, -q)).collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero(&self.basis);
        }
        RealVector {
            basis: self.basis.clone(),
            coords: self.coords.iter().map(|(&k, c)| (k, c * q)).collect(),
        }
    }

    pub fn scale_int(&self, n: &BigInt) -> Self {
        self.scale(&BigRational::from_integer(n.clone()))
    }

    /// Bilinear product through the basis product table.
    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        let mut coords = Coords::new();
        for (&i, a) in &self.coords {
            for (&j, b) in &other.coords {
                let p = self.basis.symbol_product(i, j).ok_or_else(|| {
                    FieldError::Unrepresentable(
                        self.basis.name(i).to_string(),
                        self.basis.name(j).to_string(),
                    )
                })?;
                let ab = a * b;
                for (k, c) in p {
                    let e = coords.entry(k).or_insert_with(BigRational::zero);
                    *e += &ab * c;
                }
            }
        }
        Ok(Self::from_coords(&self.basis, coords))
    }

    /// Float value, summing the terms with compensation.
    pub fn eval(&self) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (&k, q) in &self.coords {
            let v = rational_to_f64(q) * self.basis.witness(k);
            let t = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    /// Parses a linear expression such as `"2*theta - 1/2"` or `"(1+sqrt2)/2"`.
    /// Decimal literals are read exactly (`0.3` is `3/10`).
    pub fn parse(basis: &Arc<SymbolBasis>, s: &str) -> Result<Self, FieldError> {
        let mut p = Parser {
            basis,
            src: s,
            pos: 0,
        };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(FieldError::BadExpression(s.to_string()));
        }
        v.into_vector(basis)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let repr = VectorRepr {
            coords: self
                .coords
                .iter()
                .map(|(&k, q)| (self.basis.name(k).to_string(), format_rational(q)))
                .collect(),
        };
        serde_json::to_value(repr).expect("vector repr serializes")
    }

    /// Reads `{"coords": {...}}`, or a bare string expression.
    pub fn from_json(basis: &Arc<SymbolBasis>, v: &serde_json::Value) -> Result<Self, FieldError> {
        if let Some(s) = v.as_str() {
            return Self::parse(basis, s);
        }
        let repr: VectorRepr = serde_json::from_value(v.clone())
            .map_err(|e| FieldError::BadExpression(e.to_string()))?;
        let mut coords = Coords::new();
        for (name, q) in &repr.coords {
            let k = basis.require(name)?;
            *coords.entry(k).or_insert_with(BigRational::zero) += parse_rational(q)?;
        }
        Ok(Self::from_coords(basis, coords))
    }
}

impl fmt::Debug for RealVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealVector({self})")
    }
}

impl fmt::Display for RealVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "0");
        }
        for (n, (&k, q)) in self.coords.iter().enumerate() {
            let name = self.basis.name(k);
            let mag = q.abs();
            if n == 0 {
                if q.is_negative() {
                    write!(f, "-")?;
                }
            } else if q.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if Some(k) == self.basis.unit_index() {
                write!(f, "{}", display_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{name}")?;
            } else if mag.numer().is_one() {
                write!(f, "{name}/{}", mag.denom())?;
            } else {
                write!(f, "{}*{name}", display_rational(&mag))?;
            }
        }
        Ok(())
    }
}

enum Value {
    Scalar(BigRational),
    Vector(RealVector),
}

impl Value {
    fn into_vector(self, basis: &Arc<SymbolBasis>) -> Result<RealVector, FieldError> {
        match self {
            Value::Vector(v) => Ok(v),
            Value::Scalar(q) if q.is_zero() => Ok(RealVector::zero(basis)),
            Value::Scalar(q) => RealVector::rational(basis, q),
        }
    }
}

struct Parser<'a> {
    basis: &'a Arc<SymbolBasis>,
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self) -> FieldError {
        FieldError::BadExpression(self.src.to_string())
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn add(&self, a: Value, b: Value) -> Result<Value, FieldError> {
        Ok(match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x + y),
            (a, b) => Value::Vector(
                a.into_vector(self.basis)?
                    .add(&b.into_vector(self.basis)?)?,
            ),
        })
    }

    fn mul(&self, a: Value, b: Value) -> Result<Value, FieldError> {
        Ok(match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x * y),
            (Value::Scalar(x), Value::Vector(v)) | (Value::Vector(v), Value::Scalar(x)) => {
                Value::Vector(v.scale(&x))
            }
            (Value::Vector(v), Value::Vector(w)) => Value::Vector(v.mul(&w)?),
        })
    }

    fn expr(&mut self) -> Result<Value, FieldError> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let rhs = if c == '-' {
                self.mul(Value::Scalar(-BigRational::one()), rhs)?
            } else {
                rhs
            };
            acc = self.add(acc, rhs)?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Value, FieldError> {
        let mut acc = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if c == '*' {
                self.mul(acc, rhs)?
            } else {
                match rhs {
                    Value::Scalar(q) if q.is_zero() => return Err(FieldError::DivisionByZero),
                    Value::Scalar(q) => self.mul(acc, Value::Scalar(q.recip()))?,
                    Value::Vector(v) => match v.as_rational() {
                        Some(q) if !q.is_zero() => self.mul(acc, Value::Scalar(q.recip()))?,
                        _ => return Err(self.err()),
                    },
                }
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Value, FieldError> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                let v = self.unary()?;
                self.mul(Value::Scalar(-BigRational::one()), v)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Value, FieldError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                let rest = &self.src[start..];
                let len = rest
                    .find(|c: char| !(c.is_ascii_digit() || c == '.'))
                    .unwrap_or(rest.len());
                self.pos += len;
                decimal(&rest[..len])
                    .map(Value::Scalar)
                    .ok_or_else(|| self.err())
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let rest = &self.src[self.pos..];
                let len = rest
                    .find(|c: char| !(c.is_alphanumeric() || c == '_'))
                    .unwrap_or(rest.len());
                self.pos += len;
                Ok(Value::Vector(RealVector::symbol(self.basis, &rest[..len])?))
            }
            _ => Err(self.err()),
        }
    }
}

fn decimal(s: &str) -> Option<BigRational> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() || frac.contains('.') {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realfield::rational::{int, ratio};
    use crate::realfield::Symbol;

    fn ctx() -> Arc<SymbolBasis> {
        Arc::new(
            SymbolBasis::new(vec![
                Symbol::new("1", 1.0),
                Symbol::new("theta", std::f64::consts::FRAC_1_SQRT_2),
                Symbol::new("sqrt2", std::f64::consts::SQRT_2),
                Symbol::new("sqrt3", 3f64.sqrt()),
            ])
            .unwrap()
            .with_product("sqrt2", "sqrt2", &[("1", int(2))])
            .unwrap(),
        )
    }

    #[test]
    fn add_cancels_and_canonicalizes() {
        let b = ctx();
        let r2 = RealVector::symbol(&b, "sqrt2").unwrap();
        assert!(r2.add(&r2.neg()).unwrap().is_zero());
        let x = RealVector::parse(&b, "1/2")
            .unwrap()
            .add(&RealVector::parse(&b, "1/3").unwrap())
            .unwrap();
        assert_eq!(x, RealVector::rational(&b, ratio(5, 6)).unwrap());
        let y = RealVector::parse(&b, "2*theta + 1")
            .unwrap()
            .add(&RealVector::parse(&b, "-theta").unwrap())
            .unwrap();
        assert_eq!(y, RealVector::parse(&b, "theta + 1").unwrap());
        assert_eq!(y.coords().len(), 2);
    }

    #[test]
    fn scale_examples() {
        let b = ctx();
        let t = RealVector::symbol(&b, "theta").unwrap();
        assert_eq!(t.scale(&int(3)), RealVector::parse(&b, "3*theta").unwrap());
        let v = RealVector::parse(&b, "2*theta + 4")
            .unwrap()
            .scale(&ratio(1, 2));
        assert_eq!(v, RealVector::parse(&b, "theta + 2").unwrap());
        assert!(t.scale(&int(0)).is_zero());
    }

    #[test]
    fn eval_examples() {
        let b = ctx();
        assert_eq!(RealVector::parse(&b, "1").unwrap().eval(), 1.0);
        assert_eq!(
            RealVector::symbol(&b, "theta").unwrap().eval(),
            std::f64::consts::FRAC_1_SQRT_2
        );
        let v = RealVector::parse(&b, "2*theta + 1").unwrap().eval();
        assert!((v - 2.414213562373095).abs() <= 1e-15);
    }

    #[test]
    fn mul_examples() {
        let b = ctx();
        let one = RealVector::parse(&b, "1").unwrap();
        let t = RealVector::symbol(&b, "theta").unwrap();
        assert_eq!(one.mul(&t).unwrap(), t);
        let r2 = RealVector::symbol(&b, "sqrt2").unwrap();
        assert_eq!(r2.mul(&r2).unwrap(), RealVector::parse(&b, "2").unwrap());
        let r3 = RealVector::symbol(&b, "sqrt3").unwrap();
        assert!(matches!(r2.mul(&r3), Err(FieldError::Unrepresentable(..))));
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let a = ctx();
        let b = Arc::new(SymbolBasis::new(vec![Symbol::new("1", 1.0)]).unwrap());
        let x = RealVector::parse(&a, "1").unwrap();
        let y = RealVector::parse(&b, "1").unwrap();
        assert_eq!(x.add(&y), Err(FieldError::BasisMismatch));
    }

    #[test]
    fn parse_and_display() {
        let b = ctx();
        let v = RealVector::parse(&b, "(1 + theta)/2").unwrap();
        assert_eq!(v.coord(0), ratio(1, 2));
        assert_eq!(v.coord(1), ratio(1, 2));
        assert_eq!(v.to_string(), "1/2 + theta/2");
        assert_eq!(
            RealVector::parse(&b, "0.3").unwrap().as_rational(),
            Some(ratio(3, 10))
        );
        assert_eq!(
            RealVector::parse(&b, "2*theta - 1").unwrap().to_string(),
            "-1 + 2*theta"
        );
        assert!(RealVector::parse(&b, "theta / theta").is_err());
        assert!(RealVector::parse(&b, "1/0").is_err());
        assert!(RealVector::parse(&b, "phi").is_err());
        assert!(RealVector::parse(&b, "1 +").is_err());
    }

    #[test]
    fn json_roundtrip() {
        let b = ctx();
        let v = RealVector::parse(&b, "3*theta - 7/4").unwrap();
        let js = v.to_json();
        assert_eq!(js["coords"]["theta"], "3/1");
        assert_eq!(js["coords"]["1"], "-7/4");
        assert_eq!(RealVector::from_json(&b, &js).unwrap(), v);
    }
}
