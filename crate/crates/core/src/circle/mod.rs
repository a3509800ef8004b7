//! Orientation-preserving circle maps given by lifts, rotation numbers, the
//! Denjoy construction and suspension flows.

pub mod denjoy;
pub mod expr;
pub mod suspension;

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::realfield::{rational::parse_rational, FieldError, RealVector, SymbolBasis};
use crate::torus::frac;

pub use denjoy::{build_denjoy, DenjoyMap, TOL_DENJOY};
pub use expr::Expr;
pub use suspension::{
    linear_flow, mu_rotation, normalize, suspension_flow, suspension_semiconjugacy,
    SuspensionOrbit, SuspensionPoint,
};

/// Tolerance for `F(x + 1) = F(x) + 1` on the sample grid.
pub const TOL_DEGREE: f64 = 1e-9;
/// Sample grid size for lift validation.
pub const VALIDATION_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircleError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("theta is rational")]
    RationalTheta,
    #[error("truncation tail {tail:.3e} exceeds the precision budget")]
    Precision { tail: f64 },
    #[error("{0}")]
    BadParameter(String),
    #[error("lift is not strictly increasing near x = {x}")]
    NotMonotone { x: f64 },
    #[error("F(x + 1) - F(x) - 1 = {defect:.3e} at x = {x}")]
    NotDegreeOne { x: f64, defect: f64 },
    #[error("bad expression: {0}")]
    Expr(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LiftKind {
    ClosedForm,
    Denjoy,
    Sampled,
}

#[derive(Debug, Clone)]
enum Repr {
    Rotation(f64),
    Expr {
        expr: Expr,
        source: String,
        shift: f64,
    },
    Denjoy(Arc<DenjoyMap>),
    /// Knots `(x, F(x))` with `x` strictly increasing in `[0, 1)`.
    Sampled(Vec<(f64, f64)>),
}

/// A lift `F: R -> R` of a circle map, normalized so that `F(0)` is in `[0, 1)`.
#[derive(Debug, Clone)]
pub struct CircleLift {
    repr: Repr,
}

impl CircleLift {
    /// `F(x) = x + frac(theta)`.
    pub fn rotation(theta: f64) -> Self {
        CircleLift {
            repr: Repr::Rotation(frac(theta)),
        }
    }

    pub fn closed_form(source: &str) -> Result<Self, CircleError> {
        let expr = Expr::parse(source)?;
        let shift = -expr.eval(0.0).floor();
        if !shift.is_finite() {
            return Err(CircleError::Expr("F(0) is not finite".into()));
        }
        Ok(CircleLift {
            repr: Repr::Expr {
                expr,
                source: source.to_string(),
                shift,
            },
        })
    }

    pub fn denjoy(map: Arc<DenjoyMap>) -> Self {
        CircleLift {
            repr: Repr::Denjoy(map),
        }
    }

    /// Piecewise-linear interpolation of knots `(x, F(x))`, extended by
    /// `F(x + 1) = F(x) + 1`.
    pub fn sampled(mut knots: Vec<(f64, f64)>) -> Result<Self, CircleError> {
        if knots.len() < 2 {
            return Err(CircleError::BadParameter("need at least two knots".into()));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots
            .iter()
            .any(|k| !(0.0..1.0).contains(&k.0) || !k.1.is_finite())
        {
            return Err(CircleError::BadParameter(
                "knot abscissae must lie in [0, 1)".into(),
            ));
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(CircleError::BadParameter("duplicate knot".into()));
            }
            if w[1].1 <= w[0].1 {
                return Err(CircleError::NotMonotone { x: w[1].0 });
            }
        }
        let (first, last) = (knots[0], knots[knots.len() - 1]);
        if first.1 + 1.0 <= last.1 {
            return Err(CircleError::NotMonotone { x: last.0 });
        }
        let mut lift = CircleLift {
            repr: Repr::Sampled(knots),
        };
        let shift = lift.eval(0.0).floor();
        if let Repr::Sampled(k) = &mut lift.repr {
            for p in k.iter_mut() {
                p.1 -= shift;
            }
        }
        Ok(lift)
    }

    pub fn kind(&self) -> LiftKind {
        match self.repr {
            Repr::Rotation(_) | Repr::Expr { .. } => LiftKind::ClosedForm,
            Repr::Denjoy(_) => LiftKind::Denjoy,
            Repr::Sampled(_) => LiftKind::Sampled,
        }
    }

    pub fn as_denjoy(&self) -> Option<&Arc<DenjoyMap>> {
        match &self.repr {
            Repr::Denjoy(d) => Some(d),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Rotation(t) => x + t,
            Repr::Expr { expr, shift, .. } => expr.eval(x) + shift,
            Repr::Denjoy(d) => d.lift(x),
            Repr::Sampled(k) => {
                let u = frac(x);
                let base = x - u;
                let n = k.len();
                let (p, q) = if u < k[0].0 {
                    ((k[n - 1].0 - 1.0, k[n - 1].1 - 1.0), k[0])
                } else {
                    let i = k.partition_point(|p| p.0 <= u) - 1;
                    (
                        k[i],
                        if i + 1 < n {
                            k[i + 1]
                        } else {
                            (k[0].0 + 1.0, k[0].1 + 1.0)
                        },
                    )
                };
                base + p.1 + (u - p.0) * (q.1 - p.1) / (q.0 - p.0)
            }
        }
    }

    /// The circle map `frac(F(x))`.
    pub fn map(&self, x: f64) -> f64 {
        frac(self.eval(x))
    }

    /// Solves `F(x) = y` by bisection.
    pub fn inverse(&self, y: f64) -> f64 {
        if let Repr::Rotation(t) = self.repr {
            return y - t;
        }
        let f0 = self.eval(0.0);
        let (mut lo, mut hi) = (y - f0 - 1.0, y - f0 + 1.0);
        while self.eval(lo) > y {
            lo -= 1.0;
        }
        while self.eval(hi) < y {
            hi += 1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The circle map iterated `n` times (its inverse for `n < 0`). Rotations
    /// and Denjoy maps use closed forms; other lifts step, so the cost grows
    /// with `|n|`.
    pub fn iterate(&self, x: f64, n: i64) -> f64 {
        match &self.repr {
            Repr::Rotation(t) => frac(x + n as f64 * t),
            Repr::Denjoy(d) => d.iterate(x, n),
            _ => {
                let mut x = frac(x);
                for _ in 0..n.unsigned_abs() {
                    x = frac(if n > 0 { self.eval(x) } else { self.inverse(x) });
                }
                x
            }
        }
    }

    /// Checks degree one and strict monotonicity on a uniform grid.
    pub fn validate(&self) -> Result<(), CircleError> {
        let mut prev = self.eval(0.0);
        for k in 1..=VALIDATION_SAMPLES {
            let x = k as f64 / VALIDATION_SAMPLES as f64;
            let v = self.eval(x);
            if v.is_nan() || v <= prev {
                return Err(CircleError::NotMonotone { x });
            }
            prev = v;
            let defect = self.eval(x - 1.0) + 1.0 - v;
            if defect.abs() > TOL_DEGREE {
                return Err(CircleError::NotDegreeOne { x: x - 1.0, defect });
            }
        }
        Ok(())
    }

    /// Reads `{"kind": "rotation", "theta": ...}`, `{"kind": "closed_form",
    /// "expr": ...}`, `{"kind": "sampled", "knots": [[x, F], ...]}` or
    /// `{"kind": "denjoy", "theta": ..., "lambda": ..., "N": ...}`. Real
    /// parameters are numbers or expressions over the standard basis.
    pub fn from_json(v: &Value) -> Result<Self, CircleError> {
        let bad = |m: &str| CircleError::BadParameter(m.to_string());
        let ctx = Arc::new(SymbolBasis::standard());
        let real = |key: &str| -> Result<RealVector, CircleError> {
            match v.get(key) {
                Some(Value::String(s)) => Ok(RealVector::parse(&ctx, s)?),
                Some(Value::Number(n)) => Ok(RealVector::parse(&ctx, &n.to_string())?),
                _ => Err(bad(&format!("missing {key}"))),
            }
        };
        match v.get("kind").and_then(Value::as_str) {
            Some("rotation") => Ok(Self::rotation(real("theta")?.eval())),
            Some("closed_form") => Self::closed_form(
                v.get("expr")
                    .and_then(Value::as_str)
                    .ok_or_else(|| bad("missing expr"))?,
            ),
            Some("sampled") => {
                let knots: Vec<(f64, f64)> = serde_json::from_value(
                    v.get("knots")
                        .cloned()
                        .ok_or_else(|| bad("missing knots"))?,
                )
                .map_err(|e| bad(&e.to_string()))?;
                Self::sampled(knots)
            }
            Some("denjoy") => {
                let lambda = match v.get("lambda") {
                    Some(Value::String(s)) => parse_rational(s)?,
                    Some(Value::Number(n)) => parse_rational(&n.to_string())?,
                    _ => parse_rational("1/2")?,
                };
                let n = v.get("N").and_then(Value::as_u64).unwrap_or(40) as usize;
                Ok(Self::denjoy(Arc::new(build_denjoy(
                    &real("theta")?,
                    &lambda,
                    n,
                )?)))
            }
            _ => Err(bad("kind must be rotation, closed_form, sampled or denjoy")),
        }
    }

    pub fn to_json(&self) -> Value {
        match &self.repr {
            Repr::Rotation(t) => json!({"kind": "rotation", "theta": t}),
            Repr::Expr { source, shift, .. } => {
                json!({"kind": "closed_form", "expr": source, "shift": shift})
            }
            Repr::Denjoy(d) => {
                json!({"kind": "denjoy", "theta": d.theta().to_string(), "lambda": crate::realfield::rational::format_rational(d.lambda()), "N": d.truncation()})
            }
            Repr::Sampled(k) => json!({"kind": "sampled", "knots": k}),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationEstimate {
    pub estimate: f64,
    pub error_bound: f64,
}

/// `(F^n(x0) - x0) / n` with error bound `2 / n`. The integer part of the
/// orbit is carried separately so the fractional part keeps full precision.
pub fn rotation_number(
    lift: &CircleLift,
    x0: f64,
    n: u64,
) -> Result<RotationEstimate, CircleError> {
    if n == 0 {
        return Err(CircleError::BadParameter("n must be positive".into()));
    }
    lift.validate()?;
    let error_bound = 2.0 / n as f64;
    if let Repr::Rotation(t) = lift.repr {
        return Ok(RotationEstimate {
            estimate: t,
            error_bound,
        });
    }
    let mut carry = x0.floor();
    let mut u = x0 - carry;
    for _ in 0..n {
        let v = lift.eval(u);
        let k = v.floor();
        carry += k;
        u = v - k;
    }
    Ok(RotationEstimate {
        estimate: (carry - x0.floor() + (u - frac(x0))) / n as f64,
        error_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realfield::rational::ratio;

    #[test]
    fn rigid_rotation_is_exact() {
        let r = rotation_number(&CircleLift::rotation(0.25), 0.3, 100).unwrap();
        assert_eq!(r.estimate, 0.25);
        let th = 2f64.sqrt() / 2.0;
        let r = rotation_number(&CircleLift::rotation(th), 0.0, 100_000).unwrap();
        assert!((r.estimate - th).abs() < 1e-12);
        let e = rotation_number(&CircleLift::closed_form("x + 0.25").unwrap(), 0.0, 100).unwrap();
        assert_eq!(e.estimate, 0.25);
    }

    #[test]
    fn normalization() {
        let l = CircleLift::closed_form("x + 2.75").unwrap();
        assert_eq!(l.eval(0.0), 0.75);
        let l = CircleLift::sampled(vec![(0.0, -0.5), (0.5, 0.25)]).unwrap();
        assert_eq!(l.eval(0.0), 0.5);
        assert_eq!(l.eval(1.0), 1.5);
        assert!(l.validate().is_ok());
    }

    #[test]
    fn non_monotone_lift_is_rejected() {
        let l = CircleLift::closed_form("x + 0.3*sin(2*pi*x)").unwrap();
        assert!(matches!(
            rotation_number(&l, 0.0, 10),
            Err(CircleError::NotMonotone { .. })
        ));
        let l = CircleLift::closed_form("2*x").unwrap();
        assert!(matches!(
            l.validate(),
            Err(CircleError::NotDegreeOne { .. })
        ));
    }

    #[test]
    fn perturbed_rotation_and_inverse() {
        let l = CircleLift::closed_form("x + 0.3 + 0.1*sin(2*pi*x)/(2*pi)").unwrap();
        let r = rotation_number(&l, 0.0, 1000).unwrap();
        let r2 = rotation_number(&l, 0.0, 2000).unwrap();
        assert!((r.estimate - r2.estimate).abs() <= 3.0 / 1000.0);
        for k in 0..20 {
            let x = k as f64 / 7.0 - 1.0;
            assert!((l.inverse(l.eval(x)) - x).abs() < 1e-12);
        }
        assert!((l.iterate(l.iterate(0.3, 5), -5) - 0.3).abs() < 1e-9);
    }

    #[test]
    fn denjoy_rotation_number() {
        let ctx = Arc::new(SymbolBasis::standard());
        let d = build_denjoy(
            &RealVector::parse(&ctx, "sqrt2/2").unwrap(),
            &ratio(1, 2),
            40,
        )
        .unwrap();
        let l = CircleLift::denjoy(Arc::new(d));
        let th = 2f64.sqrt() / 2.0;
        for n in [100, 1000, 10_000] {
            let r = rotation_number(&l, 0.0, n).unwrap();
            assert!(
                (r.estimate - th).abs() <= r.error_bound,
                "n = {n}: {}",
                r.estimate
            );
        }
    }

    #[test]
    fn json_specs() {
        let l = CircleLift::from_json(&json!({"kind": "rotation", "theta": "sqrt2/2"})).unwrap();
        assert!((l.eval(0.0) - 2f64.sqrt() / 2.0).abs() < 1e-15);
        let l =
            CircleLift::from_json(&json!({"kind": "sampled", "knots": [[0.0, 0.1], [0.5, 0.7]]}))
                .unwrap();
        assert_eq!(l.kind(), LiftKind::Sampled);
        let l = CircleLift::from_json(
            &json!({"kind": "denjoy", "theta": "sqrt2/2", "lambda": "1/2", "N": 40}),
        )
        .unwrap();
        assert_eq!(l.kind(), LiftKind::Denjoy);
        assert!(CircleLift::from_json(&json!({"kind": "spline"})).is_err());
    }
}
