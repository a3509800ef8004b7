//! Suspension flows of circle maps and their identification with linear
//! flows on the 2-torus.

use serde::{Deserialize, Serialize};

use super::{CircleLift, DenjoyMap};
use crate::exponents::{Orbit, Point};
use crate::torus::{circle_dist, frac};

/// A point `[s, x]` of the suspension, canonical when `s` is in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuspensionPoint {
    pub s: f64,
    pub x: f64,
}

impl SuspensionPoint {
    pub fn new(s: f64, x: f64) -> Self {
        SuspensionPoint { s, x }
    }
}

/// The canonical representative of `[s, x]`, using `[s + 1, x] = [s, f(x)]`.
pub fn normalize(lift: &CircleLift, s: f64, x: f64) -> SuspensionPoint {
    let k = s.floor();
    SuspensionPoint {
        s: frac(s),
        x: lift.iterate(x, k as i64),
    }
}

pub fn suspension_flow(lift: &CircleLift, t: f64, p: SuspensionPoint) -> SuspensionPoint {
    normalize(lift, t + p.s, p.x)
}

/// `[s, x] -> <frac(x + s theta), s>`, conjugating the suspension of the
/// rotation by `theta` to the linear flow with frequencies `(theta, 1)`.
pub fn mu_rotation(theta: f64, p: SuspensionPoint) -> [f64; 2] {
    [frac(p.x + p.s * theta), frac(p.s)]
}

/// `t -> frac(x + omega t)` coordinatewise.
pub fn linear_flow(omega: &[f64], t: f64, x: &[f64]) -> Vec<f64> {
    omega.iter().zip(x).map(|(w, c)| frac(c + w * t)).collect()
}

/// Collapse the fiber, apply `mu_rotation`, then translate so that `base`
/// goes to `<0, 0>`.
pub fn suspension_semiconjugacy(
    d: &DenjoyMap,
    p: SuspensionPoint,
    base: SuspensionPoint,
) -> [f64; 2] {
    let theta = d.theta_value();
    let m = mu_rotation(theta, SuspensionPoint::new(p.s, d.collapse(p.x)));
    let m0 = mu_rotation(theta, SuspensionPoint::new(base.s, d.collapse(base.x)));
    [frac(m[0] - m0[0]), frac(m[1] - m0[1])]
}

/// The suspension orbit `t -> sigma(t, base)` as points `[s, x]`.
///
/// The metric is the gluing-aware one: the distance from `[s, x]` to
/// `[s', x']` is the least of `max(|s - s''|, d_1(x, x''))` over the
/// representatives `(s'', x'')` in `(s', x')`, `(s' + 1, f^{-1}(x'))` and
/// `(s' - 1, f(x'))`.
#[derive(Debug, Clone)]
pub struct SuspensionOrbit {
    pub lift: CircleLift,
    pub base: SuspensionPoint,
}

impl SuspensionOrbit {
    pub fn new(lift: CircleLift, base: SuspensionPoint) -> Self {
        SuspensionOrbit { lift, base }
    }

    pub fn point(&self, t: f64) -> SuspensionPoint {
        suspension_flow(&self.lift, t, self.base)
    }
}

impl Orbit for SuspensionOrbit {
    fn eval(&self, t: f64) -> Point {
        let p = self.point(t);
        vec![p.s, p.x]
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let reps = [
            (b[0], b[1]),
            (b[0] + 1.0, self.lift.iterate(b[1], -1)),
            (b[0] - 1.0, self.lift.iterate(b[1], 1)),
        ];
        reps.iter()
            .map(|&(s, x)| (a[0] - s).abs().max(circle_dist(a[1], x)))
            .fold(f64::INFINITY, f64::min)
    }

    fn describe(&self) -> String {
        format!(
            "suspension of a {:?} circle map from [{}, {}]",
            self.lift.kind(),
            self.base.s,
            self.base.x
        )
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::circle::build_denjoy;
    use crate::realfield::{rational::ratio, RealVector, SymbolBasis};
    use crate::torus::torus_dist;

    #[test]
    fn flow_examples() {
        let th = 2f64.sqrt() / 2.0;
        let l = CircleLift::rotation(th);
        let p = SuspensionPoint::new(0.25, 0.4);
        assert_eq!(suspension_flow(&l, 0.0, p), p);
        assert_eq!(suspension_flow(&l, 0.5, p), SuspensionPoint::new(0.75, 0.4));
        let q = suspension_flow(&l, 1.0, SuspensionPoint::new(0.0, 0.4));
        assert_eq!(q.s, 0.0);
        assert!((q.x - frac(0.4 + th)).abs() < 1e-15);
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu_rotation(0.3, SuspensionPoint::new(0.0, 0.0)), [0.0, 0.0]);
        let m = mu_rotation(0.3, SuspensionPoint::new(0.5, 0.2));
        assert!((m[0] - 0.35).abs() < 1e-15 && m[1] == 0.5);
        let l = CircleLift::rotation(0.3);
        let lhs = mu_rotation(
            0.3,
            suspension_flow(&l, 1.0, SuspensionPoint::new(0.0, 0.2)),
        );
        let rhs = linear_flow(&[0.3, 1.0], 1.0, &[0.2, 0.0]);
        assert!(torus_dist(&lhs, &rhs) < 1e-15);
        assert!((lhs[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn denjoy_semiconjugacy_base_point_and_collapse() {
        let ctx = Arc::new(SymbolBasis::standard());
        let d = build_denjoy(
            &RealVector::parse(&ctx, "sqrt2/2").unwrap(),
            &ratio(1, 2),
            40,
        )
        .unwrap();
        let base = SuspensionPoint::new(0.0, 0.0);
        assert_eq!(suspension_semiconjugacy(&d, base, base), [0.0, 0.0]);
        let (a, b) = d.interval(2).unwrap();
        assert_eq!(
            suspension_semiconjugacy(&d, SuspensionPoint::new(0.0, a), base),
            suspension_semiconjugacy(&d, SuspensionPoint::new(0.0, b), base)
        );
    }

    #[test]
    fn gluing_metric() {
        let orbit = SuspensionOrbit::new(CircleLift::rotation(0.3), SuspensionPoint::new(0.0, 0.0));
        let a = orbit.eval(1.0 - 1e-9);
        let b = orbit.eval(1.0);
        assert!(orbit.distance(&a, &b) < 1e-8);
        assert!(orbit.distance(&b, &a) < 1e-8);
    }
}
