//! A Denjoy homeomorphism: the rotation by `theta` with the orbit of `0`
//! blown up into intervals of length `l_n = c lambda^|n|`.
//!
//! Only the points `frac(n theta)` with `|n| <= N` receive an interval; the
//! lengths of the remaining ones sum to the reported tail bound, so every
//! identity below holds up to that bound.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::CircleError;
use crate::realfield::{rational::format_rational, rational::rational_to_f64, RealVector};
use crate::torus::frac;

/// Largest tolerated tail bound.
pub const TOL_DENJOY: f64 = 1e-6;
pub const MIN_TRUNCATION: usize = 10;

#[derive(Debug, Clone, Copy)]
struct Entry {
    n: i64,
    /// `frac(n theta)`.
    o: f64,
    /// Left end of `I_n`.
    a: f64,
    /// Length of `I_n`.
    len: f64,
}

#[derive(Debug, Clone)]
pub struct DenjoyMap {
    theta: RealVector,
    theta_value: f64,
    lambda: BigRational,
    truncation: usize,
    c: f64,
    tail: f64,
    /// Tracked orbit points sorted by `o`.
    entries: Vec<Entry>,
    /// `prefix[k]` is the sum of `l_n` over the first `k` entries.
    prefix: Vec<f64>,
    /// Sorted position of `n + N`.
    position: Vec<usize>,
}

pub fn build_denjoy(
    theta: &RealVector,
    lambda: &BigRational,
    truncation: usize,
) -> Result<DenjoyMap, CircleError> {
    if theta.as_rational().is_some() {
        return Err(CircleError::RationalTheta);
    }
    if *lambda <= BigRational::zero() || *lambda >= BigRational::one() {
        return Err(CircleError::BadParameter(format!(
            "lambda {} is not in (0, 1)",
            format_rational(lambda)
        )));
    }
    if truncation < MIN_TRUNCATION {
        return Err(CircleError::BadParameter(format!(
            "truncation {truncation} is below {MIN_TRUNCATION}"
        )));
    }
    let lam = rational_to_f64(lambda);
    let c = (1.0 - lam) / (1.0 + lam);
    let tail = 2.0 * c * lam.powi(truncation as i32 + 1) / (1.0 - lam);
    if tail > TOL_DENJOY {
        return Err(CircleError::Precision { tail });
    }
    let theta_value = frac(theta.eval());
    let n_max = truncation as i64;
    let mut entries: Vec<Entry> = (-n_max..=n_max)
        .map(|n| Entry {
            n,
            o: frac(n as f64 * theta_value),
            a: 0.0,
            len: c * lam.powi(n.unsigned_abs() as i32),
        })
        .collect();
    entries.sort_by(|p, q| p.o.total_cmp(&q.o));
    let mut prefix = vec![0.0];
    for e in &entries {
        prefix.push(prefix.last().expect("nonempty") + e.len);
    }
    let mut position = vec![0; entries.len()];
    for (k, e) in entries.iter_mut().enumerate() {
        e.a = (e.o * (1.0 + tail) + prefix[k]) / 2.0;
        e.len /= 2.0;
        position[(e.n + n_max) as usize] = k;
    }
    Ok(DenjoyMap {
        theta: theta.clone(),
        theta_value,
        lambda: lambda.clone(),
        truncation,
        c,
        tail,
        entries,
        prefix,
        position,
    })
}

impl DenjoyMap {
    pub fn theta(&self) -> &RealVector {
        &self.theta
    }

    /// `frac(eval(theta))`, the rotation number of the map.
    pub fn theta_value(&self) -> f64 {
        self.theta_value
    }

    pub fn lambda(&self) -> &BigRational {
        &self.lambda
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail
    }

    /// `l_n` before the rescaling onto the unit circle.
    pub fn length(&self, n: i64) -> f64 {
        self.c * rational_to_f64(&self.lambda).powi(n.unsigned_abs() as i32)
    }

    fn entry(&self, n: i64) -> Option<&Entry> {
        let n_max = self.truncation as i64;
        (n.abs() <= n_max).then(|| &self.entries[self.position[(n + n_max) as usize]])
    }

    /// The inserted interval `[a, b)` for `|n| <= N`.
    pub fn interval(&self, n: i64) -> Option<(f64, f64)> {
        self.entry(n).map(|e| (e.a, e.a + e.len))
    }

    /// Position of `y` on the enlarged circle, with the half-open convention
    /// that an orbit point maps to the left end of its interval.
    pub fn embed(&self, y: f64) -> f64 {
        let y = frac(y);
        let k = self.entries.partition_point(|e| e.o < y);
        (y * (1.0 + self.tail) + self.prefix[k]) / 2.0
    }

    /// The sorted index of the interval containing `x`, or of the interval
    /// whose right end starts the gap containing `x`.
    fn locate(&self, x: f64) -> usize {
        self.entries.partition_point(|e| e.a <= x).max(1) - 1
    }

    /// The collapse map: constant on every inserted interval, an affine
    /// bijection on the gaps.
    pub fn collapse(&self, x: f64) -> f64 {
        let x = frac(x);
        let e = &self.entries[self.locate(x)];
        let b = e.a + e.len;
        if x < b {
            e.o
        } else {
            frac(e.o + (x - b) * 2.0 / (1.0 + self.tail))
        }
    }

    fn in_shifted_arc(&self, y: f64) -> bool {
        let n_max = self.truncation as i64;
        let lo = self.entry(n_max).expect("tracked").o;
        let hi = frac(-(n_max + 1) as f64 * self.theta_value);
        if lo < hi {
            lo < y && y < hi
        } else {
            y > lo || y < hi
        }
    }

    /// The homeomorphism on the circle. `I_n` maps affinely onto `I_{n+1}`;
    /// `I_N` maps onto an interval of the same length at the image of
    /// `frac((N + 1) theta)`, and on the arc from there to the image of
    /// `frac(-(N + 1) theta)` the map is shifted by that length to stay
    /// continuous.
    pub fn map(&self, x: f64) -> f64 {
        let x = frac(x);
        let e = &self.entries[self.locate(x)];
        let n_max = self.truncation as i64;
        if x < e.a + e.len {
            if e.n < n_max {
                let next = self.entry(e.n + 1).expect("tracked");
                return frac(next.a + (x - e.a) * next.len / e.len);
            }
            return frac(self.embed(e.o + self.theta_value) + (x - e.a));
        }
        let y = self.collapse(x);
        let base = self.embed(y + self.theta_value);
        if self.in_shifted_arc(y) {
            frac(base + self.entry(n_max).expect("tracked").len)
        } else {
            base
        }
    }

    /// The lift with `F(0)` in `[0, 1)`: displacements lie strictly inside
    /// `(0, 1)` because the rotation number does.
    pub fn lift(&self, x: f64) -> f64 {
        let u = frac(x);
        let base = x - u;
        let mut d = frac(self.map(u) - u);
        if d == 0.0 {
            d = 1.0;
        }
        base + u + d
    }

    /// Iterates the truncated model by conjugation: `n` steps of the
    /// rotation on the collapsed circle, tracking the relative position
    /// inside an inserted interval while the index stays within `N`. This
    /// agrees with `map` iterated `n` times up to the tail scale.
    pub fn iterate(&self, x: f64, n: i64) -> f64 {
        let x = frac(x);
        let e = &self.entries[self.locate(x)];
        if x < e.a + e.len {
            if let Some(t) = self.entry(e.n + n) {
                return frac(t.a + (x - e.a) * t.len / e.len);
            }
            return self.embed(e.o + n as f64 * self.theta_value);
        }
        self.embed(self.collapse(x) + n as f64 * self.theta_value)
    }

    /// `f^n(0) = embed(frac(n theta))`.
    pub fn orbit_point(&self, n: i64) -> f64 {
        self.iterate(0.0, n)
    }

    /// `max_x d_1(h(f(x)), h(x) + theta)` over the given sample points.
    pub fn semiconjugacy_defect(&self, samples: &[f64]) -> f64 {
        samples
            .iter()
            .map(|&x| {
                crate::torus::circle_dist(
                    self.collapse(self.map(x)),
                    self.collapse(x) + self.theta_value,
                )
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "theta": self.theta.to_json(),
            "theta_value": self.theta_value,
            "lambda": format_rational(&self.lambda),
            "N": self.truncation,
            "tail_bound": self.tail,
            "intervals": self.entries.iter().map(|e| json!({"n": e.n, "orbit_point": e.o, "start": e.a, "length": e.len})).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::realfield::{rational::ratio, SymbolBasis};
    use crate::torus::circle_dist;

    fn denjoy(n: usize) -> DenjoyMap {
        let b = Arc::new(SymbolBasis::standard());
        build_denjoy(&RealVector::parse(&b, "sqrt2/2").unwrap(), &ratio(1, 2), n).unwrap()
    }

    #[test]
    fn parameters_are_checked() {
        let b = Arc::new(SymbolBasis::standard());
        let th = RealVector::parse(&b, "sqrt2/2").unwrap();
        assert!(matches!(
            build_denjoy(&RealVector::parse(&b, "1/3").unwrap(), &ratio(1, 2), 40),
            Err(CircleError::RationalTheta)
        ));
        assert!(build_denjoy(&th, &ratio(3, 2), 40).is_err());
        assert!(build_denjoy(&th, &ratio(1, 2), 5).is_err());
        assert!(matches!(
            build_denjoy(&th, &ratio(1, 2), 10),
            Err(CircleError::Precision { .. })
        ));
    }

    #[test]
    fn lengths_and_layout() {
        let d = denjoy(40);
        assert!((d.tail_bound() - (4.0 / 3.0) * 2f64.powi(-41)).abs() < 1e-25);
        assert_eq!(d.interval(0).unwrap(), (0.0, 1.0 / 6.0));
        assert_eq!(d.embed(0.0), 0.0);
        assert!((d.embed(1.0 - 1e-15) - 1.0).abs() < 1e-12);
        for w in d.entries.windows(2) {
            assert!(w[0].a + w[0].len < w[1].a);
        }
    }

    #[test]
    fn collapse_identifies_interval_ends() {
        let d = denjoy(40);
        let (a, b) = d.interval(0).unwrap();
        assert_eq!(d.collapse(a), d.collapse(b));
        let (a, b) = d.interval(-3).unwrap();
        assert_eq!(d.collapse(a), d.collapse(b));
        assert!((d.collapse(a) - frac(-3.0 * d.theta_value())).abs() < 1e-15);
    }

    #[test]
    fn intervals_map_to_intervals() {
        let d = denjoy(40);
        for n in -40..40 {
            let (a, b) = d.interval(n).unwrap();
            let (c, e) = d.interval(n + 1).unwrap();
            assert!(circle_dist(d.map(a), c) < 1e-15);
            assert!(circle_dist(d.map((a + b) / 2.0), (c + e) / 2.0) < 1e-15);
        }
    }

    #[test]
    fn semiconjugacy_and_monotone_lift() {
        let d = denjoy(40);
        let xs: Vec<f64> = (0..1000).map(|k| k as f64 / 1000.0 + 1e-4).collect();
        assert!(d.semiconjugacy_defect(&xs) < 1e-12);
        let mut prev = d.lift(0.0);
        for k in 1..=20000 {
            let v = d.lift(k as f64 / 20000.0);
            assert!(v > prev, "not increasing at {k}");
            prev = v;
        }
        assert!((d.lift(1.0) - d.lift(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iterate_matches_orbit() {
        let d = denjoy(40);
        let mut x = 0.0;
        for n in 1..=60 {
            x = d.map(x);
            // the two differ by the tail scale per step once the index leaves the tracked range
            assert!(circle_dist(x, d.orbit_point(n)) < 1e-10, "step {n}");
        }
        assert!(circle_dist(d.iterate(d.orbit_point(7), -7), 0.0) < 1e-15);
    }
}
