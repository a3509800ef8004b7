//! Orbit evaluators: a map from time to a point of a metric space.

use crate::torus::{circle_dist, frac, torus_dist};

pub type Point = Vec<f64>;

pub trait Orbit: Send + Sync {
    fn eval(&self, t: f64) -> Point;
    fn distance(&self, a: &[f64], b: &[f64]) -> f64;
    fn base_time(&self) -> f64 {
        0.0
    }
    /// Semi-orbits are only defined for `t >= 0`.
    fn forward_only(&self) -> bool {
        false
    }
    fn describe(&self) -> String;
}

/// `t -> start + t * freqs` on the torus, with the max-of-circle metric.
#[derive(Debug, Clone)]
pub struct LinearTorusOrbit {
    pub start: Vec<f64>,
    pub freqs: Vec<f64>,
}

impl LinearTorusOrbit {
    pub fn new(start: Vec<f64>, freqs: Vec<f64>) -> Self {
        assert_eq!(start.len(), freqs.len());
        LinearTorusOrbit { start, freqs }
    }

    /// The periodic circle orbit `t -> frac(omega * t)`.
    pub fn circle(omega: f64) -> Self {
        Self::new(vec![0.0], vec![omega])
    }
}

impl Orbit for LinearTorusOrbit {
    fn eval(&self, t: f64) -> Point {
        self.start
            .iter()
            .zip(&self.freqs)
            .map(|(s, w)| frac(s + w * t))
            .collect()
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        torus_dist(a, b)
    }

    fn describe(&self) -> String {
        format!("linear torus flow, frequencies {:?}", self.freqs)
    }
}

/// The time-rescaled orbit `t -> f(a t)`.
pub struct Rescaled<'a> {
    pub inner: &'a dyn Orbit,
    pub a: f64,
}

impl Orbit for Rescaled<'_> {
    fn eval(&self, t: f64) -> Point {
        self.inner.eval(self.a * t)
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.inner.distance(a, b)
    }

    fn forward_only(&self) -> bool {
        self.inner.forward_only()
    }

    fn describe(&self) -> String {
        format!("{} rescaled by {}", self.inner.describe(), self.a)
    }
}

/// Restricts an orbit to nonnegative times.
pub struct Forward<'a>(pub &'a dyn Orbit);

impl Orbit for Forward<'_> {
    fn eval(&self, t: f64) -> Point {
        self.0.eval(t)
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.0.distance(a, b)
    }

    fn forward_only(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("forward semi-orbit of {}", self.0.describe())
    }
}

/// The planar curve accumulating on `(0, 1/2)`: on `[k, k+1]` the first
/// coordinate moves from `2^-k` to `2^-(k+1)` while the second sweeps
/// across `[0, 1]`, up on odd `k` and down on even `k`. Here `k` is the
/// greatest integer strictly below `t`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlanarAccumulation;

impl PlanarAccumulation {
    pub fn split(t: f64) -> (i64, f64) {
        let k = t.ceil() - 1.0;
        (k as i64, t - k)
    }
}

impl Orbit for PlanarAccumulation {
    fn eval(&self, t: f64) -> Point {
        let (k, d) = Self::split(t);
        let x = d * 0.5f64.powi((k + 1) as i32) + (1.0 - d) * 0.5f64.powi(k as i32);
        let y = if k.rem_euclid(2) == 1 { d } else { 1.0 - d };
        vec![x, y]
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    fn describe(&self) -> String {
        "planar curve accumulating on (0, 1/2)".into()
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Orbit on the cylinder `S^1 x (0, 1)` spiralling from the inner circle
/// (angular speed `beta`) to the outer one (angular speed `alpha`).
/// Points are `[angle, r]`; metric `max(d_1, |dr|)`.
#[derive(Debug, Clone, Copy)]
pub struct SpiralOrbit {
    pub alpha: f64,
    pub beta: f64,
}

impl SpiralOrbit {
    pub fn angle(&self, t: f64) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        frac(self.alpha * softplus(t) - self.beta * softplus(-t) + (self.beta - self.alpha) * ln2)
    }

    pub fn radius(t: f64) -> f64 {
        1.0 / (1.0 + (-t).exp())
    }

    /// Limit of the angle along returns `t -> +inf` with `alpha t` integral.
    pub fn outer_limit(&self) -> Point {
        vec![frac((self.beta - self.alpha) * std::f64::consts::LN_2), 1.0]
    }

    /// Limit along returns `t -> -inf` with `beta t` integral.
    pub fn inner_limit(&self) -> Point {
        vec![frac((self.beta - self.alpha) * std::f64::consts::LN_2), 0.0]
    }
}

impl Orbit for SpiralOrbit {
    fn eval(&self, t: f64) -> Point {
        vec![self.angle(t), Self::radius(t)]
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        circle_dist(a[0], b[0]).max((a[1] - b[1]).abs())
    }

    fn describe(&self) -> String {
        format!("spiral orbit, alpha = {}, beta = {}", self.alpha, self.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_values() {
        let f = PlanarAccumulation;
        assert_eq!(f.eval(0.5), vec![0.75, 0.5]);
        for n in 1..30 {
            let p = f.eval(n as f64 + 0.5);
            assert!(f.distance(&p, &[0.0, 0.5]) <= 0.5f64.powi(n - 1));
        }
        // continuity across integers
        for k in -3..6 {
            let t = k as f64;
            let l = f.eval(t - 1e-9);
            let r = f.eval(t + 1e-9);
            assert!(f.distance(&l, &r) < 1e-6, "jump at {t}");
        }
    }

    #[test]
    fn spiral_values() {
        let s = SpiralOrbit {
            alpha: 1.0,
            beta: 2f64.sqrt(),
        };
        assert_eq!(s.eval(0.0), vec![0.0, 0.5]);
        assert!(SpiralOrbit::radius(40.0) > 1.0 - 1e-15);
        assert!(SpiralOrbit::radius(-40.0) < 1e-15);
        assert!(softplus(800.0).is_finite());
        // integer times approach the outer limit
        let d = s.distance(&s.eval(30.0), &s.outer_limit());
        assert!(d < 1e-12);
    }

    #[test]
    fn rescaled_and_forward() {
        let f = LinearTorusOrbit::circle(1.0);
        let g = Rescaled { inner: &f, a: 2.0 };
        assert!((g.eval(0.3)[0] - 0.6).abs() < 1e-15);
        assert!(Forward(&f).forward_only());
    }
}
