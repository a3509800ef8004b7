//! Sampled search for epsilon-almost periods.

use serde::Serialize;

use super::orbit::{Orbit, Point};

#[derive(Debug, Clone, Serialize)]
pub struct AlmostPeriodReport {
    pub epsilon: f64,
    pub taus: Vec<f64>,
    /// Largest gap between consecutive elements of `{0} + taus`, including
    /// the trailing gap up to `t_max`.
    pub max_gap: f64,
    /// The relative-density length, when the scan window covers it at least
    /// four times over.
    pub relatively_dense_at: Option<f64>,
}

/// Grid points `tau` in `(0, t_max]` with `sup_t d(f(t), f(t + tau)) <= epsilon`,
/// the sup taken over the grid on `[0, t_max]`.
pub fn scan_almost_periods(
    orbit: &dyn Orbit,
    epsilon: f64,
    t_max: f64,
    grid: f64,
) -> AlmostPeriodReport {
    assert!(grid > 0.0, "grid must be positive");
    let n = (t_max / grid).floor() as usize;
    let samples: Vec<Point> = (0..=2 * n).map(|k| orbit.eval(k as f64 * grid)).collect();
    let mut taus = Vec::new();
    for j in 1..=n {
        let ok = (0..=n).all(|k| orbit.distance(&samples[k], &samples[k + j]) <= epsilon);
        if ok {
            taus.push(j as f64 * grid);
        }
    }
    let mut max_gap = 0.0f64;
    let mut prev = 0.0;
    for &t in &taus {
        max_gap = max_gap.max(t - prev);
        prev = t;
    }
    let trailing = t_max - prev;
    let relatively_dense_at =
        (!taus.is_empty() && trailing <= max_gap && max_gap <= t_max / 4.0).then_some(max_gap);
    max_gap = max_gap.max(trailing);
    AlmostPeriodReport {
        epsilon,
        taus,
        max_gap,
        relatively_dense_at,
    }
}
