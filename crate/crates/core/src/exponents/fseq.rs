//! f-sequences: times along which an orbit converges.

use serde::Serialize;

use super::orbit::{Orbit, Point};

/// Default Cauchy tolerance for sequences produced by the search.
pub const TOL_ORBIT: f64 = 1e-6;
/// `|t|` beyond which a sequence counts as unbounded.
pub const UNBOUNDED_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct FSequence {
    pub label: String,
    pub times: Vec<f64>,
    pub target: Point,
    /// `d(f(t_i), target)` as measured at construction.
    pub cauchy_profile: Vec<f64>,
    /// Declared per-term bounds on `d(f(t_i), target)`, nonincreasing.
    pub bounds: Vec<f64>,
    pub unbounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyCheck {
    pub passed: bool,
    pub tail_len: usize,
    pub tail_diameter: f64,
    pub worst_excess: f64,
    pub detail: String,
}

/// Number of trailing terms treated as the tail.
pub fn tail_len(n: usize) -> usize {
    n.min(4.max(n / 2))
}

/// Suffix maxima: the tightest nonincreasing envelope above `profile`.
pub fn envelope(profile: &[f64]) -> Vec<f64> {
    let mut out = profile.to_vec();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = out[i].max(out[i + 1]);
    }
    out
}

impl FSequence {
    /// Measures the profile; without declared bounds the envelope of the
    /// measured profile is used.
    pub fn new(
        orbit: &dyn Orbit,
        label: impl Into<String>,
        times: Vec<f64>,
        target: Point,
        bounds: Option<Vec<f64>>,
    ) -> Self {
        let cauchy_profile: Vec<f64> = times
            .iter()
            .map(|&t| orbit.distance(&orbit.eval(t), &target))
            .collect();
        let bounds = bounds.unwrap_or_else(|| envelope(&cauchy_profile));
        assert_eq!(bounds.len(), times.len());
        let tail = &times[times.len() - tail_len(times.len())..];
        let growing = tail.windows(2).all(|w| w[1].abs() > w[0].abs());
        let unbounded = growing && tail.last().is_some_and(|t| t.abs() > UNBOUNDED_THRESHOLD);
        FSequence {
            label: label.into(),
            times,
            target,
            cauchy_profile,
            bounds,
            unbounded,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn tail_times(&self) -> &[f64] {
        &self.times[self.times.len() - tail_len(self.times.len())..]
    }

    /// Re-evaluates the orbit and checks the sequence converges: every term
    /// within its declared bound, bounds nonincreasing, and the tail's
    /// orbit diameter at most `tol`.
    pub fn cauchy_check(&self, orbit: &dyn Orbit, tol: f64) -> CauchyCheck {
        let n = self.times.len();
        let k = tail_len(n);
        if n < 2 {
            return CauchyCheck {
                passed: false,
                tail_len: k,
                tail_diameter: f64::NAN,
                worst_excess: f64::NAN,
                detail: "fewer than two terms".into(),
            };
        }
        let points: Vec<Point> = self.times.iter().map(|&t| orbit.eval(t)).collect();
        let mut worst_excess = f64::NEG_INFINITY;
        let mut worst_at = 0;
        for (i, (p, b)) in points.iter().zip(&self.bounds).enumerate() {
            let excess = orbit.distance(p, &self.target) - (b * (1.0 + 1e-9) + 1e-12);
            if excess > worst_excess {
                worst_excess = excess;
                worst_at = i;
            }
        }
        let monotone = self.bounds.windows(2).all(|w| w[1] <= w[0]);
        let tail = &points[n - k..];
        let mut diameter = 0.0f64;
        for i in 0..tail.len() {
            for j in i + 1..tail.len() {
                diameter = diameter.max(orbit.distance(&tail[i], &tail[j]));
            }
        }
        let passed = worst_excess <= 0.0 && monotone && diameter <= tol;
        let detail = if passed {
            format!("tail diameter {diameter:.3e} <= {tol:.1e}")
        } else if worst_excess > 0.0 {
            format!("term {worst_at} exceeds its bound by {worst_excess:.3e}")
        } else if !monotone {
            "declared bounds are not nonincreasing".into()
        } else {
            format!("tail diameter {diameter:.3e} > {tol:.1e}")
        };
        CauchyCheck {
            passed,
            tail_len: k,
            tail_diameter: diameter,
            worst_excess,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub t_min: f64,
    pub grid: f64,
    pub tol_orbit: f64,
    /// Minimum number of terms per returned sequence.
    pub min_terms: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            t_min: 0.0,
            grid: 0.01,
            tol_orbit: TOL_ORBIT,
            min_terms: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub sequences: Vec<FSequence>,
    /// Fewer than the requested number of sequences met the tolerance.
    pub none_found: bool,
    pub near_returns: usize,
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Scans `(t_min, t_max]` on a uniform grid for near-returns to `target`,
/// refines each local minimum, keeps the nonincreasing record sequence and
/// deals it into `count` interleaved subsequences.
pub fn find_f_sequences(
    orbit: &dyn Orbit,
    target: &[f64],
    count: usize,
    t_max: f64,
    cfg: &SearchConfig,
) -> SearchResult {
    assert!(count >= 1, "count must be positive");
    let dist = |t: f64| orbit.distance(&orbit.eval(t), target);
    let steps = ((t_max - cfg.t_min) / cfg.grid).floor() as usize;
    let ts: Vec<f64> = (1..=steps)
        .map(|k| cfg.t_min + k as f64 * cfg.grid)
        .collect();
    let ds: Vec<f64> = ts.iter().map(|&t| dist(t)).collect();
    let mut minima = Vec::new();
    for k in 1..ts.len().saturating_sub(1) {
        if ds[k] <= ds[k - 1] && ds[k] < ds[k + 1] {
            let t = golden_min(dist, ts[k - 1], ts[k + 1]);
            let d = dist(t);
            let (t, d) = if d <= ds[k] { (t, d) } else { (ts[k], ds[k]) };
            minima.push((t, d));
        }
    }
    let near_returns = minima.len();
    let slack = cfg.tol_orbit * 1e-3;
    let mut record = f64::INFINITY;
    let mut master = Vec::new();
    for (t, d) in minima {
        if d <= record + slack {
            master.push(t);
            record = record.min(d);
        }
    }
    let mut sequences = Vec::new();
    for j in 0..count {
        let times: Vec<f64> = master.iter().skip(j).step_by(count).copied().collect();
        if times.len() < cfg.min_terms {
            continue;
        }
        let s = FSequence::new(
            orbit,
            format!("search {}/{}", j + 1, count),
            times,
            target.to_vec(),
            None,
        );
        let k = tail_len(s.len());
        let tail_max = s.cauchy_profile[s.len() - k..]
            .iter()
            .copied()
            .fold(0.0, f64::max);
        if tail_max <= cfg.tol_orbit {
            sequences.push(s);
        }
    }
    if sequences.len() < count {
        log::info!(
            "find_f_sequences: {} of {count} sequences met tol {:.1e}",
            sequences.len(),
            cfg.tol_orbit
        );
    }
    SearchResult {
        none_found: sequences.len() < count,
        sequences,
        near_returns,
    }
}
