//! Circle and torus arithmetic on `[0, 1)` coordinates.

/// Fractional part in `[0, 1)`, correct for negative inputs.
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Quotient metric on the circle: `min(|a - b|, 1 - |a - b|)` after reduction.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = frac(a - b);
    d.min(1.0 - d)
}

/// Signed representative of `a - b` in `[-1/2, 1/2)`.
pub fn signed_offset(a: f64, b: f64) -> f64 {
    let d = frac(a - b + 0.5) - 0.5;
    if d < -0.5 {
        d + 1.0
    } else {
        d
    }
}

/// Max of circle distances over coordinates.
pub fn torus_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| circle_dist(*x, *y))
        .fold(0.0, f64::max)
}

/// Length of the shortest arc containing all points.
pub fn circle_spread(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mut v: Vec<f64> = values.iter().map(|&x| frac(x)).collect();
    v.sort_by(f64::total_cmp);
    let mut max_gap = v[0] + 1.0 - v[v.len() - 1];
    for w in v.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    (1.0 - max_gap).max(0.0)
}

/// Center of the shortest arc containing all points; with the spread this
/// is the numeric limit of a convergent circle sequence.
pub fn circle_center(values: &[f64]) -> f64 {
    match values.last() {
        None => 0.0,
        Some(&r) => {
            let offs: Vec<f64> = values.iter().map(|&x| signed_offset(x, r)).collect();
            let lo = offs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = offs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            frac(r + (lo + hi) / 2.0)
        }
    }
}

/// A group of nearby circle values.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub center: f64,
    pub spread: f64,
    pub members: usize,
}

/// Splits circle values at every gap of at least `gap_min`. Returns one
/// cluster when no such gap exists.
pub fn circle_clusters(values: &[f64], gap_min: f64) -> Vec<Cluster> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut v: Vec<f64> = values.iter().map(|&x| frac(x)).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    // gap after index i (wrapping)
    let gap = |i: usize| {
        if i + 1 < n {
            v[i + 1] - v[i]
        } else {
            v[0] + 1.0 - v[n - 1]
        }
    };
    let cuts: Vec<usize> = (0..n).filter(|&i| gap(i) >= gap_min).collect();
    if cuts.is_empty() {
        return vec![Cluster {
            center: circle_center(&v),
            spread: circle_spread(&v),
            members: n,
        }];
    }
    let mut out = Vec::new();
    for (k, &c) in cuts.iter().enumerate() {
        let next = cuts[(k + 1) % cuts.len()];
        let mut members = Vec::new();
        let mut i = (c + 1) % n;
        loop {
            members.push(v[i]);
            if i == next {
                break;
            }
            i = (i + 1) % n;
        }
        out.push(Cluster {
            center: circle_center(&members),
            spread: circle_spread(&members),
            members: members.len(),
        });
    }
    out.sort_by(|a, b| a.center.total_cmp(&b.center));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_handles_negatives() {
        assert_eq!(frac(-0.25), 0.75);
        assert_eq!(frac(3.5), 0.5);
        assert!(frac(-1e-20) < 1.0);
    }

    #[test]
    fn distances() {
        assert!((circle_dist(0.95, 0.05) - 0.1).abs() < 1e-12);
        assert!((signed_offset(0.05, 0.95) - 0.1).abs() < 1e-12);
        assert!((signed_offset(0.95, 0.05) + 0.1).abs() < 1e-12);
    }

    #[test]
    fn spread_and_center_across_zero() {
        let v = [0.98, 0.99, 0.01, 0.02];
        assert!((circle_spread(&v) - 0.04).abs() < 1e-12);
        assert!(circle_dist(circle_center(&v), 0.0) < 1e-12);
    }

    #[test]
    fn clusters_split_on_gaps() {
        let v = [0.25, 0.75, 0.2501, 0.7499, 0.25];
        let c = circle_clusters(&v, 0.1);
        assert_eq!(c.len(), 2);
        assert!((c[0].center - 0.25).abs() < 1e-3 && (c[1].center - 0.75).abs() < 1e-3);
        assert_eq!(c[0].members + c[1].members, 5);
        assert_eq!(circle_clusters(&[0.1, 0.12], 0.1).len(), 1);
    }
}
