//! Simultaneous approximation: find `t` with `frac(lambda_j t)` near given
//! targets, honouring the integer relations among the frequencies.

use num_traits::ToPrimitive;
use serde::Serialize;

use super::ExponentError;
use crate::groups::FinGenSubgroup;
use crate::lattice::{babai, lll, to_original, LLL_DELTA};
use crate::realfield::RealVector;
use crate::torus::{circle_dist, frac, signed_offset};

/// Compatibility tolerance for targets against integer relations.
pub const TOL_COMPAT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

#[derive(Debug, Clone)]
pub struct KroneckerQuery {
    pub frequencies: Vec<RealVector>,
    pub targets: Vec<f64>,
    /// Extra relations `sum l_j lambda_j = 0` to check targets against; the
    /// exact relation lattice is always checked as well.
    pub relations: Vec<Vec<i64>>,
    pub epsilon: f64,
    /// Largest `|t|` searched.
    pub search_bound: f64,
    /// Smallest `|t|` accepted, in the chosen direction.
    pub t_min: f64,
    pub direction: Direction,
}

impl KroneckerQuery {
    pub fn new(
        frequencies: Vec<RealVector>,
        targets: Vec<f64>,
        epsilon: f64,
        search_bound: f64,
    ) -> Self {
        KroneckerQuery {
            frequencies,
            targets,
            relations: Vec::new(),
            epsilon,
            search_bound,
            t_min: 0.0,
            direction: Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KroneckerSolution {
    pub t: f64,
    /// `d_1(frac(lambda_j t), target_j)` per frequency, all below epsilon.
    pub residuals: Vec<f64>,
    pub method: &'static str,
}

fn residuals(freqs: &[f64], targets: &[f64], t: f64) -> Vec<f64> {
    freqs
        .iter()
        .zip(targets)
        .map(|(l, x)| circle_dist(frac(l * t), *x))
        .collect()
}

fn check_relation(rel: &[i64], targets: &[f64]) -> Result<(), ExponentError> {
    let s: f64 = rel.iter().zip(targets).map(|(&l, x)| l as f64 * x).sum();
    let residual = signed_offset(s, 0.0).abs();
    if residual > TOL_COMPAT {
        return Err(ExponentError::IncompatibleTargets {
            relation: rel.to_vec(),
            residual,
        });
    }
    Ok(())
}

/// Finds `t` in the requested direction with every residual below epsilon.
/// The answer is always re-verified against the original frequencies.
pub fn kronecker_solve(q: &KroneckerQuery) -> Result<KroneckerSolution, ExponentError> {
    assert_eq!(
        q.frequencies.len(),
        q.targets.len(),
        "one target per frequency"
    );
    let sign = match q.direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let targets: Vec<f64> = q.targets.iter().map(|&x| frac(sign * x)).collect();
    for rel in &q.relations {
        check_relation(rel, &targets)?;
    }
    let freqs: Vec<f64> = q.frequencies.iter().map(RealVector::eval).collect();
    let accept = |t: f64| -> bool {
        t >= q.t_min
            && t <= q.search_bound
            && residuals(&freqs, &targets, t)
                .iter()
                .all(|&r| r < q.epsilon)
    };
    let finish = |t: f64, method: &'static str| {
        let t = sign * t;
        KroneckerSolution {
            t,
            residuals: residuals(&freqs, &q.targets, t),
            method,
        }
    };
    if q.frequencies.is_empty() {
        return Ok(finish(q.t_min, "trivial"));
    }
    let ctx = q.frequencies[0].basis().clone();
    let group = FinGenSubgroup::new(&ctx, q.frequencies.clone())?;
    for rel in group.relations() {
        let rel: Vec<i64> = rel.iter().map(|v| v.to_i64().unwrap_or(i64::MAX)).collect();
        check_relation(&rel, &targets)?;
    }
    let r = group.torsion_free_rank();
    if r == 0 {
        return if accept(q.t_min) {
            Ok(finish(q.t_min, "trivial"))
        } else {
            Err(ExponentError::NotFound("no admissible time".into()))
        };
    }
    // targets for the independent basis: u = frac(U_top * xi)
    let form = group.normal_form();
    let u: Vec<f64> = form.u[..r]
        .iter()
        .map(|row| {
            frac(
                row.iter()
                    .zip(&targets)
                    .map(|(c, x)| c.to_f64().unwrap_or(0.0) * x)
                    .sum(),
            )
        })
        .collect();
    let mut weight = 0.0f64;
    for l in &q.frequencies {
        let c = group
            .basis_coefficients(l)?
            .expect("frequency lies in its own group");
        weight = weight.max(
            c.iter()
                .map(|v| v.to_f64().unwrap_or(f64::INFINITY).abs())
                .sum(),
        );
    }
    let delta = q.epsilon / (2.0 * weight.max(1.0));
    let betas: Vec<f64> = group.basis().iter().map(RealVector::eval).collect();
    let p = group
        .basis()
        .iter()
        .position(|b| b.as_rational().is_some())
        .unwrap_or_else(|| {
            (0..r)
                .max_by(|&a, &b| betas[a].abs().total_cmp(&betas[b].abs()))
                .expect("r >= 1")
        });
    if let Some(t) = solve_independent(&betas, &u, p, delta, q.t_min, q.search_bound, &accept) {
        return Ok(finish(t, if r == 1 { "exact" } else { "lattice" }));
    }
    // plain scan as a fallback for small ranges
    let fmax = freqs.iter().fold(0.0f64, |m, f| m.max(f.abs())).max(1e-300);
    let step = q.epsilon / (4.0 * fmax);
    let hi = q.search_bound.min(q.t_min + 5e6 * step);
    let mut t = q.t_min;
    while t <= hi {
        if accept(t) {
            return Ok(finish(t, "scan"));
        }
        t += step;
    }
    Err(ExponentError::NotFound(format!(
        "no t in [{}, {}] within {:.1e} of the targets",
        q.t_min, q.search_bound, q.epsilon
    )))
}

const MAX_WINDOWS: usize = 64;

/// Searches `t = (n + u_p) / beta_p` so that `frac(beta_m t)` is within
/// `delta` of `u_m` for every `m`.
fn solve_independent(
    betas: &[f64],
    u: &[f64],
    p: usize,
    delta: f64,
    t_min: f64,
    t_max: f64,
    accept: &dyn Fn(f64) -> bool,
) -> Option<f64> {
    let (mut b, mut up) = (betas[p], u[p]);
    if b < 0.0 {
        b = -b;
        up = frac(-up);
    }
    let n_start = (b * t_min - up).ceil();
    let time = |n: f64| (n + up) / b;
    let others: Vec<usize> = (0..betas.len()).filter(|&m| m != p).collect();
    if others.is_empty() {
        return (0..4)
            .map(|k| time(n_start + k as f64))
            .find(|&t| accept(t));
    }
    let d = others.len();
    let rho: Vec<f64> = others.iter().map(|&m| betas[m] / b).collect();
    let c: Vec<f64> = others
        .iter()
        .zip(&rho)
        .map(|(&m, r)| u[m] - r * up)
        .collect();
    let w_raw = (8.0 * delta.powi(-(d as i32)))
        .ceil()
        .clamp(64.0, 2f64.powi(40));
    let w = 2.0 * (w_raw / 2.0).ceil();
    let rows: Vec<Vec<f64>> = std::iter::once({
        let mut v = vec![2.0 / w];
        v.extend(rho.iter().map(|r| r / delta));
        v
    })
    .chain((0..d).map(|m| {
        let mut v = vec![0.0; d + 1];
        v[m + 1] = 1.0 / delta;
        v
    }))
    .collect();
    let red = lll(rows, LLL_DELTA);
    let reach: i128 = if d <= 2 { 2 } else { 1 };
    for win in 0..MAX_WINDOWS {
        let n_c = n_start + w / 2.0 + win as f64 * w;
        if time(n_c - w / 2.0) > t_max {
            break;
        }
        let mut target = vec![0.0];
        target.extend(
            c.iter()
                .zip(&rho)
                .map(|(cm, r)| signed_offset(cm - r * n_c, 0.0) / delta),
        );
        let base = babai(&red, &target);
        let mut best: Option<f64> = None;
        let dim = d + 1;
        let combos = (2 * reach + 1).pow(dim as u32);
        for code in 0..combos {
            let mut coef = base.clone();
            let mut x = code;
            for c in coef.iter_mut() {
                *c += (x % (2 * reach + 1)) - reach;
                x /= 2 * reach + 1;
            }
            let y = to_original(&red, &coef)[0] as f64;
            if y.abs() > w / 2.0 {
                continue;
            }
            let t = time(n_c + y);
            if accept(t) && best.is_none_or(|bt| t < bt) {
                best = Some(t);
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}
