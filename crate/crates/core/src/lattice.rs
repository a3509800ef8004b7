//! Floating-point LLL reduction with exact integer transforms, and Babai
//! rounding. Used for small dimensions only (at most a handful of rows).

pub const LLL_DELTA: f64 = 0.75;

/// Reduced rows together with the integer transform that produced them:
/// `rows[i] = sum_j transform[i][j] * original[j]`.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub rows: Vec<Vec<f64>>,
    pub transform: Vec<Vec<i128>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram_schmidt(rows: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let n = rows.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut norms = vec![0.0; n];
    for i in 0..n {
        let mut v = rows[i].clone();
        for j in 0..i {
            mu[i][j] = if norms[j] > 0.0 {
                dot(&rows[i], &star[j]) / norms[j]
            } else {
                0.0
            };
            for (x, s) in v.iter_mut().zip(&star[j]) {
                *x -= mu[i][j] * s;
            }
        }
        norms[i] = dot(&v, &v);
        star.push(v);
    }
    (star, mu, norms)
}

fn sub_row(red: &mut Reduced, k: usize, j: usize, r: f64) {
    let ri = r as i128;
    let (src, dst) = (red.rows[j].clone(), &mut red.rows[k]);
    for (x, s) in dst.iter_mut().zip(&src) {
        *x -= r * s;
    }
    let tsrc = red.transform[j].clone();
    for (x, s) in red.transform[k].iter_mut().zip(&tsrc) {
        *x -= ri * s;
    }
}

/// LLL-reduces linearly independent rows.
pub fn lll(rows: Vec<Vec<f64>>, delta: f64) -> Reduced {
    let n = rows.len();
    let mut red = Reduced {
        transform: (0..n)
            .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
            .collect(),
        rows,
    };
    if n < 2 {
        return red;
    }
    let (_, mut mu, mut norms) = gram_schmidt(&red.rows);
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        if guard > 100_000 {
            log::warn!("lll: iteration guard reached");
            break;
        }
        for j in (0..k).rev() {
            let r = mu[k][j].round();
            if r != 0.0 {
                sub_row(&mut red, k, j, r);
                for i in 0..j {
                    mu[k][i] -= r * mu[j][i];
                }
                mu[k][j] -= r;
            }
        }
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            red.rows.swap(k, k - 1);
            red.transform.swap(k, k - 1);
            let gs = gram_schmidt(&red.rows);
            mu = gs.1;
            norms = gs.2;
            k = (k - 1).max(1);
        }
    }
    red
}

/// Babai nearest-plane: integer coefficients `c` (over the reduced rows) with
/// `sum c_i rows[i]` close to `target`.
pub fn babai(red: &Reduced, target: &[f64]) -> Vec<i128> {
    let n = red.rows.len();
    let (star, _, norms) = gram_schmidt(&red.rows);
    let mut residual = target.to_vec();
    let mut coef = vec![0i128; n];
    for i in (0..n).rev() {
        if norms[i] == 0.0 {
            continue;
        }
        let c = (dot(&residual, &star[i]) / norms[i]).round();
        coef[i] = c as i128;
        for (x, b) in residual.iter_mut().zip(&red.rows[i]) {
            *x -= c * b;
        }
    }
    coef
}

/// Converts coefficients over the reduced rows into coefficients over the
/// original rows.
pub fn to_original(red: &Reduced, coef: &[i128]) -> Vec<i128> {
    let n = red.transform.first().map_or(0, Vec::len);
    let mut out = vec![0i128; n];
    for (c, row) in coef.iter().zip(&red.transform) {
        for (o, t) in out.iter_mut().zip(row) {
            *o += c * t;
        }
    }
    out
}

/// Looks for a small integer relation among `values` by reducing the
/// lattice spanned by `(e_i, W * values_i)`.
pub fn integer_relation(values: &[f64], bound: i64, tol: f64) -> Option<Vec<i64>> {
    let k = values.len();
    let weight = 1.0 / tol.max(1e-15);
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut r = vec![0.0; k + 1];
            r[i] = 1.0;
            r[k] = weight * values[i];
            r
        })
        .collect();
    let red = lll(rows, 0.99);
    red.transform.iter().find_map(|t| {
        if t.iter().all(|&c| c == 0) || t.iter().any(|&c| c.unsigned_abs() > bound as u128) {
            return None;
        }
        let s: f64 = t.iter().zip(values).map(|(&c, &v)| c as f64 * v).sum();
        if s.abs() > tol {
            return None;
        }
        let mut n: Vec<i64> = t.iter().map(|&c| c as i64).collect();
        if n.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0) {
            n.iter_mut().for_each(|c| *c = -*c);
        }
        Some(n)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_skewed_basis() {
        let rows = vec![vec![1.0, 0.0], vec![1000.0, 1.0]];
        let red = lll(rows.clone(), LLL_DELTA);
        for (r, t) in red.rows.iter().zip(&red.transform) {
            assert!(dot(r, r) <= 2.0);
            let rebuilt: Vec<f64> = (0..2)
                .map(|c| t[0] as f64 * rows[0][c] + t[1] as f64 * rows[1][c])
                .collect();
            assert_eq!(&rebuilt, r);
        }
    }

    #[test]
    fn babai_finds_nearby_point() {
        let rows = vec![vec![3.0, 1.0], vec![1.0, 2.0]];
        let red = lll(rows.clone(), LLL_DELTA);
        let c = to_original(&red, &babai(&red, &[10.2, 7.9]));
        let p: Vec<f64> = (0..2)
            .map(|k| c[0] as f64 * rows[0][k] + c[1] as f64 * rows[1][k])
            .collect();
        assert!(((p[0] - 10.2).powi(2) + (p[1] - 7.9).powi(2)).sqrt() < 2.5);
    }

    #[test]
    fn finds_planted_relation() {
        let a = 2f64.sqrt();
        let b = 5f64.sqrt();
        let vals = [1.0, a, b, 4.0 - 3.0 * a + 2.0 * b];
        let rel = integer_relation(&vals, 50, 1e-9).unwrap();
        let s: f64 = rel.iter().zip(&vals).map(|(&c, v)| c as f64 * v).sum();
        assert!(s.abs() < 1e-9);
        assert!(integer_relation(&[1.0, a, b, 3f64.sqrt()], 50, 1e-9).is_none());
    }
}
