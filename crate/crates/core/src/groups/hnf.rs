//! Row-style Hermite normal form over the integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

/// `u * a = h`, with `u` unimodular. The first `rank` rows of `h` are the
/// nonzero rows in echelon form; the remaining rows of `u` span the left
/// kernel of `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hnf {
    pub h: IntMatrix,
    pub u: IntMatrix,
    pub pivots: Vec<usize>,
}

impl Hnf {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn basis_rows(&self) -> &[Vec<BigInt>] {
        &self.h[..self.rank()]
    }

    pub fn kernel_rows(&self) -> &[Vec<BigInt>] {
        &self.u[self.rank()..]
    }

    /// Integer coefficients `c` over the basis rows with `c * H = x`, if any.
    pub fn solve(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        let mut residual = x.to_vec();
        let mut coef = Vec::with_capacity(self.rank());
        let mut col = 0;
        for (k, &p) in self.pivots.iter().enumerate() {
            if residual[col..p].iter().any(|v| !v.is_zero()) {
                return None;
            }
            let (c, rem) = residual[p].div_rem(&self.h[k][p]);
            if !rem.is_zero() {
                return None;
            }
            if !c.is_zero() {
                for (r, h) in residual.iter_mut().zip(&self.h[k]) {
                    *r -= &c * h;
                }
            }
            coef.push(c);
            col = p + 1;
        }
        residual.iter().all(Zero::is_zero).then_some(coef)
    }

    /// Coefficients over the original rows of `a` for a vector in the row lattice.
    pub fn solve_original(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        let c = self.solve(x)?;
        let m = self.u.len();
        let mut out = vec![BigInt::zero(); m];
        for (ck, urow) in c.iter().zip(&self.u) {
            for (o, u) in out.iter_mut().zip(urow) {
                *o += ck * u;
            }
        }
        Some(out)
    }
}

fn combine(m: &mut IntMatrix, p: usize, i: usize, x: &BigInt, y: &BigInt, s: &BigInt, t: &BigInt) {
    // row_p <- x*row_p + y*row_i ; row_i <- s*row_p + t*row_i
    let (rp, ri) = (m[p].clone(), m[i].clone());
    m[p] = rp.iter().zip(&ri).map(|(a, b)| x * a + y * b).collect();
    m[i] = rp.iter().zip(&ri).map(|(a, b)| s * a + t * b).collect();
}

fn axpy(m: &mut IntMatrix, dst: usize, q: &BigInt, src: usize) {
    let s = m[src].clone();
    for (d, v) in m[dst].iter_mut().zip(&s) {
        *d -= q * v;
    }
}

/// Computes the unique HNF: positive pivots, entries above each pivot in
/// `[0, pivot)`.
pub fn hnf(a: &[Vec<BigInt>]) -> Hnf {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut h: IntMatrix = a.to_vec();
    let mut u: IntMatrix = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut p = 0;
    for c in 0..n {
        if p == m {
            break;
        }
        let Some(first) = (p..m).find(|&i| !h[i][c].is_zero()) else {
            continue;
        };
        h.swap(p, first);
        u.swap(p, first);
        for i in p + 1..m {
            if h[i][c].is_zero() {
                continue;
            }
            let e = h[p][c].extended_gcd(&h[i][c]);
            let (g, x, y) = (e.gcd, e.x, e.y);
            let s = -(&h[i][c] / &g);
            let t = &h[p][c] / &g;
            combine(&mut h, p, i, &x, &y, &s, &t);
            combine(&mut u, p, i, &x, &y, &s, &t);
        }
        if h[p][c].is_negative() {
            h[p].iter_mut().for_each(|v| *v = -&*v);
            u[p].iter_mut().for_each(|v| *v = -&*v);
        }
        for i in 0..p {
            let q = h[i][c].div_floor(&h[p][c]);
            if !q.is_zero() {
                axpy(&mut h, i, &q, p);
                axpy(&mut u, i, &q, p);
            }
        }
        pivots.push(c);
        p += 1;
    }
    Hnf { h, u, pivots }
}
