//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num::{BigInt, BigRational, FromPrimitive, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

/// `H^k` of a simplex from the Cayley–Menger determinant, evaluated in exact
/// rational arithmetic on the (exactly representable) input coordinates.
pub fn cayley_menger_volume(vertices: &[Vec<f64>]) -> f64 {
    let k = vertices.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let q: Vec<Vec<BigRational>> = vertices
        .iter()
        .map(|v| v.iter().map(|&c| BigRational::from_f64(c).unwrap()).collect())
        .collect();
    let size = k + 2;
    let mut a = vec![vec![BigRational::zero(); size]; size];
    for i in 1..size {
        a[0][i] = BigRational::from_integer(BigInt::from(1));
        a[i][0] = BigRational::from_integer(BigInt::from(1));
    }
    for i in 0..=k {
        for j in 0..=k {
            let mut s = BigRational::zero();
            for (x, y) in q[i].iter().zip(&q[j]) {
                let d = x - y;
                s += &d * &d;
            }
            a[i + 1][j + 1] = s;
        }
    }
    let det = determinant(a);
    // H^k² = (−1)^{k+1} det / (2^k (k!)²)
    let mut scale = BigRational::from_integer(BigInt::from(2).pow(k as u32));
    let fact: BigInt = (1..=k as u64).map(BigInt::from).product();
    scale *= BigRational::from_integer(&fact * &fact);
    let mut v2 = det / scale;
    if k % 2 == 0 {
        v2 = -v2;
    }
    if v2.is_negative() {
        return 0.0;
    }
    v2.to_f64().unwrap().sqrt()
}

fn determinant(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::from_integer(BigInt::from(1));
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col].clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            for c in col..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    det
}

/// Minimax line through the origin by scanning 10⁴ normal angles in
/// `[0, π)` and refining the best bracket by golden-section search.
pub fn rotation_grid_beta(pts: &[[f64; 2]]) -> f64 {
    let f = |a: f64| {
        let (s, c) = a.sin_cos();
        pts.iter()
            .map(|p| (p[0] * c + p[1] * s).abs())
            .fold(0.0, f64::max)
    };
    let steps = 10_000;
    let h = std::f64::consts::PI / steps as f64;
    let (mut best_k, mut best) = (0, f64::INFINITY);
    for k in 0..steps {
        let v = f(k as f64 * h);
        if v < best {
            (best_k, best) = (k, v);
        }
    }
    let (mut lo, mut hi) = ((best_k as f64 - 1.0) * h, (best_k as f64 + 1.0) * h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    best.min(f(0.5 * (lo + hi)))
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let len = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if len > 1e-9 {
            return v.into_iter().map(|c| c / len).collect();
        }
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Distance from `p` to the affine hull of `others`, via the least-squares
/// normal equations.
pub fn dist_to_hull_lsq(p: &[f64], others: &[Vec<f64>]) -> f64 {
    use nalgebra::{DMatrix, DVector};
    let n = p.len();
    let base = &others[0];
    let k = others.len() - 1;
    let rhs = DVector::from_iterator(n, p.iter().zip(base).map(|(a, b)| a - b));
    if k == 0 {
        return rhs.norm();
    }
    let e = DMatrix::from_fn(n, k, |i, j| others[j + 1][i] - base[i]);
    let g = e.transpose() * &e;
    let coef = g
        .lu()
        .solve(&(e.transpose() * &rhs))
        .expect("nondegenerate hull");
    (rhs - e * coef).norm()
}
