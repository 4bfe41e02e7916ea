//! `β_m^Σ(x,r) = (1/r)·inf_H sup_{z ∈ Σ∩B̄(x,r)} dist(z, x+H)`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cloud::WeightedCloud;
use crate::error::Result;
use crate::grassmann::Subspace;

use super::simplex::{closed_simplex, face_plane, SimplexMode};
use super::{local_frame, FlatnessOptions, Local};

#[derive(Clone, Debug)]
pub struct BetaResult {
    pub beta: f64,
    pub plane: Subspace,
    /// Index of the winning start: 0 is weighted PCA, 1 the max-volume
    /// simplex face, then the random frames. For curves in the plane the
    /// exact solver is reported as start 0.
    pub start: usize,
}

/// `β` at `(x, r)` with default options.
pub fn beta(cloud: &WeightedCloud, x: &[f64], r: f64) -> Result<BetaResult> {
    beta_with(cloud, x, r, &FlatnessOptions::default())
}

/// For `(m, n) = (1, 2)` the minimax line is found exactly from the convex
/// hull of `±(z − x)`. Otherwise projected gradient descent on a smoothed
/// maximum is run from weighted PCA, the max-volume-simplex face plane and
/// `opts.random_starts` random frames; the best plane seen wins, ties going to
/// the lowest start index.
pub fn beta_with(cloud: &WeightedCloud, x: &[f64], r: f64, opts: &FlatnessOptions) -> Result<BetaResult> {
    let local = local_frame(cloud, x, r)?;
    let (n, m) = (cloud.ambient_dim(), cloud.intrinsic_dim());
    if m == n {
        return Ok(BetaResult {
            beta: 0.0,
            plane: Subspace::axes(n, &(0..n).collect::<Vec<_>>())?,
            start: 0,
        });
    }
    if (m, n) == (1, 2) {
        let pts: Vec<[f64; 2]> = local.y.column_iter().map(|c| [c[0], c[1]]).collect();
        let (b, dir) = beta_planar_exact(&pts);
        return Ok(BetaResult {
            beta: b,
            plane: Subspace::from_basis(&[dir])?,
            start: 0,
        });
    }
    let starts = start_frames(cloud, x, r, &local, opts);
    Ok(best_of_starts(&local, starts))
}

pub(crate) fn start_frames(
    cloud: &WeightedCloud,
    x: &[f64],
    r: f64,
    local: &Local,
    opts: &FlatnessOptions,
) -> Vec<Option<Subspace>> {
    let (n, m) = (cloud.ambient_dim(), cloud.intrinsic_dim());
    let mut starts = vec![Some(weighted_pca(local, m))];
    starts.push(
        closed_simplex(cloud, x, r, SimplexMode::Auto)
            .ok()
            .and_then(|(s, _)| face_plane(&s.simplex)),
    );
    for k in 0..opts.random_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(k as u64 + 1);
        starts.push(Subspace::random(n, m, &mut rng).ok());
    }
    starts
}

pub(crate) fn best_of_starts(local: &Local, starts: Vec<Option<Subspace>>) -> BetaResult {
    let mut best: Option<(f64, DMatrix<f64>, usize)> = None;
    for (k, s) in starts.into_iter().enumerate() {
        let Some(s) = s else { continue };
        let (v, q) = descend(local, s.frame().clone());
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, q, k));
        }
    }
    let (v, q, start) = best.expect("weighted PCA start always exists");
    BetaResult {
        beta: v.max(0.0).sqrt(),
        plane: Subspace::from_frame(&q).expect("descent keeps frames orthonormal"),
        start,
    }
}

/// Top-`m` eigenvectors of `Σ w_i y_i y_iᵀ` (unweighted when all local
/// weights vanish).
pub(crate) fn weighted_pca(local: &Local, m: usize) -> Subspace {
    let n = local.y.nrows();
    let total: f64 = local.w.iter().sum();
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for (i, c) in local.y.column_iter().enumerate() {
        let w = if total > 0.0 { local.w[i] } else { 1.0 };
        cov.ger(w, &c, &c, 1.0);
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let cols: Vec<Vec<f64>> = order[..m]
        .iter()
        .map(|&j| eig.eigenvectors.column(j).iter().copied().collect())
        .collect();
    Subspace::from_basis(&cols).expect("eigenvectors are orthonormal")
}

/// Largest squared distance of the columns of `y` to the span of `q`, from
/// the residuals (`|y|² − |Qᵀy|²` loses everything below `1e-8`).
pub(crate) fn max_sq_dist(local: &Local, q: &DMatrix<f64>) -> f64 {
    let resid = &local.y - q * q.tr_mul(&local.y);
    resid
        .column_iter()
        .map(|c| c.norm_squared())
        .fold(0.0, f64::max)
}

/// Smoothed objective `T·log Σ exp(d_i/T)` (shifted for stability) and the
/// softmax weights.
fn smooth(d: &[f64], t: f64, p: &mut [f64]) -> f64 {
    let dmax = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for (pi, di) in p.iter_mut().zip(d) {
        *pi = ((di - dmax) / t).exp();
        s += *pi;
    }
    p.iter_mut().for_each(|pi| *pi /= s);
    dmax + t * s.ln()
}

fn sq_dists(local: &Local, q: &DMatrix<f64>, d: &mut [f64]) {
    let c = q.tr_mul(&local.y);
    for (i, di) in d.iter_mut().enumerate() {
        *di = (local.sq[i] - c.column(i).norm_squared()).max(0.0);
    }
}

fn orthonormal(q: DMatrix<f64>) -> DMatrix<f64> {
    q.qr().q()
}

/// Riemannian gradient descent on `G(n,m)` with temperature continuation.
/// Returns the best exact objective (squared, in units of `r²`) and frame.
pub(crate) fn descend(local: &Local, q0: DMatrix<f64>) -> (f64, DMatrix<f64>) {
    let npts = local.y.ncols();
    let n = local.y.nrows();
    let mut q = q0;
    let mut best_q = q.clone();
    let mut best = max_sq_dist(local, &q);
    if npts == 0 || best == 0.0 {
        return (best, best_q);
    }
    let mut d = vec![0.0; npts];
    let mut p = vec![0.0; npts];
    let mut d_trial = vec![0.0; npts];
    let mut p_trial = vec![0.0; npts];
    let mut t = 0.05;
    while t > 1e-9 {
        let level_start = best;
        let mut step: f64 = 1.0;
        for _ in 0..60 {
            sq_dists(local, &q, &mut d);
            let f = smooth(&d, t, &mut p);
            // M = Σ p_i y_i y_iᵀ, gradient −2(I − QQᵀ)MQ
            let mut mq = DMatrix::<f64>::zeros(n, q.ncols());
            let c = q.tr_mul(&local.y);
            for i in 0..npts {
                if p[i] < 1e-300 {
                    continue;
                }
                let yi = local.y.column(i);
                let ci = c.column(i);
                mq.ger(p[i], &yi, &ci, 1.0);
            }
            let proj = &mq - &q * q.tr_mul(&mq);
            let g = proj * -2.0;
            let gn2 = g.norm_squared();
            if gn2 < 1e-24 {
                break;
            }
            let mut accepted = false;
            step = (step * 2.0).min(4.0);
            for _ in 0..40 {
                let trial = orthonormal(&q - &g * step);
                sq_dists(local, &trial, &mut d_trial);
                let ft = smooth(&d_trial, t, &mut p_trial);
                if ft <= f - 1e-4 * step * gn2 {
                    q = trial;
                    // stalled: further iterations at this temperature are noise
                    accepted = f - ft > 1e-10 * f.abs();
                    break;
                }
                step *= 0.5;
            }
            let exact = max_sq_dist(local, &q);
            if exact < best {
                best = exact;
                best_q.clone_from(&q);
            }
            if !accepted {
                break;
            }
        }
        if t < 1e-4 && level_start - best <= 1e-10 * level_start {
            break;
        }
        t *= 0.3;
    }
    (best, best_q)
}

/// Exact planar minimax line through the origin for the points `pts` (already
/// centred at `x` and scaled by `1/r`): the smallest distance from the origin
/// to an edge line of `conv(±pts)`. Returns `(value, direction)`.
pub fn beta_planar_exact(pts: &[[f64; 2]]) -> (f64, [f64; 2]) {
    let mut sym: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for p in pts {
        if p[0] != 0.0 || p[1] != 0.0 {
            sym.push(*p);
            sym.push([-p[0], -p[1]]);
        }
    }
    if sym.is_empty() {
        return (0.0, [1.0, 0.0]);
    }
    let hull = convex_hull(sym.clone());
    if hull.len() < 3 {
        let far = sym
            .iter()
            .copied()
            .max_by(|a, b| (a[0].hypot(a[1])).total_cmp(&b[0].hypot(b[1])))
            .unwrap_or([1.0, 0.0]);
        let len = far[0].hypot(far[1]);
        return (0.0, [far[0] / len, far[1] / len]);
    }
    let mut best = (f64::INFINITY, [1.0, 0.0]);
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let e = [b[0] - a[0], b[1] - a[1]];
        let len = e[0].hypot(e[1]);
        if len == 0.0 {
            continue;
        }
        let dist = (a[0] * b[1] - a[1] * b[0]).abs() / len;
        if dist < best.0 {
            best = (dist, [e[0] / len, e[1] / len]);
        }
    }
    best
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain, counter-clockwise, collinear points dropped.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_exact_symmetric_arc() {
        // points (±a, b) and origin-centred: best line is horizontal
        let (b, dir) = beta_planar_exact(&[[0.5, 0.1], [-0.5, 0.1], [0.0, 0.0]]);
        assert!((b - 0.1).abs() < 1e-15);
        assert!(dir[1].abs() < 1e-15);
    }

    #[test]
    fn planar_exact_collinear() {
        let (b, dir) = beta_planar_exact(&[[1.0, 1.0], [0.5, 0.5]]);
        assert_eq!(b, 0.0);
        assert!((dir[0] - dir[1]).abs() < 1e-15);
        assert_eq!(beta_planar_exact(&[]).0, 0.0);
    }

    #[test]
    fn planar_exact_square() {
        // square with corners (±1,±1): the axis directions give 1, diagonals √2
        let (b, _) = beta_planar_exact(&[[1.0, 1.0], [1.0, -1.0]]);
        assert!((b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hull_drops_interior() {
        let h = convex_hull(vec![[0.0, 0.0], [1.0, 0.0], [0.5, 0.2], [1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(h.len(), 4);
    }
}
