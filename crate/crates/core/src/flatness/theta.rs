//! `θ_m^Σ(x,r) = (1/r)·inf_H d_H(Σ∩B̄(x,r), (x+H)∩B̄(x,r))` with the sum
//! convention for `d_H`, and the best approximating plane.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::cloud::WeightedCloud;
use crate::error::Result;
use crate::grassmann::Subspace;

use super::beta::{best_of_starts, max_sq_dist, start_frames};
use super::{local_frame, FlatnessOptions, Local};

#[derive(Clone, Debug)]
pub struct ThetaResult {
    pub theta: f64,
    pub plane: Subspace,
    /// Winning candidate: 0 is the β-optimal plane, then the β starts in
    /// their order (weighted PCA, simplex face, random frames).
    pub candidate: usize,
    /// `β` evaluated at the returned plane.
    pub beta_at_plane: f64,
    /// The β-optimal plane found along the way.
    pub beta_plane: Subspace,
    pub beta: f64,
}

pub fn theta(cloud: &WeightedCloud, x: &[f64], r: f64) -> Result<ThetaResult> {
    theta_with(cloud, x, r, &FlatnessOptions::default())
}

/// The plane-side supremum runs over the points of the lattice
/// `pitch·Z^m` inside the unit disk plus boundary points at the same spacing
/// (see [`disk_lattice`]); the pitch is `opts.theta_mesh` or
/// [`default_mesh`]. Each candidate plane is refined by a rotation pattern
/// search, and ties keep the lowest candidate index. The winner is then
/// projected onto the β plane and kept there if that does not increase `θ`.
pub fn theta_with(cloud: &WeightedCloud, x: &[f64], r: f64, opts: &FlatnessOptions) -> Result<ThetaResult> {
    let local = local_frame(cloud, x, r)?;
    let (n, m) = (cloud.ambient_dim(), cloud.intrinsic_dim());
    let lattice = disk_lattice(m, opts.theta_mesh.unwrap_or_else(|| default_mesh(m)));
    let starts = if m == n {
        vec![Subspace::axes(n, &(0..n).collect::<Vec<_>>())?]
    } else {
        let raw = start_frames(cloud, x, r, &local, opts);
        let b = if (m, n) == (1, 2) {
            super::beta::beta_with(cloud, x, r, opts)?
        } else {
            best_of_starts(&local, raw.clone())
        };
        let mut all = vec![b.plane];
        all.extend(raw.into_iter().flatten());
        all
    };
    let beta_plane = starts[0].clone();
    let beta = max_sq_dist(&local, beta_plane.frame()).max(0.0).sqrt();
    let mut best: Option<(f64, DMatrix<f64>, usize)> = None;
    for (k, s) in starts.iter().enumerate() {
        let (v, q) = if m == n {
            (objective(&local, s.frame(), &lattice), s.frame().clone())
        } else {
            pattern_search(&local, s.frame().clone(), &lattice)
        };
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, q, k));
        }
    }
    let (mut theta, mut q, candidate) = best.expect("at least one candidate");
    if m < n {
        // Carry the winning in-plane orientation over to the β plane; the
        // pattern search cannot resolve tilts below its last step.
        if let Some((v, snapped)) = snap(&local, &q, &beta_plane, &lattice) {
            if v <= theta {
                (theta, q) = (v, snapped);
            }
        }
    }
    let beta_at_plane = max_sq_dist(&local, &q).max(0.0).sqrt();
    Ok(ThetaResult {
        theta,
        plane: Subspace::from_frame(&q)?,
        candidate,
        beta_at_plane,
        beta_plane,
        beta,
    })
}

/// `q` projected onto `plane` and re-orthonormalized, with its objective.
fn snap(local: &Local, q: &DMatrix<f64>, plane: &Subspace, lattice: &[Vec<f64>]) -> Option<(f64, DMatrix<f64>)> {
    let projected = plane.projector() * q;
    let cols: Vec<Vec<f64>> = projected.column_iter().map(|c| c.iter().copied().collect()).collect();
    let s = Subspace::from_basis(&cols).ok()?;
    let frame = s.frame().clone();
    Some((objective(local, &frame, lattice), frame))
}

/// The θ-minimizing plane, i.e. an element of `BAP(x,r)`.
pub fn best_approx_plane(cloud: &WeightedCloud, x: &[f64], r: f64) -> Result<Subspace> {
    Ok(theta(cloud, x, r)?.plane)
}

/// Lattice pitch relative to `r`: 1/32 for curves, 1/16 for surfaces, 1/4
/// above. The plane-side term is underestimated by at most `pitch·√m/2`.
pub fn default_mesh(m: usize) -> f64 {
    match m {
        1 => 1.0 / 32.0,
        2 => 1.0 / 16.0,
        _ => 0.25,
    }
}

/// Points of `pitch·Z^m` in the closed unit disk of `R^m` together with
/// boundary points: `±1` for `m = 1`, the circle at arc spacing `pitch` for
/// `m = 2`, and `±e_j` otherwise.
pub fn disk_lattice(m: usize, pitch: f64) -> Vec<Vec<f64>> {
    let k = (1.0 / pitch).floor() as i64;
    let mut out = Vec::new();
    let mut idx = vec![-k; m];
    loop {
        let c: Vec<f64> = idx.iter().map(|&i| i as f64 * pitch).collect();
        if c.iter().map(|v| v * v).sum::<f64>() <= 1.0 + 1e-12 {
            out.push(c);
        }
        let mut j = 0;
        while j < m {
            idx[j] += 1;
            if idx[j] <= k {
                break;
            }
            idx[j] = -k;
            j += 1;
        }
        if j == m {
            break;
        }
    }
    match m {
        1 => out.extend([vec![1.0], vec![-1.0]]),
        2 => {
            let steps = (2.0 * PI / pitch).ceil() as usize;
            out.extend((0..steps).map(|s| {
                let a = 2.0 * PI * s as f64 / steps as f64;
                vec![a.cos(), a.sin()]
            }));
        }
        _ => {
            for j in 0..m {
                for sgn in [1.0, -1.0] {
                    let mut e = vec![0.0; m];
                    e[j] = sgn;
                    out.push(e);
                }
            }
        }
    }
    out
}

/// `sup_z dist(z, disk) + sup_w dist(w, cloud)` in units of `r`. Since every
/// `z` has `|z − x| ≤ r`, its projection lies in the disk and the first term
/// is the plain distance to the plane.
pub(crate) fn objective(local: &Local, q: &DMatrix<f64>, lattice: &[Vec<f64>]) -> f64 {
    let first = max_sq_dist(local, q).max(0.0).sqrt();
    let n = local.y.nrows();
    let ys = local.y.as_slice();
    let mut sup2 = 0.0f64;
    let mut w = vec![0.0; n];
    for c in lattice {
        for (a, wa) in w.iter_mut().enumerate() {
            *wa = (0..c.len()).map(|j| q[(a, j)] * c[j]).sum();
        }
        let mut nearest = f64::INFINITY;
        for y in ys.chunks_exact(n) {
            let d2: f64 = y.iter().zip(&w).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < nearest {
                nearest = d2;
                if nearest <= sup2 {
                    break;
                }
            }
        }
        if nearest > sup2 {
            sup2 = nearest;
        }
    }
    first + sup2.sqrt()
}

/// Rotates one frame column towards one complement direction at a time,
/// halving the angle when no move improves.
fn pattern_search(local: &Local, q0: DMatrix<f64>, lattice: &[Vec<f64>]) -> (f64, DMatrix<f64>) {
    let mut q = q0;
    let mut best = objective(local, &q, lattice);
    let mut angle: f64 = 0.1;
    let m = q.ncols();
    while angle > 1e-4 {
        let comp = Subspace::from_frame(&q)
            .ok()
            .and_then(|s| s.complement())
            .map(|s| s.frame().clone());
        let Some(comp) = comp else { break };
        let mut improved = false;
        'moves: for j in 0..m {
            for k in 0..comp.ncols() {
                for sgn in [1.0, -1.0] {
                    let a = sgn * angle;
                    let mut trial = q.clone();
                    let col = q.column(j) * a.cos() + comp.column(k) * a.sin();
                    trial.set_column(j, &col);
                    let v = objective(local, &trial, lattice);
                    if v < best {
                        best = v;
                        q = trial;
                        improved = true;
                        break 'moves;
                    }
                }
            }
        }
        if !improved {
            angle *= 0.5;
        }
    }
    (best, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_sizes() {
        let l1 = disk_lattice(1, 0.25);
        assert_eq!(l1.len(), 9 + 2);
        let l2 = disk_lattice(2, 0.5);
        // 13 lattice points plus 13 circle points
        assert_eq!(l2.len(), 13 + 13);
        assert!(l2.iter().all(|c| c[0] * c[0] + c[1] * c[1] <= 1.0 + 1e-12));
    }
}
