//! Multiscale flatness of weighted clouds: `β` and `θ` numbers, best
//! approximating planes, Ahlfors densities, max-volume simplices, tangent
//! estimates and log–log exponent fits.
//!
//! All balls are closed, `B̄(x,r)`, except in [`ahlfors_density`], which
//! follows the open-ball lower density bound.
//!
//! `d_H` is the *sum* of the two directed suprema, not their maximum.

mod beta;
mod fit;
mod records;
mod simplex;
mod tangent;
mod theta;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cloud::{unit_ball_volume, Ball, WeightedCloud};
use crate::error::{domain, Error, Result};
use crate::geom::dist;

pub use beta::{beta, beta_planar_exact, beta_with, BetaResult};
pub use fit::{fit_power_law, scaling_fit, Field, ScalingFit};
pub use records::{read_scale_records, scale_record, write_scale_records, ScaleRecord};
pub use simplex::{
    beta_upper_from_simplex, max_volume_simplex, MaxSimplex, SimplexMode, AUTO_EXACT_BUDGET,
    EXACT_MAX_POINTS,
};
pub use tangent::{
    default_radii, graph_patch_check, graph_patch_check_with, tangent_estimate, tangent_oscillation,
    FiberViolation, GraphCheck, TangentEstimate,
};
pub(crate) use simplex::binomial;
pub use theta::{best_approx_plane, default_mesh, disk_lattice, theta, theta_with, ThetaResult};

/// Optimizer settings shared by `β`, `θ` and the tangent estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlatnessOptions {
    /// Random frames tried after the PCA and simplex starts.
    pub random_starts: usize,
    pub seed: u64,
    /// Lattice pitch of the plane-side supremum in `θ`, relative to `r`.
    pub theta_mesh: Option<f64>,
}

impl Default for FlatnessOptions {
    fn default() -> Self {
        FlatnessOptions {
            random_starts: 3,
            seed: 0,
            theta_mesh: None,
        }
    }
}

/// Sample points of `B̄(x,r)` as columns `(z − x)/r`, their squared norms
/// and weights.
pub(crate) struct Local {
    pub y: DMatrix<f64>,
    pub sq: Vec<f64>,
    pub w: Vec<f64>,
}

pub(crate) fn check_query(cloud: &WeightedCloud, x: &[f64], r: f64) -> Result<()> {
    if x.len() != cloud.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: cloud.ambient_dim(),
            got: x.len(),
        });
    }
    if x.iter().any(|c| !c.is_finite()) {
        return Err(domain("center must be finite"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(domain(format!("radius must be positive and finite, got {r}")));
    }
    Ok(())
}

pub(crate) fn local_frame(cloud: &WeightedCloud, x: &[f64], r: f64) -> Result<Local> {
    check_query(cloud, x, r)?;
    let idx = cloud.ball_indices(x, r, Ball::Closed);
    if idx.is_empty() {
        return Err(Error::EmptyBall { radius: r });
    }
    let n = cloud.ambient_dim();
    let mut data = Vec::with_capacity(n * idx.len());
    for &i in &idx {
        data.extend(cloud.point(i).iter().zip(x).map(|(z, c)| (z - c) / r));
    }
    let y = DMatrix::from_vec(n, idx.len(), data);
    let sq = y.column_iter().map(|c| c.norm_squared()).collect();
    let w = idx.iter().map(|&i| cloud.weight(i)).collect();
    Ok(Local { y, sq, w })
}

/// `H^m(Σ∩B(x,r)) / (ω_m r^m)` with the measure taken from the weights of the
/// samples in the open ball. An empty ball gives 0.
pub fn ahlfors_density(cloud: &WeightedCloud, x: &[f64], r: f64) -> Result<f64> {
    check_query(cloud, x, r)?;
    let m = cloud.intrinsic_dim();
    let mass: f64 = cloud
        .ball_indices(x, r, Ball::Open)
        .iter()
        .map(|&i| cloud.weight(i))
        .sum();
    Ok(mass / (unit_ball_volume(m) * r.powi(m as i32)))
}

/// `d_H(E,F) = sup_{y∈E} dist(y,F) + sup_{y∈F} dist(y,E)`.
pub fn hausdorff_defect<P: AsRef<[f64]>, Q: AsRef<[f64]>>(e: &[P], f: &[Q]) -> Result<f64> {
    if e.is_empty() || f.is_empty() {
        return Err(domain("Hausdorff defect of an empty set"));
    }
    let n = e[0].as_ref().len();
    for p in e.iter().map(AsRef::as_ref).chain(f.iter().map(AsRef::as_ref)) {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
    }
    Ok(directed(e, f) + directed(f, e))
}

fn directed<P: AsRef<[f64]>, Q: AsRef<[f64]>>(a: &[P], b: &[Q]) -> f64 {
    a.iter()
        .map(|p| {
            b.iter()
                .map(|q| dist(p.as_ref(), q.as_ref()))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(n: usize) -> WeightedCloud {
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        WeightedCloud::from_points(&pts, vec![2.0 * PI / n as f64; n], 1).unwrap()
    }

    fn plane_grid(k: i32, h: f64) -> WeightedCloud {
        let mut pts = Vec::new();
        for i in -k..=k {
            for j in -k..=k {
                pts.push([i as f64 * h, j as f64 * h, 0.0]);
            }
        }
        let len = pts.len();
        WeightedCloud::from_points(&pts, vec![h * h; len], 2).unwrap()
    }

    #[test]
    fn hausdorff_sum_convention() {
        assert_eq!(hausdorff_defect(&[[0.0]], &[[1.0]]).unwrap(), 2.0);
        assert_eq!(hausdorff_defect(&[[0.0], [1.0]], &[[0.0]]).unwrap(), 1.0);
        assert_eq!(hausdorff_defect(&[[0.5, 1.0]], &[[0.5, 1.0]]).unwrap(), 0.0);
        let empty: [[f64; 1]; 0] = [];
        assert!(hausdorff_defect(&empty, &[[0.0]]).is_err());
    }

    #[test]
    fn beta_on_plane_is_zero() {
        let c = plane_grid(10, 0.1);
        let b = beta(&c, &[0.0, 0.0, 0.0], 0.5).unwrap();
        assert!(b.beta < 1e-12, "{}", b.beta);
        let e3 = b.plane.perp_norm(&[0.0, 0.0, 1.0]);
        assert!((e3 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn beta_circle_bound() {
        let c = circle(2000);
        for r in [0.05, 0.2, 0.5] {
            let b = beta(&c, &[1.0, 0.0], r).unwrap();
            assert!(b.beta <= r / 2.0 * (1.0 + 1e-9), "r={r}: {}", b.beta);
            assert!(b.beta >= 0.85 * r / 2.0, "r={r}: {}", b.beta);
        }
    }

    #[test]
    fn theta_dominates_beta() {
        let c = circle(500);
        let t = theta(&c, &[1.0, 0.0], 0.3).unwrap();
        assert!(t.theta >= t.beta_at_plane);
        assert!(t.theta >= t.beta - 1e-12);
        assert!(t.theta / t.beta <= 5.0);
    }

    #[test]
    fn empty_ball() {
        let c = circle(10);
        assert!(matches!(
            beta(&c, &[5.0, 5.0], 0.1),
            Err(Error::EmptyBall { .. })
        ));
        assert_eq!(ahlfors_density(&c, &[5.0, 5.0], 0.1).unwrap(), 0.0);
        assert!(beta(&c, &[1.0, 0.0], -1.0).is_err());
        assert!(beta(&c, &[1.0], 1.0).is_err());
    }

    #[test]
    fn ahlfors_flat() {
        let c = plane_grid(40, 0.025);
        let a = ahlfors_density(&c, &[0.0, 0.0, 0.0], 0.5).unwrap();
        assert!((a - 1.0).abs() < 0.02, "{a}");
    }
}
