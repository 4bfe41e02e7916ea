//! Tangent planes as limits of best approximating planes, and the
//! diagnostics built on them.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cloud::{Ball, WeightedCloud};
use crate::error::{Error, Result};
use crate::geom::norm;
use crate::grassmann::{grassmann_distance, Subspace};

use super::{check_query, local_frame, theta_with, FlatnessOptions};

#[derive(Clone, Debug, Serialize)]
pub struct TangentEstimate {
    pub plane: Subspace,
    /// Smallest usable radius, at which `plane` was computed.
    pub radius: f64,
    /// Usable radii in the order given.
    pub radii_used: Vec<f64>,
    /// `d_Gr(P(r_i), P(r_{i+1}))` over consecutive usable radii.
    pub increments: Vec<f64>,
}

/// `covering_radius · {32, 16, 8, 4}`.
pub fn default_radii(cloud: &WeightedCloud) -> Vec<f64> {
    let h = cloud.covering_radius();
    [32.0, 16.0, 8.0, 4.0].iter().map(|k| k * h).collect()
}

/// Best approximating planes at each radius (descending); a radius is usable
/// when its ball holds at least `m+1` points whose offsets from `x` have rank
/// at least `m`.
pub fn tangent_estimate(
    cloud: &WeightedCloud,
    x: &[f64],
    radii: &[f64],
    opts: &FlatnessOptions,
) -> Result<TangentEstimate> {
    let m = cloud.intrinsic_dim();
    let mut planes: Vec<(f64, Subspace)> = Vec::new();
    for &r in radii {
        check_query(cloud, x, r)?;
        let local = match local_frame(cloud, x, r) {
            Ok(l) => l,
            Err(Error::EmptyBall { .. }) => continue,
            Err(e) => return Err(e),
        };
        if local.y.ncols() < m + 1 || rank(&local.y) < m {
            continue;
        }
        planes.push((r, theta_with(cloud, x, r, opts)?.plane));
    }
    let Some((radius, plane)) = planes.last().cloned() else {
        return Err(Error::Precondition(format!(
            "rank collapse: no radius among {radii:?} has {} points spanning dimension {m}",
            m + 1
        )));
    };
    let increments = planes
        .windows(2)
        .map(|w| grassmann_distance(&w[0].1, &w[1].1))
        .collect::<Result<_>>()?;
    Ok(TangentEstimate {
        plane,
        radius,
        radii_used: planes.iter().map(|p| p.0).collect(),
        increments,
    })
}

fn rank(y: &DMatrix<f64>) -> usize {
    let sv = y.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-8 * top && top > 0.0).count()
}

/// `d_Gr` between the tangent estimates at `x` and `y`.
pub fn tangent_oscillation(
    cloud: &WeightedCloud,
    x: &[f64],
    y: &[f64],
    radii: &[f64],
    opts: &FlatnessOptions,
) -> Result<f64> {
    let tx = tangent_estimate(cloud, x, radii, opts)?;
    let ty = tangent_estimate(cloud, y, radii, opts)?;
    grassmann_distance(&tx.plane, &ty.plane)
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberViolation {
    /// Grid cell of the tangential coordinates.
    pub cell: Vec<i64>,
    /// Largest distance between normal components within the cell.
    pub spread: f64,
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphCheck {
    pub holds: bool,
    pub violations: Vec<FiberViolation>,
}

/// [`graph_patch_check_with`] using the tangent estimate at `x` over
/// [`default_radii`].
pub fn graph_patch_check(cloud: &WeightedCloud, x: &[f64], r: f64, fiber_tol: f64) -> Result<GraphCheck> {
    let t = tangent_estimate(cloud, x, &default_radii(cloud), &FlatnessOptions::default())?;
    graph_patch_check_with(cloud, x, r, fiber_tol, &t.plane)
}

/// Bins the points of `Σ∩B̄(x,r)` by their tangential coordinates on a grid
/// of pitch `fiber_tol`; the patch is a graph over `tangent` when every cell's
/// normal components lie within `2·fiber_tol` of each other.
pub fn graph_patch_check_with(
    cloud: &WeightedCloud,
    x: &[f64],
    r: f64,
    fiber_tol: f64,
    tangent: &Subspace,
) -> Result<GraphCheck> {
    check_query(cloud, x, r)?;
    if !(fiber_tol > 0.0) {
        return Err(Error::Domain("fiber tolerance must be positive".into()));
    }
    if tangent.ambient_dim() != cloud.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: cloud.ambient_dim(),
            got: tangent.ambient_dim(),
        });
    }
    let mut cells: BTreeMap<Vec<i64>, Vec<(usize, Vec<f64>)>> = BTreeMap::new();
    for i in cloud.ball_indices(x, r, Ball::Closed) {
        let v: Vec<f64> = cloud.point(i).iter().zip(x).map(|(a, b)| a - b).collect();
        let cell = tangent
            .coordinates(&v)
            .iter()
            .map(|c| (c / fiber_tol).floor() as i64)
            .collect();
        let perp = tangent.project_perp(&v)?;
        cells.entry(cell).or_default().push((i, perp));
    }
    let mut violations = Vec::new();
    for (cell, members) in cells {
        let mut spread = 0.0f64;
        for (a, (_, pa)) in members.iter().enumerate() {
            for (_, pb) in &members[a + 1..] {
                let d: Vec<f64> = pa.iter().zip(pb).map(|(u, v)| u - v).collect();
                spread = spread.max(norm(&d));
            }
        }
        if spread > 2.0 * fiber_tol {
            violations.push(FiberViolation {
                cell,
                spread,
                indices: members.iter().map(|m| m.0).collect(),
            });
        }
    }
    Ok(GraphCheck {
        holds: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_cloud() -> WeightedCloud {
        let pts: Vec<[f64; 2]> = (0..41).map(|i| [i as f64 * 0.05 - 1.0, 0.0]).collect();
        WeightedCloud::from_points(&pts, vec![0.05; 41], 1).unwrap()
    }

    #[test]
    fn radii_follow_the_covering_radius() {
        let c = line_cloud();
        let h = c.covering_radius();
        assert_eq!(default_radii(&c), vec![32.0 * h, 16.0 * h, 8.0 * h, 4.0 * h]);
    }

    #[test]
    fn straight_line_has_its_own_tangent() {
        let c = line_cloud();
        let t = tangent_estimate(&c, &[0.0, 0.0], &[0.5, 0.25, 0.1], &FlatnessOptions::default()).unwrap();
        assert_eq!(t.radii_used.len(), 3);
        assert!(t.increments.iter().all(|&d| d < 1e-12));
        assert!(t.plane.perp_norm(&[1.0, 0.0]) < 1e-12);
        assert_eq!(t.radius, 0.1);
    }

    #[test]
    fn too_small_radii_collapse() {
        let c = line_cloud();
        let err = tangent_estimate(&c, &[0.0, 0.0], &[0.01], &FlatnessOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn fibers_detect_a_fold() {
        // two sheets over the same interval
        let mut pts: Vec<[f64; 2]> = (0..21).map(|i| [i as f64 * 0.05 - 0.5, 0.0]).collect();
        pts.extend((0..21).map(|i| [i as f64 * 0.05 - 0.5, 0.3]));
        let c = WeightedCloud::from_points(&pts, vec![0.05; 42], 1).unwrap();
        let axis = Subspace::from_basis(&[vec![1.0, 0.0]]).unwrap();
        let folded = graph_patch_check_with(&c, &[0.0, 0.0], 1.0, 0.05, &axis).unwrap();
        assert!(!folded.holds);
        let flat = graph_patch_check_with(&c, &[0.0, 0.0], 0.2, 0.05, &axis).unwrap();
        assert!(flat.holds);
    }
}
