//! Maximal-volume simplices in a ball and the resulting upper bound
//! `β(x,r) ≤ 2·h_min(T)/r`.

use serde::{Deserialize, Serialize};

use crate::cloud::{Ball, WeightedCloud};
use crate::error::{Error, Result};
use crate::geom::{self, dist, Point, Simplex};
use crate::grassmann::Subspace;

use super::check_query;

/// Candidate count above which exact enumeration is refused.
pub const EXACT_MAX_POINTS: usize = 60;

/// Subset count below which [`SimplexMode::Auto`] enumerates exactly.
pub const AUTO_EXACT_BUDGET: u64 = 20_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimplexMode {
    Exact,
    Greedy,
    #[default]
    Auto,
}

#[derive(Clone, Debug)]
pub struct MaxSimplex {
    pub simplex: Simplex,
    /// Cloud indices of the vertices.
    pub indices: Vec<usize>,
    pub volume: f64,
    pub degenerate: bool,
    /// Whether the simplex came from full enumeration.
    pub exact: bool,
}

/// The `(m+1)`-simplex of largest volume with vertices in `Σ ∩ B̄(x,r)`.
///
/// `Exact` enumerates all `(m+2)`-subsets and accepts at most
/// [`EXACT_MAX_POINTS`] candidates. `Greedy` seeds with the farthest pair,
/// adds the point farthest from the current affine hull until `m+2` vertices
/// are chosen, then makes one pass of single-vertex swaps.
pub fn max_volume_simplex(
    cloud: &WeightedCloud,
    x: &[f64],
    r: f64,
    mode: SimplexMode,
) -> Result<MaxSimplex> {
    check_query(cloud, x, r)?;
    let idx = cloud.ball_indices(x, r, Ball::Closed);
    let pts: Vec<&[f64]> = idx.iter().map(|&i| cloud.point(i)).collect();
    let (local, exact) = select(&pts, cloud.intrinsic_dim() + 2, mode)?;
    finish(&idx, &pts, local, exact)
}

/// `2·h_min(T)/r` for a maximal simplex `T` in `B̄(x,r)`.
///
/// The simplex is post-processed so that every sample point of the ball lies
/// within `h_min(T)` of the affine hull of the face opposite the lowest
/// vertex (a vertex is swapped out whenever that fails, which strictly grows
/// the volume). The returned value therefore bounds `β(x,r)` from above
/// whenever `x` is itself a sample point, also when the simplex was found
/// greedily.
pub fn beta_upper_from_simplex(cloud: &WeightedCloud, x: &[f64], r: f64) -> Result<f64> {
    Ok(closed_simplex(cloud, x, r, SimplexMode::Auto)?.1 / r)
}

pub(crate) fn closed_simplex(
    cloud: &WeightedCloud,
    x: &[f64],
    r: f64,
    mode: SimplexMode,
) -> Result<(MaxSimplex, f64)> {
    check_query(cloud, x, r)?;
    let idx = cloud.ball_indices(x, r, Ball::Closed);
    let pts: Vec<&[f64]> = idx.iter().map(|&i| cloud.point(i)).collect();
    let (mut local, exact) = select(&pts, cloud.intrinsic_dim() + 2, mode)?;
    close_heights(&pts, &mut local);
    let verts: Vec<&[f64]> = local.iter().map(|&i| pts[i]).collect();
    let bound = 2.0 * geom::min_height(&verts);
    Ok((finish(&idx, &pts, local, exact)?, bound))
}

fn finish(
    idx: &[usize],
    pts: &[&[f64]],
    local: Vec<usize>,
    exact: bool,
) -> Result<MaxSimplex> {
    let verts: Vec<Point> = local
        .iter()
        .map(|&i| Point::new(pts[i].to_vec()))
        .collect::<Result<_>>()?;
    let simplex = Simplex::new(verts)?;
    let volume = simplex.volume();
    Ok(MaxSimplex {
        degenerate: volume == 0.0,
        volume,
        indices: local.iter().map(|&i| idx[i]).collect(),
        simplex,
        exact,
    })
}

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

pub(crate) fn select(pts: &[&[f64]], k1: usize, mode: SimplexMode) -> Result<(Vec<usize>, bool)> {
    if pts.len() < k1 {
        return Err(Error::TooFewPoints {
            needed: k1,
            found: pts.len(),
        });
    }
    let exact = match mode {
        SimplexMode::Exact => {
            if pts.len() > EXACT_MAX_POINTS {
                return Err(Error::Precondition(format!(
                    "exact enumeration accepts at most {EXACT_MAX_POINTS} points, ball has {}",
                    pts.len()
                )));
            }
            true
        }
        SimplexMode::Greedy => false,
        SimplexMode::Auto => {
            pts.len() <= EXACT_MAX_POINTS && binomial(pts.len(), k1) <= AUTO_EXACT_BUDGET
        }
    };
    Ok(if exact {
        (enumerate(pts, k1), true)
    } else {
        (greedy(pts, k1), false)
    })
}

fn vol_of(pts: &[&[f64]], idx: &[usize]) -> f64 {
    let v: Vec<&[f64]> = idx.iter().map(|&i| pts[i]).collect();
    geom::volume(&v)
}

fn enumerate(pts: &[&[f64]], k1: usize) -> Vec<usize> {
    let n = pts.len();
    let mut comb: Vec<usize> = (0..k1).collect();
    let mut best = comb.clone();
    let mut best_vol = vol_of(pts, &comb);
    loop {
        // next combination in lexicographic order
        let mut i = k1;
        while i > 0 && comb[i - 1] == n - k1 + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        comb[i - 1] += 1;
        for j in i..k1 {
            comb[j] = comb[j - 1] + 1;
        }
        let v = vol_of(pts, &comb);
        if v > best_vol {
            best_vol = v;
            best.clone_from(&comb);
        }
    }
    best
}

fn greedy(pts: &[&[f64]], k1: usize) -> Vec<usize> {
    let n = pts.len();
    let mut chosen = if k1 == 1 {
        vec![0]
    } else {
        let (mut a, mut b, mut far) = (0, 0, -1.0);
        for i in 0..n {
            for j in i + 1..n {
                let d = dist(pts[i], pts[j]);
                if d > far {
                    (a, b, far) = (i, j, d);
                }
            }
        }
        vec![a, b]
    };
    while chosen.len() < k1 {
        let verts: Vec<&[f64]> = chosen.iter().map(|&i| pts[i]).collect();
        let frame = hull_frame(&verts);
        let mut best = (usize::MAX, -1.0);
        for (i, p) in pts.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let d = residual(p, verts[0], &frame);
            if d > best.1 {
                best = (i, d);
            }
        }
        chosen.push(best.0);
    }
    let mut vol = vol_of(pts, &chosen);
    for pos in 0..k1 {
        let mut trial = chosen.clone();
        let mut best = (chosen[pos], vol);
        for c in 0..n {
            if chosen.contains(&c) {
                continue;
            }
            trial[pos] = c;
            let v = vol_of(pts, &trial);
            if v > best.1 * (1.0 + 1e-12) {
                best = (c, v);
            }
        }
        chosen[pos] = best.0;
        vol = best.1;
    }
    chosen
}

/// Orthonormal rows spanning the directions of `aff(verts)`.
fn hull_frame(verts: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut frame: Vec<Vec<f64>> = Vec::new();
    for v in &verts[1..] {
        let mut e: Vec<f64> = v.iter().zip(verts[0]).map(|(a, b)| a - b).collect();
        let len = geom::norm(&e);
        for _ in 0..2 {
            for q in &frame {
                let c = geom::dot(&e, q);
                e.iter_mut().zip(q).for_each(|(ei, qi)| *ei -= c * qi);
            }
        }
        let r = geom::norm(&e);
        if len > 0.0 && r > geom::RANK_TOL * len {
            frame.push(e.iter().map(|c| c / r).collect());
        }
    }
    frame
}

fn residual(p: &[f64], base: &[f64], frame: &[Vec<f64>]) -> f64 {
    let mut e: Vec<f64> = p.iter().zip(base).map(|(a, b)| a - b).collect();
    for q in frame {
        let c = geom::dot(&e, q);
        e.iter_mut().zip(q).for_each(|(ei, qi)| *ei -= c * qi);
    }
    geom::norm(&e)
}

fn lowest_vertex(verts: &[&[f64]]) -> (usize, f64) {
    (0..verts.len())
        .map(|i| (i, geom::height(verts, i)))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
}

/// Swaps out the lowest vertex while some point lies farther than `h_min`
/// from the opposite face. Each swap strictly increases the volume.
pub(crate) fn close_heights(pts: &[&[f64]], chosen: &mut [usize]) {
    if chosen.len() < 2 {
        return;
    }
    for _ in 0..10 * pts.len() + 10 {
        let verts: Vec<&[f64]> = chosen.iter().map(|&i| pts[i]).collect();
        let (j, h) = lowest_vertex(&verts);
        let face: Vec<&[f64]> = verts
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, v)| *v)
            .collect();
        let frame = hull_frame(&face);
        if frame.len() + 1 < face.len() {
            return;
        }
        let mut far = (usize::MAX, h * (1.0 + 1e-12));
        for (i, p) in pts.iter().enumerate() {
            let d = residual(p, face[0], &frame);
            if d > far.1 {
                far = (i, d);
            }
        }
        if far.0 == usize::MAX {
            return;
        }
        chosen[j] = far.0;
    }
}

/// Linear direction space of the face opposite the lowest vertex.
pub(crate) fn face_plane(simplex: &Simplex) -> Option<Subspace> {
    let verts = simplex.vertex_slices();
    if verts.len() < 2 {
        return None;
    }
    let (j, _) = lowest_vertex(&verts);
    let face: Vec<&[f64]> = verts
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, v)| *v)
        .collect();
    let edges: Vec<Vec<f64>> = face[1..]
        .iter()
        .map(|v| v.iter().zip(face[0]).map(|(a, b)| a - b).collect())
        .collect();
    if edges.is_empty() {
        return None;
    }
    Subspace::from_basis(&edges).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_half() {
        let c = WeightedCloud::from_points(
            &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![1.0; 4],
            1,
        )
        .unwrap();
        let s = max_volume_simplex(&c, &[0.5, 0.5], 1.0, SimplexMode::Exact).unwrap();
        assert!((s.volume - 0.5).abs() < 1e-15);
        assert!(!s.degenerate);
        let g = max_volume_simplex(&c, &[0.5, 0.5], 1.0, SimplexMode::Greedy).unwrap();
        assert!((g.volume - 0.5).abs() < 1e-15);
    }

    #[test]
    fn collinear_is_degenerate() {
        let pts: Vec<[f64; 2]> = (0..6).map(|i| [i as f64, 0.0]).collect();
        let c = WeightedCloud::from_points(&pts, vec![1.0; 6], 1).unwrap();
        let s = max_volume_simplex(&c, &[2.0, 0.0], 5.0, SimplexMode::Exact).unwrap();
        assert!(s.degenerate);
        assert_eq!(beta_upper_from_simplex(&c, &[2.0, 0.0], 5.0).unwrap(), 0.0);
    }

    #[test]
    fn too_few_points() {
        let c = WeightedCloud::from_points(&[[0.0, 0.0], [1.0, 0.0]], vec![1.0; 2], 1).unwrap();
        assert!(matches!(
            max_volume_simplex(&c, &[0.0, 0.0], 2.0, SimplexMode::Exact),
            Err(Error::TooFewPoints { needed: 3, found: 2 })
        ));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(60, 3), 34_220);
        assert_eq!(binomial(5, 7), 0);
        assert_eq!(binomial(4, 4), 1);
    }
}
