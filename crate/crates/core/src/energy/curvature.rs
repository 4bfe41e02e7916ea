use crate::cloud::WeightedCloud;
use crate::error::{domain, Error, Result};
use crate::flatness::{default_radii, tangent_estimate, FlatnessOptions};
use crate::geom::{self, dist, Simplex};
use crate::grassmann::Subspace;

fn same_dim(points: &[&[f64]]) -> Result<usize> {
    let n = points.first().map_or(0, |p| p.len());
    for p in points {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
    }
    Ok(n)
}

/// Menger curvature `c = 4·H²(simp)/(|x0−x1||x1−x2||x2−x0|)`, the inverse
/// circumradius. Zero when two of the points coincide.
pub fn menger_c(x0: &[f64], x1: &[f64], x2: &[f64]) -> Result<f64> {
    same_dim(&[x0, x1, x2])?;
    let (a, b, c) = (dist(x0, x1), dist(x1, x2), dist(x2, x0));
    if a == 0.0 || b == 0.0 || c == 0.0 {
        return Ok(0.0);
    }
    Ok(4.0 * geom::volume(&[x0, x1, x2]) / (a * b * c))
}

/// `K(T) = H^k(simp T)/diam(T)^{k+1}` for a simplex of order `k`
/// (`k = m+1` in the energies). Zero on degenerate or collapsed tuples.
pub fn kappa(vertices: &[&[f64]]) -> f64 {
    let d = geom::diameter(vertices);
    if d == 0.0 {
        return 0.0;
    }
    let k = vertices.len() as i32 - 1;
    geom::volume(vertices) / d.powi(k + 1)
}

pub fn kappa_simplex(s: &Simplex) -> f64 {
    kappa(&s.vertex_slices())
}

/// `K′(T) = h_min(T)/diam(T)²`.
pub fn kappa_prime(vertices: &[&[f64]]) -> f64 {
    let d = geom::diameter(vertices);
    if d == 0.0 {
        return 0.0;
    }
    geom::min_height(vertices) / (d * d)
}

/// `K_SvdM = H³(simp)/(H²(∂ simp)·diam²)` for four points in `R³`.
pub fn kappa_svdm(x: [&[f64]; 4]) -> Result<f64> {
    if let Some(p) = x.iter().find(|p| p.len() != 3) {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: p.len(),
        });
    }
    let vol = geom::volume(&x);
    if vol == 0.0 {
        return Ok(0.0);
    }
    let area: f64 = (0..4)
        .map(|skip| {
            let f: Vec<&[f64]> = (0..4).filter(|&i| i != skip).map(|i| x[i]).collect();
            geom::volume(&f)
        })
        .sum();
    let d = geom::diameter(&x);
    Ok(vol / (area * d * d))
}

/// Relative tolerance below which `y − x` counts as tangent.
pub const TANGENT_TOL: f64 = 1e-12;

/// `R_tp(x,y) = |x−y|²/(2·dist(y−x, T_x))` for a given tangent plane at `x`.
/// `None` stands for an infinite radius (`y − x` tangent up to
/// [`TANGENT_TOL`] relative).
pub fn tangent_point_radius_with(x: &[f64], y: &[f64], tangent: &Subspace) -> Result<Option<f64>> {
    if x.len() != tangent.ambient_dim() || y.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: tangent.ambient_dim(),
            got: if x.len() != tangent.ambient_dim() { x.len() } else { y.len() },
        });
    }
    let v: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let len = geom::norm(&v);
    if len == 0.0 {
        return Err(domain("tangent-point radius needs x ≠ y"));
    }
    let h = tangent.perp_norm(&v);
    if h <= TANGENT_TOL * len {
        return Ok(None);
    }
    Ok(Some(len * len / (2.0 * h)))
}

/// `R_tp(x,y)` with `T_x` estimated from the cloud over
/// [`default_radii`].
pub fn tangent_point_radius(cloud: &WeightedCloud, x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() == y.len() && x == y {
        return Err(domain("tangent-point radius needs x ≠ y"));
    }
    let t = tangent_estimate(cloud, x, &default_radii(cloud), &FlatnessOptions::default())?;
    tangent_point_radius_with(x, y, &t.plane)
}
