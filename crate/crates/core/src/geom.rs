//! Euclidean simplices: volumes, diameters, faces, heights and the
//! voluminous-simplex calculus.
//!
//! The slice-level functions ([`volume`], [`diameter`], [`height`],
//! [`min_height`]) take vertices as coordinate slices and are used in the hot
//! loops of the energy estimators. [`Simplex`] wraps them with validation.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grassmann::Subspace;

/// A squared normalized volume `det(EᵀE) / Π|e_i|²` below this value is
/// treated as an exactly degenerate simplex.
pub const DEGENERACY_TOL: f64 = 1e-14;

/// Residual-to-length ratio below which an edge is considered to lie in the
/// span of the previous ones. Square root of [`DEGENERACY_TOL`].
pub const RANK_TOL: f64 = 1e-7;

/// A point of `R^n` with finite coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(domain("a point needs at least one coordinate"));
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(domain(format!("coordinate {bad} is not finite")));
        }
        Ok(Point(coords))
    }

    pub fn origin(n: usize) -> Self {
        Point(vec![0.0; n.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

/// Parameters of an `(η, d)`-voluminous simplex: `diam ≤ d` and `h_min ≥ η d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoluminousParams {
    eta: f64,
    d: f64,
}

impl VoluminousParams {
    pub fn new(eta: f64, d: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(domain(format!("eta must lie in (0,1), got {eta}")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(domain(format!("d must be positive, got {d}")));
        }
        Ok(VoluminousParams { eta, d })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}

/// An ordered tuple of `k+1` points of `R^n`, `k ≤ n`. Degenerate
/// configurations are allowed and have volume zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    vertices: Vec<Point>,
}

impl Simplex {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| domain("a simplex needs at least one vertex"))?;
        let n = first.dim();
        for v in &vertices {
            if v.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.dim(),
                });
            }
        }
        if vertices.len() > n + 1 {
            return Err(domain(format!(
                "a simplex in R^{n} has at most {} vertices, got {}",
                n + 1,
                vertices.len()
            )));
        }
        Ok(Simplex { vertices })
    }

    /// Convenience constructor from raw coordinate rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let pts = rows
            .iter()
            .map(|r| Point::new(r.as_ref().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Simplex::new(pts)
    }

    /// Intrinsic order `k` (number of vertices minus one).
    pub fn order(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex_slices(&self) -> Vec<&[f64]> {
        self.vertices.iter().map(|p| p.coords()).collect()
    }

    /// `H^k` of the convex hull.
    pub fn volume(&self) -> f64 {
        volume(&self.vertex_slices())
    }

    pub fn diameter(&self) -> Result<f64> {
        if self.vertices.len() < 2 {
            return Err(domain("diameter needs at least two vertices"));
        }
        Ok(diameter(&self.vertex_slices()))
    }

    /// The simplex with vertex `i` removed, order preserved.
    pub fn face(&self, i: usize) -> Result<Simplex> {
        if i >= self.vertices.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.vertices.len(),
            });
        }
        if self.vertices.len() == 1 {
            return Err(domain("a single point has no faces"));
        }
        let mut vertices = self.vertices.clone();
        vertices.remove(i);
        Ok(Simplex { vertices })
    }

    /// Distance from vertex `i` to the affine hull of the remaining vertices.
    pub fn height(&self, i: usize) -> Result<f64> {
        if i >= self.vertices.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.vertices.len(),
            });
        }
        Ok(height(&self.vertex_slices(), i))
    }

    pub fn min_height(&self) -> f64 {
        min_height(&self.vertex_slices())
    }

    pub fn is_degenerate(&self) -> bool {
        self.order() > 0 && self.volume() == 0.0
    }

    pub fn is_voluminous(&self, params: VoluminousParams) -> Result<bool> {
        let diam = self.diameter()?;
        Ok(diam <= params.d && self.min_height() >= params.eta * params.d)
    }

    /// The image under `x ↦ alpha·x`.
    pub fn scaled(&self, alpha: f64) -> Simplex {
        let vertices = self
            .vertices
            .iter()
            .map(|p| Point(p.iter().map(|c| c * alpha).collect()))
            .collect();
        Simplex { vertices }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Removes from `v` its components along the orthonormal rows stored in
/// `basis` (flattened, `n` entries per row). Two passes keep the result
/// orthogonal to working precision.
fn orthogonalize(v: &mut [f64], basis: &[f64]) {
    let n = v.len();
    for _ in 0..2 {
        for q in basis.chunks_exact(n) {
            let c = dot(v, q);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
}

/// `H^k` of `simp(x_0, …, x_k)`, i.e. `√det(EᵀE)/k!` with `E` the edge matrix
/// from `x_0`. A single point has `H^0 = 1`.
pub fn volume(vertices: &[&[f64]]) -> f64 {
    let Some((base, rest)) = vertices.split_first() else {
        return 0.0;
    };
    let k = rest.len();
    if k == 0 {
        return 1.0;
    }
    let n = base.len();
    let mut basis = Vec::with_capacity(n * k);
    let mut edge = vec![0.0; n];
    let mut ratio = 1.0;
    let mut vol = 1.0;
    for v in rest {
        for ((e, a), b) in edge.iter_mut().zip(*v).zip(*base) {
            *e = a - b;
        }
        let len = norm(&edge);
        if len == 0.0 {
            return 0.0;
        }
        orthogonalize(&mut edge, &basis);
        let r = norm(&edge);
        if r <= f64::MIN_POSITIVE * len.max(1.0) {
            return 0.0;
        }
        ratio *= r / len;
        vol *= r;
        basis.extend(edge.iter().map(|e| e / r));
    }
    if ratio * ratio < DEGENERACY_TOL {
        return 0.0;
    }
    vol / factorial(k)
}

/// Largest pairwise Euclidean distance; zero for fewer than two vertices.
pub fn diameter(vertices: &[&[f64]]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            best = best.max(dist(a, b));
        }
    }
    best
}

/// Distance from `vertices[i]` to the affine hull of the other vertices,
/// with the hull taken at its actual affine rank.
pub fn height(vertices: &[&[f64]], i: usize) -> f64 {
    if vertices.len() < 2 {
        return 0.0;
    }
    let others: Vec<&[f64]> = vertices
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, v)| *v)
        .collect();
    let base = others[0];
    let n = base.len();
    let mut basis = Vec::with_capacity(n * others.len());
    let mut edge = vec![0.0; n];
    for v in &others[1..] {
        for ((e, a), b) in edge.iter_mut().zip(*v).zip(base) {
            *e = a - b;
        }
        let len = norm(&edge);
        if len == 0.0 {
            continue;
        }
        orthogonalize(&mut edge, &basis);
        let r = norm(&edge);
        if r <= RANK_TOL * len {
            continue;
        }
        basis.extend(edge.iter().map(|e| e / r));
    }
    for ((e, a), b) in edge.iter_mut().zip(vertices[i]).zip(base) {
        *e = a - b;
    }
    orthogonalize(&mut edge, &basis);
    norm(&edge)
}

/// Minimal height over all vertices.
pub fn min_height(vertices: &[&[f64]]) -> f64 {
    if vertices.len() < 2 {
        return 0.0;
    }
    (0..vertices.len())
        .map(|i| height(vertices, i))
        .fold(f64::INFINITY, f64::min)
}

/// `|π^⊥(p − base)|` for the affine plane `base + frame`.
pub fn dist_to_affine(p: &[f64], base: &[f64], frame: &Subspace) -> Result<f64> {
    let n = frame.ambient_dim();
    for len in [p.len(), base.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let diff: Vec<f64> = p.iter().zip(base).map(|(a, b)| a - b).collect();
    Ok(frame.perp_norm(&diff))
}

/// Safe perturbation radius `ς_k(η) = (1 + η^k/(4·k!))^{1/k} − 1`, as a
/// fraction of `d`, under which an `(η,d)`-voluminous simplex of order `k`
/// keeps its volume within `[¾, 5/4]` of the original.
pub fn varsigma(k: usize, eta: f64) -> Result<f64> {
    if k == 0 {
        return Err(domain("varsigma needs order k ≥ 1"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(domain(format!("eta must lie in (0,1), got {eta}")));
    }
    let kf = k as f64;
    let inner = eta.powi(k as i32) / (4.0 * factorial(k));
    // (1+x)^{1/k} − 1 without cancellation for small x
    Ok((inner.ln_1p() / kf).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tri() -> Simplex {
        Simplex::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]]).unwrap()
    }

    #[test]
    fn equilateral_triangle_measures() {
        let t = tri();
        assert_relative_eq!(t.volume(), 3f64.sqrt() / 4.0, epsilon = 1e-15);
        assert_relative_eq!(t.diameter().unwrap(), 1.0, epsilon = 1e-15);
        for i in 0..3 {
            assert_relative_eq!(t.height(i).unwrap(), 3f64.sqrt() / 2.0, epsilon = 1e-15);
        }
        assert_relative_eq!(t.min_height(), 3f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn collinear_points_have_zero_volume() {
        let s = Simplex::from_rows(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        assert_eq!(s.volume(), 0.0);
        assert!(s.is_degenerate());
        assert_eq!(s.min_height(), 0.0);
    }

    #[test]
    fn three_four_five() {
        let s = Simplex::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        assert_eq!(s.diameter().unwrap(), 5.0);
        assert_eq!(s.volume(), 5.0);
    }

    #[test]
    fn diameter_needs_two_vertices() {
        let s = Simplex::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(matches!(s.diameter(), Err(Error::Domain(_))));
        assert_eq!(s.volume(), 1.0);
    }

    #[test]
    fn faces() {
        let tet = Simplex::from_rows(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ])
        .unwrap();
        let f = tet.face(0).unwrap();
        assert_eq!(f.vertices(), &tet.vertices()[1..]);
        let seg = Simplex::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let p = seg.face(1).unwrap();
        assert_eq!(p.order(), 0);
        assert_eq!(p.vertices()[0].coords(), &[0.0, 0.0]);
        assert!(matches!(tet.face(4), Err(Error::IndexOutOfRange { .. })));
        assert!(p.face(0).is_err());
    }

    #[test]
    fn right_triangle_apex_height() {
        let s = Simplex::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_relative_eq!(s.height(0).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn height_with_degenerate_face_uses_actual_rank() {
        // remaining vertices coincide: the hull is a point
        let s = Simplex::from_rows(&[[0.0, 0.0], [1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_relative_eq!(s.height(0).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert!(s.height(1).unwrap() < 1e-15);
    }

    #[test]
    fn voluminous() {
        let t = tri();
        assert!(t.is_voluminous(VoluminousParams::new(0.5, 1.0).unwrap()).unwrap());
        assert!(!t.is_voluminous(VoluminousParams::new(0.9, 1.0).unwrap()).unwrap());
        assert!(VoluminousParams::new(1.0, 1.0).is_err());
        assert!(VoluminousParams::new(0.5, 0.0).is_err());
    }

    #[test]
    fn varsigma_values() {
        assert_relative_eq!(varsigma(1, 1.0 - 1e-12).unwrap(), 0.25, epsilon = 1e-11);
        let expected = (1.0f64 + 0.25 / 8.0).sqrt() - 1.0;
        assert_relative_eq!(varsigma(2, 0.5).unwrap(), expected, epsilon = 1e-15);
        assert_relative_eq!(expected, 0.015504, epsilon = 1e-6);
        assert!(varsigma(2, 0.0).is_err());
        assert!(varsigma(2, 1.0).is_err());
        assert!(varsigma(0, 0.5).is_err());
    }

    #[test]
    fn point_rejects_nan() {
        assert!(Point::new(vec![0.0, f64::NAN]).is_err());
        assert!(Point::new(vec![]).is_err());
    }

    #[test]
    fn too_many_vertices() {
        assert!(Simplex::from_rows(&[[0.0], [1.0], [2.0]]).is_err());
    }
}
