//! Linear subspaces of `R^n` stored as orthonormal frames, the operator-norm
//! metric `d_Gr(U,V) = ‖π_U − π_V‖`, ρε-bases, tracked Gram–Schmidt and the
//! cone predicates `C(δ,H) = {x : |π^⊥_H x| ≥ δ|x|}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constants::{c_gs, c_pi, eps_red};
use crate::error::{domain, Error, Result};
use crate::geom::{dot, norm};

/// Relative residual below which a vector counts as dependent on its
/// predecessors when building frames.
const FRAME_RANK_TOL: f64 = 1e-10;

/// An `m`-dimensional linear subspace of `R^n`, `1 ≤ m ≤ n`, stored as an
/// `n × m` matrix with orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    frame: DMatrix<f64>,
}

impl Subspace {
    /// Orthonormalizes `vectors` and returns their span.
    pub fn from_basis<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| domain("a subspace needs at least one basis vector"))?;
        let n = first.as_ref().len();
        if n == 0 {
            return Err(domain("ambient dimension must be positive"));
        }
        if vectors.len() > n {
            return Err(Error::RankDeficient { index: n });
        }
        let mut cols: Vec<f64> = Vec::with_capacity(n * vectors.len());
        for (index, v) in vectors.iter().enumerate() {
            let v = v.as_ref();
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(domain(format!("basis vector {index} is not finite")));
            }
            let len = norm(v);
            let mut w = v.to_vec();
            for _ in 0..2 {
                for q in cols.chunks_exact(n) {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            let r = norm(&w);
            if len == 0.0 || r <= FRAME_RANK_TOL * len {
                return Err(Error::RankDeficient { index });
            }
            cols.extend(w.iter().map(|x| x / r));
        }
        Ok(Subspace {
            frame: DMatrix::from_column_slice(n, vectors.len(), &cols),
        })
    }

    /// Re-orthonormalizes the columns of an `n × m` matrix.
    pub fn from_frame(frame: &DMatrix<f64>) -> Result<Self> {
        let cols: Vec<Vec<f64>> = frame
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect();
        Subspace::from_basis(&cols)
    }

    /// `span(e_i : i ∈ axes)` in `R^n`.
    pub fn axes(n: usize, axes: &[usize]) -> Result<Self> {
        let vectors: Vec<Vec<f64>> = axes
            .iter()
            .map(|&a| {
                if a >= n {
                    return Err(Error::IndexOutOfRange { index: a, len: n });
                }
                let mut e = vec![0.0; n];
                e[a] = 1.0;
                Ok(e)
            })
            .collect::<Result<_>>()?;
        Subspace::from_basis(&vectors)
    }

    /// A Haar-random `m`-dimensional subspace.
    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        if m == 0 || m > n {
            return Err(domain(format!("need 1 ≤ m ≤ n, got m={m}, n={n}")));
        }
        loop {
            let vectors: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
                .collect();
            if let Ok(s) = Subspace::from_basis(&vectors) {
                return Ok(s);
            }
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.ambient_dim();
        &self.frame.as_slice()[j * n..(j + 1) * n]
    }

    /// Frame flattened row-major (`n` rows of `m` entries).
    pub fn frame_row_major(&self) -> Vec<f64> {
        let (n, m) = self.frame.shape();
        (0..n)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .map(|(i, j)| self.frame[(i, j)])
            .collect()
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Coordinates of `π_H v` in the frame, i.e. `Qᵀ v`.
    pub fn coordinates(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|j| dot(self.column(j), v)).collect()
    }

    /// `π_H v`.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        Ok(self.project_unchecked(v))
    }

    /// `π^⊥_H v = v − π_H v`.
    pub fn project_perp(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        let p = self.project_unchecked(v);
        Ok(v.iter().zip(&p).map(|(a, b)| a - b).collect())
    }

    pub(crate) fn project_unchecked(&self, v: &[f64]) -> Vec<f64> {
        let n = self.ambient_dim();
        let mut out = vec![0.0; n];
        for j in 0..self.dim() {
            let q = self.column(j);
            let c = dot(q, v);
            out.iter_mut().zip(q).for_each(|(o, qi)| *o += c * qi);
        }
        out
    }

    /// `|π^⊥_H v|`, computed from the explicit residual. No dimension check.
    pub fn perp_norm(&self, v: &[f64]) -> f64 {
        let mut w = v.to_vec();
        for j in 0..self.dim() {
            let q = self.column(j);
            let c = dot(q, &w);
            w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
        }
        norm(&w)
    }

    /// The orthogonal projector `π_H` as an `n × n` matrix.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }

    /// The orthogonal complement `H^⊥`, or `None` when `H = R^n`.
    pub fn complement(&self) -> Option<Subspace> {
        let n = self.ambient_dim();
        let m = self.dim();
        if m == n {
            return None;
        }
        let mut basis: Vec<Vec<f64>> = (0..m).map(|j| self.column(j).to_vec()).collect();
        for a in 0..n {
            let mut e = vec![0.0; n];
            e[a] = 1.0;
            let mut trial = basis.clone();
            trial.push(e.clone());
            if Subspace::from_basis(&trial).is_ok() {
                basis.push(e);
                if basis.len() == n {
                    break;
                }
            }
        }
        let full = Subspace::from_basis(&basis).ok()?;
        let cols: Vec<Vec<f64>> = (m..n).map(|j| full.column(j).to_vec()).collect();
        Subspace::from_basis(&cols).ok()
    }
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cols: Vec<Vec<f64>> = (0..self.dim()).map(|j| self.column(j).to_vec()).collect();
        cols.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let cols = Vec::<Vec<f64>>::deserialize(d)?;
        Subspace::from_basis(&cols).map_err(serde::de::Error::custom)
    }
}

fn spectral_norm_symmetric(m: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, e| acc.max(e.abs()))
}

fn check_same_ambient(u: &Subspace, v: &Subspace) -> Result<()> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: u.ambient_dim(),
            got: v.ambient_dim(),
        });
    }
    Ok(())
}

/// `d_Gr(U,V) = ‖π_U − π_V‖`, the largest singular value of the projector
/// difference.
pub fn grassmann_distance(u: &Subspace, v: &Subspace) -> Result<f64> {
    check_same_ambient(u, v)?;
    Ok(spectral_norm_symmetric(u.projector() - v.projector()))
}

/// The same distance evaluated as `‖π^⊥_V − π^⊥_U‖`.
pub fn grassmann_distance_perp(u: &Subspace, v: &Subspace) -> Result<f64> {
    check_same_ambient(u, v)?;
    let n = u.ambient_dim();
    let id = DMatrix::<f64>::identity(n, n);
    let pu = &id - u.projector();
    let pv = &id - v.projector();
    Ok(spectral_norm_symmetric(pv - pu))
}

/// Classical Gram–Schmidt `v̂_1 = v_1/|v_1|`, `ṽ_i = v_i − Σ_{j<i} ⟨v_i, v̂_j⟩ v̂_j`,
/// `v̂_i = ṽ_i/|ṽ_i|`, returning the span and `max_i |v_i − v̂_i|`.
pub fn orthonormalize_tracked<V: AsRef<[f64]>>(vectors: &[V]) -> Result<(Subspace, f64)> {
    let first = vectors
        .first()
        .ok_or_else(|| domain("need at least one vector"))?;
    let n = first.as_ref().len();
    let mut hats: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    let mut deviation = 0.0f64;
    for (index, v) in vectors.iter().enumerate() {
        let v = v.as_ref();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        let coeffs: Vec<f64> = hats.iter().map(|h| dot(v, h)).collect();
        let mut tilde = v.to_vec();
        for (c, h) in coeffs.iter().zip(&hats) {
            tilde.iter_mut().zip(h).for_each(|(t, hi)| *t -= c * hi);
        }
        let len = norm(v);
        let r = norm(&tilde);
        if len == 0.0 || r <= FRAME_RANK_TOL * len {
            return Err(Error::RankDeficient { index });
        }
        let hat: Vec<f64> = tilde.iter().map(|t| t / r).collect();
        let dev = v
            .iter()
            .zip(&hat)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        deviation = deviation.max(dev);
        hats.push(hat);
    }
    Ok((Subspace::from_basis(&hats)?, deviation))
}

/// Smallest `ε` for which `vectors` is a ρε-basis with the given `ρ`.
pub fn rho_eps_defect<V: AsRef<[f64]>>(vectors: &[V], rho: f64) -> f64 {
    let rho2 = rho * rho;
    let mut eps = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            let g = dot(a.as_ref(), b.as_ref()).abs() / rho2;
            eps = eps.max((g - delta).abs());
        }
    }
    eps
}

/// Checks `(δ_ij − ε)ρ² ≤ |⟨v_i, v_j⟩| ≤ (δ_ij + ε)ρ²` for all `i, j`.
pub fn is_rho_eps_basis<V: AsRef<[f64]>>(vectors: &[V], rho: f64, eps: f64) -> bool {
    if vectors.is_empty() || !(rho > 0.0) {
        return false;
    }
    let rho2 = rho * rho;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            if a.as_ref().len() != b.as_ref().len() {
                return false;
            }
            let delta = if i == j { 1.0 } else { 0.0 };
            let g = dot(a.as_ref(), b.as_ref()).abs();
            if g < (delta - eps) * rho2 || g > (delta + eps) * rho2 {
                return false;
            }
        }
    }
    true
}

/// Certified bound `C_π/(1 − C_π C_gs ε)·ϑ` on `d_Gr(span v, span u)` when
/// `v` is a ρε-basis with `ε ≤ ε_red(m)` and `|u_i − v_i| ≤ ϑρ`.
///
/// `ε` is taken as the smallest value for which `v` is a ρε-basis. Violated
/// preconditions are reported, never clamped.
pub fn angle_perturbation_bound<V: AsRef<[f64]>, W: AsRef<[f64]>>(
    v_basis: &[V],
    u_vectors: &[W],
    rho: f64,
    theta: f64,
) -> Result<f64> {
    let m = v_basis.len();
    if m == 0 || u_vectors.len() != m {
        return Err(domain("both bases must have the same positive number of vectors"));
    }
    if !(rho > 0.0) || !(theta >= 0.0) {
        return Err(domain("rho must be positive and theta nonnegative"));
    }
    Subspace::from_basis(v_basis)?;
    Subspace::from_basis(u_vectors)?;
    let n = v_basis[0].as_ref().len();
    if u_vectors[0].as_ref().len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u_vectors[0].as_ref().len(),
        });
    }
    let eps = rho_eps_defect(v_basis, rho);
    if eps > eps_red(m) {
        return Err(Error::Precondition(format!(
            "basis is a ρε-basis only for ε = {eps:.3e} > ε_red({m}) = {:.3e}",
            eps_red(m)
        )));
    }
    for (i, (u, v)) in u_vectors.iter().zip(v_basis).enumerate() {
        let d: f64 = u
            .as_ref()
            .iter()
            .zip(v.as_ref())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if d > theta * rho * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "|u_{i} − v_{i}| = {d:.3e} exceeds ϑρ = {:.3e}",
                theta * rho
            )));
        }
    }
    let cp = c_pi(m);
    Ok(cp / (1.0 - cp * c_gs(m) * eps) * theta)
}

/// The cone `C(δ,H) = {x : |π^⊥_H x| ≥ δ|x|}`, optionally intersected with
/// the open shell `A(r,R) = B_R \ B̄_r` (a conical cap).
#[derive(Clone, Debug)]
pub struct Cone {
    delta: f64,
    axis_complement: Subspace,
    radii: Option<(f64, f64)>,
}

impl Cone {
    pub fn new(delta: f64, h: Subspace) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(domain(format!("cone angle must lie in (0,1), got {delta}")));
        }
        Ok(Cone {
            delta,
            axis_complement: h,
            radii: None,
        })
    }

    pub fn cap(delta: f64, h: Subspace, r: f64, big_r: f64) -> Result<Self> {
        if !(r >= 0.0 && r < big_r) {
            return Err(domain(format!("cap radii need 0 ≤ r < R, got ({r}, {big_r})")));
        }
        let mut cone = Cone::new(delta, h)?;
        cone.radii = Some((r, big_r));
        Ok(cone)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn axis_complement(&self) -> &Subspace {
        &self.axis_complement
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.axis_complement.check_dim(x)?;
        let len = norm(x);
        let in_cone = self.axis_complement.perp_norm(x) >= self.delta * len;
        Ok(match self.radii {
            None => in_cone,
            Some((r, big_r)) => in_cone && len > r && len < big_r,
        })
    }
}

/// Outcome of a randomized refutation attempt of a cone inclusion.
#[derive(Clone, Debug, Serialize)]
pub struct InclusionCheck {
    /// `false` iff a witness of non-inclusion was found.
    pub holds: bool,
    pub witness: Option<Vec<f64>>,
    pub samples_checked: usize,
    /// Angle of the sampled cone `(α+β)/√(1−β²) + ε`.
    pub inner_delta: f64,
}

/// Randomized one-sided check of `C((α+β)/√(1−β²) + ε, H0) ⊆ C(ε, H1)`.
///
/// Preconditions: `α, β > 0`, `α + β < √(1−β²)`, and the dual cones
/// `C(√(1−α²), H0^⊥)` and `C(√(1−β²), H1^⊥)` must intersect; the latter is
/// verified with an explicit common vector. Samples are drawn uniformly on the
/// unit sphere and kept when they lie in the left cone. A `true` result only
/// means no counterexample was found.
pub fn cone_inclusion_check(
    alpha: f64,
    beta: f64,
    h0: &Subspace,
    h1: &Subspace,
    eps: f64,
    n_samples: usize,
    seed: u64,
) -> Result<InclusionCheck> {
    check_same_ambient(h0, h1)?;
    if h0.dim() != h1.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            got: h1.dim(),
        });
    }
    if !(alpha > 0.0 && beta > 0.0 && eps > 0.0) {
        return Err(Error::Precondition("α, β and ε must be positive".into()));
    }
    if !(beta < 1.0 && alpha + beta < (1.0 - beta * beta).sqrt()) {
        return Err(Error::Precondition(format!(
            "α + β = {} must be smaller than √(1−β²)",
            alpha + beta
        )));
    }
    if !dual_cones_intersect(alpha, beta, h0, h1) {
        return Err(Error::Precondition(
            "no common vector of C(√(1−α²), H0^⊥) and C(√(1−β²), H1^⊥) found".into(),
        ));
    }
    let n = h0.ambient_dim();
    let inner_delta = (alpha + beta) / (1.0 - beta * beta).sqrt() + eps;
    if inner_delta > 1.0 || h0.dim() == n {
        // the left cone is {0}
        return Ok(InclusionCheck {
            holds: true,
            witness: None,
            samples_checked: 0,
            inner_delta,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = n_samples.saturating_mul(1000).max(1_000_000);
    let mut attempts = 0usize;
    let mut accepted = 0usize;
    let mut x = vec![0.0; n];
    while accepted < n_samples {
        if attempts >= max_attempts {
            return Err(Error::SamplingFailed {
                attempts,
                reason: format!(
                    "only {accepted} of {n_samples} samples landed in C({inner_delta:.4}, H0)"
                ),
            });
        }
        attempts += 1;
        x.iter_mut().for_each(|c| *c = rng.sample(StandardNormal));
        let len = norm(&x);
        if len == 0.0 {
            continue;
        }
        x.iter_mut().for_each(|c| *c /= len);
        if h0.perp_norm(&x) < inner_delta {
            continue;
        }
        accepted += 1;
        if h1.perp_norm(&x) < eps {
            return Ok(InclusionCheck {
                holds: false,
                witness: Some(x),
                samples_checked: accepted,
                inner_delta,
            });
        }
    }
    Ok(InclusionCheck {
        holds: true,
        witness: None,
        samples_checked: accepted,
        inner_delta,
    })
}

/// Looks for `x ≠ 0` with `|π^⊥_{H0} x| ≤ α|x|` and `|π^⊥_{H1} x| ≤ β|x|`,
/// trying the direction of `H1` best aligned with `H0` and vice versa.
fn dual_cones_intersect(alpha: f64, beta: f64, h0: &Subspace, h1: &Subspace) -> bool {
    let candidates = [best_aligned(h1, h0), best_aligned(h0, h1)];
    candidates.iter().any(|x| {
        let len = norm(x);
        len > 0.0 && h0.perp_norm(x) <= alpha * len && h1.perp_norm(x) <= beta * len
    })
}

/// Unit vector of `a` maximizing `|π_b x|`.
fn best_aligned(a: &Subspace, b: &Subspace) -> Vec<f64> {
    let cross = b.frame().transpose() * a.frame();
    let svd = cross.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (best, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
    let coeff = DVector::from_iterator(v_t.ncols(), v_t.row(best).iter().copied());
    (a.frame() * coeff).iter().copied().collect()
}
