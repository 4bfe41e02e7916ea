//! Weighted point samples of an `m`-dimensional set in `R^n`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::geom::dist;

/// `ω_m`, the Lebesgue measure of the unit ball of `R^m`.
pub fn unit_ball_volume(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        // π^{m/2}/Γ(m/2 + 1) via Γ(x+1) = xΓ(x)
        _ => 2.0 * PI / m as f64 * unit_ball_volume(m - 2),
    }
}

/// Open or closed ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ball {
    Open,
    Closed,
}

/// A finite sample of `Σ ⊂ R^n` with nonnegative quadrature weights for `H^m`.
///
/// Coordinates are stored flat, `n` per point. The cloud keeps the points
/// sorted along the coordinate axis of largest spread so that ball queries
/// only scan a slab.
#[derive(Clone, Debug)]
pub struct WeightedCloud {
    n: usize,
    m: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    provenance: Option<String>,
    covering_radius: f64,
    axis: usize,
    order: Vec<usize>,
    keys: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CloudSummary {
    pub n: usize,
    pub m: usize,
    pub points: usize,
    pub total_weight: f64,
    pub covering_radius: f64,
    pub provenance: Option<String>,
}

impl WeightedCloud {
    /// Builds a cloud from flat coordinates. The covering radius is estimated
    /// as the largest nearest-neighbour distance.
    pub fn new(n: usize, m: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let mut cloud = Self::new_unchecked_radius(n, m, coords, weights)?;
        cloud.covering_radius = cloud.max_nearest_neighbor_distance();
        Ok(cloud)
    }

    /// Like [`WeightedCloud::new`] but with a known covering radius.
    pub fn with_covering_radius(
        n: usize,
        m: usize,
        coords: Vec<f64>,
        weights: Vec<f64>,
        covering_radius: f64,
    ) -> Result<Self> {
        let mut cloud = Self::new_unchecked_radius(n, m, coords, weights)?;
        cloud.covering_radius = covering_radius;
        Ok(cloud)
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P], weights: Vec<f64>, m: usize) -> Result<Self> {
        let n = points
            .first()
            .map(|p| p.as_ref().len())
            .ok_or(Error::TooFewPoints { needed: 1, found: 0 })?;
        let mut coords = Vec::with_capacity(n * points.len());
        for p in points {
            let p = p.as_ref();
            if p.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        WeightedCloud::new(n, m, coords, weights)
    }

    fn new_unchecked_radius(n: usize, m: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 || m > n {
            return Err(domain(format!("need 1 ≤ m ≤ n, got m={m}, n={n}")));
        }
        if coords.len() % n != 0 || coords.len() / n != weights.len() {
            return Err(domain(format!(
                "{} coordinates do not match {} weights in R^{n}",
                coords.len(),
                weights.len()
            )));
        }
        if weights.is_empty() {
            return Err(Error::TooFewPoints { needed: 1, found: 0 });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(domain("cloud coordinates must be finite"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(domain("weights must be finite and nonnegative"));
        }
        if !(weights.iter().sum::<f64>() > 0.0) {
            return Err(domain("total weight must be positive"));
        }
        let len = weights.len();
        let axis = (0..n)
            .max_by(|&a, &b| {
                let spread = |k: usize| {
                    let (lo, hi) = (0..len).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
                        let c = coords[i * n + k];
                        (lo.min(c), hi.max(c))
                    });
                    hi - lo
                };
                spread(a).total_cmp(&spread(b))
            })
            .unwrap_or(0);
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by(|&i, &j| coords[i * n + axis].total_cmp(&coords[j * n + axis]));
        let keys = order.iter().map(|&i| coords[i * n + axis]).collect();
        Ok(WeightedCloud {
            n,
            m,
            coords,
            weights,
            provenance: None,
            covering_radius: 0.0,
            axis,
            order,
            keys,
        })
    }

    pub fn with_provenance(mut self, tag: impl Into<String>) -> Self {
        self.provenance = Some(tag.into());
        self
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.n)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Resolution floor of the sample: flatness values at radii below a
    /// small multiple of this are dominated by sampling.
    pub fn covering_radius(&self) -> f64 {
        self.covering_radius
    }

    pub fn summary(&self) -> CloudSummary {
        CloudSummary {
            n: self.n,
            m: self.m,
            points: self.len(),
            total_weight: self.total_weight(),
            covering_radius: self.covering_radius,
            provenance: self.provenance.clone(),
        }
    }

    /// Indices of sample points in `B(center, r)` (open) or `B̄(center, r)`
    /// (closed), in increasing index order.
    pub fn ball_indices(&self, center: &[f64], r: f64, kind: Ball) -> Vec<usize> {
        let c = center[self.axis];
        let lo = self.keys.partition_point(|&k| k < c - r);
        let hi = self.keys.partition_point(|&k| k <= c + r);
        let mut out: Vec<usize> = self.order[lo..hi]
            .iter()
            .copied()
            .filter(|&i| {
                let d = dist(self.point(i), center);
                match kind {
                    Ball::Open => d < r,
                    Ball::Closed => d <= r,
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Checked variant of [`ball_indices`](Self::ball_indices).
    pub fn ball(&self, center: &[f64], r: f64, kind: Ball) -> Result<Vec<usize>> {
        if center.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: center.len(),
            });
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(domain(format!("radius must be positive, got {r}")));
        }
        Ok(self.ball_indices(center, r, kind))
    }

    /// Index and distance of the nearest sample point to `x`, skipping `skip`.
    pub fn nearest(&self, x: &[f64], skip: Option<usize>) -> Option<(usize, f64)> {
        let c = x[self.axis];
        let start = self.keys.partition_point(|&k| k < c);
        let mut best: Option<(usize, f64)> = None;
        let visit = |pos: usize, best: &mut Option<(usize, f64)>| -> bool {
            let gap = (self.keys[pos] - c).abs();
            if let Some((_, d)) = *best {
                if gap > d {
                    return false;
                }
            }
            let i = self.order[pos];
            if Some(i) != skip {
                let d = dist(self.point(i), x);
                if best.is_none_or(|(_, bd)| d < bd) {
                    *best = Some((i, d));
                }
            }
            true
        };
        let mut up = start;
        let mut down = start;
        let (mut up_alive, mut down_alive) = (true, true);
        while up_alive || down_alive {
            if up_alive {
                if up < self.keys.len() {
                    up_alive = visit(up, &mut best);
                    up += 1;
                } else {
                    up_alive = false;
                }
            }
            if down_alive {
                if down > 0 {
                    down -= 1;
                    down_alive = visit(down, &mut best);
                } else {
                    down_alive = false;
                }
            }
        }
        best
    }

    /// The `k` nearest other sample points of point `i`, closest first.
    pub fn k_nearest(&self, i: usize, k: usize) -> Vec<usize> {
        let x = self.point(i);
        let c = x[self.axis];
        let start = self.keys.partition_point(|&key| key < c);
        let mut found: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        let worst = |found: &Vec<(f64, usize)>| {
            if found.len() < k {
                f64::INFINITY
            } else {
                found.last().map_or(f64::INFINITY, |f| f.0)
            }
        };
        let consider = |pos: usize, found: &mut Vec<(f64, usize)>| -> bool {
            if (self.keys[pos] - c).abs() > worst(found) {
                return false;
            }
            let j = self.order[pos];
            if j != i {
                let d = dist(self.point(j), x);
                if d < worst(found) {
                    let at = found.partition_point(|f| f.0 <= d);
                    found.insert(at, (d, j));
                    found.truncate(k);
                }
            }
            true
        };
        let (mut up, mut down) = (start, start);
        let (mut up_alive, mut down_alive) = (true, true);
        while up_alive || down_alive {
            if up_alive {
                up_alive = up < self.keys.len() && consider(up, &mut found);
                up += 1;
            }
            if down_alive {
                down_alive = down > 0 && {
                    down -= 1;
                    consider(down, &mut found)
                };
            }
        }
        found.into_iter().map(|(_, j)| j).collect()
    }

    fn max_nearest_neighbor_distance(&self) -> f64 {
        if self.len() < 2 {
            return 0.0;
        }
        (0..self.len())
            .map(|i| self.nearest(self.point(i), Some(i)).map_or(0.0, |(_, d)| d))
            .fold(0.0, f64::max)
    }

    /// The sub-cloud on the given indices (covering radius recomputed).
    pub fn subset(&self, indices: &[usize]) -> Result<WeightedCloud> {
        let mut coords = Vec::with_capacity(indices.len() * self.n);
        let mut weights = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.len(),
                });
            }
            coords.extend_from_slice(self.point(i));
            weights.push(self.weights[i]);
        }
        let mut out = WeightedCloud::new(self.n, self.m, coords, weights)?;
        out.provenance = self.provenance.clone();
        Ok(out)
    }

    /// The image under `x ↦ alpha·x` with weights rescaled by `alpha^m`.
    pub fn scaled(&self, alpha: f64) -> Result<WeightedCloud> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(domain("scale factor must be positive"));
        }
        let coords = self.coords.iter().map(|c| c * alpha).collect();
        let wscale = alpha.powi(self.m as i32);
        let weights = self.weights.iter().map(|w| w * wscale).collect();
        let mut out = WeightedCloud::with_covering_radius(
            self.n,
            self.m,
            coords,
            weights,
            self.covering_radius * alpha,
        )?;
        out.provenance = self.provenance.clone();
        Ok(out)
    }

    /// Reweights the cloud with the given weights.
    pub fn reweighted(&self, weights: Vec<f64>) -> Result<WeightedCloud> {
        let mut out = WeightedCloud::with_covering_radius(
            self.n,
            self.m,
            self.coords.clone(),
            weights,
            self.covering_radius,
        )?;
        out.provenance = self.provenance.clone();
        Ok(out)
    }
}
