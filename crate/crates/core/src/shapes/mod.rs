//! Synthetic test sets with quadrature weights, mesh ingestion and the CSV
//! cloud format.

mod csv;
mod mesh;

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::{unit_ball_volume, WeightedCloud};
use crate::error::{domain, Result};

pub use csv::{load_cloud, read_cloud, save_cloud, write_cloud};
pub use mesh::{load_mesh, parse_obj, parse_off, sample_mesh, MeshSurface};

fn one() -> f64 {
    1.0
}

fn three() -> usize {
    3
}

/// A parametric test set. `n_samples` is a target; lattice generators may
/// round it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// Circle of the given radius in `R²`, equally spaced.
    Circle {
        n_samples: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    /// `S^m ⊂ R^{m+1} ⊂ R^n`: equally spaced for `m = 1`, a Fibonacci
    /// lattice for `m = 2`, uniform random points above.
    Sphere {
        m: usize,
        n: usize,
        n_samples: usize,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Torus of revolution in `R³` on a parameter grid with exact cell areas.
    Torus {
        major: f64,
        minor: f64,
        n_samples: usize,
    },
    /// Graph of `f(t) = coefficient·|t|^exponent` over `domain` in `R²`.
    /// Nodes are equally spaced on each side of 0 (which is a node when it
    /// lies in the domain); each node carries half the arc length of its
    /// adjacent cells.
    Graph {
        exponent: f64,
        #[serde(default = "one")]
        coefficient: f64,
        domain: [f64; 2],
        n_samples: usize,
    },
    /// Level-`L` van Koch snowflake polygon on a unit equilateral triangle,
    /// sampled at equal arc-length spacing with equal weights.
    Koch { level: u32, n_samples: usize },
    /// Square lattice of pitch `spacing` in `[−extent, extent]²`, with the
    /// points of the open disk of radius `hole_radius` removed; weights
    /// `spacing²`.
    PlaneWithHole {
        hole_radius: f64,
        #[serde(default = "one")]
        extent: f64,
        spacing: f64,
        #[serde(default = "three")]
        n: usize,
    },
    /// Square lattice of pitch `spacing` in the closed disk of the given
    /// radius; weights `spacing²`.
    Disk {
        #[serde(default = "one")]
        radius: f64,
        spacing: f64,
        #[serde(default = "three")]
        n: usize,
    },
}

impl GeneratorSpec {
    pub fn intrinsic_dim(&self) -> usize {
        match self {
            GeneratorSpec::Circle { .. } | GeneratorSpec::Graph { .. } | GeneratorSpec::Koch { .. } => 1,
            GeneratorSpec::Sphere { m, .. } => *m,
            _ => 2,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(domain(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn enough(n_samples: usize, m: usize) -> Result<()> {
    if n_samples < m + 2 {
        return Err(domain(format!("need at least {} samples, got {n_samples}", m + 2)));
    }
    Ok(())
}

/// Builds the cloud for `spec`, tagged with the spec as provenance.
pub fn generate(spec: &GeneratorSpec) -> Result<WeightedCloud> {
    let cloud = match *spec {
        GeneratorSpec::Circle { n_samples, radius } => {
            enough(n_samples, 1)?;
            positive("radius", radius)?;
            sphere_grid_1(n_samples, radius, 2)?
        }
        GeneratorSpec::Sphere {
            m,
            n,
            n_samples,
            radius,
            seed,
        } => {
            if m == 0 || n < m + 1 {
                return Err(domain(format!("S^{m} does not embed in R^{n}")));
            }
            enough(n_samples, m)?;
            positive("radius", radius)?;
            sphere(m, n, n_samples, radius, seed)?
        }
        GeneratorSpec::Torus {
            major,
            minor,
            n_samples,
        } => {
            positive("major radius", major)?;
            positive("minor radius", minor)?;
            if minor >= major {
                return Err(domain("torus needs minor < major"));
            }
            enough(n_samples, 2)?;
            torus(major, minor, n_samples)?
        }
        GeneratorSpec::Graph {
            exponent,
            coefficient,
            domain: [a, b],
            n_samples,
        } => {
            if !(exponent >= 1.0 && exponent.is_finite()) {
                return Err(domain(format!("graph exponent must be ≥ 1, got {exponent}")));
            }
            if !(a < b && a.is_finite() && b.is_finite() && coefficient.is_finite()) {
                return Err(domain("graph domain must be a finite interval [a, b] with a < b"));
            }
            enough(n_samples, 1)?;
            graph(exponent, coefficient, a, b, n_samples)?
        }
        GeneratorSpec::Koch { level, n_samples } => {
            if level > 12 {
                return Err(domain("koch level above 12 is not supported"));
            }
            enough(n_samples, 1)?;
            koch(level, n_samples)?
        }
        GeneratorSpec::PlaneWithHole {
            hole_radius,
            extent,
            spacing,
            n,
        } => {
            if !(hole_radius >= 0.0) {
                return Err(domain("hole radius must be nonnegative"));
            }
            positive("extent", extent)?;
            positive("spacing", spacing)?;
            lattice(n, spacing, extent, |p| p[0].hypot(p[1]) >= hole_radius)?
        }
        GeneratorSpec::Disk { radius, spacing, n } => {
            positive("radius", radius)?;
            positive("spacing", spacing)?;
            lattice(n, spacing, radius, |p| p[0].hypot(p[1]) <= radius)?
        }
    };
    let tag = serde_json::to_string(spec).unwrap_or_else(|_| format!("{spec:?}"));
    Ok(cloud.with_provenance(tag))
}

/// `H^m(S^m)` for radius `r`: `(m+1)·ω_{m+1}·r^m`.
pub fn sphere_area(m: usize, r: f64) -> f64 {
    (m + 1) as f64 * unit_ball_volume(m + 1) * r.powi(m as i32)
}

fn sphere_grid_1(k: usize, radius: f64, n: usize) -> Result<WeightedCloud> {
    let mut coords = Vec::with_capacity(k * n);
    for i in 0..k {
        let t = 2.0 * PI * i as f64 / k as f64;
        coords.push(radius * t.cos());
        coords.push(radius * t.sin());
        coords.extend(std::iter::repeat_n(0.0, n - 2));
    }
    let chord = 2.0 * radius * (PI / k as f64).sin();
    WeightedCloud::with_covering_radius(n, 1, coords, vec![2.0 * PI * radius / k as f64; k], chord)
}

fn sphere(m: usize, n: usize, k: usize, radius: f64, seed: u64) -> Result<WeightedCloud> {
    let w = sphere_area(m, radius) / k as f64;
    if m == 1 {
        return sphere_grid_1(k, radius, n);
    }
    let mut coords = Vec::with_capacity(k * n);
    if m == 2 {
        let golden = PI * (3.0 - 5f64.sqrt());
        for i in 0..k {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / k as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            coords.extend([radius * rho * phi.cos(), radius * rho * phi.sin(), radius * z]);
            coords.extend(std::iter::repeat_n(0.0, n - 3));
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..k {
            let mut v: Vec<f64> = (0..=m).map(|_| StandardNormal.sample(&mut rng)).collect();
            let len = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            v.iter_mut().for_each(|c| *c *= radius / len);
            coords.extend(v);
            coords.extend(std::iter::repeat_n(0.0, n - m - 1));
        }
    }
    WeightedCloud::new(n, m, coords, vec![w; k])
}

fn torus(big_r: f64, r: f64, target: usize) -> Result<WeightedCloud> {
    let nv = ((target as f64 * r / big_r).sqrt().round() as usize).max(3);
    let nu = target.div_ceil(nv).max(3);
    let (du, dv) = (2.0 * PI / nu as f64, 2.0 * PI / nv as f64);
    let mut coords = Vec::with_capacity(3 * nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = (i as f64 + 0.5) * du;
        for j in 0..nv {
            let (v0, v1) = (j as f64 * dv, (j + 1) as f64 * dv);
            let v = 0.5 * (v0 + v1);
            let ring = big_r + r * v.cos();
            coords.extend([ring * u.cos(), ring * u.sin(), r * v.sin()]);
            // ∫∫ r(R + r cos v) du dv over the cell
            weights.push(r * du * (big_r * dv + r * (v1.sin() - v0.sin())));
        }
    }
    WeightedCloud::new(3, 2, coords, weights)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, 8 points.
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

fn arc_length(e: f64, c: f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL8.iter()
        .map(|(x, w)| {
            let t: f64 = mid + half * x;
            let d = c * e * t.abs().powf(e - 1.0);
            w * (1.0 + d * d).sqrt()
        })
        .sum::<f64>()
        * half
}

fn graph(e: f64, c: f64, a: f64, b: f64, k: usize) -> Result<WeightedCloud> {
    let cells = k - 1;
    let nodes: Vec<f64> = if a < 0.0 && b > 0.0 {
        let left = ((cells as f64 * -a / (b - a)).round() as usize).clamp(1, cells - 1);
        let right = cells - left;
        let mut v: Vec<f64> = (0..left).map(|i| a + (-a) * i as f64 / left as f64).collect();
        v.extend((0..=right).map(|i| b * i as f64 / right as f64));
        v
    } else {
        (0..k).map(|i| a + (b - a) * i as f64 / cells as f64).collect()
    };
    let mut weights = vec![0.0; k];
    for i in 0..cells {
        let s = arc_length(e, c, nodes[i], nodes[i + 1]);
        weights[i] += 0.5 * s;
        weights[i + 1] += 0.5 * s;
    }
    let coords = nodes.iter().flat_map(|&t| [t, c * t.abs().powf(e)]).collect();
    WeightedCloud::new(2, 1, coords, weights)
}

/// Vertices of the closed level-`L` snowflake polygon (first vertex not
/// repeated).
pub fn koch_polygon(level: u32) -> Vec<[f64; 2]> {
    let s3 = 3f64.sqrt();
    let mut poly = vec![[0.0, 0.0], [0.5, s3 / 2.0], [1.0, 0.0]];
    for _ in 0..level {
        let mut next = Vec::with_capacity(poly.len() * 4);
        for i in 0..poly.len() {
            let p = poly[i];
            let q = poly[(i + 1) % poly.len()];
            let d = [(q[0] - p[0]) / 3.0, (q[1] - p[1]) / 3.0];
            let a = [p[0] + d[0], p[1] + d[1]];
            let b = [p[0] + 2.0 * d[0], p[1] + 2.0 * d[1]];
            // outward bump for a clockwise polygon
            let apex = [
                a[0] + 0.5 * d[0] - s3 / 2.0 * d[1],
                a[1] + 0.5 * d[1] + s3 / 2.0 * d[0],
            ];
            next.extend([p, a, apex, b]);
        }
        poly = next;
    }
    poly
}

fn koch(level: u32, k: usize) -> Result<WeightedCloud> {
    let poly = koch_polygon(level);
    let edges = poly.len();
    let total = 3.0 * (4f64 / 3.0).powi(level as i32);
    let step = total / k as f64;
    let edge_len = total / edges as f64;
    let mut coords = Vec::with_capacity(2 * k);
    for i in 0..k {
        let s = i as f64 * step;
        let e = ((s / edge_len).floor() as usize).min(edges - 1);
        let f = (s - e as f64 * edge_len) / edge_len;
        let p = poly[e];
        let q = poly[(e + 1) % edges];
        coords.push(p[0] + f * (q[0] - p[0]));
        coords.push(p[1] + f * (q[1] - p[1]));
    }
    WeightedCloud::new(2, 1, coords, vec![step; k])
}

fn lattice(n: usize, h: f64, extent: f64, keep: impl Fn(&[f64; 2]) -> bool) -> Result<WeightedCloud> {
    if n < 2 {
        return Err(domain("planar lattices need n ≥ 2"));
    }
    let k = (extent / h + 1e-9).floor() as i64;
    let mut coords = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            let p = [i as f64 * h, j as f64 * h];
            if keep(&p) {
                coords.extend(p);
                coords.extend(std::iter::repeat_n(0.0, n - 2));
            }
        }
    }
    let count = coords.len() / n;
    if count < 4 {
        return Err(domain("lattice has fewer than 4 points"));
    }
    WeightedCloud::with_covering_radius(n, 2, coords, vec![h * h; count], h)
}
