use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::WeightedCloud;
use crate::error::{domain, Error, Result};
use crate::geom;

/// Triangle mesh in `R³` with per-triangle areas.
#[derive(Clone, Debug)]
pub struct MeshSurface {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    pub areas: Vec<f64>,
}

impl MeshSurface {
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        for t in &triangles {
            if let Some(&i) = t.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: vertices.len(),
                });
            }
        }
        let areas = triangles
            .iter()
            .map(|t| geom::volume(&[&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]]))
            .collect();
        Ok(MeshSurface {
            vertices,
            triangles,
            areas,
        })
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Indices of zero-area triangles.
    pub fn degenerate_triangles(&self) -> Vec<usize> {
        (0..self.areas.len()).filter(|&i| self.areas[i] == 0.0).collect()
    }
}

/// Loads an `.off` or `.obj` file (by extension, case-insensitive).
pub fn load_mesh(path: impl AsRef<Path>) -> Result<MeshSurface> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let reader = BufReader::new(File::open(path)?);
    match ext.as_deref() {
        Some("off") => parse_off(reader, path),
        Some("obj") => parse_obj(reader, path),
        _ => Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "unknown mesh format, expected .off or .obj".into(),
        }),
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        message: message.into(),
    }
}

fn numbers<T: std::str::FromStr>(tokens: &[&str], path: &Path, line: usize) -> Result<Vec<T>> {
    tokens
        .iter()
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| parse_err(path, line, format!("cannot parse `{t}`")))
        })
        .collect()
}

fn fan(poly: &[usize]) -> impl Iterator<Item = [usize; 3]> + '_ {
    (1..poly.len().saturating_sub(1)).map(move |k| [poly[0], poly[k], poly[k + 1]])
}

fn finite_vertex(v: Vec<f64>, path: &Path, line: usize) -> Result<[f64; 3]> {
    if v.iter().any(|c| !c.is_finite()) {
        return Err(parse_err(path, line, "non-finite coordinate"));
    }
    Ok([v[0], v[1], v[2]])
}

/// Object File Format: `OFF`, then `nv nf ne`, `nv` vertex lines and `nf`
/// face lines `k i_1 … i_k`. Polygons are fan-triangulated.
pub fn parse_off<R: BufRead>(reader: R, path: &Path) -> Result<MeshSurface> {
    let mut lines = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim().to_string();
        if !content.is_empty() {
            lines.push((k + 1, content));
        }
    }
    let mut it = lines.into_iter();
    let (l0, first) = it.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let counts_line = if first == "OFF" {
        it.next().ok_or_else(|| parse_err(path, l0, "missing counts line"))?
    } else if let Some(rest) = first.strip_prefix("OFF") {
        (l0, rest.trim().to_string())
    } else {
        return Err(parse_err(path, l0, "expected `OFF` header"));
    };
    let toks: Vec<&str> = counts_line.1.split_whitespace().collect();
    if toks.len() < 2 {
        return Err(parse_err(path, counts_line.0, "expected vertex and face counts"));
    }
    let counts: Vec<usize> = numbers(&toks[..2], path, counts_line.0)?;
    let (nv, nf) = (counts[0], counts[1]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (k, l) = it
            .next()
            .ok_or_else(|| parse_err(path, counts_line.0, "file ends before all vertices"))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(parse_err(path, k, "vertex needs three coordinates"));
        }
        vertices.push(finite_vertex(numbers(&toks[..3], path, k)?, path, k)?);
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (k, l) = it
            .next()
            .ok_or_else(|| parse_err(path, counts_line.0, "file ends before all faces"))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        let deg: usize = numbers(&toks[..1], path, k)?[0];
        if deg < 3 || toks.len() < deg + 1 {
            return Err(parse_err(path, k, format!("face needs at least 3 and exactly {deg} indices")));
        }
        let poly: Vec<usize> = numbers(&toks[1..=deg], path, k)?;
        if let Some(&i) = poly.iter().find(|&&i| i >= nv) {
            return Err(parse_err(path, k, format!("vertex index {i} out of range (0..{nv})")));
        }
        triangles.extend(fan(&poly));
    }
    MeshSurface::new(vertices, triangles)
}

/// Minimal Wavefront OBJ: `v x y z` and `f a b c …` lines (1-based or
/// negative indices, `a/b/c` tokens allowed); everything else is ignored.
pub fn parse_obj<R: BufRead>(reader: R, path: &Path) -> Result<MeshSurface> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let k = k + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.first() {
            Some(&"v") => {
                if toks.len() < 4 {
                    return Err(parse_err(path, k, "vertex needs three coordinates"));
                }
                vertices.push(finite_vertex(numbers(&toks[1..4], path, k)?, path, k)?);
            }
            Some(&"f") => {
                if toks.len() < 4 {
                    return Err(parse_err(path, k, "face needs at least 3 vertices"));
                }
                let mut poly = Vec::with_capacity(toks.len() - 1);
                for t in &toks[1..] {
                    let head = t.split('/').next().unwrap_or("");
                    let i: i64 = head
                        .parse()
                        .map_err(|_| parse_err(path, k, format!("cannot parse face index `{t}`")))?;
                    let nv = vertices.len() as i64;
                    let idx = if i > 0 { i - 1 } else { nv + i };
                    if i == 0 || idx < 0 || idx >= nv {
                        return Err(parse_err(path, k, format!("face index {i} out of range")));
                    }
                    poly.push(idx as usize);
                }
                triangles.extend(fan(&poly));
            }
            _ => {}
        }
    }
    MeshSurface::new(vertices, triangles)
}

/// Area-stratified sample: a triangle of area `a` gets `⌈N·a/A⌉` uniform
/// points, each weighted `a/count`, so the weights sum to the mesh area `A`.
pub fn sample_mesh(mesh: &MeshSurface, n_samples: usize, seed: u64) -> Result<WeightedCloud> {
    let total = mesh.total_area();
    if !(total > 0.0) {
        return Err(domain("mesh has zero total area"));
    }
    if n_samples == 0 {
        return Err(domain("need at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (t, &area) in mesh.triangles.iter().zip(&mesh.areas) {
        if area == 0.0 {
            continue;
        }
        let count = (n_samples as f64 * area / total).ceil() as usize;
        let [a, b, c] = t.map(|i| mesh.vertices[i]);
        for _ in 0..count {
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            let s = r1.sqrt();
            let (u, v, w) = (1.0 - s, s * (1.0 - r2), s * r2);
            coords.extend((0..3).map(|k| u * a[k] + v * b[k] + w * c[k]));
            weights.push(area / count as f64);
        }
    }
    WeightedCloud::new(3, 2, coords, weights)
}
