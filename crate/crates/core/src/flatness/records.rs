use std::io::{BufRead, Write};

use serde::Serialize;

use crate::cloud::WeightedCloud;
use crate::error::{Error, Result};
use crate::grassmann::Subspace;

use super::{ahlfors_density, theta_with, FlatnessOptions};

/// One flatness measurement at `(x, r)`.
#[derive(Clone, Debug, Serialize)]
pub struct ScaleRecord {
    pub center: Vec<f64>,
    pub r: f64,
    pub beta: f64,
    pub theta: f64,
    pub ahlfors_ratio: f64,
    /// The best approximating plane.
    pub plane: Subspace,
    /// Index of the candidate the plane came from.
    pub candidate: usize,
    pub covering_radius: f64,
}

/// Measures `β`, `θ` and the Ahlfors ratio at `(x, r)` jointly. `β` is the
/// smaller of the β optimum and `β` at the θ plane, so `β ≤ θ` always holds.
pub fn scale_record(cloud: &WeightedCloud, x: &[f64], r: f64, opts: &FlatnessOptions) -> Result<ScaleRecord> {
    let t = theta_with(cloud, x, r, opts)?;
    Ok(ScaleRecord {
        center: x.to_vec(),
        r,
        beta: t.beta.min(t.beta_at_plane),
        theta: t.theta,
        ahlfors_ratio: ahlfors_density(cloud, x, r)?,
        plane: t.plane,
        candidate: t.candidate,
        covering_radius: cloud.covering_radius(),
    })
}

const HEADER: &str = "# menger scale-records v1";

/// Writes records as CSV. The first line is a versioned comment carrying
/// `n`, `m` and the covering radius; the second names the columns
/// `cx0..,r,beta,theta,ahlfors_ratio,h0_0..` (plane frame, row-major).
pub fn write_scale_records<W: Write>(
    mut w: W,
    records: &[ScaleRecord],
    n: usize,
    m: usize,
    covering_radius: f64,
) -> std::io::Result<()> {
    writeln!(w, "{HEADER} n={n} m={m} covering_radius={covering_radius}")?;
    let mut cols: Vec<String> = (0..n).map(|i| format!("cx{i}")).collect();
    cols.extend(["r", "beta", "theta", "ahlfors_ratio"].map(String::from));
    for i in 0..n {
        for j in 0..m {
            cols.push(format!("h{i}_{j}"));
        }
    }
    writeln!(w, "{}", cols.join(","))?;
    for rec in records {
        let mut vals: Vec<String> = rec.center.iter().map(|v| v.to_string()).collect();
        vals.extend([rec.r, rec.beta, rec.theta, rec.ahlfors_ratio].map(|v| v.to_string()));
        vals.extend(rec.plane.frame_row_major().iter().map(|v| v.to_string()));
        writeln!(w, "{}", vals.join(","))?;
    }
    Ok(())
}

/// Reads records written by [`write_scale_records`]. Candidate indices are
/// not stored and come back as 0.
pub fn read_scale_records<R: BufRead>(reader: R) -> Result<Vec<ScaleRecord>> {
    let bad = |line: usize, message: String| Error::Parse {
        path: "<scale records>".into(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate();
    let (_, head) = lines.next().ok_or_else(|| bad(1, "missing header".into()))?;
    let head = head?;
    let rest = head
        .strip_prefix(HEADER)
        .ok_or_else(|| bad(1, format!("expected `{HEADER}`")))?;
    let (mut n, mut m, mut cov) = (None, None, None);
    for kv in rest.split_whitespace() {
        match kv.split_once('=') {
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            Some(("m", v)) => m = v.parse::<usize>().ok(),
            Some(("covering_radius", v)) => cov = v.parse::<f64>().ok(),
            _ => return Err(bad(1, format!("unknown header field `{kv}`"))),
        }
    }
    let (Some(n), Some(m), Some(cov)) = (n, m, cov) else {
        return Err(bad(1, "header needs n, m and covering_radius".into()));
    };
    lines.next();
    let width = n + 4 + n * m;
    let mut out = Vec::new();
    for (k, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(k + 1, e.to_string()))?;
        if vals.len() != width {
            return Err(bad(k + 1, format!("expected {width} columns, found {}", vals.len())));
        }
        let frame = nalgebra::DMatrix::from_row_slice(n, m, &vals[n + 4..]);
        out.push(ScaleRecord {
            center: vals[..n].to_vec(),
            r: vals[n],
            beta: vals[n + 1],
            theta: vals[n + 2],
            ahlfors_ratio: vals[n + 3],
            plane: Subspace::from_frame(&frame).map_err(|e| bad(k + 1, e.to_string()))?,
            candidate: 0,
            covering_radius: cov,
        });
    }
    Ok(out)
}
