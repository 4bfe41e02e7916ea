//! CSV clouds: a `# n=<n> m=<m>` header, then one point per row with its `n`
//! coordinates followed by its weight. Values are written in shortest
//! round-trip form, so reading back is bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::cloud::WeightedCloud;
use crate::error::{Error, Result};

pub fn write_cloud<W: Write>(mut w: W, cloud: &WeightedCloud) -> std::io::Result<()> {
    writeln!(w, "# n={} m={}", cloud.ambient_dim(), cloud.intrinsic_dim())?;
    for (i, p) in cloud.points().enumerate() {
        let mut row: Vec<String> = p.iter().map(|c| format!("{c:?}")).collect();
        row.push(format!("{:?}", cloud.weight(i)));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_cloud<R: BufRead>(reader: R, path: &Path) -> Result<WeightedCloud> {
    let bad = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = reader.lines();
    let head = lines.next().ok_or_else(|| bad(1, "empty file".into()))??;
    let rest = head
        .strip_prefix('#')
        .ok_or_else(|| bad(1, "expected header `# n=<n> m=<m>`".into()))?;
    let (mut n, mut m) = (None, None);
    for kv in rest.split_whitespace() {
        match kv.split_once('=') {
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            Some(("m", v)) => m = v.parse::<usize>().ok(),
            _ => return Err(bad(1, format!("unexpected header token `{kv}`"))),
        }
    }
    let (Some(n), Some(m)) = (n, m) else {
        return Err(bad(1, "header needs n=<n> and m=<m>".into()));
    };
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        let k = k + 2;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(k, format!("cannot parse `{}`", t.trim())))
            })
            .collect::<Result<_>>()?;
        if vals.len() != n + 1 {
            return Err(bad(k, format!("expected {} values, found {}", n + 1, vals.len())));
        }
        coords.extend_from_slice(&vals[..n]);
        weights.push(vals[n]);
    }
    WeightedCloud::new(n, m, coords, weights)
}

pub fn save_cloud(path: impl AsRef<Path>, cloud: &WeightedCloud) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_cloud(&mut w, cloud)?;
    w.flush()?;
    Ok(())
}

pub fn load_cloud(path: impl AsRef<Path>) -> Result<WeightedCloud> {
    let path = path.as_ref();
    read_cloud(BufReader::new(File::open(path)?), path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let coords = vec![0.1, -0.0, 1e-300, 2.5e300, 1.0 / 3.0, -7.0];
        let c = WeightedCloud::new(2, 1, coords.clone(), vec![0.7, 1e-9, 3.0]).unwrap();
        let mut buf = Vec::new();
        write_cloud(&mut buf, &c).unwrap();
        let back = read_cloud(buf.as_slice(), Path::new("mem")).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(back.coords()), bits(&coords));
        assert_eq!(bits(back.weights()), bits(c.weights()));
    }

    #[test]
    fn bad_rows() {
        let text = "# n=2 m=1\n0,0,1\n1,2\n";
        match read_cloud(text.as_bytes(), Path::new("x.csv")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(read_cloud("n=2 m=1\n".as_bytes(), Path::new("x.csv")).is_err());
    }
}
