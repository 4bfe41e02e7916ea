use std::f64::consts::PI;
use std::io::Write;

use menger_core::shapes::{generate, load_cloud, load_mesh, sample_mesh, save_cloud, sphere_area, GeneratorSpec};
use menger_core::{Error, WeightedCloud};
use proptest::prelude::*;

/// Regular icosahedron inscribed in the unit sphere.
fn icosahedron() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let s = 1.0 / (1.0 + g * g).sqrt();
    let raw = [
        [-1.0, g, 0.0],
        [1.0, g, 0.0],
        [-1.0, -g, 0.0],
        [1.0, -g, 0.0],
        [0.0, -1.0, g],
        [0.0, 1.0, g],
        [0.0, -1.0, -g],
        [0.0, 1.0, -g],
        [g, 0.0, -1.0],
        [g, 0.0, 1.0],
        [-g, 0.0, -1.0],
        [-g, 0.0, 1.0],
    ];
    let v = raw.iter().map(|p| p.map(|c| c * s)).collect();
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v, f)
}

fn icosahedron_area() -> f64 {
    let a = 4.0 / (10.0 + 2.0 * 5f64.sqrt()).sqrt();
    20.0 * 3f64.sqrt() / 4.0 * a * a
}

fn write_file(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    std::fs::File::create(&path).unwrap().write_all(text.as_bytes()).unwrap();
    path
}

fn off_text() -> String {
    let (v, f) = icosahedron();
    let mut s = format!("OFF\n{} {} 30\n", v.len(), f.len());
    for p in &v {
        s += &format!("{} {} {}\n", p[0], p[1], p[2]);
    }
    for t in &f {
        s += &format!("3 {} {} {}\n", t[0], t[1], t[2]);
    }
    s
}

fn obj_text() -> String {
    let (v, f) = icosahedron();
    let mut s = String::from("# icosahedron\no ico\n");
    for p in &v {
        s += &format!("v {} {} {}\n", p[0], p[1], p[2]);
    }
    for t in &f {
        s += &format!("f {}/1 {} {}\n", t[0] + 1, t[1] + 1, t[2] as i64 - v.len() as i64);
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn circle_length(n in 3usize..500, radius in 0.01f64..100.0) {
        let c = generate(&GeneratorSpec::Circle { n_samples: n, radius }).unwrap();
        prop_assert_eq!(c.len(), n);
        prop_assert!((c.total_weight() - 2.0 * PI * radius).abs() <= 1e-12 * radius * n as f64);
        prop_assert!(c.points().all(|p| (p[0].hypot(p[1]) - radius).abs() <= 1e-12 * radius));
    }

    #[test]
    fn sphere_area_matches(m in 1usize..=3, extra in 0usize..=2, n_samples in 10usize..400, radius in 0.1f64..10.0, seed in any::<u64>()) {
        let n = m + 1 + extra;
        let s = generate(&GeneratorSpec::Sphere { m, n, n_samples, radius, seed }).unwrap();
        prop_assert_eq!(s.ambient_dim(), n);
        prop_assert!((s.total_weight() - sphere_area(m, radius)).abs() <= 1e-10 * sphere_area(m, radius));
        for p in s.points() {
            let r = p.iter().map(|c| c * c).sum::<f64>().sqrt();
            prop_assert!((r - radius).abs() <= 1e-12 * radius);
        }
    }

    #[test]
    fn torus_area(major in 1.0f64..5.0, frac in 0.05f64..0.9, n_samples in 20usize..2000) {
        let minor = major * frac;
        let t = generate(&GeneratorSpec::Torus { major, minor, n_samples }).unwrap();
        let exact = 4.0 * PI * PI * major * minor;
        prop_assert!((t.total_weight() - exact).abs() <= 1e-10 * exact);
    }

    #[test]
    fn csv_round_trip(coords in prop::collection::vec(-1e6f64..1e6, 3..60), seed in any::<u64>()) {
        let npts = coords.len() / 3;
        prop_assume!(npts >= 1);
        let coords = coords[..3 * npts].to_vec();
        let weights: Vec<f64> = (0..npts).map(|i| 1.0 + ((seed >> (i % 60)) & 7) as f64 / 3.0).collect();
        let cloud = WeightedCloud::new(3, 2, coords, weights).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        save_cloud(&path, &cloud).unwrap();
        let back = load_cloud(&path).unwrap();
        prop_assert_eq!(back.intrinsic_dim(), 2);
        prop_assert_eq!(back.coords(), cloud.coords());
        prop_assert_eq!(back.weights(), cloud.weights());
    }
}

#[test]
fn graph_arc_length() {
    // y = t² on [0, 1]: (2√5 + asinh 2)/4
    let g = generate(&GeneratorSpec::Graph {
        exponent: 2.0,
        coefficient: 1.0,
        domain: [0.0, 1.0],
        n_samples: 101,
    })
    .unwrap();
    let exact = (2.0 * 5f64.sqrt() + 2f64.asinh()) / 4.0;
    assert!((g.total_weight() - exact).abs() < 1e-12);
    // |t| on [−1, 2]: 3√2
    let v = generate(&GeneratorSpec::Graph {
        exponent: 1.0,
        coefficient: 1.0,
        domain: [-1.0, 2.0],
        n_samples: 31,
    })
    .unwrap();
    assert!((v.total_weight() - 3.0 * 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn disk_area() {
    for spacing in [0.05, 0.02] {
        let d = generate(&GeneratorSpec::Disk {
            radius: 1.0,
            spacing,
            n: 3,
        })
        .unwrap();
        assert!((d.total_weight() - PI).abs() < 4.0 * spacing, "spacing {spacing}");
        assert!(d.points().all(|p| p[2] == 0.0));
    }
}

#[test]
fn generation_is_deterministic() {
    let specs = [
        GeneratorSpec::Sphere {
            m: 3,
            n: 5,
            n_samples: 200,
            radius: 1.0,
            seed: 42,
        },
        GeneratorSpec::Koch {
            level: 3,
            n_samples: 300,
        },
        GeneratorSpec::PlaneWithHole {
            hole_radius: 0.3,
            extent: 1.0,
            spacing: 0.1,
            n: 3,
        },
    ];
    for spec in &specs {
        let (a, b) = (generate(spec).unwrap(), generate(spec).unwrap());
        assert_eq!(a.coords(), b.coords());
        assert_eq!(a.weights(), b.weights());
        let tag = a.provenance().unwrap();
        let parsed: GeneratorSpec = serde_json::from_str(tag).unwrap();
        assert_eq!(&parsed, spec);
    }
}

#[test]
fn specs_reject_unknown_fields() {
    let ok: GeneratorSpec = serde_json::from_str(r#"{"kind":"circle","n_samples":10}"#).unwrap();
    assert_eq!(ok, GeneratorSpec::Circle { n_samples: 10, radius: 1.0 });
    assert!(serde_json::from_str::<GeneratorSpec>(r#"{"kind":"circle","n_samples":10,"radus":2}"#).is_err());
    assert!(serde_json::from_str::<GeneratorSpec>(r#"{"kind":"blob","n_samples":10}"#).is_err());
}

#[test]
fn meshes_load_and_sample() {
    let dir = tempfile::tempdir().unwrap();
    let exact = icosahedron_area();
    for (name, text) in [("ico.off", off_text()), ("ico.OBJ", obj_text())] {
        let path = write_file(&dir, name, &text);
        let mesh = load_mesh(&path).unwrap();
        assert_eq!(mesh.triangles.len(), 20);
        assert!((mesh.total_area() - exact).abs() < 1e-12, "{name}");
        assert!(mesh.degenerate_triangles().is_empty());
        let cloud = sample_mesh(&mesh, 2000, 7).unwrap();
        assert!(cloud.len() >= 2000);
        assert!((cloud.total_weight() - exact).abs() < 1e-12);
        // samples lie inside the solid, at least at the inradius
        let inradius = icosahedron_inradius();
        for p in cloud.points() {
            let r = p.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!(r >= inradius - 1e-12 && r <= 1.0 + 1e-12);
        }
        let again = sample_mesh(&mesh, 2000, 7).unwrap();
        assert_eq!(again.coords(), cloud.coords());
    }
}

/// Inradius of the icosahedron with unit circumradius.
fn icosahedron_inradius() -> f64 {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    g * g / (3f64.sqrt() * (1.0 + g * g).sqrt())
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("bad_vertex.off", "OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n", 4),
        ("bad_index.off", "OFF\n# comment\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n", 7),
        ("bad_face.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\n\nf 1 2 9\n", 5),
        ("bad_row.csv", "# n=2 m=1\n0,0,1\n1,1,1\n2,nan?,1\n", 4),
    ];
    for (name, text, want) in cases {
        let path = write_file(&dir, name, text);
        let err = if name.ends_with(".csv") {
            load_cloud(&path).unwrap_err()
        } else {
            load_mesh(&path).unwrap_err()
        };
        match err {
            Error::Parse { line, path: p, .. } => {
                assert_eq!(line, want, "{name}");
                assert_eq!(p, path);
            }
            other => panic!("{name}: {other:?}"),
        }
    }
    assert!(load_mesh(dir.path().join("missing.off")).is_err());
    let stl = write_file(&dir, "x.stl", "solid");
    assert!(load_mesh(&stl).is_err());
}
