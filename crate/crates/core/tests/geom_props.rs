mod common;

use menger_core::geom::{self, varsigma, VoluminousParams};
use menger_core::{Simplex, Subspace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{cayley_menger_volume, dist_to_hull_lsq};

/// Order `k ≤ 4` simplices in `R^n`, `k ≤ n ≤ 6`, coordinates in `[−1, 1]`.
fn simplex_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=4)
        .prop_flat_map(|k| (Just(k), k..=6))
        .prop_flat_map(|(k, n)| prop::collection::vec(prop::collection::vec(-1.0f64..1.0, n), k + 1))
}

fn slices(rows: &[Vec<f64>]) -> Vec<&[f64]> {
    rows.iter().map(|r| r.as_slice()).collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn volume_matches_cayley_menger(rows in simplex_rows()) {
        let v = geom::volume(&slices(&rows));
        let oracle = cayley_menger_volume(&rows);
        prop_assume!(oracle > 1e-6);
        prop_assert!(close(v, oracle, 1e-9), "{v} vs {oracle}");
    }

    #[test]
    fn volume_is_permutation_invariant(rows in simplex_rows(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = geom::volume(&slices(&rows));
        let b = geom::volume(&slices(&shuffled));
        prop_assume!(a > 1e-6);
        prop_assert!(close(a, b, 1e-9));
        prop_assert!(close(geom::diameter(&slices(&rows)), geom::diameter(&slices(&shuffled)), 1e-15));
    }

    #[test]
    fn rigid_motions_preserve_measures(rows in simplex_rows(), seed in any::<u64>(), shift in -5.0f64..5.0) {
        let n = rows[0].len();
        let rot = Subspace::random(n, n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let moved: Vec<Vec<f64>> = rows
            .iter()
            .map(|v| (0..n).map(|i| (0..n).map(|j| rot.frame()[(i, j)] * v[j]).sum::<f64>() + shift).collect())
            .collect();
        let (a, b) = (slices(&rows), slices(&moved));
        prop_assume!(geom::volume(&a) > 1e-6);
        prop_assert!(close(geom::volume(&a), geom::volume(&b), 1e-9));
        prop_assert!(close(geom::diameter(&a), geom::diameter(&b), 1e-12));
        prop_assert!(close(geom::min_height(&a), geom::min_height(&b), 1e-8));
    }

    #[test]
    fn scaling_law(rows in simplex_rows(), e in -4i32..=4) {
        let alpha = 2f64.powi(e);
        let s = Simplex::from_rows(&rows).unwrap();
        let t = s.scaled(alpha);
        let k = s.order() as i32;
        prop_assert!(close(t.volume(), alpha.powi(k) * s.volume(), 1e-12));
        prop_assert!(close(t.min_height(), alpha * s.min_height(), 1e-12));
    }

    /// `H^k(T) = H^{k−1}(face_i)·h_i/k` for every vertex.
    #[test]
    fn height_identity(rows in simplex_rows()) {
        let s = Simplex::from_rows(&rows).unwrap();
        prop_assume!(s.volume() > 1e-4);
        let k = s.order() as f64;
        for i in 0..=s.order() {
            let face = s.face(i).unwrap();
            let h = s.height(i).unwrap();
            prop_assert!(close(s.volume(), face.volume() * h / k, 1e-9));
            let others: Vec<Vec<f64>> = rows.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.clone()).collect();
            prop_assert!(close(h, dist_to_hull_lsq(&rows[i], &others), 1e-7));
        }
    }

    /// `(ηd)^k/k! ≤ H^k ≤ d^k/k!` for the simplex's own `(η, d)`.
    #[test]
    fn voluminous_volume_bracket(rows in simplex_rows()) {
        let s = Simplex::from_rows(&rows).unwrap();
        let d = s.diameter().unwrap();
        let eta = s.min_height() / d;
        prop_assume!(eta > 1e-3 && eta < 1.0);
        let k = s.order() as i32;
        let fact: f64 = (1..=k).map(f64::from).product();
        let v = s.volume();
        prop_assert!(v >= (eta * d).powi(k) / fact * (1.0 - 1e-9));
        prop_assert!(v <= d.powi(k) / fact * (1.0 + 1e-9));
        prop_assert!(s.is_voluminous(VoluminousParams::new(eta * (1.0 - 1e-12), d).unwrap()).unwrap());
    }

    /// Moving `x_1..x_k` by at most `ς_k(η)·d` keeps the volume within
    /// `[3/4, 5/4]`.
    #[test]
    fn safe_perturbation(rows in simplex_rows(), noise in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 6), 5)) {
        let s = Simplex::from_rows(&rows).unwrap();
        let d = s.diameter().unwrap();
        let eta = (s.min_height() / d).min(0.999);
        prop_assume!(eta > 0.05);
        let k = s.order();
        let n = rows[0].len();
        let radius = varsigma(k, eta).unwrap() * d;
        let moved: Vec<Vec<f64>> = rows
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if i == 0 {
                    return v.clone();
                }
                let dir = &noise[i - 1][..n];
                let len = dir.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-12);
                v.iter().zip(dir).map(|(a, b)| a + radius * b / len).collect()
            })
            .collect();
        let ratio = geom::volume(&slices(&moved)) / s.volume();
        prop_assert!((0.75 - 1e-9..=1.25 + 1e-9).contains(&ratio), "ratio {ratio}");
    }

    /// `ς_k(η)/η^k` stays between two positive constants and `ς_k ≤ 1/4`.
    #[test]
    fn varsigma_asymptotics(k in 1usize..=6, eta in 1e-6f64..0.999) {
        let s = varsigma(k, eta).unwrap();
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let ratio = s / eta.powi(k as i32);
        // (1+x)^{1/k} − 1 lies between x/(k(1+x)) and x/k
        let x_over = 1.0 / (4.0 * fact);
        prop_assert!(ratio <= x_over / k as f64 * (1.0 + 1e-9));
        prop_assert!(ratio >= x_over / (k as f64 * (1.0 + x_over)) * (1.0 - 1e-9));
        prop_assert!(s <= 0.25);
    }
}

#[test]
fn regular_simplex_volumes() {
    // regular k-simplex with unit edge: √(k+1)/(k!·2^{k/2})
    for k in 1..=6usize {
        let rows: Vec<Vec<f64>> = (0..=k)
            .map(|i| (0..=k).map(|j| if i == j { std::f64::consts::FRAC_1_SQRT_2 } else { 0.0 }).collect())
            .collect();
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let expected = ((k + 1) as f64).sqrt() / (fact * 2f64.powf(k as f64 / 2.0));
        let v = geom::volume(&slices(&rows));
        assert!(close(v, expected, 1e-12), "k={k}: {v} vs {expected}");
    }
}
