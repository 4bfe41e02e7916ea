mod common;

use menger_core::constants::{c_gs, c_pi, eps_red};
use menger_core::grassmann::{
    angle_perturbation_bound, cone_inclusion_check, grassmann_distance_perp, orthonormalize_tracked,
    rho_eps_defect,
};
use menger_core::{grassmann_distance, Cone, Subspace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::random_unit;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=6).prop_flat_map(|n| (Just(n), 1..=n))
}

fn random(n: usize, m: usize, seed: u64) -> Subspace {
    Subspace::random(n, m, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

/// Columns of `s` each moved by a random vector of length `amount`.
fn perturbed_columns(s: &Subspace, amount: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = s.ambient_dim();
    (0..s.dim())
        .map(|j| {
            let dir = random_unit(rng, n);
            let t = rng.random_range(0.0..=amount);
            s.column(j).iter().zip(&dir).map(|(a, b)| a + t * b).collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_is_a_metric((n, m) in dims(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (u, v, w) = (random(n, m, a), random(n, m, b), random(n, m, c));
        let uv = grassmann_distance(&u, &v).unwrap();
        prop_assert!(grassmann_distance(&u, &u).unwrap() < 1e-12);
        prop_assert!((uv - grassmann_distance(&v, &u).unwrap()).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&uv));
        let uw = grassmann_distance(&u, &w).unwrap();
        let wv = grassmann_distance(&w, &v).unwrap();
        prop_assert!(uv <= uw + wv + 1e-12);
        prop_assert!((uv - grassmann_distance_perp(&u, &v).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn distance_is_invariant_under_complements((n, m) in dims(), a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(m < n);
        let (u, v) = (random(n, m, a), random(n, m, b));
        let d = grassmann_distance(&u, &v).unwrap();
        let dc = grassmann_distance(&u.complement().unwrap(), &v.complement().unwrap()).unwrap();
        prop_assert!((d - dc).abs() < 1e-10);
    }

    #[test]
    fn projections_split_length((n, m) in dims(), a in any::<u64>(), x in prop::collection::vec(-10.0f64..10.0, 6)) {
        let u = random(n, m, a);
        let x = &x[..n];
        let p = u.project(x).unwrap();
        let q = u.project_perp(x).unwrap();
        let lhs: f64 = p.iter().chain(&q).map(|c| c * c).sum();
        let rhs: f64 = x.iter().map(|c| c * c).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
        let dot: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
        prop_assert!(dot.abs() <= 1e-10 * rhs.max(1.0));
        prop_assert!((u.perp_norm(x) - q.iter().map(|c| c * c).sum::<f64>().sqrt()).abs() < 1e-10);
    }

    /// Two lines at angle `φ` are `|sin φ|` apart.
    #[test]
    fn lines_follow_the_sine_law(phi in -3.2f64..3.2, n in 2usize..=5, seed in any::<u64>()) {
        let plane = random(n, 2, seed);
        let (e, f) = (plane.column(0), plane.column(1));
        let dir: Vec<f64> = e.iter().zip(f).map(|(a, b)| phi.cos() * a + phi.sin() * b).collect();
        let u = Subspace::from_basis(&[e]).unwrap();
        let v = Subspace::from_basis(&[dir]).unwrap();
        prop_assert!((grassmann_distance(&u, &v).unwrap() - phi.sin().abs()).abs() < 1e-12);
    }

    /// Tracked Gram–Schmidt on ρε-bases with `ρ = 1` deviates by at most
    /// `1.5·ε` and in particular by at most `C_gs·ε`.
    #[test]
    fn gram_schmidt_sweep((n, m) in (1usize..=4).prop_flat_map(|m| (m..=m + 3, Just(m))), seed in any::<u64>(), amount in 1e-5f64..4e-3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = Subspace::random(n, m, &mut rng).unwrap();
        let v = perturbed_columns(&base, amount, &mut rng);
        let eps = rho_eps_defect(&v, 1.0);
        prop_assume!(eps > 0.0 && eps <= 0.01);
        let (span, dev) = orthonormalize_tracked(&v).unwrap();
        prop_assert!(dev <= 1.5 * eps, "dev {dev} eps {eps}");
        prop_assert!(dev <= c_gs(m) * eps);
        let direct = Subspace::from_basis(&v).unwrap();
        prop_assert!(grassmann_distance(&span, &direct).unwrap() < 1e-10);
    }

    /// `d_Gr(U,V) ≤ C_π·ϑ` when an orthonormal basis of `V` is within `ϑ` of
    /// `U`.
    #[test]
    fn projection_angle_estimate((n, m) in dims(), seed in any::<u64>(), amount in 1e-4f64..0.2) {
        prop_assume!(m < n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = Subspace::random(n, m, &mut rng).unwrap();
        let u = Subspace::from_basis(&perturbed_columns(&v, amount, &mut rng)).unwrap();
        let theta = (0..m).map(|j| u.perp_norm(v.column(j))).fold(0.0, f64::max);
        let d = grassmann_distance(&u, &v).unwrap();
        prop_assert!(d <= c_pi(m) * theta + 1e-12);
    }

    /// The certified bound dominates the true distance.
    #[test]
    fn reduced_angle_bound((n, m) in dims(), seed in any::<u64>(), rho in 0.1f64..10.0, amount in 1e-4f64..0.1) {
        prop_assume!(m < n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = Subspace::random(n, m, &mut rng).unwrap();
        // a ρε-basis with ε well inside ε_red
        let tiny = eps_red(m) / 8.0;
        let v: Vec<Vec<f64>> = perturbed_columns(&base, tiny, &mut rng)
            .into_iter()
            .map(|c| c.into_iter().map(|x| x * rho).collect())
            .collect();
        let u: Vec<Vec<f64>> = v
            .iter()
            .map(|c| {
                let dir = random_unit(&mut rng, n);
                c.iter().zip(&dir).map(|(a, b)| a + amount * rho * b).collect()
            })
            .collect();
        let bound = angle_perturbation_bound(&v, &u, rho, amount).unwrap();
        let d = grassmann_distance(&Subspace::from_basis(&u).unwrap(), &Subspace::from_basis(&v).unwrap()).unwrap();
        prop_assert!(d <= bound);
    }

    #[test]
    fn cones_are_scale_invariant(seed in any::<u64>(), delta in 0.01f64..0.99, x in prop::collection::vec(-5.0f64..5.0, 4), t in 1e-3f64..1e3) {
        let h = random(4, 2, seed);
        let cone = Cone::new(delta, h).unwrap();
        let y: Vec<f64> = x.iter().map(|c| c * t).collect();
        prop_assert_eq!(cone.contains(&x).unwrap(), cone.contains(&y).unwrap());
    }
}

/// Two nearby planes: the sampled inclusion finds no counterexample.
#[test]
fn nearby_cones_include() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let h0 = Subspace::random(3, 1, &mut rng).unwrap();
        let h1 = Subspace::from_basis(&perturbed_columns(&h0, 0.05, &mut rng)).unwrap();
        let out = cone_inclusion_check(0.1, 0.1, &h0, &h1, 0.05, 500, 3).unwrap();
        assert!(out.holds, "witness {:?}", out.witness);
    }
}

#[test]
fn gram_schmidt_constants_are_increasing() {
    let mut last = 0.0;
    for m in 1..=6 {
        let c = c_gs(m);
        assert!(c >= last);
        assert!((c_pi(m) - 2.0 * m as f64 * (1.0 + c)).abs() < 1e-12);
        assert!((eps_red(m) - 0.5 / (c_pi(m) * c)).abs() < 1e-15);
        last = c;
    }
}
