use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cloud::WeightedCloud;
use crate::error::{domain, Error, Result};
use crate::geom::{self, factorial, varsigma};

use super::EnergyParams;

#[derive(Clone, Debug, Serialize)]
pub struct EtaDViolation {
    pub indices: Vec<usize>,
    pub eta: f64,
    pub d: f64,
    /// Energy lower bound forced by the tuple.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaDReport {
    pub violations: Vec<EtaDViolation>,
    pub n_checked: usize,
    /// Tuples with `η = 0` or `d > R`.
    pub n_skipped: usize,
    /// Largest `bound/E` seen.
    pub max_ratio: f64,
}

/// Smallest energy compatible with an `(η,d)`-voluminous simplex on a set
/// with Ahlfors constant `A`:
/// `(A·(ς_{m+1}(η)·d)^m)^l · (3η^{m+1}/(4(m+1)!·d))^p`.
pub fn eta_d_lower_bound(params: &EnergyParams, a: f64, eta: f64, d: f64) -> Result<f64> {
    let m = params.m();
    let s = varsigma(m + 1, eta)?;
    let mass = a * (s * d).powi(m as i32);
    let k = 3.0 * eta.powi(m as i32 + 1) / (4.0 * factorial(m + 1) * d);
    Ok(mass.powi(params.l() as i32) * k.powf(params.p()))
}

/// Draws `n_trials` random `(m+2)`-tuples of distinct samples, reads off
/// `d = diam` and `η = h_min/d`, and reports every tuple whose lower bound
/// [`eta_d_lower_bound`] exceeds `energy_bound`. Tuples with `η = 0` or
/// `d > R` are skipped.
pub fn eta_d_check(
    cloud: &WeightedCloud,
    energy_bound: f64,
    params: &EnergyParams,
    ahlfors: (f64, f64),
    n_trials: usize,
    seed: u64,
) -> Result<EtaDReport> {
    if params.p() <= params.ml() {
        return Err(Error::Precondition(format!(
            "η–d balance needs p > ml, got p = {} and ml = {}",
            params.p(),
            params.ml()
        )));
    }
    if cloud.intrinsic_dim() != params.m() {
        return Err(Error::DimensionMismatch {
            expected: params.m(),
            got: cloud.intrinsic_dim(),
        });
    }
    let (a, big_r) = ahlfors;
    if !(a > 0.0 && big_r > 0.0 && energy_bound > 0.0) {
        return Err(domain("Ahlfors constants and energy bound must be positive"));
    }
    let k1 = params.m() + 2;
    if cloud.len() < k1 {
        return Err(Error::TooFewPoints {
            needed: k1,
            found: cloud.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = EtaDReport {
        violations: vec![],
        n_checked: 0,
        n_skipped: 0,
        max_ratio: 0.0,
    };
    let mut idx = vec![0usize; k1];
    for _ in 0..n_trials {
        for k in 0..k1 {
            loop {
                let c = rng.random_range(0..cloud.len());
                if !idx[..k].contains(&c) {
                    idx[k] = c;
                    break;
                }
            }
        }
        let verts: Vec<&[f64]> = idx.iter().map(|&i| cloud.point(i)).collect();
        let d = geom::diameter(&verts);
        let eta = if d > 0.0 { geom::min_height(&verts) / d } else { 0.0 };
        if !(eta > 0.0 && eta < 1.0) || d > big_r {
            report.n_skipped += 1;
            continue;
        }
        report.n_checked += 1;
        let bound = eta_d_lower_bound(params, a, eta, d)?;
        report.max_ratio = report.max_ratio.max(bound / energy_bound);
        if bound > energy_bound {
            report.violations.push(EtaDViolation {
                indices: idx.clone(),
                eta,
                d,
                bound,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{generate, GeneratorSpec};

    #[test]
    fn lower_bound_by_hand() {
        // m = 1, l = 1, p = 4, η = 1/2, d = 1, A = 2
        let params = EnergyParams::new(1, 1, 4.0).unwrap();
        let s = (1.0 + 0.25 / 8.0f64).sqrt() - 1.0;
        let expected = 2.0 * s * (3.0 * 0.25 / 8.0f64).powi(4);
        let got = eta_d_lower_bound(&params, 2.0, 0.5, 1.0).unwrap();
        assert!((got - expected).abs() <= 1e-14 * expected);
    }

    #[test]
    fn lower_bound_scales_with_minus_lambda() {
        let params = EnergyParams::new(2, 2, 9.0).unwrap();
        let b1 = eta_d_lower_bound(&params, 1.5, 0.3, 0.1).unwrap();
        let b2 = eta_d_lower_bound(&params, 1.5, 0.3, 0.2).unwrap();
        let expected = 2f64.powf(-params.lambda());
        assert!((b2 / b1 - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn check_refuses_subcritical_exponents() {
        let c = generate(&GeneratorSpec::Circle { n_samples: 20, radius: 1.0 }).unwrap();
        let params = EnergyParams::new(1, 2, 2.0).unwrap();
        assert!(matches!(
            eta_d_check(&c, 1.0, &params, (1.0, 1.0), 10, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn huge_energy_admits_every_tuple() {
        let c = generate(&GeneratorSpec::Circle { n_samples: 50, radius: 1.0 }).unwrap();
        let params = EnergyParams::new(1, 1, 4.0).unwrap();
        let r = eta_d_check(&c, 1e30, &params, (1.0, 2.0), 200, 3).unwrap();
        assert!(r.violations.is_empty());
        assert_eq!(r.n_checked + r.n_skipped, 200);
        assert!(r.n_checked > 0 && r.max_ratio < 1.0);
    }
}
