//! Weighted-sum discretizations of `E_p^l` and `E_p^tp` and their Monte Carlo
//! estimators.
//!
//! The discrete energy is `Σ_{i_0..i_{l-1}} w_{i_0}⋯w_{i_{l-1}}·sup K^p` over
//! all ordered `l`-tuples of sample indices. The inner sup is searched over
//! the sample, so every estimate is biased low by the search.

use std::sync::OnceLock;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::WeightedCloud;
use crate::error::{domain, Error, Result};
use crate::flatness::{binomial, default_radii, tangent_estimate, FlatnessOptions};
use crate::geom::norm;
use crate::grassmann::Subspace;

use super::curvature::TANGENT_TOL;
use super::sup::{SearchParams, Searcher};

/// `(m, l, p)` and the derived exponents `λ = p − ml`,
/// `κ = (p + ml)(m + 1)` and `α = 1 − ml/p`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct EnergyParams {
    m: usize,
    l: usize,
    p: f64,
}

#[derive(Deserialize)]
struct RawParams {
    m: usize,
    l: usize,
    p: f64,
}

impl TryFrom<RawParams> for EnergyParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        EnergyParams::new(r.m, r.l, r.p)
    }
}

impl Serialize for EnergyParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            m: usize,
            l: usize,
            p: f64,
            lambda: f64,
            kappa: f64,
            alpha: f64,
        }
        Out {
            m: self.m,
            l: self.l,
            p: self.p,
            lambda: self.lambda(),
            kappa: self.kappa(),
            alpha: self.alpha(),
        }
        .serialize(s)
    }
}

impl EnergyParams {
    pub fn new(m: usize, l: usize, p: f64) -> Result<Self> {
        if m == 0 {
            return Err(domain("intrinsic dimension must be at least 1"));
        }
        if l == 0 || l > m + 2 {
            return Err(domain(format!("integration order l must lie in 1..={}, got {l}", m + 2)));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(domain(format!("exponent p must be positive, got {p}")));
        }
        Ok(EnergyParams { m, l, p })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn ml(&self) -> f64 {
        (self.m * self.l) as f64
    }

    pub fn lambda(&self) -> f64 {
        self.p - self.ml()
    }

    pub fn kappa(&self) -> f64 {
        (self.p + self.ml()) * (self.m + 1) as f64
    }

    /// Only meaningful for `p > ml`. Evaluated as `λ/p`.
    pub fn alpha(&self) -> f64 {
        self.lambda() / self.p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMode {
    Exhaustive,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerStats {
    pub n_random: usize,
    pub n_refine_rounds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum EstimateParams {
    Menger(EnergyParams),
    TangentPoint { m: usize, p: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyEstimate {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub mode: EnergyMode,
    pub n_outer_tuples: u64,
    pub inner: InnerStats,
    pub seed: u64,
    pub params: EstimateParams,
}

/// Outer tuples per Monte Carlo chunk. Each chunk has its own random stream
/// and chunk sums are reduced in order, so results do not depend on the
/// thread count.
pub const MC_CHUNK: u64 = 4096;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn check_cloud(cloud: &WeightedCloud, m: usize) -> Result<()> {
    if cloud.intrinsic_dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: cloud.intrinsic_dim(),
        });
    }
    Ok(())
}

/// Mean and standard error from chunk sums, scaled by `scale`.
fn mc_summary(chunks: &[(f64, f64)], n: u64, scale: f64) -> (f64, f64) {
    let (s, ss) = chunks.iter().fold((0.0, 0.0), |a, c| (a.0 + c.0, a.1 + c.1));
    let nf = n as f64;
    let mean = s / nf;
    let var = if n > 1 {
        ((ss / nf - mean * mean) * nf / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    (mean * scale, (var / nf).sqrt() * scale)
}

/// `E_p^l` of the cloud.
///
/// `Exhaustive` sums over all `N^l` ordered tuples with an exhaustive inner
/// sup and refuses when `N^l·C(N, m+2−l)` exceeds `budget`. `MonteCarlo`
/// draws `budget` tuples with replacement, each index with probability
/// proportional to its weight, and returns `W^l` times the mean of
/// `sup K^p` (`W` the total weight) with its standard error.
pub fn energy(
    cloud: &WeightedCloud,
    params: &EnergyParams,
    mode: EnergyMode,
    budget: u64,
    search: &SearchParams,
    seed: u64,
) -> Result<EnergyEstimate> {
    check_cloud(cloud, params.m)?;
    let npts = cloud.len();
    let l = params.l;
    let n_free = params.m + 2 - l;
    let searcher = Searcher::new(cloud, search.neighbors);
    let p = params.p;
    let (value, std_error, n_outer, inner) = match mode {
        EnergyMode::Exhaustive => {
            let outer = (npts as u128).checked_pow(l as u32).unwrap_or(u128::MAX);
            let required = outer.saturating_mul(binomial(npts, n_free).max(1) as u128);
            if required > budget as u128 {
                return Err(Error::BudgetExceeded {
                    required,
                    budget: budget as u128,
                });
            }
            let parts: Vec<f64> = (0..npts)
                .into_par_iter()
                .map(|i0| {
                    let mut idx = vec![0usize; l];
                    idx[0] = i0;
                    let mut sum = 0.0;
                    let rest = (npts as u64).pow(l as u32 - 1);
                    for t in 0..rest {
                        let mut rem = t;
                        for slot in idx[1..].iter_mut().rev() {
                            *slot = (rem % npts as u64) as usize;
                            rem /= npts as u64;
                        }
                        let w: f64 = idx.iter().map(|&i| cloud.weight(i)).product();
                        if w == 0.0 {
                            continue;
                        }
                        let fixed: Vec<&[f64]> = idx.iter().map(|&i| cloud.point(i)).collect();
                        let k = if n_free == 0 {
                            super::curvature::kappa(&fixed)
                        } else {
                            searcher.exhaustive(&fixed, n_free).value
                        };
                        sum += w * k.powf(p);
                    }
                    sum
                })
                .collect();
            let inner = InnerStats {
                n_random: 0,
                n_refine_rounds: 0,
            };
            (parts.iter().sum(), None, outer as u64, inner)
        }
        EnergyMode::MonteCarlo => {
            if budget == 0 {
                return Err(domain("Monte Carlo needs at least one tuple"));
            }
            let dist = WeightedIndex::new(cloud.weights()).map_err(|e| domain(e.to_string()))?;
            let n_chunks = budget.div_ceil(MC_CHUNK);
            let chunks: Vec<(f64, f64)> = (0..n_chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(c);
                    let lo = c * MC_CHUNK;
                    let hi = (lo + MC_CHUNK).min(budget);
                    let (mut s, mut ss) = (0.0, 0.0);
                    let mut fixed: Vec<&[f64]> = Vec::with_capacity(l);
                    for t in lo..hi {
                        fixed.clear();
                        fixed.extend((0..l).map(|_| cloud.point(dist.sample(&mut rng))));
                        let sup = searcher.sup(&fixed, n_free, search, splitmix(seed ^ splitmix(t)));
                        let v = sup.value.powf(p);
                        s += v;
                        ss += v * v;
                    }
                    (s, ss)
                })
                .collect();
            let (value, se) = mc_summary(&chunks, budget, cloud.total_weight().powi(l as i32));
            let inner = InnerStats {
                n_random: search.n_random,
                n_refine_rounds: search.n_refine_rounds,
            };
            (value, Some(se), budget, inner)
        }
    };
    Ok(EnergyEstimate {
        value,
        std_error,
        mode,
        n_outer_tuples: n_outer,
        inner,
        seed,
        params: EstimateParams::Menger(*params),
    })
}

/// Tangent planes computed on first use.
struct Tangents<'a> {
    cloud: &'a WeightedCloud,
    radii: Vec<f64>,
    opts: FlatnessOptions,
    cache: Vec<OnceLock<std::result::Result<Subspace, String>>>,
}

impl<'a> Tangents<'a> {
    fn new(cloud: &'a WeightedCloud, seed: u64) -> Self {
        Tangents {
            cloud,
            radii: default_radii(cloud),
            opts: FlatnessOptions {
                seed,
                ..FlatnessOptions::default()
            },
            cache: (0..cloud.len()).map(|_| OnceLock::new()).collect(),
        }
    }

    fn get(&self, i: usize) -> Result<&Subspace> {
        self.cache[i]
            .get_or_init(|| {
                tangent_estimate(self.cloud, self.cloud.point(i), &self.radii, &self.opts)
                    .map(|t| t.plane)
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| Error::Precondition(format!("tangent at sample {i}: {e}")))
    }

    /// `R_tp(x_i, x_j)^{-p}`, zero on the diagonal, for coincident points and
    /// for `y` within [`TANGENT_TOL`] of the tangent plane.
    fn integrand(&self, i: usize, j: usize, p: f64) -> Result<f64> {
        if i == j {
            return Ok(0.0);
        }
        let v: Vec<f64> = self
            .cloud
            .point(j)
            .iter()
            .zip(self.cloud.point(i))
            .map(|(a, b)| a - b)
            .collect();
        let len2 = norm(&v).powi(2);
        if len2 == 0.0 {
            return Ok(0.0);
        }
        let h = self.get(i)?.perp_norm(&v);
        // y on the tangent plane: infinite radius
        if h <= TANGENT_TOL * len2.sqrt() {
            return Ok(0.0);
        }
        Ok((2.0 * h / len2).powf(p))
    }
}

/// `E_p^tp = Σ_{i≠j} w_i w_j R_tp(x_i, x_j)^{−p}` with tangent planes from
/// [`tangent_estimate`] over [`default_radii`]. Modes and budgets as in
/// [`energy`], counting ordered pairs.
pub fn energy_tp(cloud: &WeightedCloud, p: f64, mode: EnergyMode, budget: u64, seed: u64) -> Result<EnergyEstimate> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(domain(format!("exponent p must be positive, got {p}")));
    }
    let npts = cloud.len();
    let tangents = Tangents::new(cloud, seed);
    let (value, std_error, n_outer) = match mode {
        EnergyMode::Exhaustive => {
            let required = (npts as u128) * (npts as u128 - 1);
            if required > budget as u128 {
                return Err(Error::BudgetExceeded {
                    required,
                    budget: budget as u128,
                });
            }
            let parts: Vec<f64> = (0..npts)
                .into_par_iter()
                .map(|i| {
                    let mut s = 0.0;
                    for j in 0..npts {
                        let w = cloud.weight(i) * cloud.weight(j);
                        if w > 0.0 {
                            s += w * tangents.integrand(i, j, p)?;
                        }
                    }
                    Ok(s)
                })
                .collect::<Result<_>>()?;
            (parts.iter().sum(), None, required as u64)
        }
        EnergyMode::MonteCarlo => {
            if budget == 0 {
                return Err(domain("Monte Carlo needs at least one pair"));
            }
            let dist = WeightedIndex::new(cloud.weights()).map_err(|e| domain(e.to_string()))?;
            let n_chunks = budget.div_ceil(MC_CHUNK);
            let chunks: Vec<(f64, f64)> = (0..n_chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(c);
                    let lo = c * MC_CHUNK;
                    let hi = (lo + MC_CHUNK).min(budget);
                    let (mut s, mut ss) = (0.0, 0.0);
                    for _ in lo..hi {
                        let i = dist.sample(&mut rng);
                        let j = dist.sample(&mut rng);
                        let v = tangents.integrand(i, j, p)?;
                        s += v;
                        ss += v * v;
                    }
                    Ok((s, ss))
                })
                .collect::<Result<_>>()?;
            let (value, se) = mc_summary(&chunks, budget, cloud.total_weight().powi(2));
            (value, Some(se), budget)
        }
    };
    Ok(EnergyEstimate {
        value,
        std_error,
        mode,
        n_outer_tuples: n_outer,
        inner: InnerStats {
            n_random: 0,
            n_refine_rounds: 0,
        },
        seed,
        params: EstimateParams::TangentPoint {
            m: cloud.intrinsic_dim(),
            p,
        },
    })
}
