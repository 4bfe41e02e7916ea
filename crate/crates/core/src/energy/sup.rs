//! Lower estimates of `sup_{x_l,…,x_{m+1} ∈ Σ} K(x_0,…,x_{m+1})`.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::WeightedCloud;
use crate::error::{Error, Result};
use crate::flatness::binomial;

use super::curvature::kappa;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchParams {
    /// Uniform random draws of the free vertices.
    pub n_random: usize,
    /// Hill-climbing sweeps over nearest-neighbour replacements.
    pub n_refine_rounds: usize,
    /// Neighbours tried per vertex and sweep.
    pub neighbors: usize,
    /// Enumerate all free tuples when their number is at most this.
    pub exhaustive_budget: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            n_random: 256,
            n_refine_rounds: 4,
            neighbors: 8,
            exhaustive_budget: 20_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SupKappa {
    pub value: f64,
    pub exhaustive: bool,
    /// Curvature evaluations spent.
    pub evaluations: u64,
    /// Cloud indices of the best free vertices found.
    pub free: Vec<usize>,
    /// Successive record values.
    pub trace: Vec<f64>,
}

/// Sup search over one cloud with lazily cached neighbour lists.
pub(crate) struct Searcher<'a> {
    cloud: &'a WeightedCloud,
    neighbors: Vec<OnceLock<Vec<usize>>>,
    k: usize,
}

impl<'a> Searcher<'a> {
    pub fn new(cloud: &'a WeightedCloud, k: usize) -> Self {
        Searcher {
            cloud,
            neighbors: (0..cloud.len()).map(|_| OnceLock::new()).collect(),
            k,
        }
    }

    fn neighbors(&self, i: usize) -> &[usize] {
        self.neighbors[i].get_or_init(|| self.cloud.k_nearest(i, self.k))
    }

    fn eval(&self, fixed: &[&[f64]], free: &[usize]) -> f64 {
        let mut all: Vec<&[f64]> = Vec::with_capacity(fixed.len() + free.len());
        all.extend_from_slice(fixed);
        all.extend(free.iter().map(|&i| self.cloud.point(i)));
        kappa(&all)
    }

    /// `sup` over the free vertices, exhaustive when the number of free
    /// subsets is within budget.
    pub fn sup(&self, fixed: &[&[f64]], n_free: usize, search: &SearchParams, seed: u64) -> SupKappa {
        if n_free == 0 {
            return SupKappa {
                value: kappa(fixed),
                exhaustive: true,
                evaluations: 1,
                free: vec![],
                trace: vec![],
            };
        }
        let npts = self.cloud.len();
        if binomial(npts, n_free) <= search.exhaustive_budget {
            return self.exhaustive(fixed, n_free);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = SupKappa {
            value: 0.0,
            exhaustive: false,
            evaluations: 0,
            free: (0..n_free).collect(),
            trace: vec![],
        };
        let mut draw = vec![0usize; n_free];
        for _ in 0..search.n_random {
            for k in 0..n_free {
                loop {
                    let c = rng.random_range(0..npts);
                    if !draw[..k].contains(&c) {
                        draw[k] = c;
                        break;
                    }
                }
            }
            let v = self.eval(fixed, &draw);
            best.evaluations += 1;
            if v > best.value {
                best.value = v;
                best.free.clone_from(&draw);
                best.trace.push(v);
                self.climb(fixed, &mut best, search);
            }
        }
        best
    }

    fn climb(&self, fixed: &[&[f64]], best: &mut SupKappa, search: &SearchParams) {
        for _ in 0..search.n_refine_rounds {
            let mut improved = false;
            for slot in 0..best.free.len() {
                let current = best.free[slot];
                for &nb in self.neighbors(current) {
                    if best.free.contains(&nb) {
                        continue;
                    }
                    let mut trial = best.free.clone();
                    trial[slot] = nb;
                    let v = self.eval(fixed, &trial);
                    best.evaluations += 1;
                    if v > best.value {
                        best.value = v;
                        best.free = trial;
                        best.trace.push(v);
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }

    pub(crate) fn exhaustive(&self, fixed: &[&[f64]], n_free: usize) -> SupKappa {
        let npts = self.cloud.len();
        let mut comb: Vec<usize> = (0..n_free).collect();
        let mut best = SupKappa {
            value: self.eval(fixed, &comb),
            exhaustive: true,
            evaluations: 1,
            free: comb.clone(),
            trace: vec![],
        };
        loop {
            let mut i = n_free;
            while i > 0 && comb[i - 1] == npts - n_free + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            comb[i - 1] += 1;
            for j in i..n_free {
                comb[j] = comb[j - 1] + 1;
            }
            let v = self.eval(fixed, &comb);
            best.evaluations += 1;
            if v > best.value {
                best.value = v;
                best.free.clone_from(&comb);
            }
        }
        best.trace.push(best.value);
        best
    }
}

/// Lower estimate of `sup K` over the `m+2−l` free vertices given the `l`
/// fixed ones. With no free vertices this is `K` of the fixed tuple.
///
/// Random draws use their own stream of `seed`, and hill climbing consumes no
/// randomness, so raising `n_random` only extends the search.
pub fn sup_kappa(
    cloud: &WeightedCloud,
    fixed: &[&[f64]],
    search: &SearchParams,
    seed: u64,
) -> Result<SupKappa> {
    let m = cloud.intrinsic_dim();
    if fixed.is_empty() || fixed.len() > m + 2 {
        return Err(Error::Domain(format!(
            "need 1 ≤ l ≤ m+2 = {} fixed points, got {}",
            m + 2,
            fixed.len()
        )));
    }
    if let Some(p) = fixed.iter().find(|p| p.len() != cloud.ambient_dim()) {
        return Err(Error::DimensionMismatch {
            expected: cloud.ambient_dim(),
            got: p.len(),
        });
    }
    let n_free = m + 2 - fixed.len();
    if cloud.len() < n_free {
        return Err(Error::TooFewPoints {
            needed: n_free,
            found: cloud.len(),
        });
    }
    Ok(Searcher::new(cloud, search.neighbors).sup(fixed, n_free, search, seed))
}
