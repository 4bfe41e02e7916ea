use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use menger_core::energy::{
    energy as energy_estimate, energy_tp, eta_d_check, kappa, kappa_prime, kappa_svdm, menger_c,
    tangent_point_radius_with, EnergyEstimate, EnergyMode, EnergyParams, EtaDViolation,
};
use menger_core::flatness::{
    default_radii, fit_power_law, scale_record, scaling_fit, tangent_estimate, write_scale_records, Field,
    FlatnessOptions, ScaleRecord, ScalingFit,
};
use menger_core::shapes::{generate, load_cloud, load_mesh, sample_mesh};
use menger_core::{grassmann_distance, Error, Subspace, WeightedCloud};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{CurvatureKind, EnergyKind, ExperimentConfig, Input, Loaded};
use crate::report::{write_json, Header};
use crate::CliError;

pub struct Context {
    pub cfg: ExperimentConfig,
    pub cloud: WeightedCloud,
    header: Header,
    out: PathBuf,
}

fn load_input(loaded: &Loaded) -> Result<WeightedCloud, CliError> {
    match &loaded.config.input {
        Input::Generator(spec) => generate(spec).map_err(|e| CliError::Config(e.to_string())),
        Input::File { path, n_samples } => {
            let path = loaded.base.join(path);
            let ext = path
                .extension()
                .and_then(|e| e.to_str())
                .map(str::to_ascii_lowercase)
                .unwrap_or_default();
            let cloud = match ext.as_str() {
                "csv" => load_cloud(&path)?,
                "off" | "obj" => {
                    let n = n_samples
                        .ok_or_else(|| CliError::Config("mesh input needs `n_samples`".into()))?;
                    sample_mesh(&load_mesh(&path)?, n, loaded.config.seed)?
                }
                _ => {
                    return Err(CliError::Config(format!(
                        "{}: input must be .csv, .off or .obj",
                        path.display()
                    )))
                }
            };
            Ok(cloud.with_provenance(path.display().to_string()))
        }
    }
}

impl Context {
    pub fn new(loaded: Loaded, command: &'static str, out: &Path) -> Result<Self, CliError> {
        let cloud = load_input(&loaded)?;
        let cfg = loaded.config;
        if let Some(p) = &cfg.params {
            if p.m() != cloud.intrinsic_dim() {
                return Err(CliError::Config(format!(
                    "params.m = {} but the input is {}-dimensional",
                    p.m(),
                    cloud.intrinsic_dim()
                )));
            }
        }
        let header = Header {
            tool: "menger",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_sha256: loaded.sha256,
            seed: cfg.seed,
            covering_radius: cloud.covering_radius(),
            cloud: cloud.summary(),
            params: cfg.params,
            lambda_over_kappa: None,
        };
        Ok(Context {
            cfg,
            cloud,
            header,
            out: out.to_path_buf(),
        })
    }

    fn report_path(&self, default: &str) -> PathBuf {
        self.out.join(self.cfg.output.report.as_deref().unwrap_or(default))
    }

    fn flatness_options(&self) -> FlatnessOptions {
        FlatnessOptions {
            random_starts: self.cfg.scan.random_starts,
            seed: self.cfg.seed,
            theta_mesh: self.cfg.scan.theta_mesh,
        }
    }

    fn centers(&self) -> Result<Vec<usize>, CliError> {
        let n = self.cloud.len();
        if let Some(idx) = &self.cfg.scan.center_indices {
            if let Some(&i) = idx.iter().find(|&&i| i >= n) {
                return Err(CliError::Config(format!("center index {i} out of range for {n} points")));
            }
            return Ok(idx.clone());
        }
        let k = self.cfg.scan.centers.clamp(1, n);
        Ok((0..k).map(|i| i * n / k).collect())
    }
}

/// Draws `count` tuples of `size` distinct indices.
fn draw_tuples(npts: usize, size: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut t: Vec<usize> = Vec::with_capacity(size);
            while t.len() < size {
                let c = rng.random_range(0..npts);
                if !t.contains(&c) {
                    t.push(c);
                }
            }
            t
        })
        .collect()
}

/// Tangent estimates at the given sample indices; unusable points map to
/// `None`.
fn tangents(cloud: &WeightedCloud, indices: &[usize], opts: &FlatnessOptions) -> Result<BTreeMap<usize, Option<Subspace>>, CliError> {
    let mut uniq = indices.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    let radii = default_radii(cloud);
    uniq.par_iter()
        .map(|&i| match tangent_estimate(cloud, cloud.point(i), &radii, opts) {
            Ok(t) => Ok((i, Some(t.plane))),
            Err(Error::Precondition(_)) => Ok((i, None)),
            Err(e) => Err(CliError::from(e)),
        })
        .collect()
}

#[derive(Serialize)]
struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
}

#[derive(Serialize)]
struct CurvatureBody {
    kind: CurvatureKind,
    tuple_size: usize,
    n_tuples: usize,
    /// Tuples without a usable tangent estimate (tangent-point only).
    n_skipped: usize,
    max: f64,
    mean: f64,
    argmax: Vec<usize>,
    histogram: Histogram,
}

pub fn curvature(ctx: &Context) -> Result<(), CliError> {
    let cloud = &ctx.cloud;
    let kind = ctx.cfg.curvature.kind;
    let size = match kind {
        CurvatureKind::Kappa | CurvatureKind::KappaPrime => cloud.intrinsic_dim() + 2,
        CurvatureKind::Menger => 3,
        CurvatureKind::Svdm => 4,
        CurvatureKind::TangentPoint => 2,
    };
    if kind == CurvatureKind::Svdm && cloud.ambient_dim() != 3 {
        return Err(CliError::Config("svdm curvature needs points in R³".into()));
    }
    if ctx.cfg.curvature.bins == 0 {
        return Err(CliError::Config("curvature.bins must be positive".into()));
    }
    if cloud.len() < size {
        return Err(Error::TooFewPoints {
            needed: size,
            found: cloud.len(),
        }
        .into());
    }
    let tuples = draw_tuples(cloud.len(), size, ctx.cfg.budgets.curvature_tuples, ctx.cfg.seed);
    let planes = if kind == CurvatureKind::TangentPoint {
        let firsts: Vec<usize> = tuples.iter().map(|t| t[0]).collect();
        tangents(cloud, &firsts, &ctx.flatness_options())?
    } else {
        BTreeMap::new()
    };
    let values: Vec<Option<f64>> = tuples
        .par_iter()
        .map(|t| {
            let v: Vec<&[f64]> = t.iter().map(|&i| cloud.point(i)).collect();
            Ok(match kind {
                CurvatureKind::Kappa => Some(kappa(&v)),
                CurvatureKind::KappaPrime => Some(kappa_prime(&v)),
                CurvatureKind::Menger => Some(menger_c(v[0], v[1], v[2])?),
                CurvatureKind::Svdm => Some(kappa_svdm([v[0], v[1], v[2], v[3]])?),
                CurvatureKind::TangentPoint => match &planes[&t[0]] {
                    None => None,
                    Some(_) if v[0] == v[1] => Some(0.0),
                    Some(plane) => Some(tangent_point_radius_with(v[0], v[1], plane)?.map_or(0.0, |r| 1.0 / r)),
                },
            })
        })
        .collect::<Result<_, Error>>()?;
    let mut max = 0.0;
    let mut argmax = vec![];
    let mut sum = 0.0;
    let mut used = 0usize;
    for (t, v) in tuples.iter().zip(&values) {
        let Some(v) = *v else { continue };
        used += 1;
        sum += v;
        if v > max || argmax.is_empty() {
            max = v;
            argmax.clone_from(t);
        }
    }
    let bins = ctx.cfg.curvature.bins;
    let mut counts = vec![0u64; bins];
    for v in values.iter().flatten() {
        let b = if max > 0.0 { ((v / max) * bins as f64) as usize } else { 0 };
        counts[b.min(bins - 1)] += 1;
    }
    let body = CurvatureBody {
        kind,
        tuple_size: size,
        n_tuples: used,
        n_skipped: tuples.len() - used,
        max,
        mean: if used > 0 { sum / used as f64 } else { 0.0 },
        argmax,
        histogram: Histogram { lo: 0.0, hi: max, counts },
    };
    write_json(&ctx.report_path("curvature.json"), &ctx.header, &body)
}

#[derive(Serialize)]
struct RadiusSummary {
    r: f64,
    n_records: usize,
    mean_beta: f64,
    mean_theta: f64,
    max_beta: f64,
}

#[derive(Serialize)]
struct Scan {
    records_file: String,
    n_records: usize,
    /// `(center, r)` pairs whose ball held too few points.
    n_skipped: usize,
    fit_beta: Option<ScalingFit>,
    fit_theta: Option<ScalingFit>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    fit_errors: Vec<String>,
    per_radius: Vec<RadiusSummary>,
}

fn scan(ctx: &Context) -> Result<Scan, CliError> {
    let radii = ctx.cfg.radii()?;
    let centers = ctx.centers()?;
    let opts = ctx.flatness_options();
    let cloud = &ctx.cloud;
    let jobs: Vec<(usize, f64)> = centers.iter().flat_map(|&c| radii.iter().map(move |&r| (c, r))).collect();
    let results: Vec<Option<ScaleRecord>> = jobs
        .par_iter()
        .map(|&(c, r)| match scale_record(cloud, cloud.point(c), r, &opts) {
            Ok(rec) => Ok(Some(rec)),
            Err(Error::EmptyBall { .. } | Error::TooFewPoints { .. }) => Ok(None),
            Err(e) => Err(CliError::from(e)),
        })
        .collect::<Result<_, _>>()?;
    let n_skipped = results.iter().filter(|r| r.is_none()).count();
    let records: Vec<ScaleRecord> = results.into_iter().flatten().collect();

    let path = ctx.out.join(&ctx.cfg.output.records);
    let file = File::create(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    write_scale_records(&mut w, &records, cloud.ambient_dim(), cloud.intrinsic_dim(), cloud.covering_radius())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;

    let mut fit_errors = vec![];
    let mut fit = |field: Field| match scaling_fit(&records, field) {
        Ok(f) => Some(f),
        Err(e) => {
            fit_errors.push(format!("{field:?}: {e}"));
            None
        }
    };
    let (fit_beta, fit_theta) = (fit(Field::Beta), fit(Field::Theta));
    let per_radius = radii
        .iter()
        .map(|&r| {
            let at: Vec<&ScaleRecord> = records.iter().filter(|rec| rec.r == r).collect();
            let k = at.len().max(1) as f64;
            RadiusSummary {
                r,
                n_records: at.len(),
                mean_beta: at.iter().map(|x| x.beta).sum::<f64>() / k,
                mean_theta: at.iter().map(|x| x.theta).sum::<f64>() / k,
                max_beta: at.iter().map(|x| x.beta).fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(Scan {
        records_file: ctx.cfg.output.records.clone(),
        n_records: records.len(),
        n_skipped,
        fit_beta,
        fit_theta,
        fit_errors,
        per_radius,
    })
}

pub fn beta_scan(ctx: &Context) -> Result<(), CliError> {
    let body = scan(ctx)?;
    write_json(&ctx.report_path("scaling_fit.json"), &ctx.header, &body)
}

fn measure_energy(ctx: &Context, params: &EnergyParams) -> Result<EnergyEstimate, CliError> {
    let b = &ctx.cfg.budgets;
    let budget = match ctx.cfg.energy.mode {
        EnergyMode::Exhaustive => b.exhaustive_evaluations,
        EnergyMode::MonteCarlo => b.mc_tuples,
    };
    Ok(energy_estimate(&ctx.cloud, params, ctx.cfg.energy.mode, budget, &b.inner, ctx.cfg.seed)?)
}

#[derive(Serialize)]
struct EnergyBody {
    estimate: EnergyEstimate,
}

pub fn energy(ctx: &Context) -> Result<(), CliError> {
    let estimate = match ctx.cfg.energy.kind {
        EnergyKind::Menger => measure_energy(ctx, &ctx.cfg.params()?)?,
        EnergyKind::TangentPoint => {
            let p = ctx
                .cfg
                .energy
                .tp_exponent
                .ok_or_else(|| CliError::Config("tangent-point energy needs `energy.tp_exponent`".into()))?;
            let b = &ctx.cfg.budgets;
            let budget = match ctx.cfg.energy.mode {
                EnergyMode::Exhaustive => b.exhaustive_evaluations,
                EnergyMode::MonteCarlo => b.mc_tuples,
            };
            energy_tp(&ctx.cloud, p, ctx.cfg.energy.mode, budget, ctx.cfg.seed).map_err(|e| match e {
                Error::Domain(m) => CliError::Config(m),
                e => e.into(),
            })?
        }
    };
    write_json(&ctx.report_path("energy.json"), &ctx.header, &EnergyBody { estimate })
}

#[derive(Serialize)]
struct EtaDSummary {
    energy_bound: f64,
    ahlfors: [f64; 2],
    n_checked: usize,
    n_skipped: usize,
    n_violations: usize,
    max_ratio: f64,
    /// The first few violating tuples.
    violations: Vec<EtaDViolation>,
}

#[derive(Serialize)]
struct Comparison {
    lambda_over_kappa: f64,
    alpha: f64,
    beta_exponent: Option<f64>,
    oscillation_exponent: Option<f64>,
}

#[derive(Serialize)]
struct Verdict {
    eta_d_consistent: bool,
    beta_exponent_at_least_lambda_over_kappa: Option<bool>,
}

#[derive(Serialize)]
struct ScalingBody {
    energy: EnergyEstimate,
    eta_d: EtaDSummary,
    scan: Scan,
    oscillation_fit: Option<ScalingFit>,
    oscillation_pairs: Vec<(f64, f64)>,
    comparison: Comparison,
    verdict: Verdict,
}

/// `(|x−y|, d_Gr(T_x, T_y))` with `y` the sample whose distance to the
/// center is closest to each radius.
fn oscillation_pairs(ctx: &Context, centers: &[usize], radii: &[f64]) -> Result<Vec<(f64, f64)>, CliError> {
    let cloud = &ctx.cloud;
    let mut pairs_idx = vec![];
    for &c in centers {
        let x = cloud.point(c);
        for &s in radii {
            let best = (0..cloud.len())
                .filter(|&j| j != c)
                .map(|j| {
                    let d = x.iter().zip(cloud.point(j)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    (j, d)
                })
                .filter(|&(_, d)| d > 0.0)
                .min_by(|a, b| (a.1 - s).abs().total_cmp(&(b.1 - s).abs()));
            if let Some((j, d)) = best {
                pairs_idx.push((c, j, d));
            }
        }
    }
    let needed: Vec<usize> = pairs_idx.iter().flat_map(|&(c, j, _)| [c, j]).collect();
    let planes = tangents(cloud, &needed, &ctx.flatness_options())?;
    let mut out = vec![];
    for (c, j, d) in pairs_idx {
        if let (Some(a), Some(b)) = (&planes[&c], &planes[&j]) {
            out.push((d, grassmann_distance(a, b)?));
        }
    }
    Ok(out)
}

pub fn scaling_check(ctx: &Context) -> Result<(), CliError> {
    let params = ctx.cfg.params()?;
    let ahlfors = ctx
        .cfg
        .ahlfors
        .ok_or_else(|| CliError::Config("scaling-check needs `ahlfors` [A, R]".into()))?;
    let radii = ctx.cfg.radii()?;
    let estimate = measure_energy(ctx, &params)?;
    // a vanishing energy admits no voluminous tuple at all
    let bound = estimate.value.max(f64::MIN_POSITIVE);
    let report = eta_d_check(
        &ctx.cloud,
        bound,
        &params,
        (ahlfors[0], ahlfors[1]),
        ctx.cfg.budgets.eta_d_trials,
        ctx.cfg.seed,
    )
    .map_err(|e| match e {
        Error::Precondition(m) | Error::Domain(m) => CliError::Config(m),
        e => e.into(),
    })?;
    let scan = scan(ctx)?;
    let pairs = oscillation_pairs(ctx, &ctx.centers()?, &radii)?;
    let oscillation_fit = fit_power_law(&pairs).ok();
    let lk = params.lambda() / params.kappa();
    let beta_exponent = scan.fit_beta.as_ref().map(|f| f.exponent);
    let body = ScalingBody {
        eta_d: EtaDSummary {
            energy_bound: estimate.value,
            ahlfors,
            n_checked: report.n_checked,
            n_skipped: report.n_skipped,
            n_violations: report.violations.len(),
            max_ratio: report.max_ratio,
            violations: report.violations.iter().take(10).cloned().collect(),
        },
        verdict: Verdict {
            eta_d_consistent: report.violations.is_empty(),
            beta_exponent_at_least_lambda_over_kappa: beta_exponent.map(|e| e >= lk),
        },
        comparison: Comparison {
            lambda_over_kappa: lk,
            alpha: params.alpha(),
            beta_exponent,
            oscillation_exponent: oscillation_fit.as_ref().map(|f| f.exponent),
        },
        energy: estimate,
        scan,
        oscillation_fit,
        oscillation_pairs: pairs,
    };
    let mut header = ctx.header.clone();
    header.lambda_over_kappa = Some(lk);
    write_json(&ctx.report_path("scaling_check.json"), &header, &body)
}
