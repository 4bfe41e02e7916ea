use std::path::{Path, PathBuf};

use menger_core::energy::{EnergyMode, EnergyParams, SearchParams};
use menger_core::shapes::GeneratorSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// One experiment, read from a single JSON file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub input: Input,
    #[serde(default)]
    pub params: Option<EnergyParams>,
    #[serde(default)]
    pub radii: Option<Radii>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub curvature: CurvatureConfig,
    #[serde(default)]
    pub energy: EnergyConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    /// Lower Ahlfors constants `(A, R)` for the η–d check.
    #[serde(default)]
    pub ahlfors: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Input {
    Generator(GeneratorSpec),
    /// A CSV cloud, or an OFF/OBJ mesh sampled with `n_samples` points.
    /// Relative paths are resolved against the config file.
    File {
        path: PathBuf,
        #[serde(default)]
        n_samples: Option<usize>,
    },
}

/// Either `{"r_max": r, "levels": k}` for `r·2^{-i}`, `i < k`, or an explicit
/// list.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Radii {
    Dyadic { r_max: f64, levels: usize },
    List(Vec<f64>),
}

impl Radii {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Radii::Dyadic { r_max, levels } => (0..*levels).map(|i| r_max * 0.5f64.powi(i as i32)).collect(),
            Radii::List(v) => v.clone(),
        };
        if v.is_empty() || v.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(CliError::Config("radii must be a nonempty list of positive numbers".into()));
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Outer tuples in Monte Carlo mode.
    pub mc_tuples: u64,
    /// Largest number of curvature evaluations in exhaustive mode.
    pub exhaustive_evaluations: u64,
    pub inner: SearchParams,
    pub curvature_tuples: usize,
    pub eta_d_trials: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            mc_tuples: 100_000,
            exhaustive_evaluations: 100_000_000,
            inner: SearchParams::default(),
            curvature_tuples: 10_000,
            eta_d_trials: 100_000,
        }
    }
}

/// File names inside the output directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub report: Option<String>,
    pub records: String,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            report: None,
            records: "scale_records.csv".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureKind {
    Kappa,
    KappaPrime,
    Menger,
    Svdm,
    /// `1/R_tp`, zero for tangent pairs.
    TangentPoint,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvatureConfig {
    pub kind: CurvatureKind,
    pub bins: usize,
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        CurvatureConfig {
            kind: CurvatureKind::Kappa,
            bins: 20,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyKind {
    Menger,
    TangentPoint,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    pub kind: EnergyKind,
    pub mode: EnergyMode,
    /// Exponent of the tangent-point energy.
    pub tp_exponent: Option<f64>,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            kind: EnergyKind::Menger,
            mode: EnergyMode::MonteCarlo,
            tp_exponent: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// Evenly spaced sample indices used as centers.
    pub centers: usize,
    /// Explicit center indices; overrides `centers`.
    pub center_indices: Option<Vec<usize>>,
    pub theta_mesh: Option<f64>,
    pub random_starts: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            centers: 8,
            center_indices: None,
            theta_mesh: None,
            random_starts: 3,
        }
    }
}

/// A parsed config with the hash of its bytes and its directory.
pub struct Loaded {
    pub config: ExperimentConfig,
    pub sha256: String,
    pub base: PathBuf,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config: ExperimentConfig =
        serde_json::from_slice(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        config,
        sha256: hex::encode(Sha256::digest(&bytes)),
        base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    })
}

impl ExperimentConfig {
    pub fn params(&self) -> Result<EnergyParams, CliError> {
        self.params
            .ok_or_else(|| CliError::Config("this command needs `params` {m, l, p}".into()))
    }

    pub fn radii(&self) -> Result<Vec<f64>, CliError> {
        self.radii
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a `radii` schedule".into()))?
            .values()
    }
}
