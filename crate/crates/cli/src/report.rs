use std::path::Path;

use menger_core::cloud::CloudSummary;
use menger_core::energy::EnergyParams;
use serde::Serialize;

use crate::CliError;

/// Embedded at the top of every report. Holds no timestamps, so identical
/// runs produce identical bytes.
#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub covering_radius: f64,
    pub cloud: CloudSummary,
    /// `(m, l, p)` with `λ`, `κ` and `α`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<EnergyParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_over_kappa: Option<f64>,
}

#[derive(Serialize)]
struct Doc<'a, T: Serialize> {
    header: &'a Header,
    #[serde(flatten)]
    body: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, header: &Header, body: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(&Doc { header, body }).map_err(|e| CliError::Data(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
