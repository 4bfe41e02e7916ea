use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ScaleRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Beta,
    Theta,
}

/// Least-squares line through `(log r, log value)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    /// `log c` in `value ≈ c·r^exponent`.
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub n_used: usize,
    /// Pairs dropped for a nonpositive or non-finite value or scale.
    pub n_excluded: usize,
}

pub fn fit_power_law(pairs: &[(f64, f64)]) -> Result<ScalingFit> {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(r, v)| *r > 0.0 && *v > 0.0 && r.is_finite() && v.is_finite())
        .map(|(r, v)| (r.ln(), v.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            found: pts.len(),
        });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all scales coincide".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum();
    Ok(ScalingFit {
        exponent,
        intercept,
        residual: (ss / k).sqrt(),
        n_used: pts.len(),
        n_excluded: pairs.len() - pts.len(),
    })
}

pub fn scaling_fit(records: &[ScaleRecord], field: Field) -> Result<ScalingFit> {
    let pairs: Vec<(f64, f64)> = records
        .iter()
        .map(|rec| {
            (
                rec.r,
                match field {
                    Field::Beta => rec.beta,
                    Field::Theta => rec.theta,
                },
            )
        })
        .collect();
    fit_power_law(&pairs)
}
