//! Power-law fits and compression summaries over metric rows.

use std::collections::BTreeMap;

use crate::bench::MetricsRow;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("need at least 10 points spanning two decades of n_naive, got {points} points over {decades:.2} decades")]
    InsufficientSpread { points: usize, decades: f64 },
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<f64, FitError> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let decades = if pts.is_empty() { 0.0 } else { hi - lo };
    if pts.len() < 10 || decades < 2.0 {
        return Err(FitError::InsufficientSpread { points: pts.len(), decades });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Slope of `n_aobs` against `n_naive` over all rows.
pub fn fit_rows(rows: &[MetricsRow]) -> Result<f64, FitError> {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n_naive as f64, r.n_aobs as f64)).collect();
    fit_exponent(&pts)
}

/// Same fit against the decision-diagram size.
pub fn fit_rows_bdd(rows: &[MetricsRow]) -> Result<f64, FitError> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.n_bdd.map(|b| (r.n_naive as f64, b as f64)))
        .collect();
    fit_exponent(&pts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSummary {
    pub step: u32,
    pub seeds: usize,
    pub mean_n_aobs: f64,
    pub mean_n_bdd: Option<f64>,
    /// Mean over seeds of `n_naive / n_aobs`.
    pub compression_aobs: f64,
    pub compression_bdd: Option<f64>,
}

/// Per-step means over seeds. Ratios are averaged per row, not formed from
/// averaged sizes.
pub fn summarize_compression(rows: &[MetricsRow]) -> Vec<StepSummary> {
    let mut by_step: BTreeMap<u32, Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        by_step.entry(r.step).or_default().push(r);
    }
    by_step
        .into_iter()
        .map(|(step, rs)| {
            let n = rs.len() as f64;
            let bdd: Vec<&MetricsRow> = rs.iter().copied().filter(|r| r.n_bdd.is_some()).collect();
            let nb = bdd.len() as f64;
            StepSummary {
                step,
                seeds: rs.len(),
                mean_n_aobs: rs.iter().map(|r| r.n_aobs as f64).sum::<f64>() / n,
                mean_n_bdd: (!bdd.is_empty())
                    .then(|| bdd.iter().map(|r| r.n_bdd.unwrap() as f64).sum::<f64>() / nb),
                compression_aobs: rs.iter().map(|r| r.compression()).sum::<f64>() / n,
                compression_bdd: (!bdd.is_empty())
                    .then(|| bdd.iter().map(|r| r.bdd_compression().unwrap()).sum::<f64>() / nb),
            }
        })
        .collect()
}
