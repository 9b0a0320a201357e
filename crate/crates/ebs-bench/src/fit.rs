//! Power-law fitting of accuracy against measurement cost.
//!
//! The model is `epsilon = A * N^(-c)`, fitted by ordinary least squares in
//! log-log space. Rounds are aggregated to their median across trials first:
//! stopping times are heavy-tailed and a single unlucky trial should not
//! drag the curve.

use std::collections::BTreeMap;

use crate::records::BenchRecord;
use crate::{BenchError, BenchResult};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    /// Prefactor `A`, always positive.
    pub amplitude: f64,
    /// Decay exponent `c` in `epsilon = A * N^(-c)`.
    pub exponent: f64,
    /// Root-mean-square residual of log(epsilon) around the fitted line.
    pub residual: f64,
    /// Aggregate points entering the fit.
    pub points: usize,
}

/// Median; averages the two central elements for even lengths.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("median input must be ordered"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Collapses records into per-estimator curves of (median rounds, epsilon),
/// one point per distinct epsilon, epsilon ascending.
pub fn aggregate(records: &[BenchRecord]) -> BTreeMap<String, Vec<(f64, f64)>> {
    let mut rounds: BTreeMap<(String, u64), (f64, Vec<f64>)> = BTreeMap::new();
    for r in records {
        rounds
            .entry((r.estimator.clone(), r.epsilon.to_bits()))
            .or_insert_with(|| (r.epsilon, Vec::new()))
            .1
            .push(r.rounds_used as f64);
    }
    let mut curves: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for ((estimator, _), (epsilon, samples)) in rounds {
        curves
            .entry(estimator)
            .or_default()
            .push((median(&samples), epsilon));
    }
    for curve in curves.values_mut() {
        curve.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("epsilon is finite"));
    }
    curves
}

/// Least-squares fit of `log epsilon` against `log N` over `(N, epsilon)`
/// points. Needs at least two distinct N values; every coordinate must be
/// positive.
pub fn fit_power_law(points: &[(f64, f64)]) -> BenchResult<PowerLawFit> {
    if points.len() < 2 {
        return Err(BenchError::Numerical(format!(
            "power-law fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    for &(n, eps) in points {
        if n <= 0.0 || eps <= 0.0 || !n.is_finite() || !eps.is_finite() {
            return Err(BenchError::Numerical(format!(
                "power-law fit needs positive finite coordinates, got ({n}, {eps})"
            )));
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, e)| (n.ln(), e.ln())).collect();
    let count = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    if sxx <= 0.0 {
        return Err(BenchError::Numerical(
            "power-law fit needs at least 2 distinct N values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    Ok(PowerLawFit {
        amplitude: intercept.exp(),
        exponent: -slope,
        residual: (ss_res / count).sqrt(),
        points: points.len(),
    })
}
