use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{analyze_fold, estimated_distance, FoldAnalysis, FoldCoefficients, FoldError};
use crate::netmodel::{BusId, TypedNetwork};
use crate::pmr::PmrOptions;
use crate::powerflow::{find_pair_solutions, SolveError, SolverOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistancePoint {
    pub lambda: f64,
    pub d_estimated: Option<f64>,
    pub d_exact: Option<f64>,
    /// `|d_est − d_exact| / d_exact`; absent at the fold itself.
    pub relative_error: Option<f64>,
    /// Why a value is missing, when one is.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceCurve {
    pub bus: BusId,
    /// Absent when the grid was empty and no fold was needed.
    pub p_max_pu: Option<f64>,
    pub coefficients: Option<FoldCoefficients>,
    pub points: Vec<DistancePoint>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.4}"))
}

impl DistanceCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,d_estimated,d_exact,relative_error\n");
        for p in &self.points {
            out.push_str(&format!(
                "{:.4},{},{},{}\n",
                p.lambda,
                opt(p.d_estimated),
                opt(p.d_exact),
                opt(p.relative_error)
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("bus {}", self.bus);
        if let Some(p) = self.p_max_pu {
            out.push_str(&format!("  P_max = {p:.4} p.u."));
        }
        if let Some(c) = &self.coefficients {
            out.push_str(&format!("  alpha = {:.4}  beta = {:.4}", c.alpha, c.beta));
        }
        out.push('\n');
        out.push_str(&format!(
            "{:>10} {:>12} {:>12} {:>10}\n",
            "lambda", "d_est", "d_exact", "rel_err"
        ));
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
        for p in &self.points {
            out.push_str(&format!(
                "{:>10.4} {:>12} {:>12} {:>10}",
                p.lambda,
                cell(p.d_estimated),
                cell(p.d_exact),
                cell(p.relative_error)
            ));
            if let Some(e) = &p.error {
                out.push_str(&format!("  ({e})"));
            }
            out.push('\n');
        }
        out
    }
}

/// Distance between the SEP and the UEP at loading `λ`.
pub fn exact_distance(
    tn: &TypedNetwork,
    lambda: f64,
    fa: &FoldAnalysis,
    solver: &SolverOptions,
) -> Result<f64, SolveError> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    Ok(find_pair_solutions(tn, lambda, fa, solver)?.distance(tn))
}

fn point(
    tn: &TypedNetwork,
    lambda: f64,
    fa: &FoldAnalysis,
    solver: &SolverOptions,
) -> DistancePoint {
    let mut errors = Vec::new();
    let d_estimated = estimated_distance(&fa.coefficients, lambda)
        .map_err(|e| errors.push(e.to_string()))
        .ok();
    let d_exact = exact_distance(tn, lambda, fa, solver)
        .map_err(|e| errors.push(e.to_string()))
        .ok();
    let relative_error = match (d_estimated, d_exact) {
        (Some(e), Some(x)) if x > 0.0 => Some((e - x).abs() / x),
        _ => None,
    };
    DistancePoint {
        lambda,
        d_estimated,
        d_exact,
        relative_error,
        error: (!errors.is_empty()).then(|| errors.join("; ")),
    }
}

/// Estimated and exact SEP–UEP distance of `bus` for every `λ` of `grid`.
///
/// The fold is analysed once; the grid points are then independent and run
/// in parallel. A point that cannot be solved keeps its estimate and records
/// the reason instead of failing the whole curve.
pub fn distance_curve(
    tn: &TypedNetwork,
    bus: BusId,
    grid: &[f64],
    options: &PmrOptions,
) -> Result<DistanceCurve, FoldError> {
    if grid.is_empty() {
        return Ok(DistanceCurve {
            bus,
            p_max_pu: None,
            coefficients: None,
            points: vec![],
        });
    }
    let fa = analyze_fold(tn, bus, options)?;
    let points = grid
        .par_iter()
        .map(|&lam| point(tn, lam, &fa, &options.solver))
        .collect();
    Ok(DistanceCurve {
        bus,
        p_max_pu: Some(fa.fold.p_max_pu),
        coefficients: Some(fa.coefficients),
        points,
    })
}
