//! Per-grid-point aggregates and fits over a record table.

use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, Median, Statistics};

use crate::runner::TrialRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub grid_param: f64,
    /// Trials with a finite error.
    pub trials: usize,
    pub failures: usize,
    pub not_converged: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub points: Vec<PointSummary>,
    /// Least-squares slope of `log(mean)` against `log(grid_param)`.
    pub loglog_slope: Option<f64>,
    /// Mean error against the grid parameter.
    pub linear_fit: Option<LinearFit>,
}

/// Ordinary least squares `y ≈ slope·x + intercept`; needs two distinct `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().mean();
    let my = ys.iter().mean();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Slope of the log-log fit; `None` with fewer than two positive pairs.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    if lx.len() != xs.len() {
        return None;
    }
    linear_fit(&lx, &ly).map(|f| f.slope)
}

/// Groups records by grid value, in order of first appearance.
pub fn summarize(records: &[TrialRecord]) -> Summary {
    let mut order: Vec<f64> = Vec::new();
    for r in records {
        if !order.iter().any(|g| g.to_bits() == r.grid_param.to_bits()) {
            order.push(r.grid_param);
        }
    }
    let points: Vec<PointSummary> = order
        .iter()
        .map(|&g| {
            let cell: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.grid_param.to_bits() == g.to_bits())
                .collect();
            let errors: Vec<f64> = cell
                .iter()
                .map(|r| r.l2_error)
                .filter(|e| e.is_finite())
                .collect();
            let (mean, median, std) = match errors.len() {
                0 => (f64::NAN, f64::NAN, f64::NAN),
                1 => (errors[0], errors[0], 0.0),
                _ => (
                    errors.iter().mean(),
                    Data::new(errors.clone()).median(),
                    errors.iter().std_dev(),
                ),
            };
            PointSummary {
                grid_param: g,
                trials: errors.len(),
                failures: cell.len() - errors.len(),
                not_converged: cell.iter().filter(|r| !r.converged).count(),
                mean,
                median,
                std,
            }
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.grid_param).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let finite = ys.iter().all(|y| y.is_finite());
    Summary {
        loglog_slope: if finite { loglog_slope(&xs, &ys) } else { None },
        linear_fit: if finite { linear_fit(&xs, &ys) } else { None },
        points,
    }
}
