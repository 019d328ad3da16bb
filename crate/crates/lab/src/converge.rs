//! Convergence studies: run a scenario over a list of grid sizes and fit the
//! observed order by least squares on `log error` against `log N`.

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::scenarios::{run_scenario, Scenario};

/// Errors below this are treated as rounding: the scheme is exact.
pub const EXACT_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservedOrder {
    /// Every error sits at the rounding floor.
    Exact,
    Fitted { order: f64, pairwise: Vec<f64> },
    /// Errors do not decrease under refinement.
    NonConvergent { pairwise: Vec<f64> },
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub scenario: String,
    pub metric: String,
    pub sizes: Vec<usize>,
    pub errors: Vec<f64>,
    pub observed: ObservedOrder,
    pub expected_order: f64,
    pub band: f64,
    pub passed: bool,
}

/// Least-squares slope of `log e` against `log N`, negated.
pub fn fit_order(sizes: &[usize], errors: &[f64]) -> ObservedOrder {
    assert_eq!(sizes.len(), errors.len());
    if errors.iter().all(|&e| e.abs() < EXACT_FLOOR) {
        return ObservedOrder::Exact;
    }
    let pairwise: Vec<f64> = sizes
        .windows(2)
        .zip(errors.windows(2))
        .map(|(n, e)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect();
    if errors.iter().any(|&e| !(e > 0.0 && e.is_finite())) || errors.windows(2).any(|e| e[1] >= e[0]) {
        return ObservedOrder::NonConvergent { pairwise };
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    ObservedOrder::Fitted {
        order: -sxy / sxx,
        pairwise,
    }
}

pub fn parse_sizes(text: &str) -> Result<Vec<usize>, LabError> {
    let sizes = text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| LabError::Usage(format!("cannot parse sizes '{text}': {e}")))?;
    if sizes.len() < 3 {
        return Err(LabError::Usage("a convergence study needs at least three sizes".into()));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::Usage("sizes must be strictly ascending".into()));
    }
    Ok(sizes)
}

pub fn convergence_study(scenario: Scenario, sizes: &[usize], base: &ExperimentConfig) -> Result<ConvergenceReport, LabError> {
    let (expected_order, band) = scenario.expected_order().ok_or_else(|| {
        LabError::Usage(format!("{} has no discretization error to refine", scenario.name()))
    })?;
    let metric = scenario.primary_metric();
    let mut errors = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut cfg = base.clone();
        cfg.scenario = scenario.name().to_string();
        cfg.n = n;
        // the step follows the grid unless pinned in the config
        let report = run_scenario(&cfg)?;
        let value = report.metric(metric).map(|m| m.value).unwrap_or(f64::NAN);
        errors.push(value);
    }
    let observed = fit_order(sizes, &errors);
    let passed = match &observed {
        ObservedOrder::Exact => true,
        ObservedOrder::Fitted { order, .. } => (order - expected_order).abs() <= band,
        ObservedOrder::NonConvergent { .. } => false,
    };
    Ok(ConvergenceReport {
        scenario: scenario.name().to_string(),
        metric: metric.to_string(),
        sizes: sizes.to_vec(),
        errors,
        observed,
        expected_order,
        band,
        passed,
    })
}
