use greenlab::green::DiscreteGreenSystem;
use greenlab::numerics::CVector;
use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Passes when `value <= tolerance`.
    AtMost,
    /// Passes when `value >= tolerance`.
    AtLeast,
    /// Passes when `value == tolerance` exactly (integer-valued checks).
    Equals,
}

/// One measured quantity with its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Metric {
    pub fn new(name: &str, value: f64, comparison: Comparison, tolerance: f64) -> Self {
        let passed = match comparison {
            Comparison::AtMost => value <= tolerance,
            Comparison::AtLeast => value >= tolerance,
            Comparison::Equals => value == tolerance,
        };
        Self {
            name: name.to_string(),
            value,
            tolerance,
            comparison,
            passed,
        }
    }

    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Comparison::AtMost, tolerance)
    }

    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Comparison::AtLeast, tolerance)
    }

    pub fn flag(name: &str, holds: bool) -> Self {
        Self::new(name, if holds { 1.0 } else { 0.0 }, Comparison::Equals, 1.0)
    }
}

/// A sampled field `u(x, t)` destined for a CSV trace.
#[derive(Debug, Clone)]
pub struct FieldTrace {
    /// File name suffix, e.g. `lift` gives `<scenario>.lift.csv`.
    pub label: String,
    pub rows: Vec<[f64; 6]>,
}

impl FieldTrace {
    pub const HEADER: [&'static str; 6] = ["t", "x", "re_u1", "im_u1", "re_u2", "im_u2"];

    pub fn snapshot(label: &str, sys: &DiscreteGreenSystem, t: f64, u: &CVector) -> Self {
        let n = sys.n_points();
        let rows = (0..n)
            .map(|j| {
                let (a, b) = (u[j], u[n + j]);
                [t, sys.grid().x(j), a.re, a.im, b.re, b.im]
            })
            .collect();
        Self {
            label: label.to_string(),
            rows,
        }
    }
}

/// Result of one scenario run.
///
/// Contains no timestamps: identical configs give byte-identical reports.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    /// The claim the scenario checks, in words.
    pub claim: String,
    pub artifact_version: String,
    pub passed: bool,
    pub metrics: Vec<Metric>,
    pub details: serde_json::Value,
    pub warnings: Vec<String>,
    pub config: ExperimentConfig,
    #[serde(skip)]
    pub traces: Vec<FieldTrace>,
}

impl ScenarioReport {
    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn failed_metrics(&self) -> impl Iterator<Item = &Metric> {
        self.metrics.iter().filter(|m| !m.passed)
    }
}
