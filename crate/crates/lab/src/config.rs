//! Flat TOML experiment configuration.
//!
//! Every key except `scenario` has a default, so the smallest valid file is a
//! single line such as `scenario = "green-identity"`.

use std::path::{Path, PathBuf};

use greenlab::boundary_control::BumpShape;
use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::scenarios::Scenario;

/// Environment variable that replaces `output_dir` when set.
pub const OUTPUT_ROOT_ENV: &str = "LAB_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Zero,
    /// `V = c · 1` with `c = potential_scalar`.
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Lift,
    Direct,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    /// Grid points on `[0, X]`.
    #[serde(default = "defaults::n")]
    pub n: usize,
    /// Right end `X` of the truncated half-line.
    #[serde(default = "defaults::length")]
    pub length: f64,
    /// Horizon `T`; backward scenarios use `−T`.
    #[serde(default = "defaults::horizon")]
    pub horizon: f64,
    /// Time step; `h/2` when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "defaults::potential")]
    pub potential: PotentialKind,
    #[serde(default)]
    pub potential_scalar: f64,
    #[serde(default = "defaults::method")]
    pub method: MethodChoice,
    /// `sin2` (C¹) or `sin4` (C³).
    #[serde(default = "defaults::control_shape")]
    pub control_shape: String,
    #[serde(default = "defaults::control_start")]
    pub control_start: f64,
    #[serde(default = "defaults::control_end")]
    pub control_end: f64,
    #[serde(default = "defaults::control_amplitude")]
    pub control_amplitude: f64,
    /// Size of the bump family used by the reachability scenarios.
    #[serde(default = "defaults::control_count")]
    pub control_count: usize,
    /// Nonpositive time of the second duality relation.
    #[serde(default = "defaults::t_neg")]
    pub t_neg: f64,
    /// Random pairs tested by `green-identity`.
    #[serde(default = "defaults::pairs")]
    pub pairs: usize,
    /// Fourier modes of the random admissible state in the duality scenarios.
    #[serde(default = "defaults::state_modes")]
    pub state_modes: usize,
    /// Time samples of the Duhamel source.
    #[serde(default = "defaults::time_samples")]
    pub time_samples: usize,
    #[serde(default = "defaults::rank_tol")]
    pub rank_tol: f64,
    /// Sine modes per piece of the predicted unreachable subspace.
    #[serde(default = "defaults::predicted_modes")]
    pub predicted_modes: usize,
    /// Overrides the tolerance of the scenario's primary metric.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub seed: u64,
    /// Run even when a signal can reach the artificial port at `x = X`.
    #[serde(default)]
    pub allow_guard_violation: bool,
}

mod defaults {
    use super::{MethodChoice, PotentialKind};

    pub fn n() -> usize {
        128
    }
    pub fn length() -> f64 {
        2.0
    }
    pub fn horizon() -> f64 {
        1.0
    }
    pub fn potential() -> PotentialKind {
        PotentialKind::Zero
    }
    pub fn method() -> MethodChoice {
        MethodChoice::Both
    }
    pub fn control_shape() -> String {
        "sin2".into()
    }
    pub fn control_start() -> f64 {
        0.2
    }
    pub fn control_end() -> f64 {
        0.6
    }
    pub fn control_amplitude() -> f64 {
        1.0
    }
    pub fn control_count() -> usize {
        20
    }
    pub fn t_neg() -> f64 {
        -0.3
    }
    pub fn pairs() -> usize {
        100
    }
    pub fn state_modes() -> usize {
        6
    }
    pub fn time_samples() -> usize {
        4001
    }
    pub fn rank_tol() -> f64 {
        1e-8
    }
    pub fn predicted_modes() -> usize {
        8
    }
    pub fn output_dir() -> String {
        "lab-output".into()
    }
}

fn invalid(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        let cfg: Self = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn scenario(&self) -> Result<Scenario, LabError> {
        Scenario::parse(&self.scenario).ok_or_else(|| {
            LabError::Usage(format!(
                "unknown scenario '{}'; run `lab list` for the catalog",
                self.scenario
            ))
        })
    }

    pub fn shape(&self) -> Result<BumpShape, LabError> {
        BumpShape::parse(&self.control_shape)
            .ok_or_else(|| invalid(format!("control_shape must be sin2 or sin4, got '{}'", self.control_shape)))
    }

    pub fn h(&self) -> f64 {
        self.length / (self.n - 1) as f64
    }

    pub fn time_step(&self) -> f64 {
        self.dt.unwrap_or(0.5 * self.h())
    }

    /// Output directory, with the environment override applied.
    pub fn output_root(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if !root.is_empty() => PathBuf::from(root),
            _ => PathBuf::from(&self.output_dir),
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let scenario = self.scenario()?;
        if self.n < 32 {
            return Err(invalid(format!("n must be at least 32, got {}", self.n)));
        }
        let positive = [("length", self.length), ("horizon", self.horizon), ("rank_tol", self.rank_tol)];
        for (key, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(invalid(format!("{key} must be positive, got {value}")));
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid(format!("dt must be positive, got {dt}")));
            }
        }
        if let Some(tol) = self.tolerance {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(invalid(format!("tolerance must be nonnegative, got {tol}")));
            }
        }
        if self.rank_tol >= 1.0 {
            return Err(invalid("rank_tol must be below 1"));
        }
        if self.t_neg > 0.0 {
            return Err(invalid(format!("t_neg must be nonpositive, got {}", self.t_neg)));
        }
        if !(self.control_start >= 0.0 && self.control_start < self.control_end) {
            return Err(invalid(format!(
                "control support [{}, {}] must satisfy 0 <= start < end",
                self.control_start, self.control_end
            )));
        }
        if self.control_count == 0 || self.pairs == 0 || self.state_modes == 0 || self.predicted_modes == 0 {
            return Err(invalid("control_count, pairs, state_modes and predicted_modes must be positive"));
        }
        if self.time_samples < 3 {
            return Err(invalid("time_samples must be at least 3"));
        }
        self.shape()?;
        if self.potential == PotentialKind::Zero && self.potential_scalar != 0.0 {
            return Err(invalid("potential_scalar is set but potential = \"zero\""));
        }
        if scenario.needs_free_dirac() && self.potential != PotentialKind::Zero {
            return Err(invalid(format!(
                "{} compares against the free Dirac system and needs potential = \"zero\"",
                scenario.name()
            )));
        }
        if let Some(support) = scenario.control_support(self) {
            if self.horizon + support >= self.length && !self.allow_guard_violation {
                return Err(invalid(format!(
                    "horizon {} plus control support {} reaches the artificial end x = {}; \
                     set allow_guard_violation = true to run anyway",
                    self.horizon, support, self.length
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = ExperimentConfig::from_toml("scenario = \"green-identity\"").unwrap();
        assert_eq!(cfg.n, 128);
        assert_eq!(cfg.method, MethodChoice::Both);
        assert!((cfg.time_step() - cfg.h() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_values() {
        let cases = [
            "scenario = \"green-identity\"\nn = 16",
            "scenario = \"green-identity\"\ndt = -0.1",
            "scenario = \"green-identity\"\nunknown_key = 1",
            "scenario = \"oracle-agreement\"\ncontrol_shape = \"box\"",
            "scenario = \"oracle-agreement\"\npotential = \"scalar\"\npotential_scalar = 0.5",
            "scenario = \"oracle-agreement\"\nhorizon = 1.6",
            "scenario = \"duality-aux2\"\nt_neg = 0.2",
        ];
        for text in cases {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(LabError::Config(_))), "{text}");
        }
    }

    #[test]
    fn guard_can_be_overridden() {
        let text = "scenario = \"oracle-agreement\"\nhorizon = 1.6\nallow_guard_violation = true";
        assert!(ExperimentConfig::from_toml(text).is_ok());
    }

    #[test]
    fn unknown_scenario_is_a_usage_error() {
        assert!(matches!(ExperimentConfig::from_toml("scenario = \"nope\""), Err(LabError::Usage(_))));
    }
}
