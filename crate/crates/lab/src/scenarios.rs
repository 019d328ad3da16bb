//! The scenario catalog and one runner per scenario.

use greenlab::analysis::{
    admissible_state, backward_reachable, check_aux1, check_aux2, check_auxiliary, classify_part, deficiency_indices,
    decay_probe, membership_probe, polarized_state, polarized_subspace, predicted_unreachable_basis, snapshot_reachable,
    BumpFamily, DeficiencyIndices, DualityCheck, OperatorSpec, Polarization,
};
use greenlab::boundary_control::{dirac_oracle, BoundarySolver, Bump, ControlSignal, Gauge, SolverMethod};
use greenlab::free_dynamics::{duhamel, duhamel_regularized, propagate};
use greenlab::green::{build_dirac, deficiency_modes, extend_self_adjoint, DeficiencyBasis, DiscreteGreenSystem, Potential, SelfAdjointExtension};
use greenlab::numerics::{CVector, Grid, TimeSamples, C64};
use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, MethodChoice, PotentialKind};
use crate::error::LabError;
use crate::report::{FieldTrace, Metric, ScenarioReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    GreenIdentity,
    DuhamelConsistency,
    OracleAgreement,
    DualityAuxiliary,
    DualityAux1,
    DualityAux2,
    ReachabilityForward,
    ReachabilityBackward,
    DeficiencyTable,
    PartClassification,
}

/// Catalog entry printed by `lab list`.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub claim: &'static str,
    pub primary_metric: &'static str,
    pub keys: &'static [&'static str],
}

/// Keys every scenario reads.
pub const COMMON_KEYS: &[&str] = &["scenario", "n", "length", "potential", "potential_scalar", "tolerance", "output_dir", "seed"];

impl Scenario {
    pub const ALL: [Scenario; 10] = [
        Scenario::GreenIdentity,
        Scenario::DuhamelConsistency,
        Scenario::OracleAgreement,
        Scenario::DualityAuxiliary,
        Scenario::DualityAux1,
        Scenario::DualityAux2,
        Scenario::ReachabilityForward,
        Scenario::ReachabilityBackward,
        Scenario::DeficiencyTable,
        Scenario::PartClassification,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::GreenIdentity => "green-identity",
            Self::DuhamelConsistency => "duhamel-consistency",
            Self::OracleAgreement => "oracle-agreement",
            Self::DualityAuxiliary => "duality-auxiliary",
            Self::DualityAux1 => "duality-aux1",
            Self::DualityAux2 => "duality-aux2",
            Self::ReachabilityForward => "reachability-forward",
            Self::ReachabilityBackward => "reachability-backward",
            Self::DeficiencyTable => "deficiency-table",
            Self::PartClassification => "part-classification",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn claim(self) -> &'static str {
        match self {
            Self::GreenIdentity => {
                "the discrete Dirac system satisfies the Green formula <L0* u, v> - <u, L0* v> = (G1 u, G2 v) - (G2 u, G1 v) exactly"
            }
            Self::DuhamelConsistency => {
                "the Duhamel integral and its integrated-by-parts form represent the same solution (constant 1); the free propagator is unitary and a group"
            }
            Self::OracleAgreement => {
                "the boundary-controlled Dirac trajectory is u(x,T) = f(T-x)(1,i) for both the lift and the direct solver"
            }
            Self::DualityAuxiliary => "(u^f(T), y) = i * int_0^T (f(t), G2 v^y(t-T)) dt for y in Dom L",
            Self::DualityAux1 => "int_0^T (y, u^f(t)) dt = i * int_0^T (G2 w^{y,T}(t), f(t)) dt",
            Self::DualityAux2 => {
                "(u^f(T), w^y(t)) = int_0^T (u^f(s), y) ds + i * int_0^T (f(s), G2 w^y(s+t-T)) ds for t <= 0"
            }
            Self::ReachabilityForward => {
                "states reachable at T > 0 are (1,i)-polarized, supported in (0,T), and orthogonal to the predicted unreachable subspace"
            }
            Self::ReachabilityBackward => {
                "states reachable at T < 0 are (1,-i)-polarized and meet the forward reachable set only in zero"
            }
            Self::DeficiencyTable => {
                "deficiency indices of the half-line Dirac operators: minimal (1,1), self-adjoint (0,0), left-polarized part (0,1)"
            }
            Self::PartClassification => {
                "the unreachable (1,-i)-polarized subspace carries an invariant part with indices (0,1), which is maximal and in class M"
            }
        }
    }

    pub fn primary_metric(self) -> &'static str {
        match self {
            Self::GreenIdentity => "max_relative_residual",
            Self::DuhamelConsistency => "representation_difference",
            Self::OracleAgreement => "max_oracle_error",
            Self::DualityAuxiliary | Self::DualityAux1 | Self::DualityAux2 => "scaled_residual",
            Self::ReachabilityForward | Self::ReachabilityBackward => "polarization_residual",
            Self::DeficiencyTable => "mismatched_rows",
            Self::PartClassification => "invariance_residual",
        }
    }

    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Self::GreenIdentity => &["pairs"],
            Self::DuhamelConsistency => &["time_samples", "horizon"],
            Self::OracleAgreement => &["horizon", "dt", "method", "control_shape", "control_start", "control_end", "control_amplitude", "allow_guard_violation"],
            Self::DualityAuxiliary | Self::DualityAux1 => {
                &["horizon", "dt", "method", "control_shape", "control_start", "control_end", "control_amplitude", "state_modes"]
            }
            Self::DualityAux2 => {
                &["horizon", "dt", "method", "control_shape", "control_start", "control_end", "control_amplitude", "state_modes", "t_neg"]
            }
            Self::ReachabilityForward => &["horizon", "dt", "method", "control_shape", "control_count", "rank_tol", "predicted_modes"],
            Self::ReachabilityBackward => &["horizon", "dt", "method", "control_shape", "control_count", "rank_tol"],
            Self::DeficiencyTable => &[],
            Self::PartClassification => &[],
        }
    }

    pub fn catalog() -> Vec<CatalogEntry> {
        Self::ALL
            .into_iter()
            .map(|s| CatalogEntry {
                name: s.name(),
                claim: s.claim(),
                primary_metric: s.primary_metric(),
                keys: s.keys(),
            })
            .collect()
    }

    /// Scenarios whose reference is the free Dirac system.
    pub fn needs_free_dirac(self) -> bool {
        matches!(
            self,
            Self::OracleAgreement | Self::ReachabilityForward | Self::ReachabilityBackward | Self::PartClassification
        )
    }

    /// The largest control time that must stay clear of the far end, if the
    /// scenario drives the boundary.
    pub fn control_support(self, cfg: &ExperimentConfig) -> Option<f64> {
        match self {
            Self::OracleAgreement | Self::DualityAuxiliary | Self::DualityAux1 | Self::DualityAux2 => Some(cfg.control_end),
            Self::ReachabilityForward | Self::ReachabilityBackward => Some(cfg.horizon * (1.0 - BumpFamily::MARGIN)),
            _ => None,
        }
    }

    /// Band of convergence orders accepted by `lab converge`, if the scenario
    /// has a discretization error to refine.
    pub fn expected_order(self) -> Option<(f64, f64)> {
        match self {
            Self::GreenIdentity => Some((2.0, 0.3)),
            Self::OracleAgreement => Some((2.0, 0.3)),
            Self::DualityAuxiliary | Self::DualityAux1 | Self::DualityAux2 => Some((2.0, 0.5)),
            _ => None,
        }
    }

    fn default_tolerance(self) -> f64 {
        match self {
            Self::GreenIdentity => 1e-12,
            Self::DuhamelConsistency => 1e-6,
            Self::OracleAgreement => 5e-3,
            Self::DualityAuxiliary | Self::DualityAux1 | Self::DualityAux2 => 1e-3,
            Self::ReachabilityForward | Self::ReachabilityBackward => 1e-3,
            Self::DeficiencyTable => 0.0,
            // relative to h²; see run_part_classification
            Self::PartClassification => 10.0,
        }
    }
}

struct Lab {
    sys: DiscreteGreenSystem,
    ext: SelfAdjointExtension,
    basis: DeficiencyBasis,
}

impl Lab {
    fn build(cfg: &ExperimentConfig) -> Result<Self, LabError> {
        let grid = Grid::new(cfg.n, cfg.length)?;
        let potential = match cfg.potential {
            PotentialKind::Zero => Potential::zero(&grid),
            PotentialKind::Scalar => Potential::scalar(&grid, cfg.potential_scalar),
        };
        let sys = build_dirac(grid, potential)?;
        let ext = extend_self_adjoint(&sys)?;
        let basis = deficiency_modes(&sys)?;
        Ok(Self { sys, ext, basis })
    }

    fn solver(&self, method: SolverMethod, dt: f64) -> BoundarySolver<'_> {
        BoundarySolver::new(&self.sys, &self.ext, &self.basis, method).with_dt(dt)
    }

    fn solvers(&self, cfg: &ExperimentConfig) -> Vec<(&'static str, BoundarySolver<'_>)> {
        let dt = cfg.time_step();
        let lift = ("lift", self.solver(SolverMethod::Lift(Gauge::MinimalNorm), dt));
        let direct = ("direct", self.solver(SolverMethod::Direct, dt));
        match cfg.method {
            MethodChoice::Lift => vec![lift],
            MethodChoice::Direct => vec![direct],
            MethodChoice::Both => vec![lift, direct],
        }
    }

    /// The solver used where only one is needed: lift unless `method = "direct"`.
    fn primary_solver(&self, cfg: &ExperimentConfig) -> BoundarySolver<'_> {
        self.solvers(cfg).remove(0).1
    }
}

fn control(cfg: &ExperimentConfig) -> Result<ControlSignal, LabError> {
    let bump = Bump::new(cfg.shape()?, cfg.control_start, cfg.control_end, C64::new(cfg.control_amplitude, 0.0))?;
    Ok(ControlSignal::from_bumps(vec![bump]))
}

struct Outcome {
    metrics: Vec<Metric>,
    details: serde_json::Value,
    warnings: Vec<String>,
    traces: Vec<FieldTrace>,
}

impl Outcome {
    fn new(metrics: Vec<Metric>, details: serde_json::Value) -> Self {
        Self {
            metrics,
            details,
            warnings: vec![],
            traces: vec![],
        }
    }
}

/// Runs the scenario named in `cfg`.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<ScenarioReport, LabError> {
    cfg.validate()?;
    let scenario = cfg.scenario()?;
    let tol = cfg.tolerance.unwrap_or_else(|| scenario.default_tolerance());
    let outcome = match scenario {
        Scenario::GreenIdentity => run_green_identity(cfg, tol)?,
        Scenario::DuhamelConsistency => run_duhamel(cfg, tol)?,
        Scenario::OracleAgreement => run_oracle(cfg, tol)?,
        Scenario::DualityAuxiliary | Scenario::DualityAux1 | Scenario::DualityAux2 => run_duality(cfg, scenario, tol)?,
        Scenario::ReachabilityForward => run_reachability_forward(cfg, tol)?,
        Scenario::ReachabilityBackward => run_reachability_backward(cfg, tol)?,
        Scenario::DeficiencyTable => run_deficiency_table(cfg, tol)?,
        Scenario::PartClassification => run_part_classification(cfg, tol)?,
    };
    let passed = outcome.metrics.iter().all(|m| m.passed);
    Ok(ScenarioReport {
        scenario: scenario.name().to_string(),
        claim: scenario.claim().to_string(),
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        passed,
        metrics: outcome.metrics,
        details: outcome.details,
        warnings: outcome.warnings,
        config: cfg.clone(),
        traces: outcome.traces,
    })
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> CVector {
    CVector::from_fn(dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn run_green_identity(cfg: &ExperimentConfig, tol: f64) -> Result<Outcome, LabError> {
    let grid = Grid::new(cfg.n, cfg.length)?;
    let potential = match cfg.potential {
        PotentialKind::Zero => Potential::zero(&grid),
        PotentialKind::Scalar => Potential::scalar(&grid, cfg.potential_scalar),
    };
    let sys = build_dirac(grid, potential)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.pairs {
        let u = random_state(&mut rng, sys.state_dim());
        let v = random_state(&mut rng, sys.state_dim());
        let scale = sys.norm(&sys.apply_adjoint(&u)) * sys.norm(&v) + sys.norm(&u) * sys.norm(&sys.apply_adjoint(&v));
        worst = worst.max(sys.green_residual(&u, &v).norm() / scale);
    }
    Ok(Outcome::new(
        vec![Metric::at_most("max_relative_residual", worst, tol)],
        json!({ "pairs": cfg.pairs, "n": cfg.n }),
    ))
}

fn smooth_profile(sys: &DiscreteGreenSystem) -> CVector {
    let centre = 0.5 * sys.grid().length();
    let width = 0.025 * sys.grid().length().powi(2);
    let profile = sys.sample(|x| {
        let b = (-(x - centre).powi(2) / width).exp();
        [C64::new(b, 0.0), C64::new(0.0, -b * (x - centre))]
    });
    sys.project_to_constraint(&profile)
}

fn run_duhamel(cfg: &ExperimentConfig, tol: f64) -> Result<Outcome, LabError> {
    let lab = Lab::build(cfg)?;
    let (sys, ext) = (&lab.sys, &lab.ext);
    // g(s) = p(x) (sin 2s + i cos 3s): continuously differentiable in time
    let profile = smooth_profile(sys);
    let g = |s: f64| &profile * C64::new((2.0 * s).sin(), (3.0 * s).cos());
    let gp = |s: f64| &profile * C64::new(2.0 * (2.0 * s).cos(), -3.0 * (3.0 * s).sin());
    let (origin, t) = (0.0, cfg.horizon);
    let gs = TimeSamples::from_fn(origin, t, cfg.time_samples, g)?;
    let gps = TimeSamples::from_fn(origin, t, cfg.time_samples, gp)?;
    let w1 = duhamel(ext, &gs, origin, t)?;
    let w2 = duhamel_regularized(ext, &gs, &gps, origin, t)?;
    let difference = sys.norm(&(&w1 - &w2)) / sys.norm(&w1);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let domain_state = |rng: &mut ChaCha8Rng| sys.project_to_constraint(&random_state(rng, sys.state_dim()));
    let mut unitarity: f64 = 0.0;
    for _ in 0..20 {
        let y = domain_state(&mut rng);
        let s = rng.gen_range(-3.0..3.0);
        let v = propagate(ext, &y, 0.0, s)?;
        unitarity = unitarity.max((sys.norm(&v) - sys.norm(&y)).abs() / sys.norm(&y));
    }
    let mut group: f64 = 0.0;
    for _ in 0..5 {
        let y = domain_state(&mut rng);
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let two = propagate(ext, &propagate(ext, &y, 0.0, a)?, 0.0, b)?;
        let one = propagate(ext, &y, 0.0, a + b)?;
        group = group.max(sys.norm(&(two - one)) / sys.norm(&y));
    }
    Ok(Outcome::new(
        vec![
            Metric::at_most("representation_difference", difference, tol),
            Metric::at_most("unitarity_defect", unitarity, 1e-10),
            Metric::at_most("group_defect", group, 1e-9),
        ],
        json!({ "time_samples": cfg.time_samples, "horizon": t, "constant": 1.0 }),
    ))
}

fn run_oracle(cfg: &ExperimentConfig, tol: f64) -> Result<Outcome, LabError> {
    let lab = Lab::build(cfg)?;
    let f = control(cfg)?;
    let oracle = dirac_oracle(&f, cfg.horizon, &lab.sys);
    let oracle_norm = lab.sys.norm(&oracle);
    let mut metrics = Vec::new();
    let mut errors = serde_json::Map::new();
    let mut warnings = Vec::new();
    let mut traces = vec![FieldTrace::snapshot("oracle", &lab.sys, cfg.horizon, &oracle)];
    let mut worst: f64 = 0.0;
    for (label, solver) in lab.solvers(cfg) {
        let solution = solver.terminal_state(&f, cfg.horizon)?;
        let err = lab.sys.norm(&(&solution.state - &oracle)) / oracle_norm;
        worst = worst.max(err);
        errors.insert(label.to_string(), json!(err));
        metrics.push(Metric::at_most(&format!("{label}_oracle_error"), err, tol));
        warnings.extend(solution.warnings);
        traces.push(FieldTrace::snapshot(label, &lab.sys, cfg.horizon, &solution.state));
    }
    metrics.insert(0, Metric::at_most("max_oracle_error", worst, tol));
    warnings.dedup();
    Ok(Outcome {
        metrics,
        details: json!({
            "errors": errors,
            "solution_kind": f.solution_kind(greenlab::boundary_control::Direction::Forward),
            "dt": cfg.time_step(),
        }),
        warnings,
        traces,
    })
}

fn duality_json(c: &DualityCheck) -> serde_json::Value {
    json!({
        "lhs": [c.lhs.re, c.lhs.im],
        "rhs": [c.rhs.re, c.rhs.im],
        "terms": c.terms.iter().map(|t| [t.re, t.im]).collect::<Vec<_>>(),
        "residual": c.residual,
        "scale": c.scale,
        "scaled_residual": c.scaled_residual,
    })
}

fn run_duality(cfg: &ExperimentConfig, scenario: Scenario, tol: f64) -> Result<Outcome, LabError> {
    let lab = Lab::build(cfg)?;
    let f = control(cfg)?;
    let y = admissible_state(&lab.sys, cfg.state_modes, cfg.seed);
    let mut metrics = Vec::new();
    let mut details = serde_json::Map::new();
    let mut worst: f64 = 0.0;
    for (label, solver) in lab.solvers(cfg) {
        let check = match scenario {
            Scenario::DualityAuxiliary => check_auxiliary(&solver, &f, &y, cfg.horizon)?,
            Scenario::DualityAux1 => check_aux1(&solver, &f, &y, cfg.horizon)?,
            _ => check_aux2(&solver, &f, &y, cfg.t_neg, cfg.horizon)?,
        };
        worst = worst.max(check.scaled_residual);
        metrics.push(Metric::at_most(&format!("{label}_scaled_residual"), check.scaled_residual, tol));
        details.insert(label.to_string(), duality_json(&check));
    }
    metrics.insert(0, Metric::at_most("scaled_residual", worst, tol));
    Ok(Outcome::new(metrics, serde_json::Value::Object(details)))
}

fn reachability_json(r: &greenlab::analysis::ReachabilityReport) -> serde_json::Value {
    serde_json::to_value(r).expect("reachability report serializes")
}

fn run_reachability_forward(cfg: &ExperimentConfig, tol: f64) -> Result<Outcome, LabError> {
    let lab = Lab::build(cfg)?;
    let family = BumpFamily::spread(cfg.control_count, cfg.horizon, cfg.shape()?)?;
    let predicted = predicted_unreachable_basis(&lab.sys, cfg.horizon, cfg.predicted_modes)?;
    let solver = lab.primary_solver(cfg);
    let report = snapshot_reachable(&solver, &family, cfg.horizon, cfg.rank_tol, Some(&predicted))?;
    let metrics = vec![
        Metric::at_most("polarization_residual", report.polarization_residual, tol),
        Metric::at_most("tail_fraction", report.tail_fraction, 1e-6),
        Metric::at_most("predicted_leak", report.predicted_leak.unwrap_or(f64::NAN), 1e-3),
        Metric::at_most("predicted_angle_deg", report.max_predicted_angle_deg(), 5.0),
    ];
    let mut out = Outcome::new(metrics, reachability_json(&report));
    out.warnings = report.warnings.clone();
    if report.reachable_basis.ncols() > 0 {
        let first = report.reachable_basis.column(0).into_owned();
        out.traces.push(FieldTrace::snapshot("leading_direction", &lab.sys, cfg.horizon, &first));
    }
    Ok(out)
}

fn run_reachability_backward(cfg: &ExperimentConfig, tol: f64) -> Result<Outcome, LabError> {
    let lab = Lab::build(cfg)?;
    let family = BumpFamily::spread(cfg.control_count, cfg.horizon, cfg.shape()?)?;
    let solver = lab.primary_solver(cfg);
    let forward = snapshot_reachable(&solver, &family, cfg.horizon, cfg.rank_tol, None)?;
    let backward = backward_reachable(&solver, &family, -cfg.horizon, cfg.rank_tol)?;
    let angle = forward.smallest_angle_deg(&backward, &lab.sys)?;
    let metrics = vec![
        Metric::at_most("polarization_residual", backward.polarization_residual, tol),
        Metric::at_most("tail_fraction", backward.tail_fraction, 1e-6),
        Metric::at_least("forward_backward_angle_deg", angle, 80.0),
    ];
    let mut out = Outcome::new(
        metrics,
        json!({ "backward": reachability_json(&backward), "forward_rank": forward.rank, "smallest_angle_deg": angle }),
    );
    out.warnings = backward.warnings.clone();
    Ok(out)
}

#[derive(Serialize)]
struct TableRow {
    operator: String,
    computed: DeficiencyIndices,
    expected: DeficiencyIndices,
    is_maximal: bool,
    in_class_m: bool,
}

fn run_deficiency_table(cfg: &ExperimentConfig, tol: f64) -> Result<Outcome, LabError> {
    let shift = match cfg.potential {
        PotentialKind::Zero => 0.0,
        PotentialKind::Scalar => cfg.potential_scalar,
    };
    let rows = [
        (OperatorSpec::dirac_minimal(), (1, 1)),
        (OperatorSpec::dirac_self_adjoint(), (0, 0)),
        (OperatorSpec::dirac_left_part(), (0, 1)),
    ];
    let mut table = Vec::new();
    let mut mismatched = 0usize;
    for (mut spec, (n_plus, n_minus)) in rows {
        spec.potential_at_infinity = Matrix2::identity() * C64::from(shift);
        let computed = deficiency_indices(&spec)?;
        let expected = DeficiencyIndices { n_plus, n_minus };
        if computed != expected {
            mismatched += 1;
        }
        table.push(TableRow {
            operator: spec.name.to_string(),
            is_maximal: computed.is_maximal(),
            in_class_m: computed.in_class_m(),
            computed,
            expected,
        });
    }
    Ok(Outcome::new(
        vec![Metric::new("mismatched_rows", mismatched as f64, crate::report::Comparison::AtMost, tol)],
        json!({
            "rows": table,
            "method": "decaying characteristic exponents of z' = -J(mu - V) z at mu = -i (n+) and mu = +i (n-), reduced by polarization and endpoint conditions",
        }),
    ))
}

fn run_part_classification(cfg: &ExperimentConfig, tol: f64) -> Result<Outcome, LabError> {
    let lab = Lab::build(cfg)?;
    let sys = &lab.sys;
    let basis = polarized_subspace(sys, Polarization::LeftMoving)?;
    let x_end = sys.grid().length();
    let samples: Vec<CVector> = (1..=6)
        .map(|k| {
            polarized_state(sys, Polarization::LeftMoving, |x| {
                C64::from((k as f64 * std::f64::consts::PI * x / x_end).sin())
            })
        })
        .map(|s| sys.restrict_to_minimal_domain(&s))
        .collect();
    let h = sys.grid().h();
    let tolerance = tol * h * h;
    let c = classify_part(sys, &basis, &samples, Some(&OperatorSpec::dirac_left_part()), tolerance)?;

    // a left-moving pulse away from the port, probed at negative times
    let y = polarized_state(sys, Polarization::LeftMoving, |x| {
        let (a, b) = (0.2 * x_end, 0.4 * x_end);
        C64::from(if x > a && x < b { (std::f64::consts::PI * (x - a) / (b - a)).sin().powi(4) } else { 0.0 })
    });
    let times: Vec<f64> = (0..=6).map(|k| -0.05 * x_end * k as f64).collect();
    let membership = membership_probe(sys, &lab.ext, &y, &times)?;
    let decay = decay_probe(sys, &lab.ext, &samples[0], &y, &times)?;

    let indices_match = c.indices == Some(DeficiencyIndices { n_plus: 0, n_minus: 1 });
    Ok(Outcome::new(
        vec![
            Metric::at_most("invariance_residual", c.invariance_residual, tolerance),
            Metric::flag("indices_are_0_1", indices_match),
            Metric::flag("in_class_m", c.in_class_m == Some(true)),
            Metric::flag("decay_probe_bounded", decay.bounded),
        ],
        json!({ "classification": c, "membership_probe": membership, "decay_probe": decay, "h": h }),
    ))
}
