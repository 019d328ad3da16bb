//! The boundary-control problem `i u_t + L0* u = 0`, `u(0) = 0`, `Γ1 u = f`.
//!
//! Three independent routes to `u^f(T)`:
//! - [`solve_bc_lift`]: split `u = φ⁺ + φ⁻ + p` with `φ^±` in the deficiency
//!   subspaces, then `p = −∫₀ᵗ e^{i(t−s)L} ψ(s) ds` spectrally;
//! - [`solve_bc_direct`]: Crank–Nicolson on the full grid with `u¹(0,t) = f(t)`
//!   imposed by row replacement;
//! - [`dirac_oracle`]: characteristics of the free Dirac system.
//!
//! Negative horizons run the same machinery backward in time.

use std::f64::consts::PI;

use nalgebra::Vector2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::free_dynamics::Trajectory;
use crate::green::{BoundaryValue, DeficiencyBasis, DiscreteGreenSystem, SelfAdjointExtension};
use crate::numerics::{least_squares, step_count, trapezoid_weights, CMatrix, CVector, TimeSamples, C64, I};

/// Time direction of a control experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn of_horizon(t: f64) -> Self {
        if t < 0.0 {
            Self::Backward
        } else {
            Self::Forward
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Self::Forward => 1.0,
            Self::Backward => -1.0,
        }
    }
}

/// Whether the representation formula yields a classical solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionKind {
    Classical,
    Generalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpShape {
    /// `sin²` on the support: C¹, with jumps in the second derivative at the ends.
    SinSquared,
    /// `sin⁴` on the support: C³.
    SinQuartic,
}

impl BumpShape {
    pub fn continuity(self) -> u32 {
        match self {
            Self::SinSquared => 1,
            Self::SinQuartic => 3,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sin2" | "sin_squared" => Some(Self::SinSquared),
            "sin4" | "sin_quartic" => Some(Self::SinQuartic),
            _ => None,
        }
    }
}

/// `A · sin^p(π (t − a)/(b − a))` on `[a, b]`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub shape: BumpShape,
    pub start: f64,
    pub end: f64,
    pub amplitude: C64,
}

impl Bump {
    pub fn new(shape: BumpShape, start: f64, end: f64, amplitude: C64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(Error::InvalidArgument(format!(
                "bump support [{start}, {end}] is empty"
            )));
        }
        Ok(Self {
            shape,
            start,
            end,
            amplitude,
        })
    }

    pub fn centered(shape: BumpShape, center: f64, width: f64, amplitude: C64) -> Result<Self> {
        Self::new(shape, center - 0.5 * width, center + 0.5 * width, amplitude)
    }

    fn phase(&self, t: f64) -> Option<(f64, f64)> {
        if t <= self.start || t >= self.end {
            return None;
        }
        let k = PI / (self.end - self.start);
        Some((k * (t - self.start), k))
    }

    pub fn value(&self, t: f64) -> C64 {
        let Some((s, _)) = self.phase(t) else {
            return C64::new(0.0, 0.0);
        };
        let p = match self.shape {
            BumpShape::SinSquared => s.sin().powi(2),
            BumpShape::SinQuartic => s.sin().powi(4),
        };
        self.amplitude * p
    }

    pub fn derivative(&self, t: f64) -> C64 {
        let Some((s, k)) = self.phase(t) else {
            return C64::new(0.0, 0.0);
        };
        let p = match self.shape {
            BumpShape::SinSquared => k * (2.0 * s).sin(),
            BumpShape::SinQuartic => 4.0 * k * s.sin().powi(3) * s.cos(),
        };
        self.amplitude * p
    }

    pub fn second_derivative(&self, t: f64) -> C64 {
        let Some((s, k)) = self.phase(t) else {
            return C64::new(0.0, 0.0);
        };
        let (sn, cs) = (s.sin(), s.cos());
        let p = match self.shape {
            BumpShape::SinSquared => 2.0 * k * k * (2.0 * s).cos(),
            BumpShape::SinQuartic => k * k * (12.0 * sn * sn * cs * cs - 4.0 * sn.powi(4)),
        };
        self.amplitude * p
    }

    pub fn mirrored(&self) -> Self {
        Self {
            start: -self.end,
            end: -self.start,
            ..*self
        }
    }
}

#[derive(Debug, Clone)]
enum Profile {
    Bumps(Vec<Bump>),
    Sampled {
        values: TimeSamples<C64>,
        derivatives: Vec<C64>,
    },
}

/// Scalar boundary control at port 0; the far port is held at zero.
#[derive(Debug, Clone)]
pub struct ControlSignal {
    profile: Profile,
    smooth_class: bool,
}

impl ControlSignal {
    pub fn zero() -> Self {
        Self::from_bumps(vec![])
    }

    /// Sum of bumps. Class-𝓜 status follows from the bump shapes and supports.
    pub fn from_bumps(bumps: Vec<Bump>) -> Self {
        let c2 = bumps.iter().all(|b| b.shape.continuity() >= 2);
        Self {
            profile: Profile::Bumps(bumps),
            smooth_class: c2,
        }
    }

    pub fn bump(shape: BumpShape, start: f64, end: f64, amplitude: C64) -> Result<Self> {
        Ok(Self::from_bumps(vec![Bump::new(shape, start, end, amplitude)?]))
    }

    /// A tabulated control. Derivatives come from fourth-order differences;
    /// values between samples are interpolated linearly and vanish outside
    /// the sampled window. With `smooth_class` set, `f(0) = f′(0) = 0` must hold.
    pub fn sampled(values: TimeSamples<C64>, smooth_class: bool) -> Result<Self> {
        if values.len() < 5 {
            return Err(Error::InsufficientSamples(
                "a sampled control needs at least 5 samples".into(),
            ));
        }
        if values.dt == 0.0 || !values.dt.is_finite() {
            return Err(Error::InvalidArgument("sampled control needs a nonzero step".into()));
        }
        let derivatives = fourth_order_derivative(&values.values, values.dt);
        let signal = Self {
            profile: Profile::Sampled {
                values,
                derivatives,
            },
            smooth_class,
        };
        if smooth_class {
            let scale = signal.sup_norm().max(1.0);
            let (f0, d0) = (signal.value(0.0), signal.derivative(0.0));
            if f0.norm() > 1e-10 * scale || d0.norm() > 1e-6 * scale {
                return Err(Error::InvalidArgument(format!(
                    "class-M control needs f(0) = f'(0) = 0, got f(0) = {f0}, f'(0) = {d0}"
                )));
            }
        }
        Ok(signal)
    }

    pub fn smooth_class(&self) -> bool {
        self.smooth_class
    }

    pub fn bumps(&self) -> Option<&[Bump]> {
        match &self.profile {
            Profile::Bumps(b) => Some(b),
            Profile::Sampled { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.profile {
            Profile::Bumps(b) => b.iter().all(|b| b.amplitude == C64::new(0.0, 0.0)),
            Profile::Sampled { values, .. } => values.values.iter().all(|v| v.norm() == 0.0),
        }
    }

    /// Smallest interval outside of which the control vanishes.
    pub fn support(&self) -> Option<(f64, f64)> {
        match &self.profile {
            Profile::Bumps(b) => b
                .iter()
                .filter(|b| b.amplitude != C64::new(0.0, 0.0))
                .map(|b| (b.start, b.end))
                .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1))),
            Profile::Sampled { values, .. } => {
                let nz: Vec<usize> = (0..values.len()).filter(|&j| values.values[j].norm() > 0.0).collect();
                let (first, last) = (*nz.first()?, *nz.last()?);
                let (a, b) = (values.time(first.saturating_sub(1)), values.time((last + 1).min(values.len() - 1)));
                Some((a.min(b), a.max(b)))
            }
        }
    }

    /// Class-𝓜 membership for the given direction: smooth enough and
    /// supported strictly on the correct side of `t = 0`.
    pub fn class_m(&self, direction: Direction) -> bool {
        if !self.smooth_class {
            return false;
        }
        match (self.support(), direction) {
            (None, _) => true,
            (Some((a, _)), Direction::Forward) => a >= 0.0,
            (Some((_, b)), Direction::Backward) => b <= 0.0,
        }
    }

    pub fn solution_kind(&self, direction: Direction) -> SolutionKind {
        if self.class_m(direction) {
            SolutionKind::Classical
        } else {
            SolutionKind::Generalized
        }
    }

    pub fn value(&self, t: f64) -> C64 {
        match &self.profile {
            Profile::Bumps(b) => b.iter().map(|b| b.value(t)).sum(),
            Profile::Sampled { values, .. } => interpolate(values, &values.values, t),
        }
    }

    pub fn derivative(&self, t: f64) -> C64 {
        match &self.profile {
            Profile::Bumps(b) => b.iter().map(|b| b.derivative(t)).sum(),
            Profile::Sampled {
                values,
                derivatives,
            } => interpolate(values, derivatives, t),
        }
    }

    /// Boundary value in `B`: `(f(t), 0)`.
    pub fn port_value(&self, t: f64) -> BoundaryValue {
        [self.value(t), C64::new(0.0, 0.0)]
    }

    pub fn port_derivative(&self, t: f64) -> BoundaryValue {
        [self.derivative(t), C64::new(0.0, 0.0)]
    }

    pub fn samples(&self, start: f64, end: f64, count: usize) -> Result<TimeSamples<C64>> {
        TimeSamples::from_fn(start, end, count, |t| self.value(t))
    }

    /// `t ↦ f(−t)`.
    pub fn mirrored(&self) -> Self {
        match &self.profile {
            Profile::Bumps(b) => Self {
                profile: Profile::Bumps(b.iter().map(Bump::mirrored).collect()),
                smooth_class: self.smooth_class,
            },
            Profile::Sampled {
                values,
                derivatives,
            } => Self {
                profile: Profile::Sampled {
                    values: TimeSamples {
                        start: -values.start,
                        dt: -values.dt,
                        values: values.values.clone(),
                    },
                    derivatives: derivatives.iter().map(|d| -d).collect(),
                },
                smooth_class: self.smooth_class,
            },
        }
    }

    fn sup_norm(&self) -> f64 {
        match &self.profile {
            Profile::Bumps(b) => b.iter().map(|b| b.amplitude.norm()).sum(),
            Profile::Sampled { values, .. } => values.values.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// `‖f‖_{L²(a, b)}` by fine trapezoid sampling.
    pub fn l2_norm(&self, a: f64, b: f64) -> f64 {
        let count = 4001;
        let dt = (b - a).abs() / (count - 1) as f64;
        let w = trapezoid_weights(count, dt);
        (0..count)
            .map(|j| {
                let t = a + (b - a) * j as f64 / (count - 1) as f64;
                self.value(t).norm_sqr() * w[j]
            })
            .sum::<f64>()
            .sqrt()
    }
}

fn interpolate(grid: &TimeSamples<C64>, values: &[C64], t: f64) -> C64 {
    let pos = (t - grid.start) / grid.dt;
    let last = (grid.len() - 1) as f64;
    if !(-1e-9..=last + 1e-9).contains(&pos) {
        return C64::new(0.0, 0.0);
    }
    let pos = pos.clamp(0.0, last);
    let j = (pos.floor() as usize).min(grid.len() - 2);
    let frac = pos - j as f64;
    values[j] * (1.0 - frac) + values[j + 1] * frac
}

fn fourth_order_derivative(v: &[C64], dt: f64) -> Vec<C64> {
    let n = v.len();
    (0..n)
        .map(|j| {
            let d = if j >= 2 && j + 2 < n {
                (v[j - 2] - v[j - 1] * 8.0 + v[j + 1] * 8.0 - v[j + 2]) / 12.0
            } else if j < 2 {
                (v[j] * -25.0 + v[j + 1] * 48.0 - v[j + 2] * 36.0 + v[j + 3] * 16.0 - v[j + 4] * 3.0) / 12.0
            } else {
                (v[j] * 25.0 - v[j - 1] * 48.0 + v[j - 2] * 36.0 - v[j - 3] * 16.0 + v[j - 4] * 3.0) / 12.0
            };
            d / dt
        })
        .collect()
}

/// How `f = Γ1[φ⁺ + φ⁻]` is split between the deficiency modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// Minimal-norm coefficients per time sample.
    #[default]
    MinimalNorm,
    /// `φ⁻ = 0`.
    PlusOnly,
    /// `φ⁺ = 0`.
    MinusOnly,
}

/// Deficiency-mode lift of a control on a uniform time grid.
#[derive(Debug, Clone)]
pub struct LiftedControl {
    /// Mode coefficients (basis order) at each time sample.
    pub coefficients: TimeSamples<CVector>,
    pub coefficient_rates: Vec<CVector>,
    /// `ψ = φ⁺_t + φ⁺ + φ⁻_t − φ⁻`.
    pub psi: TimeSamples<CVector>,
    /// `max_t |Γ1[φ⁺ + φ⁻](t) − f(t)|`.
    pub lift_residual: f64,
}

/// Maps a boundary value `b ∈ B` to mode coefficients `c` with `Γ1 Φ c = b`.
fn gauge_operator(basis: &DeficiencyBasis, gauge: Gauge) -> Result<CMatrix> {
    let g = basis.gamma1_matrix();
    let cols: Vec<usize> = basis
        .modes()
        .iter()
        .enumerate()
        .filter(|(_, m)| match gauge {
            Gauge::MinimalNorm => true,
            Gauge::PlusOnly => m.sign == crate::green::DeficiencySign::Plus,
            Gauge::MinusOnly => m.sign == crate::green::DeficiencySign::Minus,
        })
        .map(|(c, _)| c)
        .collect();
    let restricted = CMatrix::from_fn(g.nrows(), cols.len(), |r, c| g[(r, cols[c])]);
    let rank = restricted.rank(1e-10 * restricted.norm().max(1.0));
    if rank < g.nrows() {
        return Err(Error::NotSurjective {
            rank,
            required: g.nrows(),
        });
    }
    let mut op = CMatrix::zeros(g.ncols(), g.nrows());
    for p in 0..g.nrows() {
        let mut e = CVector::zeros(g.nrows());
        e[p] = C64::new(1.0, 0.0);
        let x = least_squares(&restricted, &e)?;
        for (c, &col) in cols.iter().enumerate() {
            op[(col, p)] = x[c];
        }
    }
    Ok(op)
}

/// Lifts `f` into the deficiency subspaces on `count` samples of `[start, end]`.
pub fn lift_control(
    f: &ControlSignal,
    basis: &DeficiencyBasis,
    gauge: Gauge,
    start: f64,
    end: f64,
    count: usize,
) -> Result<LiftedControl> {
    let op = gauge_operator(basis, gauge)?;
    let g = basis.gamma1_matrix();
    let to_vec = |b: BoundaryValue| CVector::from_row_slice(&b);
    let coefficients = TimeSamples::from_fn(start, end, count, |t| &op * to_vec(f.port_value(t)))?;
    let times = coefficients.times();
    let coefficient_rates: Vec<CVector> = times.iter().map(|&t| &op * to_vec(f.port_derivative(t))).collect();

    let mut lift_residual: f64 = 0.0;
    for (c, &t) in coefficients.values.iter().zip(&times) {
        let r = g * c - to_vec(f.port_value(t));
        lift_residual = lift_residual.max(r.camax());
    }
    let scale = f.sup_norm().max(1.0);
    if lift_residual > 1e-10 * scale {
        return Err(Error::NotSurjective {
            rank: g.rank(1e-10),
            required: g.nrows(),
        });
    }

    let psi_values = coefficients
        .values
        .iter()
        .zip(&coefficient_rates)
        .map(|(c, dc)| psi_state(basis, c, dc))
        .collect();
    Ok(LiftedControl {
        psi: TimeSamples {
            start: coefficients.start,
            dt: coefficients.dt,
            values: psi_values,
        },
        coefficients,
        coefficient_rates,
        lift_residual,
    })
}

fn psi_state(basis: &DeficiencyBasis, c: &CVector, dc: &CVector) -> CVector {
    let mut out = CVector::zeros(basis.modes()[0].values.len());
    for (m, mode) in basis.modes().iter().enumerate() {
        out.axpy(dc[m] + c[m] * mode.sign.psi_sign(), &mode.values, C64::new(1.0, 0.0));
    }
    out
}

/// `φ⁺(t) + φ⁻(t)` from mode coefficients.
pub fn lift_state(basis: &DeficiencyBasis, c: &CVector) -> CVector {
    let mut out = CVector::zeros(basis.modes()[0].values.len());
    for (mode, cm) in basis.modes().iter().zip(c.iter()) {
        out.axpy(*cm, &mode.values, C64::new(1.0, 0.0));
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub dt: f64,
    pub gauge: Gauge,
}

impl SolverOptions {
    /// `dt = h/2`, minimal-norm gauge.
    pub fn for_system(sys: &DiscreteGreenSystem) -> Self {
        Self {
            dt: 0.5 * sys.grid().h(),
            gauge: Gauge::MinimalNorm,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BcSolution {
    pub time: f64,
    pub state: CVector,
    pub kind: SolutionKind,
    pub warnings: Vec<String>,
}

/// Warns when a signal from the control can reach the artificial port at `x = X`.
pub fn finite_speed_guard(sys: &DiscreteGreenSystem, f: &ControlSignal, horizon: f64) -> Option<String> {
    let x_end = sys.grid().length();
    let reach = match (f.support(), Direction::of_horizon(horizon)) {
        (None, _) => return None,
        (Some((a, _)), Direction::Forward) => horizon - a.max(0.0),
        (Some((_, b)), Direction::Backward) => b.min(0.0) - horizon,
    };
    (reach >= x_end).then(|| {
        format!("finite-speed guard violated: signal travels {reach:.3} >= X = {x_end:.3}; far-port contamination possible")
    })
}

fn horizon_grid(horizon: f64, dt: f64) -> Result<(usize, f64)> {
    let steps = step_count(horizon, dt)?;
    Ok((steps, horizon / steps as f64))
}

/// Weights `(w0, w1)` with `∫₀^dt e^{iλ(dt−τ)} a(τ) dτ = w0 a(0) + w1 a(dt)`
/// for linear `a`. Exact in the oscillation, so large `λ dt` costs no accuracy.
fn exponential_step_weights(lam: f64, dt: f64) -> (C64, C64) {
    let theta = lam * dt;
    if theta.abs() < 1e-2 {
        // w0/dt = Σ (iθ)^k [1/(k+1)! − 1/(k+2)!],  w1/dt = Σ (iθ)^k/(k+2)!
        let z = I * theta;
        let (mut pow, mut fact1, mut w0, mut w1) = (C64::new(1.0, 0.0), 1.0, C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for k in 0..8 {
            let fact2 = fact1 * (k + 2) as f64;
            w0 += pow * (1.0 / fact1 - 1.0 / fact2);
            w1 += pow / fact2;
            pow *= z;
            fact1 = fact2;
        }
        return (w0 * dt, w1 * dt);
    }
    let e = (I * theta).exp();
    let w1 = I / lam - (e - 1.0) / (lam * lam * dt);
    let w0 = (e - 1.0) / (I * lam) - w1;
    (w0, w1)
}

/// Spectral coefficients of `∫₀^{t_n} e^{i(t_n−s)L} ψ(s) ds − P φ(t_n)` at every
/// time sample, `P` being the projection onto `Dom L`.
///
/// The `φ_t` part of `ψ` is integrated by parts exactly, so the integrand is
/// `Σ_m ⟨Φ_m, e_k⟩ (iλ_k + σ_m) c_m(s)`. For modes fitted to the discrete
/// operator this only depends on `Γ1[φ⁺ + φ⁻] = f`, which makes the result
/// independent of the gauge to rounding. Coefficients are interpolated
/// linearly between samples and the exponential is integrated exactly.
fn lift_integrals(ext: &SelfAdjointExtension, basis: &DeficiencyBasis, lifted: &LiftedControl, keep_all: bool) -> Vec<CVector> {
    let spectral = ext.spectral();
    let modes = CMatrix::from_columns(&basis.modes().iter().map(|m| m.values.clone()).collect::<Vec<_>>());
    let mode_coeffs = spectral.coefficients_many(&modes);
    let signs: Vec<f64> = basis.modes().iter().map(|m| m.sign.psi_sign()).collect();
    let coefficients = &lifted.coefficients;
    let dt = coefficients.dt;
    let count = coefficients.len();
    let per_mode: Vec<Vec<C64>> = spectral
        .eigenvalues
        .par_iter()
        .enumerate()
        .map(|(k, &lam)| {
            let step = (I * (lam * dt)).exp();
            let (w0, w1) = exponential_step_weights(lam, dt);
            let factors: Vec<C64> = signs
                .iter()
                .enumerate()
                .map(|(m, &sigma)| mode_coeffs[(k, m)] * (I * lam + sigma))
                .collect();
            let a = |j: usize| -> C64 { coefficients.values[j].iter().zip(&factors).map(|(c, w)| c * w).sum() };
            let mut acc = C64::new(0.0, 0.0);
            let mut prev = a(0);
            let mut out = Vec::with_capacity(if keep_all { count } else { 1 });
            if keep_all {
                out.push(acc);
            }
            for j in 1..count {
                let cur = a(j);
                acc = step * acc + prev * w0 + cur * w1;
                prev = cur;
                if keep_all || j + 1 == count {
                    out.push(acc);
                }
            }
            if count == 1 {
                out.push(acc);
            }
            out
        })
        .collect();
    let n_out = per_mode[0].len();
    (0..n_out)
        .map(|j| CVector::from_iterator(per_mode.len(), per_mode.iter().map(|v| v[j])))
        .collect()
}

/// `φ⁺ + φ⁻` restricted to the entries eliminated by `L`.
fn boundary_part(ext: &SelfAdjointExtension, basis: &DeficiencyBasis, c: &CVector) -> CVector {
    let mut full = lift_state(basis, c);
    for &i in ext.free_indices() {
        full[i] = C64::new(0.0, 0.0);
    }
    full
}

struct LiftSetup {
    basis: DeficiencyBasis,
    lifted: LiftedControl,
    warnings: Vec<String>,
}

fn lift_setup(
    sys: &DiscreteGreenSystem,
    ext: &SelfAdjointExtension,
    basis: &DeficiencyBasis,
    f: &ControlSignal,
    horizon: f64,
    opts: &SolverOptions,
) -> Result<LiftSetup> {
    let (steps, _) = horizon_grid(horizon, opts.dt)?;
    let basis = basis.fitted_to(sys, ext)?;
    let lifted = lift_control(f, &basis, opts.gauge, 0.0, horizon, steps + 1)?;
    let warnings = finite_speed_guard(sys, f, horizon).into_iter().collect();
    Ok(LiftSetup {
        basis,
        lifted,
        warnings,
    })
}

/// `u^f(T) = φ⁺(T) + φ⁻(T) − ∫₀ᵀ e^{i(T−s)L} ψ(s) ds` (any sign of `T`).
pub fn solve_bc_lift(
    sys: &DiscreteGreenSystem,
    ext: &SelfAdjointExtension,
    basis: &DeficiencyBasis,
    f: &ControlSignal,
    horizon: f64,
    opts: &SolverOptions,
) -> Result<BcSolution> {
    let kind = f.solution_kind(Direction::of_horizon(horizon));
    if horizon == 0.0 || f.is_zero() {
        return Ok(BcSolution {
            time: horizon,
            state: sys.zeros(),
            kind,
            warnings: vec![],
        });
    }
    let LiftSetup {
        basis,
        lifted,
        warnings,
    } = lift_setup(sys, ext, basis, f, horizon, opts)?;
    let integral = lift_integrals(ext, &basis, &lifted, false).pop().expect("one output");
    let last = lifted.coefficients.values.last().expect("nonempty");
    let state = boundary_part(ext, &basis, last) - ext.spectral().synthesize(&integral);
    Ok(BcSolution {
        time: horizon,
        state,
        kind,
        warnings,
    })
}

/// The lift representation evaluated at every step of `[0, T]`.
pub fn lift_trajectory(
    sys: &DiscreteGreenSystem,
    ext: &SelfAdjointExtension,
    basis: &DeficiencyBasis,
    f: &ControlSignal,
    horizon: f64,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    let LiftSetup { basis, lifted, .. } = lift_setup(sys, ext, basis, f, horizon, opts)?;
    let integrals = lift_integrals(ext, &basis, &lifted, true);
    let spectral = ext.spectral();
    let states = integrals
        .par_iter()
        .zip(lifted.coefficients.values.par_iter())
        .map(|(acc, c)| boundary_part(ext, &basis, c) - spectral.synthesize(acc))
        .collect();
    Ok(Trajectory {
        times: lifted.coefficients.times(),
        states,
        origin_time: 0.0,
    })
}

/// [`solve_bc_lift`] restricted to negative horizons.
pub fn solve_bc_backward(
    sys: &DiscreteGreenSystem,
    ext: &SelfAdjointExtension,
    basis: &DeficiencyBasis,
    f: &ControlSignal,
    horizon: f64,
    opts: &SolverOptions,
) -> Result<BcSolution> {
    if horizon >= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "backward solve needs a negative horizon, got {horizon}"
        )));
    }
    solve_bc_lift(sys, ext, basis, f, horizon, opts)
}

/// Crank–Nicolson for `i u_t + L0* u = 0` with `u¹(0,t) = f(t)`, `u¹(X,t) = 0`.
///
/// A negative `horizon` steps backward in time with the same scheme.
pub fn solve_bc_direct(sys: &DiscreteGreenSystem, f: &ControlSignal, horizon: f64, dt: f64) -> Result<Trajectory> {
    let (steps, dt) = horizon_grid(horizon, dt)?;
    let dim = sys.state_dim();
    let near = sys.index(0, 0);
    let far = sys.index(0, sys.n_points() - 1);
    let shift = I / dt;

    let mut lhs = sys.matrix() * C64::from(0.5);
    for d in 0..dim {
        lhs[(d, d)] += shift;
    }
    for row in [near, far] {
        lhs.row_mut(row).fill(C64::new(0.0, 0.0));
        lhs[(row, row)] = C64::new(1.0, 0.0);
    }
    let lu = lhs.lu();
    if !lu.is_invertible() {
        return Err(Error::SingularStep);
    }

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut u = sys.zeros();
    times.push(0.0);
    states.push(u.clone());
    for step in 1..=steps {
        let t = if step == steps { horizon } else { step as f64 * dt };
        let mut rhs = &u * shift - sys.apply_adjoint(&u) * C64::from(0.5);
        rhs[near] = f.value(t);
        rhs[far] = C64::new(0.0, 0.0);
        u = lu.solve(&rhs).ok_or(Error::SingularStep)?;
        times.push(t);
        states.push(u.clone());
    }
    Ok(Trajectory {
        times,
        states,
        origin_time: 0.0,
    })
}

/// Right-moving polarization `(1, i)` carried by forward solutions.
pub fn forward_polarization() -> Vector2<C64> {
    Vector2::new(C64::new(1.0, 0.0), I)
}

/// Left-moving polarization `(1, −i)` carried by backward solutions.
pub fn backward_polarization() -> Vector2<C64> {
    Vector2::new(C64::new(1.0, 0.0), -I)
}

/// Closed-form free Dirac trajectory (`V = 0`, half-line).
///
/// Forward (`T ≥ 0`): `u(x, T) = f(T − x)(1, i)` with `f ≡ 0` on `(−∞, 0]`.
/// Backward (`T < 0`): `u(x, T) = f(T + x)(1, −i)` with `f ≡ 0` on `[0, ∞)`.
pub fn dirac_oracle(f: &ControlSignal, horizon: f64, sys: &DiscreteGreenSystem) -> CVector {
    match Direction::of_horizon(horizon) {
        Direction::Forward => {
            let p = forward_polarization();
            sys.sample(|x| {
                let s = horizon - x;
                let v = if s > 0.0 { f.value(s) } else { C64::new(0.0, 0.0) };
                [v * p[0], v * p[1]]
            })
        }
        Direction::Backward => {
            let p = backward_polarization();
            sys.sample(|x| {
                let s = horizon + x;
                let v = if s < 0.0 { f.value(s) } else { C64::new(0.0, 0.0) };
                [v * p[0], v * p[1]]
            })
        }
    }
}

/// Which solver produces `u^f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Lift(Gauge),
    Direct,
}

impl SolverMethod {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lift" => Some(Self::Lift(Gauge::MinimalNorm)),
            "direct" => Some(Self::Direct),
            _ => None,
        }
    }
}

/// A configured boundary-control solver over a fixed system.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySolver<'a> {
    pub sys: &'a DiscreteGreenSystem,
    pub ext: &'a SelfAdjointExtension,
    pub basis: &'a DeficiencyBasis,
    pub method: SolverMethod,
    pub dt: f64,
}

impl<'a> BoundarySolver<'a> {
    pub fn new(
        sys: &'a DiscreteGreenSystem,
        ext: &'a SelfAdjointExtension,
        basis: &'a DeficiencyBasis,
        method: SolverMethod,
    ) -> Self {
        Self {
            sys,
            ext,
            basis,
            method,
            dt: 0.5 * sys.grid().h(),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    fn options(&self, gauge: Gauge) -> SolverOptions {
        SolverOptions { dt: self.dt, gauge }
    }

    pub fn terminal_state(&self, f: &ControlSignal, horizon: f64) -> Result<BcSolution> {
        match self.method {
            SolverMethod::Lift(gauge) => solve_bc_lift(self.sys, self.ext, self.basis, f, horizon, &self.options(gauge)),
            SolverMethod::Direct => {
                let traj = solve_bc_direct(self.sys, f, horizon, self.dt)?;
                Ok(BcSolution {
                    time: horizon,
                    state: traj.states.last().cloned().expect("nonempty trajectory"),
                    kind: f.solution_kind(Direction::of_horizon(horizon)),
                    warnings: finite_speed_guard(self.sys, f, horizon).into_iter().collect(),
                })
            }
        }
    }

    pub fn trajectory(&self, f: &ControlSignal, horizon: f64) -> Result<Trajectory> {
        match self.method {
            SolverMethod::Lift(gauge) => lift_trajectory(self.sys, self.ext, self.basis, f, horizon, &self.options(gauge)),
            SolverMethod::Direct => solve_bc_direct(self.sys, f, horizon, self.dt),
        }
    }
}
