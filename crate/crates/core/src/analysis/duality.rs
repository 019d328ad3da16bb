//! Numerical checks of the duality relations between `u^f` and the free
//! trajectories `v^y`, `w^y`.
//!
//! With `v^{y,T}(t) = e^{i(t−T)L} y` and `w^{y,T}(t) = ∫_T^t v^{y,T}(s) ds`,
//! `w^y = w^{y,0}`:
//! - auxiliary: `(u^f(T), y) = i ∫₀ᵀ (f(t), Γ2 v^{y,T}(t))_B dt`;
//! - first: `∫₀ᵀ (y, u^f(t)) dt = i ∫₀ᵀ (Γ2 w^{y,T}(t), f(t))_B dt`;
//! - second (`t ≤ 0`): `(u^f(T), w^y(t)) = ∫₀ᵀ (u^f(s), y) ds + i ∫₀ᵀ (f(s), Γ2 w^y(s+t−T))_B ds`.
//!
//! Each side is computed independently: the left from a boundary-control
//! solver, the right from the free dynamics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary_control::{BoundarySolver, ControlSignal};
use crate::error::{Error, Result};
use crate::free_dynamics::{integrated_trajectory, propagate_trajectory, CONSTRAINT_TOL};
use crate::green::{boundary_inner, DiscreteGreenSystem};
use crate::numerics::{integrate_time, step_count, CVector, Quadrature, C64, I};

#[derive(Debug, Clone, Serialize)]
pub struct DualityCheck {
    pub lhs: C64,
    pub rhs: C64,
    /// Independently evaluated summands of `rhs`, when there are several.
    pub terms: Vec<C64>,
    pub residual: f64,
    /// `‖f‖_{L²(0,T)} · ‖y‖`.
    pub scale: f64,
    pub scaled_residual: f64,
}

impl DualityCheck {
    fn new(lhs: C64, terms: Vec<C64>, scale: f64) -> Self {
        let rhs: C64 = terms.iter().sum();
        let residual = (lhs - rhs).norm();
        Self {
            lhs,
            rhs,
            terms,
            residual,
            scale,
            scaled_residual: if scale > 0.0 { residual / scale } else { residual },
        }
    }
}

fn check_state(sys: &DiscreteGreenSystem, y: &CVector) -> Result<()> {
    if y.len() != sys.state_dim() {
        return Err(Error::InvalidArgument(format!(
            "state has dimension {}, expected {}",
            y.len(),
            sys.state_dim()
        )));
    }
    let violation = sys.constraint_violation(y);
    if violation > CONSTRAINT_TOL * y.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::ConstraintViolation { violation });
    }
    Ok(())
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "duality checks need a positive horizon, got {horizon}"
        )));
    }
    Ok(())
}

/// Uniform times on `[0, T]` matching the solver's step.
fn time_grid(solver: &BoundarySolver, horizon: f64) -> Result<(Vec<f64>, f64)> {
    let steps = step_count(horizon, solver.dt)?;
    let dt = horizon / steps as f64;
    let times = (0..=steps)
        .map(|j| if j == steps { horizon } else { j as f64 * dt })
        .collect();
    Ok((times, dt))
}

fn integrate(values: &[C64], dt: f64) -> Result<C64> {
    integrate_time(values, dt, Quadrature::Trapezoid)
}

fn scale(f: &ControlSignal, horizon: f64, sys: &DiscreteGreenSystem, y: &CVector) -> f64 {
    f.l2_norm(0.0, horizon) * sys.norm(y)
}

/// `(u^f(T), y)` against `i ∫₀ᵀ (f(t), Γ2 e^{i(t−T)L} y)_B dt`.
pub fn check_auxiliary(solver: &BoundarySolver, f: &ControlSignal, y: &CVector, horizon: f64) -> Result<DualityCheck> {
    let sys = solver.sys;
    check_state(sys, y)?;
    check_horizon(horizon)?;
    let u_end = solver.terminal_state(f, horizon)?.state;
    let lhs = sys.inner(&u_end, y);
    let (times, dt) = time_grid(solver, horizon)?;
    let v = propagate_trajectory(solver.ext, y, horizon, &times)?;
    let integrand: Vec<C64> = times
        .iter()
        .zip(&v.states)
        .map(|(&t, vt)| boundary_inner(&f.port_value(t), &sys.gamma2(vt)))
        .collect();
    let rhs = I * integrate(&integrand, dt)?;
    Ok(DualityCheck::new(lhs, vec![rhs], scale(f, horizon, sys, y)))
}

/// `∫₀ᵀ (y, u^f(t)) dt` against `i ∫₀ᵀ (Γ2 w^{y,T}(t), f(t))_B dt`.
pub fn check_aux1(solver: &BoundarySolver, f: &ControlSignal, y: &CVector, horizon: f64) -> Result<DualityCheck> {
    let sys = solver.sys;
    check_state(sys, y)?;
    check_horizon(horizon)?;
    let (times, dt) = time_grid(solver, horizon)?;
    let traj = solver.trajectory(f, horizon)?;
    if traj.len() != times.len() {
        return Err(Error::InvalidArgument(format!(
            "solver returned {} samples, expected {}",
            traj.len(),
            times.len()
        )));
    }
    let overlaps: Vec<C64> = traj.states.iter().map(|u| sys.inner(y, u)).collect();
    let lhs = integrate(&overlaps, dt)?;
    let integrand = times
        .par_iter()
        .map(|&t| {
            let w = integrated_trajectory(solver.ext, y, horizon, t)?;
            Ok(boundary_inner(&sys.gamma2(&w), &f.port_value(t)))
        })
        .collect::<Result<Vec<C64>>>()?;
    let rhs = I * integrate(&integrand, dt)?;
    Ok(DualityCheck::new(lhs, vec![rhs], scale(f, horizon, sys, y)))
}

/// `(u^f(T), w^y(t))` against `∫₀ᵀ (u^f(s), y) ds + i ∫₀ᵀ (f(s), Γ2 w^y(s+t−T))_B ds`.
///
/// `terms` holds the two summands of the right side in that order.
pub fn check_aux2(solver: &BoundarySolver, f: &ControlSignal, y: &CVector, t_neg: f64, horizon: f64) -> Result<DualityCheck> {
    let sys = solver.sys;
    check_state(sys, y)?;
    check_horizon(horizon)?;
    if t_neg > 0.0 {
        return Err(Error::InvalidArgument(format!("t must be nonpositive, got {t_neg}")));
    }
    let (times, dt) = time_grid(solver, horizon)?;
    let traj = solver.trajectory(f, horizon)?;
    if traj.len() != times.len() {
        return Err(Error::InvalidArgument(format!(
            "solver returned {} samples, expected {}",
            traj.len(),
            times.len()
        )));
    }
    let u_end = traj.last().expect("nonempty trajectory");
    let lhs = sys.inner(u_end, &integrated_trajectory(solver.ext, y, 0.0, t_neg)?);
    let overlaps: Vec<C64> = traj.states.iter().map(|u| sys.inner(u, y)).collect();
    let volume = integrate(&overlaps, dt)?;
    let integrand = times
        .par_iter()
        .map(|&s| {
            let w = integrated_trajectory(solver.ext, y, 0.0, s + t_neg - horizon)?;
            Ok(boundary_inner(&f.port_value(s), &sys.gamma2(&w)))
        })
        .collect::<Result<Vec<C64>>>()?;
    let boundary = I * integrate(&integrand, dt)?;
    Ok(DualityCheck::new(lhs, vec![volume, boundary], scale(f, horizon, sys, y)))
}

/// A smooth random state of `Dom L`: low Fourier modes with `y¹(0) = y¹(X) = 0`.
///
/// The coefficients depend only on `seed`, so the same continuum state is
/// sampled on every grid.
pub fn admissible_state(sys: &DiscreteGreenSystem, modes: usize, seed: u64) -> CVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_end = sys.grid().length();
    let mut coeffs = Vec::with_capacity(modes);
    for _ in 0..modes {
        let a = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let b = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        coeffs.push((a, b));
    }
    let y = sys.sample(|x| {
        let mut out = [C64::new(0.0, 0.0); 2];
        for (k, (a, b)) in coeffs.iter().enumerate() {
            let arg = (k + 1) as f64 * std::f64::consts::PI * x / x_end;
            out[0] += a * arg.sin();
            out[1] += b * arg.cos();
        }
        out
    });
    sys.project_to_constraint(&y)
}
