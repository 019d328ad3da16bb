//! Free dynamics `i v_t + L v = 0` and the inhomogeneous problem
//! `i w_t + L w = g`, `w(T) = 0`, evaluated through the spectral decomposition
//! of the self-adjoint extension.
//!
//! Time integrals use the trapezoid rule on the supplied samples; space is
//! exact in the eigenbasis.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::green::SelfAdjointExtension;
use crate::numerics::{trapezoid_weights, CMatrix, CVector, TimeSamples, C64, I};

/// Relative tolerance on `Γ1 y` for data required to lie in `Dom L`.
pub const CONSTRAINT_TOL: f64 = 1e-10;

/// Sampled trajectory `t ↦ state`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CVector>,
    /// Time at which the datum was imposed.
    pub origin_time: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&CVector> {
        self.states.last()
    }
}

/// `(1 − e^{isλ}) / λ`, with the removable singularity at `λ = 0` handled by series.
pub fn regularized_kernel(s: f64, lambda: f64) -> C64 {
    let x = I * (s * lambda);
    if (s * lambda).abs() < 1e-4 {
        // (1 − e^x)/λ = −is (1 + x/2 + x²/6 + x³/24 + …)
        -I * s * (1.0 + x * (0.5 + x * (1.0 / 6.0 + x / 24.0)))
    } else {
        (1.0 - x.exp()) / lambda
    }
}

fn check_domain(ext: &SelfAdjointExtension, y: &CVector) -> Result<()> {
    if y.len() != ext.state_dim() {
        return Err(Error::InvalidArgument(format!(
            "state has dimension {}, expected {}",
            y.len(),
            ext.state_dim()
        )));
    }
    let n = ext.state_dim() / 2;
    let violation = y[0].norm().max(y[n - 1].norm());
    let scale = y.norm().max(f64::MIN_POSITIVE);
    if violation > CONSTRAINT_TOL * scale {
        return Err(Error::ConstraintViolation { violation });
    }
    Ok(())
}

/// `v^{y,T}(t) = e^{i(t−T)L} y`.
pub fn propagate(ext: &SelfAdjointExtension, y: &CVector, origin: f64, t: f64) -> Result<CVector> {
    check_domain(ext, y)?;
    let tau = t - origin;
    Ok(ext.spectral().apply_fn(y, |lam| (I * (tau * lam)).exp()))
}

/// Propagates `y` from `origin` to every time in `times`, in parallel.
pub fn propagate_trajectory(
    ext: &SelfAdjointExtension,
    y: &CVector,
    origin: f64,
    times: &[f64],
) -> Result<Trajectory> {
    check_domain(ext, y)?;
    let spectral = ext.spectral();
    let coeffs = spectral.coefficients(y);
    let states = times
        .par_iter()
        .map(|&t| {
            let c = CVector::from_iterator(
                coeffs.len(),
                coeffs
                    .iter()
                    .zip(&spectral.eigenvalues)
                    .map(|(ck, &lam)| ck * (I * ((t - origin) * lam)).exp()),
            );
            spectral.synthesize(&c)
        })
        .collect();
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        origin_time: origin,
    })
}

/// Checks that `g` is sampled on the segment between `origin` and `t` and
/// returns the sign of `t − origin` relative to the sample orientation.
fn check_source_window(samples_start: f64, samples_end: f64, count: usize, origin: f64, t: f64) -> Result<f64> {
    if count < 2 {
        return Err(Error::InsufficientSamples(format!(
            "source needs at least 2 time samples, got {count}"
        )));
    }
    let scale = 1e-9 * (1.0 + origin.abs().max(t.abs()));
    let same = (samples_start - origin).abs() <= scale && (samples_end - t).abs() <= scale;
    let reversed = (samples_start - t).abs() <= scale && (samples_end - origin).abs() <= scale;
    match (same, reversed) {
        (true, _) => Ok(1.0),
        (false, true) => Ok(-1.0),
        _ => Err(Error::InvalidArgument(format!(
            "source sampled on [{samples_start}, {samples_end}] does not span [{origin}, {t}]"
        ))),
    }
}

fn sample_matrix(samples: &[CVector]) -> CMatrix {
    CMatrix::from_columns(samples)
}

/// `w^{g,T}(t) = (1/i) ∫_T^t e^{i(t−s)L} g(s) ds`.
pub fn duhamel(ext: &SelfAdjointExtension, g: &TimeSamples<CVector>, origin: f64, t: f64) -> Result<CVector> {
    if t == origin {
        return Ok(CVector::zeros(ext.state_dim()));
    }
    let orientation = check_source_window(g.start, g.end(), g.len(), origin, t)?;
    let spectral = ext.spectral();
    let coeffs = spectral.coefficients_many(&sample_matrix(&g.values));
    let times = g.times();
    // The samples run start→end; ∫_T^t is that integral times `orientation`.
    let tw = trapezoid_weights(g.len(), g.dt);
    let acc: Vec<C64> = spectral
        .eigenvalues
        .par_iter()
        .enumerate()
        .map(|(k, &lam)| {
            times
                .iter()
                .zip(&tw)
                .enumerate()
                .map(|(j, (&s, &w))| coeffs[(k, j)] * (I * ((t - s) * lam)).exp() * w)
                .sum::<C64>()
                * orientation
        })
        .collect();
    Ok(spectral.synthesize(&CVector::from_vec(acc)) / I)
}

/// The integrated-by-parts form of [`duhamel`]:
///
/// `w(t) = Φ(t−T) g(T) + ∫_T^t Φ(t−s) g′(s) ds`, with `Φ(s) = (1 − e^{isL}) L⁻¹`
/// evaluated spectrally via [`regularized_kernel`]. It represents the same
/// `w^{g,T}` as [`duhamel`] (overall constant 1).
pub fn duhamel_regularized(
    ext: &SelfAdjointExtension,
    g: &TimeSamples<CVector>,
    g_prime: &TimeSamples<CVector>,
    origin: f64,
    t: f64,
) -> Result<CVector> {
    if g_prime.len() != g.len() || (g_prime.start - g.start).abs() > 1e-12 || (g_prime.dt - g.dt).abs() > 1e-12 {
        return Err(Error::InsufficientSamples(
            "derivative samples must share the source's time grid".into(),
        ));
    }
    if t == origin {
        return Ok(CVector::zeros(ext.state_dim()));
    }
    let orientation = check_source_window(g.start, g.end(), g.len(), origin, t)?;
    let g_origin = if orientation > 0.0 {
        &g.values[0]
    } else {
        &g.values[g.len() - 1]
    };
    let spectral = ext.spectral();
    let c_origin = spectral.coefficients(g_origin);
    let coeffs = spectral.coefficients_many(&sample_matrix(&g_prime.values));
    let times = g.times();
    let tw = trapezoid_weights(g.len(), g.dt);
    let acc: Vec<C64> = spectral
        .eigenvalues
        .par_iter()
        .enumerate()
        .map(|(k, &lam)| {
            let boundary = regularized_kernel(t - origin, lam) * c_origin[k];
            let integral: C64 = times
                .iter()
                .zip(&tw)
                .enumerate()
                .map(|(j, (&s, &w))| regularized_kernel(t - s, lam) * coeffs[(k, j)] * w)
                .sum();
            boundary + integral * orientation
        })
        .collect();
    Ok(spectral.synthesize(&CVector::from_vec(acc)))
}

/// `w^{y,T}(t) = ∫_T^t v^{y,T}(s) ds = Σ (e^{i(t−T)λ} − 1)/(iλ) ⟨y, e_k⟩ e_k`.
pub fn integrated_trajectory(ext: &SelfAdjointExtension, y: &CVector, origin: f64, t: f64) -> Result<CVector> {
    check_domain(ext, y)?;
    let tau = t - origin;
    // (e^{iτλ} − 1)/(iλ) = i · (1 − e^{iτλ})/λ
    Ok(ext.spectral().apply_fn(y, |lam| I * regularized_kernel(tau, lam)))
}
