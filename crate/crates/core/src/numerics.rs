//! Dense complex linear algebra, weighted inner products, time quadrature.
//!
//! Everything here works in the weighted space `⟨u, v⟩_W = Σ_j w_j u_j conj(v_j)`,
//! where `w` are the SBP norm weights of the grid (repeated once per field
//! component).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance for the W-Hermitian precondition of [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Default numerical-rank threshold `σ_k / σ_1`.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Uniform mesh on `[0, X]` with second-order SBP norm weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n_points: usize,
    h: f64,
    length: f64,
    weights: Vec<f64>,
}

impl Grid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < Self::MIN_POINTS {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least {} points, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid length must be positive, got {length}"
            )));
        }
        let h = length / (n_points - 1) as f64;
        let mut weights = vec![h; n_points];
        weights[0] = 0.5 * h;
        weights[n_points - 1] = 0.5 * h;
        Ok(Self {
            n_points,
            h,
            length,
            weights,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn x(&self, j: usize) -> f64 {
        if j + 1 == self.n_points {
            self.length
        } else {
            j as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|j| self.x(j))
    }
}

/// `Σ_j w_j u_j conj(v_j)`.
pub fn inner_w(u: &CVector, v: &CVector, w: &[f64]) -> C64 {
    debug_assert_eq!(u.len(), w.len());
    debug_assert_eq!(v.len(), w.len());
    u.iter()
        .zip(v.iter())
        .zip(w)
        .map(|((a, b), &wj)| a * b.conj() * wj)
        .sum()
}

pub fn norm_w(u: &CVector, w: &[f64]) -> f64 {
    u.iter()
        .zip(w)
        .map(|(a, &wj)| a.norm_sqr() * wj)
        .sum::<f64>()
        .sqrt()
}

pub fn is_finite(v: &CVector) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Eigenpairs of an operator that is self-adjoint in a weighted inner product.
///
/// Eigenvalues are ascending; column `k` of `eigenvectors` is `e_k`, and the
/// columns are orthonormal in `⟨·,·⟩_W`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
    pub weights: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Spectral coefficients `⟨y, e_k⟩_W`.
    pub fn coefficients(&self, y: &CVector) -> CVector {
        let wy = CVector::from_iterator(
            y.len(),
            y.iter().zip(&self.weights).map(|(a, &w)| a * w),
        );
        self.eigenvectors.ad_mul(&wy)
    }

    /// Coefficients of every column of `states` at once.
    pub fn coefficients_many(&self, states: &CMatrix) -> CMatrix {
        let mut ws = states.clone();
        for (mut row, &w) in ws.row_iter_mut().zip(&self.weights) {
            row *= C64::from(w);
        }
        self.eigenvectors.ad_mul(&ws)
    }

    pub fn synthesize(&self, coeffs: &CVector) -> CVector {
        &self.eigenvectors * coeffs
    }

    /// `Σ_k f(λ_k) ⟨y, e_k⟩_W e_k`.
    pub fn apply_fn(&self, y: &CVector, f: impl Fn(f64) -> C64) -> CVector {
        let mut c = self.coefficients(y);
        for (ck, &lam) in c.iter_mut().zip(&self.eigenvalues) {
            *ck *= f(lam);
        }
        self.synthesize(&c)
    }

    /// `‖M V − V diag(λ)‖_F`.
    pub fn reconstruction_residual(&self, m: &CMatrix) -> f64 {
        let mut vl = self.eigenvectors.clone();
        for (mut col, &lam) in vl.column_iter_mut().zip(&self.eigenvalues) {
            col *= C64::from(lam);
        }
        (m * &self.eigenvectors - vl).norm()
    }

    /// `max |V^† W V − I|`.
    pub fn gram_defect(&self) -> f64 {
        let gram = self.coefficients_many(&self.eigenvectors);
        let n = gram.nrows();
        (gram - CMatrix::identity(n, n)).camax()
    }
}

/// Relative asymmetry `‖WM − (WM)^†‖_F / ‖WM‖_F`.
pub fn weighted_asymmetry(m: &CMatrix, w: &[f64]) -> f64 {
    let mut wm = m.clone();
    for (mut row, &wj) in wm.row_iter_mut().zip(w) {
        row *= C64::from(wj);
    }
    let scale = wm.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (&wm - wm.adjoint()).norm() / scale
}

fn check_weights(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::InvalidArgument(format!(
            "weight vector has length {}, expected {n}",
            w.len()
        )));
    }
    if w.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err(Error::InvalidArgument("weights must be positive".into()));
    }
    Ok(())
}

/// Eigendecomposition of a matrix that is Hermitian in `⟨·,·⟩_W`.
///
/// Works on `W^{1/2} M W^{-1/2}`, which is Hermitian in the Euclidean sense.
pub fn hermitian_eig(m: &CMatrix, w: &[f64]) -> Result<SpectralDecomposition> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    check_weights(w, n)?;
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let asymmetry = weighted_asymmetry(m, w);
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: vec![],
            eigenvectors: CMatrix::zeros(0, 0),
            weights: w.to_vec(),
        });
    }

    let sq: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let s = CMatrix::from_fn(n, n, |i, j| m[(i, j)] * (sq[i] / sq[j]));
    let s = (&s + s.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(s);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])] / sq[i]);

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        weights: w.to_vec(),
    })
}

/// W-orthonormal basis for the column span of `s`, truncated at `σ_k/σ_1 > rel_tol`.
///
/// Returns the singular values that survive truncation (nonincreasing) and the
/// basis as columns. An all-zero snapshot matrix yields an empty basis.
pub fn svd_orthobasis(s: &CMatrix, w: &[f64], rel_tol: f64) -> Result<(Vec<f64>, CMatrix)> {
    if s.ncols() == 0 || s.nrows() == 0 {
        return Err(Error::InvalidArgument("snapshot matrix is empty".into()));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rel_tol must lie in (0, 1), got {rel_tol}"
        )));
    }
    let n = s.nrows();
    check_weights(w, n)?;
    if s.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Ok((vec![], CMatrix::zeros(n, 0)));
    }
    let sq: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let mut sw = s.clone();
    for (mut row, &q) in sw.row_iter_mut().zip(&sq) {
        row *= C64::from(q);
    }
    let svd = sw.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma1 = svd.singular_values[order[0]];
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&k| svd.singular_values[k] > rel_tol * sigma1)
        .collect();
    let values = kept.iter().map(|&k| svd.singular_values[k]).collect();
    let basis = CMatrix::from_fn(n, kept.len(), |i, c| u[(i, kept[c])] / sq[i]);
    Ok((values, basis))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    #[default]
    Trapezoid,
    /// Composite Simpson; falls back to the trapezoid rule for an even sample count.
    Simpson,
}

/// Trapezoid weights for `count` uniform samples spaced `dt` (which may be negative).
pub fn trapezoid_weights(count: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![dt; count];
    if let Some(first) = w.first_mut() {
        *first = 0.5 * dt;
    }
    if let Some(last) = w.last_mut() {
        *last = 0.5 * dt;
    }
    w
}

fn simpson_weights(count: usize, dt: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..count)
        .map(|j| if j % 2 == 1 { 4.0 } else { 2.0 } * dt / 3.0)
        .collect();
    w[0] = dt / 3.0;
    w[count - 1] = dt / 3.0;
    w
}

/// Quadrature of uniformly spaced samples; a negative `dt` integrates right to left.
pub fn integrate_time<T>(samples: &[T], dt: f64, rule: Quadrature) -> Result<T>
where
    T: Copy + std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
{
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "time quadrature needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if !dt.is_finite() {
        return Err(Error::InvalidArgument("time step must be finite".into()));
    }
    let weights = match rule {
        Quadrature::Simpson if samples.len() % 2 == 1 => simpson_weights(samples.len(), dt),
        _ => trapezoid_weights(samples.len(), dt),
    };
    Ok(samples.iter().zip(weights).map(|(&s, w)| s * w).sum())
}

/// Minimal-norm least-squares solution of `A x = b` via the SVD.
pub fn least_squares(a: &CMatrix, b: &CVector) -> Result<CVector> {
    if a.nrows() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: A has {} rows, b has {}",
            a.nrows(),
            b.len()
        )));
    }
    if a.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::InvalidArgument("least squares with a zero matrix".into()));
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = f64::EPSILON * smax * a.nrows().max(a.ncols()) as f64;
    svd.solve(b, eps)
        .map_err(|e| Error::InvalidArgument(format!("least squares failed: {e}")))
}

/// Uniformly sampled time series `values[j] = g(start + j·dt)`; `dt` may be negative.
#[derive(Debug, Clone)]
pub struct TimeSamples<T> {
    pub start: f64,
    pub dt: f64,
    pub values: Vec<T>,
}

impl<T> TimeSamples<T> {
    pub fn from_fn(start: f64, end: f64, count: usize, f: impl Fn(f64) -> T) -> Result<Self> {
        if count < 2 {
            return Err(Error::InsufficientSamples(format!(
                "need at least 2 samples, got {count}"
            )));
        }
        let dt = (end - start) / (count - 1) as f64;
        let values = (0..count)
            .map(|j| f(sample_time(start, end, dt, j, count)))
            .collect();
        Ok(Self { start, dt, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, j: usize) -> f64 {
        sample_time(self.start, self.end(), self.dt, j, self.values.len())
    }

    pub fn end(&self) -> f64 {
        self.start + self.dt * (self.values.len().saturating_sub(1)) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|j| self.time(j)).collect()
    }
}

fn sample_time(start: f64, end: f64, dt: f64, j: usize, count: usize) -> f64 {
    if j + 1 == count {
        end
    } else {
        start + j as f64 * dt
    }
}

/// Number of uniform steps of size at most `|dt|` covering `span`.
pub fn step_count(span: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    Ok(((span.abs() / dt) - 1e-9).ceil().max(1.0) as usize)
}


/// Eigenpairs of a 2×2 complex matrix, in closed form.
///
/// Eigenvectors are unit length. For a repeated eigenvalue of a non-diagonal
/// matrix the two returned vectors coincide.
pub fn eig2x2(m: &nalgebra::Matrix2<C64>) -> [(C64, nalgebra::Vector2<C64>); 2] {
    let half_tr = (m[(0, 0)] + m[(1, 1)]) * 0.5;
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (half_tr * half_tr - det).sqrt();
    let vals = [half_tr + disc, half_tr - disc];
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let vec_for = |k: C64, fallback: usize| {
        let a = nalgebra::Vector2::new(m[(0, 1)], k - m[(0, 0)]);
        let b = nalgebra::Vector2::new(k - m[(1, 1)], m[(1, 0)]);
        let v = if a.norm() >= b.norm() { a } else { b };
        if v.norm() <= 1e-14 * scale {
            let mut e = nalgebra::Vector2::zeros();
            e[fallback] = C64::new(1.0, 0.0);
            e
        } else {
            v / C64::from(v.norm())
        }
    };
    // With a diagonal matrix pick the axis whose diagonal entry matches.
    let fallback = |k: C64| {
        if (k - m[(0, 0)]).norm() <= (k - m[(1, 1)]).norm() {
            0
        } else {
            1
        }
    };
    let mut out = [
        (vals[0], vec_for(vals[0], fallback(vals[0]))),
        (vals[1], vec_for(vals[1], fallback(vals[1]))),
    ];
    if m[(0, 1)].norm() <= 1e-14 * scale && m[(1, 0)].norm() <= 1e-14 * scale {
        out = [
            (m[(0, 0)], nalgebra::Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))),
            (m[(1, 1)], nalgebra::Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0))),
        ];
    }
    out
}
