//! Discrete Green systems for the half-line Dirac operator `J d/dx + V`.
//!
//! The state is a two-component grid function stored block-wise:
//! entries `0..n` hold `y¹`, entries `n..2n` hold `y²`. The derivative is the
//! second-order SBP operator `D = H⁻¹Q` with `Q + Qᵀ = diag(-1, 0, …, 0, 1)`,
//! so the discrete Green formula holds to rounding error.
//!
//! The boundary space has two ports. Port 0 is the physical end `x = 0`
//! (`Γ1 y = y¹(0)`, `Γ2 y = y²(0)`); port `X` closes the truncated interval with
//! `Γ1 y = y¹(X)`, `Γ2 y = -y²(X)`, which makes the boundary form of `[0, X]`
//! split into two identical-looking port terms.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::numerics::{
    eig2x2, hermitian_eig, inner_w, norm_w, weighted_asymmetry, CMatrix, CVector, Grid,
    SpectralDecomposition, C64, HERMITIAN_TOL, I,
};

/// The rotation `J = [[0, 1], [-1, 0]]`.
pub fn j_matrix() -> Matrix2<C64> {
    Matrix2::new(
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, 0.0),
    )
}

/// Number of boundary ports (`dim B`) of the truncated model.
pub const BOUNDARY_DIM: usize = 2;

pub type BoundaryValue = [C64; BOUNDARY_DIM];

/// Per-node 2×2 Hermitian potential.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    values: Vec<Matrix2<C64>>,
}

impl Potential {
    pub fn zero(grid: &Grid) -> Self {
        Self::constant(grid, Matrix2::zeros())
    }

    pub fn constant(grid: &Grid, v: Matrix2<C64>) -> Self {
        Self {
            values: vec![v; grid.n_points()],
        }
    }

    /// `c · 1` at every node.
    pub fn scalar(grid: &Grid, c: f64) -> Self {
        Self::constant(grid, Matrix2::identity() * C64::from(c))
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> Matrix2<C64>) -> Self {
        Self {
            values: grid.nodes().map(f).collect(),
        }
    }

    pub fn at(&self, node: usize) -> &Matrix2<C64> {
        &self.values[node]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The common value when the potential is the same at every node.
    pub fn uniform_value(&self) -> Option<Matrix2<C64>> {
        let first = *self.values.first()?;
        let scale = first.norm().max(1.0);
        self.values
            .iter()
            .all(|v| (v - first).norm() <= 1e-14 * scale)
            .then_some(first)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.norm() == 0.0)
    }
}

fn sbp_derivative(u: &[C64], h: f64, out: &mut [C64]) {
    let n = u.len();
    out[0] = (u[1] - u[0]) / h;
    for j in 1..n - 1 {
        out[j] = (u[j + 1] - u[j - 1]) / (2.0 * h);
    }
    out[n - 1] = (u[n - 1] - u[n - 2]) / h;
}

/// Discretized `{H, B; L0, Γ1, Γ2}` for `L0* = J d/dx + V` on `[0, X]`.
#[derive(Debug, Clone)]
pub struct DiscreteGreenSystem {
    grid: Grid,
    potential: Potential,
    weights: Vec<f64>,
}

/// Builds the SBP Dirac system; rejects a potential that is not Hermitian at some node.
pub fn build_dirac(grid: Grid, potential: Potential) -> Result<DiscreteGreenSystem> {
    if potential.len() != grid.n_points() {
        return Err(Error::InvalidArgument(format!(
            "potential has {} nodes, grid has {}",
            potential.len(),
            grid.n_points()
        )));
    }
    for (node, v) in potential.values.iter().enumerate() {
        if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument(format!("non-finite potential at node {node}")));
        }
        let asymmetry = (v - v.adjoint()).norm() / v.norm().max(1.0);
        if asymmetry > HERMITIAN_TOL {
            return Err(Error::NonHermitianPotential { node, asymmetry });
        }
    }
    let mut weights = grid.weights().to_vec();
    weights.extend_from_slice(grid.weights());
    Ok(DiscreteGreenSystem {
        grid,
        potential,
        weights,
    })
}

impl DiscreteGreenSystem {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn n_points(&self) -> usize {
        self.grid.n_points()
    }

    pub fn state_dim(&self) -> usize {
        2 * self.grid.n_points()
    }

    pub fn boundary_dim(&self) -> usize {
        BOUNDARY_DIM
    }

    /// Weights of the inner product on the full state (grid weights repeated per component).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Flat index of component `comp` (0 or 1) at `node`.
    pub fn index(&self, comp: usize, node: usize) -> usize {
        comp * self.grid.n_points() + node
    }

    pub fn zeros(&self) -> CVector {
        CVector::zeros(self.state_dim())
    }

    /// Samples `x ↦ (y¹(x), y²(x))` on the grid.
    pub fn sample(&self, f: impl Fn(f64) -> [C64; 2]) -> CVector {
        let n = self.n_points();
        let mut v = self.zeros();
        for (j, x) in self.grid.nodes().enumerate() {
            let [a, b] = f(x);
            v[j] = a;
            v[n + j] = b;
        }
        v
    }

    pub fn component(&self, u: &CVector, comp: usize) -> Vec<C64> {
        let n = self.n_points();
        u.rows(comp * n, n).iter().copied().collect()
    }

    pub fn inner(&self, u: &CVector, v: &CVector) -> C64 {
        inner_w(u, v, &self.weights)
    }

    pub fn norm(&self, u: &CVector) -> f64 {
        norm_w(u, &self.weights)
    }

    /// `L0* u = J u' + V u`.
    pub fn apply_adjoint(&self, u: &CVector) -> CVector {
        assert_eq!(u.len(), self.state_dim(), "state dimension mismatch");
        let n = self.n_points();
        let h = self.grid.h();
        let (u1, u2) = u.as_slice().split_at(n);
        let mut d1 = vec![C64::new(0.0, 0.0); n];
        let mut d2 = vec![C64::new(0.0, 0.0); n];
        sbp_derivative(u1, h, &mut d1);
        sbp_derivative(u2, h, &mut d2);
        let mut out = self.zeros();
        for j in 0..n {
            let v = self.potential.at(j);
            out[j] = d2[j] + v[(0, 0)] * u1[j] + v[(0, 1)] * u2[j];
            out[n + j] = -d1[j] + v[(1, 0)] * u1[j] + v[(1, 1)] * u2[j];
        }
        out
    }

    /// Dense matrix of `L0*`.
    pub fn matrix(&self) -> CMatrix {
        let n = self.n_points();
        let h = self.grid.h();
        let dim = self.state_dim();
        let mut a = CMatrix::zeros(dim, dim);
        let mut put_d = |row: usize, col_block: usize, sign: f64| {
            let (j, c0) = (row % n, col_block * n);
            if j == 0 {
                a[(row, c0)] -= C64::from(sign / h);
                a[(row, c0 + 1)] += C64::from(sign / h);
            } else if j == n - 1 {
                a[(row, c0 + n - 2)] -= C64::from(sign / h);
                a[(row, c0 + n - 1)] += C64::from(sign / h);
            } else {
                a[(row, c0 + j - 1)] -= C64::from(sign / (2.0 * h));
                a[(row, c0 + j + 1)] += C64::from(sign / (2.0 * h));
            }
        };
        for j in 0..n {
            put_d(j, 1, 1.0);
            put_d(n + j, 0, -1.0);
        }
        for j in 0..n {
            let v = self.potential.at(j);
            a[(j, j)] += v[(0, 0)];
            a[(j, n + j)] += v[(0, 1)];
            a[(n + j, j)] += v[(1, 0)];
            a[(n + j, n + j)] += v[(1, 1)];
        }
        a
    }

    /// `Γ1 u = (u¹(0), u¹(X))`.
    pub fn gamma1(&self, u: &CVector) -> BoundaryValue {
        let n = self.n_points();
        [u[0], u[n - 1]]
    }

    /// `Γ2 u = (u²(0), -u²(X))`.
    pub fn gamma2(&self, u: &CVector) -> BoundaryValue {
        let n = self.n_points();
        [u[n], -u[2 * n - 1]]
    }

    /// `(Γ1 u, Γ2 v)_B − (Γ2 u, Γ1 v)_B`.
    pub fn boundary_form(&self, u: &CVector, v: &CVector) -> C64 {
        let (g1u, g2u) = (self.gamma1(u), self.gamma2(u));
        let (g1v, g2v) = (self.gamma1(v), self.gamma2(v));
        boundary_inner(&g1u, &g2v) - boundary_inner(&g2u, &g1v)
    }

    /// `⟨L0* u, v⟩ − ⟨u, L0* v⟩ − [(Γ1u, Γ2v)_B − (Γ2u, Γ1v)_B]`.
    pub fn green_residual(&self, u: &CVector, v: &CVector) -> C64 {
        let lhs = self.inner(&self.apply_adjoint(u), v) - self.inner(u, &self.apply_adjoint(v));
        lhs - self.boundary_form(u, v)
    }

    /// `Γ1` as a `dim B × state_dim` matrix.
    pub fn gamma1_matrix(&self) -> CMatrix {
        let mut g = CMatrix::zeros(BOUNDARY_DIM, self.state_dim());
        g[(0, self.index(0, 0))] = C64::new(1.0, 0.0);
        g[(1, self.index(0, self.n_points() - 1))] = C64::new(1.0, 0.0);
        g
    }

    /// Rank of `Γ1` (condition A asks for `dim B`).
    pub fn gamma1_rank(&self) -> usize {
        self.gamma1_matrix().rank(1e-12)
    }

    /// Zeroes both components at both ports, landing in `Ker Γ1 ∩ Ker Γ2`.
    pub fn restrict_to_minimal_domain(&self, u: &CVector) -> CVector {
        let n = self.n_points();
        let mut v = u.clone();
        for idx in [0, n - 1, n, 2 * n - 1] {
            v[idx] = C64::new(0.0, 0.0);
        }
        v
    }

    /// Largest port value of `u` among the entries that vanish on `Ker Γ1 ∩ Ker Γ2`.
    pub fn minimal_domain_violation(&self, u: &CVector) -> f64 {
        let n = self.n_points();
        [0, n - 1, n, 2 * n - 1]
            .iter()
            .map(|&i| u[i].norm())
            .fold(0.0, f64::max)
    }

    /// Indices kept by the self-adjoint constraint `y¹(0) = y¹(X) = 0`.
    pub fn free_indices(&self) -> Vec<usize> {
        let n = self.n_points();
        (0..self.state_dim())
            .filter(|&i| i != 0 && i != n - 1)
            .collect()
    }

    /// `max(|u¹(0)|, |u¹(X)|)`, the distance from `Ker Γ1`.
    pub fn constraint_violation(&self, u: &CVector) -> f64 {
        let [a, b] = self.gamma1(u);
        a.norm().max(b.norm())
    }

    pub fn project_to_constraint(&self, u: &CVector) -> CVector {
        let n = self.n_points();
        let mut v = u.clone();
        v[0] = C64::new(0.0, 0.0);
        v[n - 1] = C64::new(0.0, 0.0);
        v
    }
}

/// `(a, b)_B = Σ a_p conj(b_p)`.
pub fn boundary_inner(a: &BoundaryValue, b: &BoundaryValue) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// `L = L0*|_{Ker Γ1}` with its spectral decomposition.
///
/// The eigenvectors are stored in the full state space (zero on the eliminated
/// entries `y¹(0)`, `y¹(X)`), so they can be paired directly with full states.
#[derive(Debug, Clone)]
pub struct SelfAdjointExtension {
    free: Vec<usize>,
    reduced: CMatrix,
    reduced_weights: Vec<f64>,
    asymmetry: f64,
    spectral: SpectralDecomposition,
}

impl SelfAdjointExtension {
    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectral.eigenvalues
    }

    pub fn reduced_matrix(&self) -> &CMatrix {
        &self.reduced
    }

    pub fn reduced_weights(&self) -> &[f64] {
        &self.reduced_weights
    }

    pub fn free_indices(&self) -> &[usize] {
        &self.free
    }

    /// Measured relative W-asymmetry of the reduced matrix.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn state_dim(&self) -> usize {
        self.spectral.eigenvectors.nrows()
    }

    /// Full-space eigenvector `e_k`.
    pub fn eigenvector(&self, k: usize) -> CVector {
        self.spectral.eigenvectors.column(k).into_owned()
    }

    /// Applies the reduced operator to a full state in `Ker Γ1`.
    pub fn apply(&self, u: &CVector) -> CVector {
        let r = CVector::from_iterator(self.free.len(), self.free.iter().map(|&i| u[i]));
        let lr = &self.reduced * r;
        let mut out = CVector::zeros(self.state_dim());
        for (&i, v) in self.free.iter().zip(lr.iter()) {
            out[i] = *v;
        }
        out
    }
}

/// Eliminates `y¹(0)`, `y¹(X)` and diagonalizes the remaining block of `L0*`.
pub fn extend_self_adjoint(sys: &DiscreteGreenSystem) -> Result<SelfAdjointExtension> {
    let full = sys.matrix();
    let free = sys.free_indices();
    let m = free.len();
    let reduced = CMatrix::from_fn(m, m, |r, c| full[(free[r], free[c])]);
    let reduced_weights: Vec<f64> = free.iter().map(|&i| sys.weights()[i]).collect();
    let asymmetry = weighted_asymmetry(&reduced, &reduced_weights);
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    let eig = hermitian_eig(&reduced, &reduced_weights)?;
    let dim = sys.state_dim();
    let mut vectors = CMatrix::zeros(dim, m);
    for (r, &i) in free.iter().enumerate() {
        vectors.row_mut(i).copy_from(&eig.eigenvectors.row(r));
    }
    Ok(SelfAdjointExtension {
        free,
        reduced,
        reduced_weights,
        asymmetry,
        spectral: SpectralDecomposition {
            eigenvalues: eig.eigenvalues,
            eigenvectors: vectors,
            weights: sys.weights().to_vec(),
        },
    })
}

/// `L0* φ = +iφ` (plus) or `L0* φ = −iφ` (minus).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DeficiencySign {
    Plus,
    Minus,
}

impl DeficiencySign {
    /// The spectral parameter `±i`.
    pub fn mu(self) -> C64 {
        match self {
            Self::Plus => I,
            Self::Minus => -I,
        }
    }

    /// `+1` for plus, `−1` for minus: the sign in `ψ = φ⁺_t + φ⁺ + φ⁻_t − φ⁻`.
    pub fn psi_sign(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }
}

/// Which port a deficiency mode is anchored to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    /// `x = 0`, decaying into the interval.
    Near,
    /// `x = X`, decaying away from the artificial end.
    Far,
}

#[derive(Debug, Clone)]
pub struct DeficiencyMode {
    pub sign: DeficiencySign,
    pub port: Port,
    /// Exponent `κ` in `φ(x) = e^{κ(x − x_port)} r`.
    pub rate: C64,
    /// Direction `r`, normalized to `r¹ = 1`.
    pub polarization: Vector2<C64>,
    pub values: CVector,
}

/// Analytic solutions of `L0* φ = ±iφ` sampled on the grid.
///
/// Modes are ordered plus-near, plus-far, minus-near, minus-far. The near
/// modes are the half-line deficiency elements (for `V = 0`: `e^{−x}(1, −i)`
/// and `e^{−x}(1, i)`); the far modes are their mirror images at `x = X`,
/// needed because the truncated model has a second port.
#[derive(Debug, Clone)]
pub struct DeficiencyBasis {
    modes: Vec<DeficiencyMode>,
    gamma1: CMatrix,
}

impl DeficiencyBasis {
    pub fn modes(&self) -> &[DeficiencyMode] {
        &self.modes
    }

    pub fn mode(&self, sign: DeficiencySign, port: Port) -> &DeficiencyMode {
        self.modes
            .iter()
            .find(|m| m.sign == sign && m.port == port)
            .expect("basis holds every sign/port pair")
    }

    pub fn plus_modes(&self) -> impl Iterator<Item = &DeficiencyMode> {
        self.modes.iter().filter(|m| m.sign == DeficiencySign::Plus)
    }

    pub fn minus_modes(&self) -> impl Iterator<Item = &DeficiencyMode> {
        self.modes.iter().filter(|m| m.sign == DeficiencySign::Minus)
    }

    /// `Γ1` restricted to the span of the modes (`dim B × #modes`).
    pub fn gamma1_matrix(&self) -> &CMatrix {
        &self.gamma1
    }

    /// Corrects every mode by an element of `Dom L` so that `(L0* − μ)φ`
    /// vanishes on all rows kept by `L`, leaving `y¹(0)` and `y¹(X)` untouched.
    ///
    /// Sampled analytic modes satisfy the discrete equation only to `O(h²)`;
    /// the corrected ones are exact discrete deficiency vectors, which is what
    /// makes the lift representation independent of the gauge.
    pub fn fitted_to(&self, sys: &DiscreteGreenSystem, ext: &SelfAdjointExtension) -> Result<Self> {
        if ext.state_dim() != sys.state_dim() {
            return Err(Error::InvalidArgument(format!(
                "extension has state dimension {}, system {}",
                ext.state_dim(),
                sys.state_dim()
            )));
        }
        let spectral = ext.spectral();
        let modes: Vec<DeficiencyMode> = self
            .modes
            .iter()
            .map(|m| {
                let mu = m.sign.mu();
                let residual = sys.apply_adjoint(&m.values) - &m.values * mu;
                let correction = spectral.apply_fn(&residual, |lam| C64::new(1.0, 0.0) / (C64::from(lam) - mu));
                DeficiencyMode {
                    values: &m.values - correction,
                    ..m.clone()
                }
            })
            .collect();
        let gamma1 = gamma1_of(sys, &modes);
        Ok(Self { modes, gamma1 })
    }
}

fn gamma1_of(sys: &DiscreteGreenSystem, modes: &[DeficiencyMode]) -> CMatrix {
    let mut gamma1 = CMatrix::zeros(BOUNDARY_DIM, modes.len());
    for (c, m) in modes.iter().enumerate() {
        let g = sys.gamma1(&m.values);
        gamma1[(0, c)] = g[0];
        gamma1[(1, c)] = g[1];
    }
    gamma1
}

/// Deficiency modes for a uniform potential (including `V = 0`).
pub fn deficiency_modes(sys: &DiscreteGreenSystem) -> Result<DeficiencyBasis> {
    let v = sys.potential().uniform_value().ok_or_else(|| {
        Error::UnsupportedPotential(
            "analytic deficiency modes need a uniform potential".into(),
        )
    })?;
    let x_end = sys.grid().length();
    let j = j_matrix();
    let mut modes = Vec::with_capacity(4);
    for sign in [DeficiencySign::Plus, DeficiencySign::Minus] {
        // J φ' = (μ − V) φ  ⇒  φ' = −J(μ − V) φ
        let m = -(j * (Matrix2::identity() * sign.mu() - v));
        let pairs = eig2x2(&m);
        for port in [Port::Near, Port::Far] {
            let (rate, dir) = pairs
                .iter()
                .find(|(k, _)| match port {
                    Port::Near => k.re < 0.0,
                    Port::Far => k.re > 0.0,
                })
                .copied()
                .ok_or_else(|| {
                    Error::Degenerate(format!(
                        "characteristic exponents {:?} have no strictly {} real part",
                        pairs.map(|p| p.0),
                        if port == Port::Near { "negative" } else { "positive" }
                    ))
                })?;
            if rate.re.abs() < 1e-8 {
                return Err(Error::Degenerate(format!("exponent {rate} is not decaying")));
            }
            if dir[0].norm() < 1e-12 {
                return Err(Error::UnsupportedPotential(
                    "deficiency mode has no first component at the port".into(),
                ));
            }
            let r = dir / dir[0];
            let anchor = match port {
                Port::Near => 0.0,
                Port::Far => x_end,
            };
            let values = sys.sample(|x| {
                let e = (rate * (x - anchor)).exp();
                [e * r[0], e * r[1]]
            });
            modes.push(DeficiencyMode {
                sign,
                port,
                rate,
                polarization: r,
                values,
            });
        }
    }
    let gamma1 = gamma1_of(sys, &modes);
    Ok(DeficiencyBasis { modes, gamma1 })
}

/// `‖(L0* − μ)φ‖_W / ‖φ‖_W` over the nodes with `x` in `window`.
pub fn mode_residual(
    sys: &DiscreteGreenSystem,
    mode: &DeficiencyMode,
    window: std::ops::RangeInclusive<f64>,
) -> f64 {
    let r = sys.apply_adjoint(&mode.values) - &mode.values * mode.sign.mu();
    let n = sys.n_points();
    let (mut num, mut den) = (0.0, 0.0);
    for (j, x) in sys.grid().nodes().enumerate() {
        if !window.contains(&x) {
            continue;
        }
        let w = sys.grid().weights()[j];
        for comp in 0..2 {
            let i = comp * n + j;
            num += w * r[i].norm_sqr();
            den += w * mode.values[i].norm_sqr();
        }
    }
    (num / den).sqrt()
}
