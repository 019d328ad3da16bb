//! Snapshot estimates of the reachable sets `𝒰^T` and their complements.

use rayon::prelude::*;
use serde::Serialize;

use super::{polarization_content, principal_angles, tail_fraction, weighted_cross, Polarization};
use crate::boundary_control::{Bump, BoundarySolver, BumpShape, ControlSignal, Direction};
use crate::error::{Error, Result};
use crate::green::DiscreteGreenSystem;
use crate::numerics::{svd_orthobasis, CMatrix, CVector, C64};

/// Golden-ratio and silver-ratio low-discrepancy sequences on `[0, 1)`.
fn low_discrepancy(k: usize) -> (f64, f64) {
    let a = (0.5 + k as f64 * 0.618_033_988_749_895).fract();
    let b = (0.5 + k as f64 * 0.414_213_562_373_095).fract();
    (a, b)
}

/// A finite dictionary of bump controls supported inside `(0, |T|)`.
#[derive(Debug, Clone, Serialize)]
pub struct BumpFamily {
    pub shape: BumpShape,
    pub bumps: Vec<Bump>,
}

impl BumpFamily {
    /// Fraction of `|T|` kept clear at both ends of the window.
    pub const MARGIN: f64 = 0.1;

    /// `count` unit bumps whose widths range over `0.3|T|..0.8|T|` and whose
    /// centers spread over the admissible positions inside the window.
    ///
    /// The margin keeps the discrete precursor ahead of each pulse, whose
    /// width grows like `(|T|/h)^{1/3}` cells, inside `(0, |T|)`.
    pub fn spread(count: usize, horizon_abs: f64, shape: BumpShape) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidArgument("a control family needs at least one bump".into()));
        }
        if !(horizon_abs > 0.0 && horizon_abs.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon_abs}")));
        }
        let margin = Self::MARGIN * horizon_abs;
        let bumps = (0..count)
            .map(|k| {
                let (a, b) = low_discrepancy(k);
                let width = horizon_abs * (0.3 + (0.8 - 0.3) * a);
                let lo = margin + width / 2.0;
                let hi = horizon_abs - margin - width / 2.0;
                let center = lo + (hi - lo) * b;
                Bump::centered(shape, center, width, C64::new(1.0, 0.0))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { shape, bumps })
    }

    pub fn from_bumps(shape: BumpShape, bumps: Vec<Bump>) -> Result<Self> {
        if bumps.is_empty() {
            return Err(Error::InvalidArgument("a control family needs at least one bump".into()));
        }
        Ok(Self { shape, bumps })
    }

    pub fn len(&self) -> usize {
        self.bumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bumps.is_empty()
    }

    /// Forward controls as given; backward controls mirrored to `f(−t)`.
    pub fn controls(&self, direction: Direction) -> Vec<ControlSignal> {
        self.bumps
            .iter()
            .map(|b| match direction {
                Direction::Forward => ControlSignal::from_bumps(vec![*b]),
                Direction::Backward => ControlSignal::from_bumps(vec![b.mirrored()]),
            })
            .collect()
    }

    /// Largest `|t|` touched by any control.
    pub fn max_support(&self) -> f64 {
        self.bumps.iter().map(|b| b.end).fold(0.0, f64::max)
    }
}

/// Snapshot estimate of `𝒰^T` together with its structural diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ReachabilityReport {
    pub direction: Direction,
    pub horizon: f64,
    pub controls_used: usize,
    pub family: BumpFamily,
    pub rank_tol: f64,
    /// Singular values of the W-weighted snapshot matrix, nonincreasing.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// Predicted window `Ω^T = (0, |T|)` holding the reachable states.
    pub omega_t: (f64, f64),
    /// The polarization the snapshots should carry.
    pub polarization: Polarization,
    /// Maximum relative content of the opposite polarization.
    pub polarization_residual: f64,
    pub snapshot_polarization_residuals: Vec<f64>,
    /// Maximum relative W-norm beyond `x = |T|`.
    pub tail_fraction: f64,
    /// Maximum relative projection of a snapshot on the predicted unreachable subspace.
    pub predicted_leak: Option<f64>,
    /// Principal angles (degrees) between the predicted unreachable subspace
    /// and the estimated unreachable subspace, descending.
    pub predicted_angles_deg: Vec<f64>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub reachable_basis: CMatrix,
}

impl ReachabilityReport {
    /// Projection onto the estimated unreachable subspace `H ⊖ 𝒰^T`.
    pub fn unreachable_part(&self, sys: &DiscreteGreenSystem, u: &CVector) -> CVector {
        if self.reachable_basis.ncols() == 0 {
            return u.clone();
        }
        let u_mat = CMatrix::from_columns(&[u.clone()]);
        let coeffs = weighted_cross(&self.reachable_basis, &u_mat, sys.weights());
        u - (&self.reachable_basis * coeffs).column(0)
    }

    /// Smallest principal angle (degrees) to another estimate.
    pub fn smallest_angle_deg(&self, other: &Self, sys: &DiscreteGreenSystem) -> Result<f64> {
        let angles = principal_angles(&self.reachable_basis, &other.reachable_basis, sys.weights())?;
        Ok(angles[0].to_degrees())
    }

    /// Largest of `predicted_angles_deg` (zero when no prediction was supplied).
    pub fn max_predicted_angle_deg(&self) -> f64 {
        self.predicted_angles_deg.first().copied().unwrap_or(0.0)
    }
}

/// W-orthonormal basis of the states predicted unreachable at horizon `T`:
/// `ψ(x)(1, −i)` on `(0, T)` plus arbitrary states on `(T, X)`.
///
/// Each piece is spanned by `modes` sine functions vanishing at the ends of
/// its interval.
pub fn predicted_unreachable_basis(sys: &DiscreteGreenSystem, horizon: f64, modes: usize) -> Result<CMatrix> {
    let length = sys.grid().length();
    if !(horizon > 0.0 && horizon < length) {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} must lie inside (0, {length})"
        )));
    }
    if modes == 0 {
        return Err(Error::EmptyBasis);
    }
    let sine = |a: f64, b: f64, k: usize| {
        move |x: f64| {
            if x > a && x < b {
                (k as f64 * std::f64::consts::PI * (x - a) / (b - a)).sin()
            } else {
                0.0
            }
        }
    };
    let one = C64::new(1.0, 0.0);
    let minus_i = C64::new(0.0, -1.0);
    let mut columns: Vec<CVector> = Vec::with_capacity(3 * modes);
    for k in 1..=modes {
        let s = sine(0.0, horizon, k);
        columns.push(sys.sample(|x| [one * s(x), minus_i * s(x)]));
        let t = sine(horizon, length, k);
        columns.push(sys.sample(|x| [one * t(x), C64::new(0.0, 0.0)]));
        columns.push(sys.sample(|x| [C64::new(0.0, 0.0), one * t(x)]));
    }
    let (_, basis) = svd_orthobasis(&CMatrix::from_columns(&columns), sys.weights(), 1e-10)?;
    Ok(basis)
}

fn estimate(
    solver: &BoundarySolver,
    family: &BumpFamily,
    horizon: f64,
    rank_tol: f64,
    predicted: Option<&CMatrix>,
) -> Result<ReachabilityReport> {
    let sys = solver.sys;
    let direction = Direction::of_horizon(horizon);
    let (polarization, window) = match direction {
        Direction::Forward => (Polarization::RightMoving, horizon),
        Direction::Backward => (Polarization::LeftMoving, -horizon),
    };
    let controls = family.controls(direction);
    let solutions = controls
        .par_iter()
        .map(|f| solver.terminal_state(f, horizon))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings: Vec<String> = solutions.iter().flat_map(|s| s.warnings.iter().cloned()).collect();
    warnings.sort();
    warnings.dedup();
    let states: Vec<CVector> = solutions.into_iter().map(|s| s.state).collect();

    let snapshot_polarization_residuals: Vec<f64> = states
        .iter()
        .map(|u| polarization_content(sys, u, polarization.opposite()))
        .collect();
    let polarization_residual = snapshot_polarization_residuals.iter().copied().fold(0.0, f64::max);
    let tail = states.iter().map(|u| tail_fraction(sys, u, window)).fold(0.0, f64::max);

    let (singular_values, reachable_basis) =
        svd_orthobasis(&CMatrix::from_columns(&states), sys.weights(), rank_tol)?;

    let mut predicted_leak = None;
    let mut predicted_angles_deg = Vec::new();
    if let Some(d) = predicted {
        let w = sys.weights();
        let leak = states
            .iter()
            .map(|u| {
                let norm = sys.norm(u);
                if norm == 0.0 {
                    return 0.0;
                }
                let coeffs = weighted_cross(d, &CMatrix::from_columns(&[u.clone()]), w);
                coeffs.norm() / norm
            })
            .fold(0.0, f64::max);
        predicted_leak = Some(leak);
        if reachable_basis.ncols() > 0 {
            // sin θ_k are the singular values of the reachable component of the predicted basis
            let cross = weighted_cross(&reachable_basis, d, w);
            let mut angles: Vec<f64> = cross
                .singular_values()
                .iter()
                .map(|s| s.clamp(0.0, 1.0).asin().to_degrees())
                .collect();
            angles.sort_by(|a, b| b.total_cmp(a));
            predicted_angles_deg = angles;
        }
    }

    Ok(ReachabilityReport {
        direction,
        horizon,
        controls_used: family.len(),
        family: family.clone(),
        rank_tol,
        rank: singular_values.len(),
        singular_values,
        omega_t: (0.0, window),
        polarization,
        polarization_residual,
        snapshot_polarization_residuals,
        tail_fraction: tail,
        predicted_leak,
        predicted_angles_deg,
        warnings,
        reachable_basis,
    })
}

/// Forward reachable-set estimate from the snapshots `u^f(T)`, `T > 0`.
///
/// When `predicted` is given (a W-orthonormal basis of the predicted
/// unreachable subspace), the report measures how far the estimate departs
/// from that prediction.
pub fn snapshot_reachable(
    solver: &BoundarySolver,
    family: &BumpFamily,
    horizon: f64,
    rank_tol: f64,
    predicted: Option<&CMatrix>,
) -> Result<ReachabilityReport> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("forward horizon must be positive, got {horizon}")));
    }
    estimate(solver, family, horizon, rank_tol, predicted)
}

/// Backward reachable-set estimate at `T < 0` from the mirrored controls `f(−t)`.
pub fn backward_reachable(
    solver: &BoundarySolver,
    family: &BumpFamily,
    horizon: f64,
    rank_tol: f64,
) -> Result<ReachabilityReport> {
    if !(horizon < 0.0) {
        return Err(Error::InvalidArgument(format!("backward horizon must be negative, got {horizon}")));
    }
    estimate(solver, family, horizon, rank_tol, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_control::SolverMethod;
    use crate::green::{build_dirac, deficiency_modes, extend_self_adjoint, DeficiencyBasis, Potential, SelfAdjointExtension};
    use crate::numerics::Grid;

    struct Setup {
        sys: DiscreteGreenSystem,
        ext: SelfAdjointExtension,
        basis: DeficiencyBasis,
    }

    fn setup(n: usize) -> Setup {
        let grid = Grid::new(n, 2.0).unwrap();
        let sys = build_dirac(grid.clone(), Potential::zero(&grid)).unwrap();
        let ext = extend_self_adjoint(&sys).unwrap();
        let basis = deficiency_modes(&sys).unwrap();
        Setup { sys, ext, basis }
    }

    fn solver(s: &Setup) -> BoundarySolver<'_> {
        BoundarySolver::new(&s.sys, &s.ext, &s.basis, SolverMethod::Lift(Default::default()))
    }

    #[test]
    fn spread_family_fits_the_window() {
        let fam = BumpFamily::spread(20, 1.0, BumpShape::SinQuartic).unwrap();
        assert_eq!(fam.len(), 20);
        for b in &fam.bumps {
            assert!(b.start >= 0.1 - 1e-12 && b.end <= 0.9 + 1e-12, "{b:?}");
            let w = b.end - b.start;
            assert!((0.3 - 1e-12..=0.8 + 1e-12).contains(&w));
        }
        let back = fam.controls(Direction::Backward);
        let (a, b) = back[0].support().unwrap();
        assert!(b <= 0.0 && a >= -1.0);
        assert!(BumpFamily::spread(0, 1.0, BumpShape::SinQuartic).is_err());
    }

    #[test]
    fn single_control_has_rank_one() {
        let s = setup(64);
        let fam = BumpFamily::spread(1, 1.0, BumpShape::SinQuartic).unwrap();
        let r = snapshot_reachable(&solver(&s), &fam, 1.0, 1e-8, None).unwrap();
        assert_eq!(r.rank, 1);
        let b = backward_reachable(&solver(&s), &fam, -1.0, 1e-8).unwrap();
        assert_eq!(b.rank, 1);
        assert_eq!(b.direction, Direction::Backward);
    }

    #[test]
    fn rank_matches_gram_oracle() {
        let s = setup(64);
        let fam = BumpFamily::spread(12, 1.0, BumpShape::SinQuartic).unwrap();
        let r = snapshot_reachable(&solver(&s), &fam, 1.0, 1e-6, None).unwrap();
        // Gram matrix eigenvalues are the squared singular values
        let states: Vec<CVector> = fam
            .controls(Direction::Forward)
            .iter()
            .map(|f| solver(&s).terminal_state(f, 1.0).unwrap().state)
            .collect();
        let m = CMatrix::from_columns(&states);
        let gram = weighted_cross(&m, &m, s.sys.weights());
        let mut eig: Vec<f64> = gram.symmetric_eigenvalues().iter().map(|e| e.max(0.0).sqrt()).collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        let oracle_rank = eig.iter().filter(|&&e| e > 1e-6 * eig[0]).count();
        assert_eq!(r.rank, oracle_rank);
        for (a, b) in r.singular_values.iter().zip(&eig) {
            assert!((a - b).abs() < 1e-8 * eig[0]);
        }
    }

    #[test]
    fn snapshots_stay_in_window_and_polarization() {
        let s = setup(256);
        let fam = BumpFamily::spread(8, 1.0, BumpShape::SinQuartic).unwrap();
        let d = predicted_unreachable_basis(&s.sys, 1.0, 6).unwrap();
        let r = snapshot_reachable(&solver(&s), &fam, 1.0, 1e-8, Some(&d)).unwrap();
        assert!(r.tail_fraction < 1e-6, "{}", r.tail_fraction);
        assert!(r.polarization_residual < 5e-2, "{}", r.polarization_residual);
        assert!(r.predicted_leak.unwrap() < 5e-2);
        assert_eq!(r.omega_t, (0.0, 1.0));
        let u = r.unreachable_part(&s.sys, &r.reachable_basis.column(0).into_owned());
        assert!(s.sys.norm(&u) < 1e-10);
    }

    #[test]
    fn backward_snapshots_are_left_moving() {
        let s = setup(128);
        let fam = BumpFamily::spread(8, 1.0, BumpShape::SinQuartic).unwrap();
        let f = snapshot_reachable(&solver(&s), &fam, 1.0, 1e-4, None).unwrap();
        let b = backward_reachable(&solver(&s), &fam, -1.0, 1e-4).unwrap();
        assert_eq!(b.polarization, Polarization::LeftMoving);
        assert!(b.tail_fraction < 1e-4);
        // exact discrete time reversal maps one family onto the other
        for (x, y) in f.snapshot_polarization_residuals.iter().zip(&b.snapshot_polarization_residuals) {
            assert!((x - y).abs() < 1e-8 * x.max(1e-12));
        }
        assert!(f.smallest_angle_deg(&b, &s.sys).unwrap() > 60.0);
    }

    #[test]
    fn predicted_basis_is_orthonormal() {
        let s = setup(64);
        let d = predicted_unreachable_basis(&s.sys, 1.0, 5).unwrap();
        assert_eq!(d.ncols(), 15);
        let g = weighted_cross(&d, &d, s.sys.weights());
        assert!((g - CMatrix::identity(15, 15)).norm() < 1e-10);
        assert!(predicted_unreachable_basis(&s.sys, 3.0, 5).is_err());
    }

    #[test]
    fn direction_is_checked() {
        let s = setup(32);
        let fam = BumpFamily::spread(2, 1.0, BumpShape::SinQuartic).unwrap();
        assert!(snapshot_reachable(&solver(&s), &fam, -1.0, 1e-8, None).is_err());
        assert!(backward_reachable(&solver(&s), &fam, 1.0, 1e-8).is_err());
    }
}
