//! Reachability, duality checks, deficiency indices and part classification.

mod deficiency;
mod duality;
mod parts;
mod reachability;

pub use deficiency::{deficiency_indices, DeficiencyIndices, EndpointCondition, OperatorSpec};
pub use duality::{admissible_state, check_aux1, check_aux2, check_auxiliary, DualityCheck};
pub use parts::{classify_part, decay_probe, membership_probe, polarized_subspace, DecayProbe, MembershipProbe, PartClassification};
pub use reachability::{
    backward_reachable, predicted_unreachable_basis, snapshot_reachable, BumpFamily, ReachabilityReport,
};

use nalgebra::Vector2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::green::DiscreteGreenSystem;
use crate::numerics::{CMatrix, CVector, C64, I};

/// The two characteristic polarizations of the free Dirac system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    /// `(1, i)`: right-moving, carried by forward boundary-control states.
    RightMoving,
    /// `(1, −i)`: left-moving.
    LeftMoving,
}

impl Polarization {
    pub fn vector(self) -> Vector2<C64> {
        match self {
            Self::RightMoving => Vector2::new(C64::new(1.0, 0.0), I),
            Self::LeftMoving => Vector2::new(C64::new(1.0, 0.0), -I),
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Self::RightMoving => Self::LeftMoving,
            Self::LeftMoving => Self::RightMoving,
        }
    }
}

/// Pointwise projection of `u` onto `polarization`.
///
/// `(1, i)` and `(1, −i)` are orthogonal in `C²`, so the two projections are
/// W-orthogonal and sum to `u`.
pub fn polarized_part(sys: &DiscreteGreenSystem, u: &CVector, polarization: Polarization) -> CVector {
    let n = sys.n_points();
    let p = polarization.vector();
    let mut out = sys.zeros();
    for j in 0..n {
        // coefficient of p: ⟨u, p⟩ / |p|²
        let c = (u[j] * p[0].conj() + u[n + j] * p[1].conj()) / 2.0;
        out[j] = c * p[0];
        out[n + j] = c * p[1];
    }
    out
}

/// `‖P_pol u‖ / ‖u‖` (zero for `u = 0`).
pub fn polarization_content(sys: &DiscreteGreenSystem, u: &CVector, polarization: Polarization) -> f64 {
    let total = sys.norm(u);
    if total == 0.0 {
        return 0.0;
    }
    sys.norm(&polarized_part(sys, u, polarization)) / total
}

/// Relative W-norm of `u` on nodes with `x > x0`.
pub fn tail_fraction(sys: &DiscreteGreenSystem, u: &CVector, x0: f64) -> f64 {
    let total = sys.norm(u);
    if total == 0.0 {
        return 0.0;
    }
    let n = sys.n_points();
    let w = sys.weights();
    let tail: f64 = (0..n)
        .filter(|&j| sys.grid().x(j) > x0 + 1e-12)
        .map(|j| w[j] * (u[j].norm_sqr() + u[n + j].norm_sqr()))
        .sum();
    tail.sqrt() / total
}

/// A state `φ(x) p` for a scalar profile and a polarization.
pub fn polarized_state(sys: &DiscreteGreenSystem, polarization: Polarization, phi: impl Fn(f64) -> C64) -> CVector {
    let p = polarization.vector();
    sys.sample(|x| {
        let v = phi(x);
        [v * p[0], v * p[1]]
    })
}

/// Principal angles (radians, ascending) between the spans of two
/// W-orthonormal bases.
pub fn principal_angles(a: &CMatrix, b: &CMatrix, w: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != b.nrows() || a.nrows() != w.len() {
        return Err(Error::InvalidArgument(format!(
            "bases have {} and {} rows for {} weights",
            a.nrows(),
            b.nrows(),
            w.len()
        )));
    }
    if a.ncols() == 0 || b.ncols() == 0 {
        return Err(Error::EmptyBasis);
    }
    let cross = weighted_cross(a, b, w);
    let mut angles: Vec<f64> = cross
        .singular_values()
        .iter()
        .map(|&s| s.clamp(0.0, 1.0).acos())
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

/// `aᴴ W b`.
pub(crate) fn weighted_cross(a: &CMatrix, b: &CMatrix, w: &[f64]) -> CMatrix {
    let mut wb = b.clone();
    for (mut row, &wi) in wb.row_iter_mut().zip(w) {
        row *= C64::from(wi);
    }
    a.adjoint() * wb
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::{build_dirac, Potential};
    use crate::numerics::{svd_orthobasis, Grid};

    fn system(n: usize) -> DiscreteGreenSystem {
        let grid = Grid::new(n, 2.0).unwrap();
        build_dirac(grid.clone(), Potential::zero(&grid)).unwrap()
    }

    #[test]
    fn polarized_parts_are_complementary() {
        let sys = system(32);
        let u = sys.sample(|x| [C64::new(x.sin(), 0.3), C64::new(0.1, x * x)]);
        let a = polarized_part(&sys, &u, Polarization::RightMoving);
        let b = polarized_part(&sys, &u, Polarization::LeftMoving);
        assert!((&a + &b - &u).norm() < 1e-14);
        assert!(sys.inner(&a, &b).norm() < 1e-14);
        let ca = polarization_content(&sys, &u, Polarization::RightMoving);
        let cb = polarization_content(&sys, &u, Polarization::LeftMoving);
        assert!((ca * ca + cb * cb - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_polarizations() {
        let sys = system(32);
        let u = polarized_state(&sys, Polarization::RightMoving, |x| C64::new((3.0 * x).cos(), 0.0));
        assert!(polarization_content(&sys, &u, Polarization::LeftMoving) < 1e-15);
        assert!((polarization_content(&sys, &u, Polarization::RightMoving) - 1.0).abs() < 1e-14);
        assert_eq!(polarization_content(&sys, &sys.zeros(), Polarization::LeftMoving), 0.0);
    }

    #[test]
    fn tail_of_compact_state() {
        let sys = system(65);
        let u = polarized_state(&sys, Polarization::RightMoving, |x| C64::new(if x < 1.0 { 1.0 } else { 0.0 }, 0.0));
        assert_eq!(tail_fraction(&sys, &u, 1.0), 0.0);
        let v = polarized_state(&sys, Polarization::RightMoving, |_| C64::new(1.0, 0.0));
        // half the mass sits beyond x = 1 up to the endpoint weights
        let t = tail_fraction(&sys, &v, 1.0);
        assert!((t * t - 0.5).abs() < 0.02, "{t}");
    }

    #[test]
    fn principal_angles_of_known_subspaces() {
        let sys = system(32);
        let w = sys.weights();
        let e = |k: usize| {
            let mut v = sys.zeros();
            v[k] = C64::new(1.0, 0.0);
            v
        };
        let (_, a) = svd_orthobasis(&CMatrix::from_columns(&[e(3), e(4)]), w, 1e-8).unwrap();
        let (_, b) = svd_orthobasis(&CMatrix::from_columns(&[e(4), e(10)]), w, 1e-8).unwrap();
        let angles = principal_angles(&a, &b, w).unwrap();
        assert!(angles[0].abs() < 1e-7);
        assert!((angles[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-7);
        let rotated = e(3) + e(10) * C64::new(0.0, 1.0);
        let (_, c) = svd_orthobasis(&CMatrix::from_columns(&[rotated]), w, 1e-8).unwrap();
        let (_, d) = svd_orthobasis(&CMatrix::from_columns(&[e(3)]), w, 1e-8).unwrap();
        let angle = principal_angles(&c, &d, w).unwrap()[0];
        assert!((angle - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!(principal_angles(&CMatrix::zeros(64, 0), &d, w).is_err());
    }
}
