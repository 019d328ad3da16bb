use serde::Serialize;

use super::deficiency::{deficiency_indices, DeficiencyIndices, OperatorSpec};
use super::{polarized_state, weighted_cross, Polarization};
use crate::error::{Error, Result};
use crate::free_dynamics::{integrated_trajectory, propagate};
use crate::green::{DiscreteGreenSystem, SelfAdjointExtension};
use crate::numerics::{svd_orthobasis, CMatrix, CVector, C64};

/// Outcome of testing whether `A` restricted to a subspace is a part of `A`.
#[derive(Debug, Clone, Serialize)]
pub struct PartClassification {
    pub dimension: usize,
    pub samples: usize,
    /// `max ‖(I − P_G) A s‖ / ‖s‖` over the domain samples.
    pub invariance_residual: f64,
    pub tolerance: f64,
    pub invariant: bool,
    /// Symbolic indices; absent without an operator spec.
    pub indices: Option<DeficiencyIndices>,
    pub is_maximal: Option<bool>,
    pub in_class_m: Option<bool>,
    pub note: &'static str,
}

const INDEX_NOTE: &str = "deficiency indices are computed symbolically from the operator spec; \
a finite matrix restriction always has zero deficiency indices";

fn project(basis: &CMatrix, w: &[f64], u: &CVector) -> CVector {
    let u_mat = CMatrix::from_columns(&[u.clone()]);
    let coeffs = weighted_cross(basis, &u_mat, w);
    (basis * coeffs).column(0).into_owned()
}

/// Classifies the part of `L0*` in the span of `basis` (W-orthonormal columns).
///
/// `domain_samples` are states of the subspace vanishing at both ports; they
/// probe invariance, which is declared when the residual is at most `tolerance`.
pub fn classify_part(
    sys: &DiscreteGreenSystem,
    basis: &CMatrix,
    domain_samples: &[CVector],
    spec: Option<&OperatorSpec>,
    tolerance: f64,
) -> Result<PartClassification> {
    if basis.ncols() == 0 {
        return Err(Error::EmptyBasis);
    }
    if basis.nrows() != sys.state_dim() {
        return Err(Error::InvalidArgument(format!(
            "basis has {} rows, state dimension is {}",
            basis.nrows(),
            sys.state_dim()
        )));
    }
    if domain_samples.is_empty() {
        return Err(Error::InsufficientSamples("no domain samples supplied".into()));
    }
    let w = sys.weights();
    let gram = weighted_cross(basis, basis, w);
    let defect = (gram - CMatrix::identity(basis.ncols(), basis.ncols())).norm();
    if defect > 1e-8 {
        return Err(Error::InvalidArgument(format!("basis is not W-orthonormal (defect {defect:e})")));
    }
    let mut residual: f64 = 0.0;
    for s in domain_samples {
        let norm = sys.norm(s);
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero domain sample".into()));
        }
        let violation = sys.minimal_domain_violation(s);
        if violation > 1e-10 * norm {
            return Err(Error::ConstraintViolation { violation });
        }
        let outside = sys.norm(&(s - project(basis, w, s)));
        if outside > 1e-8 * norm {
            return Err(Error::InvalidArgument(format!(
                "domain sample leaves the subspace (relative {:.3e})",
                outside / norm
            )));
        }
        let a_s = sys.apply_adjoint(s);
        residual = residual.max(sys.norm(&(&a_s - project(basis, w, &a_s))) / norm);
    }
    let indices = spec.map(deficiency_indices).transpose()?;
    Ok(PartClassification {
        dimension: basis.ncols(),
        samples: domain_samples.len(),
        invariance_residual: residual,
        tolerance,
        invariant: residual <= tolerance,
        is_maximal: indices.map(|i| i.is_maximal()),
        in_class_m: indices.map(|i| i.in_class_m()),
        indices,
        note: INDEX_NOTE,
    })
}

/// W-orthonormal basis of every state with a fixed polarization.
pub fn polarized_subspace(sys: &DiscreteGreenSystem, polarization: Polarization) -> Result<CMatrix> {
    let n = sys.n_points();
    let columns: Vec<CVector> = (0..n)
        .map(|j| polarized_state(sys, polarization, |x| C64::from(if (x - sys.grid().x(j)).abs() < 1e-12 { 1.0 } else { 0.0 })))
        .collect();
    Ok(svd_orthobasis(&CMatrix::from_columns(&columns), sys.weights(), 1e-12)?.1)
}

/// Samples of `(z, e^{itL} y)` against the growth `(z, y) e^{−t}` for `t ≤ 0`.
///
/// If `z` were a deficiency vector of the part with `A*z = −iz`, the two would
/// coincide; unitarity bounds the left side, so agreement with growing `e^{−t}`
/// is only possible for `(z, y) = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct DecayProbe {
    pub times: Vec<f64>,
    pub overlaps: Vec<f64>,
    pub predicted: Vec<f64>,
    /// `‖z‖ ‖y‖`, the unitarity bound on every overlap.
    pub bound: f64,
    pub bounded: bool,
    /// `|(z, y)|` can be at most `bound · e^{t_min}` if the relation held.
    pub implied_overlap_bound: f64,
}

pub fn decay_probe(sys: &DiscreteGreenSystem, ext: &SelfAdjointExtension, z: &CVector, y: &CVector, times: &[f64]) -> Result<DecayProbe> {
    if times.iter().any(|&t| t > 0.0) {
        return Err(Error::InvalidArgument("decay probe uses nonpositive times".into()));
    }
    let base = sys.inner(z, y).norm();
    let bound = sys.norm(z) * sys.norm(y);
    let mut overlaps = Vec::with_capacity(times.len());
    for &t in times {
        overlaps.push(sys.inner(z, &propagate(ext, y, 0.0, t)?).norm());
    }
    let t_min = times.iter().copied().fold(0.0, f64::min);
    Ok(DecayProbe {
        predicted: times.iter().map(|t| base * (-t).exp()).collect(),
        bounded: overlaps.iter().all(|&o| o <= bound * (1.0 + 1e-9)),
        times: times.to_vec(),
        overlaps,
        bound,
        implied_overlap_bound: bound * t_min.exp(),
    })
}

/// Spot-check that `w^y(t) ∈ Dom L0` for `t ≤ 0`: `Γ1` vanishes by
/// construction and `Γ2` should be small relative to the state.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipProbe {
    pub times: Vec<f64>,
    pub gamma1: Vec<f64>,
    pub gamma2: Vec<f64>,
    pub max_relative_trace: f64,
}

pub fn membership_probe(sys: &DiscreteGreenSystem, ext: &SelfAdjointExtension, y: &CVector, times: &[f64]) -> Result<MembershipProbe> {
    let mut gamma1 = Vec::with_capacity(times.len());
    let mut gamma2 = Vec::with_capacity(times.len());
    let mut worst: f64 = 0.0;
    for &t in times {
        if t > 0.0 {
            return Err(Error::InvalidArgument("membership probe uses nonpositive times".into()));
        }
        let w = integrated_trajectory(ext, y, 0.0, t)?;
        let [a, b] = sys.gamma1(&w);
        let [c, d] = sys.gamma2(&w);
        let g1 = a.norm().max(b.norm());
        let g2 = c.norm().max(d.norm());
        let scale = sys.norm(&w);
        if scale > 0.0 {
            worst = worst.max(g2 / scale);
        }
        gamma1.push(g1);
        gamma2.push(g2);
    }
    Ok(MembershipProbe {
        times: times.to_vec(),
        gamma1,
        gamma2,
        max_relative_trace: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::{build_dirac, extend_self_adjoint, Potential};
    use crate::numerics::Grid;
    use std::f64::consts::PI;

    fn setup(n: usize) -> (DiscreteGreenSystem, SelfAdjointExtension) {
        let grid = Grid::new(n, 2.0).unwrap();
        let sys = build_dirac(grid.clone(), Potential::zero(&grid)).unwrap();
        let ext = extend_self_adjoint(&sys).unwrap();
        (sys, ext)
    }

    fn left_samples(sys: &DiscreteGreenSystem) -> Vec<CVector> {
        let x_end = sys.grid().length();
        (1..=6)
            .map(|k| polarized_state(sys, Polarization::LeftMoving, |x| C64::from((k as f64 * PI * x / x_end).sin())))
            .map(|s| sys.restrict_to_minimal_domain(&s))
            .collect()
    }

    #[test]
    fn left_polarized_part_is_in_class_m() {
        let (sys, _) = setup(128);
        let basis = polarized_subspace(&sys, Polarization::LeftMoving).unwrap();
        assert_eq!(basis.ncols(), sys.n_points());
        let h = sys.grid().h();
        let c = classify_part(&sys, &basis, &left_samples(&sys), Some(&OperatorSpec::dirac_left_part()), 10.0 * h * h).unwrap();
        assert!(c.invariance_residual <= 1e-12, "{}", c.invariance_residual);
        assert!(c.invariant);
        assert_eq!(c.indices, Some(DeficiencyIndices { n_plus: 0, n_minus: 1 }));
        assert_eq!(c.in_class_m, Some(true));
        assert_eq!(c.is_maximal, Some(true));
    }

    #[test]
    fn right_polarized_part_is_maximal_but_not_in_class_m() {
        let (sys, _) = setup(64);
        let basis = polarized_subspace(&sys, Polarization::RightMoving).unwrap();
        let x_end = sys.grid().length();
        let samples: Vec<CVector> = (1..=4)
            .map(|k| polarized_state(&sys, Polarization::RightMoving, |x| C64::from((k as f64 * PI * x / x_end).sin())))
            .map(|s| sys.restrict_to_minimal_domain(&s))
            .collect();
        let c = classify_part(&sys, &basis, &samples, Some(&OperatorSpec::dirac_right_part()), 1e-3).unwrap();
        assert!(c.invariant);
        assert_eq!(c.in_class_m, Some(false));
        assert_eq!(c.is_maximal, Some(true));
    }

    #[test]
    fn whole_space_with_self_adjoint_spec() {
        let (sys, _) = setup(32);
        let basis = svd_orthobasis(&CMatrix::identity(sys.state_dim(), sys.state_dim()), sys.weights(), 1e-12).unwrap().1;
        let samples = vec![sys.restrict_to_minimal_domain(&sys.sample(|x| [C64::new(x.sin(), 0.0), C64::new(0.0, x.cos())]))];
        let c = classify_part(&sys, &basis, &samples, Some(&OperatorSpec::dirac_self_adjoint()), 1e-12).unwrap();
        assert!(c.invariant);
        assert_eq!(c.indices, Some(DeficiencyIndices { n_plus: 0, n_minus: 0 }));
        assert_eq!(c.in_class_m, Some(true));
    }

    #[test]
    fn mixed_subspace_is_not_invariant() {
        let (sys, _) = setup(64);
        // span of a single smooth polarized function is not mapped into itself
        let s = left_samples(&sys).remove(0);
        let basis = svd_orthobasis(&CMatrix::from_columns(&[s.clone()]), sys.weights(), 1e-12).unwrap().1;
        let c = classify_part(&sys, &basis, &[s], None, 1e-3).unwrap();
        assert!(!c.invariant);
        assert!(c.indices.is_none() && c.in_class_m.is_none());
    }

    #[test]
    fn classify_rejects_bad_input() {
        let (sys, _) = setup(32);
        let basis = polarized_subspace(&sys, Polarization::LeftMoving).unwrap();
        assert!(matches!(classify_part(&sys, &CMatrix::zeros(64, 0), &left_samples(&sys), None, 1.0), Err(Error::EmptyBasis)));
        let at_port = polarized_state(&sys, Polarization::LeftMoving, |_| C64::new(1.0, 0.0));
        assert!(classify_part(&sys, &basis, &[at_port], None, 1.0).is_err());
        let wrong = sys.restrict_to_minimal_domain(&polarized_state(&sys, Polarization::RightMoving, |x| C64::from(x.sin())));
        assert!(classify_part(&sys, &basis, &[wrong], None, 1.0).is_err());
        assert!(classify_part(&sys, &basis, &[], None, 1.0).is_err());
    }

    #[test]
    fn decay_probe_is_bounded() {
        let (sys, ext) = setup(64);
        let y = sys.restrict_to_minimal_domain(&left_samples(&sys)[1]);
        let z = polarized_state(&sys, Polarization::LeftMoving, |x| C64::from((x - 2.0).exp()));
        let times: Vec<f64> = (0..=10).map(|k| -0.5 * k as f64).collect();
        let probe = decay_probe(&sys, &ext, &z, &y, &times).unwrap();
        assert!(probe.bounded);
        // e^{5} growth cannot be matched by a unitary overlap unless (z, y) is tiny
        assert!(probe.predicted.last().unwrap() > &probe.bound || probe.implied_overlap_bound < probe.bound);
        assert!(decay_probe(&sys, &ext, &z, &y, &[0.5]).is_err());
    }

    #[test]
    fn integrated_left_moving_state_stays_in_minimal_domain() {
        let (sys, ext) = setup(256);
        let y = polarized_state(&sys, Polarization::LeftMoving, |x| {
            C64::from(if (0.2..0.6).contains(&x) { (PI * (x - 0.2) / 0.4).sin().powi(4) } else { 0.0 })
        });
        let times: Vec<f64> = (0..=6).map(|k| -0.1 * k as f64).collect();
        let probe = membership_probe(&sys, &ext, &y, &times).unwrap();
        assert!(probe.gamma1.iter().all(|&g| g == 0.0));
        assert!(probe.max_relative_trace < 1e-3, "{}", probe.max_relative_trace);
    }
}
