use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::green::j_matrix;
use crate::numerics::{eig2x2, C64, I};

/// Boundary condition at `x = 0` defining the operator's domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointCondition {
    /// All components vanish at 0 (minimal operator).
    Minimal,
    /// `y¹(0) = 0` (the self-adjoint extension of the full system).
    FirstComponentZero,
    /// No condition (maximal operator).
    Free,
}

/// A first-order half-line operator `J d/dx + V` in symbolic form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSpec {
    pub name: String,
    /// `V∞`, the constant potential at infinity (Hermitian).
    pub potential_at_infinity: Matrix2<C64>,
    /// Restricts states to `φ(x) p` for a fixed `p`.
    pub polarization: Option<Vector2<C64>>,
    pub endpoint: EndpointCondition,
}

impl OperatorSpec {
    /// The minimal free Dirac operator `L0`.
    pub fn dirac_minimal() -> Self {
        Self {
            name: "L0".into(),
            potential_at_infinity: Matrix2::zeros(),
            polarization: None,
            endpoint: EndpointCondition::Minimal,
        }
    }

    /// The self-adjoint extension `L` with `y¹(0) = 0`.
    pub fn dirac_self_adjoint() -> Self {
        Self {
            name: "L".into(),
            potential_at_infinity: Matrix2::zeros(),
            polarization: None,
            endpoint: EndpointCondition::FirstComponentZero,
        }
    }

    /// The part of `L0` in `(1, −i)`-polarized states, unitarily a scalar `−i d/dx`.
    pub fn dirac_left_part() -> Self {
        Self {
            name: "L0 on (1,-i)".into(),
            potential_at_infinity: Matrix2::zeros(),
            polarization: Some(Vector2::new(C64::new(1.0, 0.0), -I)),
            endpoint: EndpointCondition::Minimal,
        }
    }

    /// The mirror part in `(1, i)`-polarized states.
    pub fn dirac_right_part() -> Self {
        Self {
            name: "L0 on (1,i)".into(),
            potential_at_infinity: Matrix2::zeros(),
            polarization: Some(Vector2::new(C64::new(1.0, 0.0), I)),
            endpoint: EndpointCondition::Minimal,
        }
    }
}

/// `n₊ = dim Ker(A* + i)`, `n₋ = dim Ker(A* − i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeficiencyIndices {
    pub n_plus: usize,
    pub n_minus: usize,
}

impl DeficiencyIndices {
    pub fn is_maximal(&self) -> bool {
        self.n_plus == 0 || self.n_minus == 0
    }

    pub fn in_class_m(&self) -> bool {
        self.n_plus == 0
    }
}

const SPEC_TOL: f64 = 1e-12;

/// Characteristic data after the optional polarization reduction: `J_r z′ = (μ − V_r) z`.
struct Reduced {
    j: DMatrix<C64>,
    v: DMatrix<C64>,
}

fn reduce(spec: &OperatorSpec) -> Result<Reduced> {
    let v = spec.potential_at_infinity;
    if (v - v.adjoint()).norm() > SPEC_TOL * (1.0 + v.norm()) {
        return Err(Error::UnsupportedPotential(format!(
            "{}: potential at infinity is not Hermitian",
            spec.name
        )));
    }
    let j = j_matrix();
    match spec.polarization {
        None => Ok(Reduced {
            j: DMatrix::from_iterator(2, 2, j.iter().copied()),
            v: DMatrix::from_iterator(2, 2, v.iter().copied()),
        }),
        Some(p) => {
            let norm2 = p.norm_squared();
            if norm2 == 0.0 {
                return Err(Error::InvalidArgument(format!("{}: zero polarization", spec.name)));
            }
            // V must keep the polarization line invariant for the reduction to be exact.
            let vp = v * p;
            let coeff = p.dotc(&vp) / norm2;
            if (vp - p * coeff).norm() > SPEC_TOL * (1.0 + v.norm()) {
                return Err(Error::UnsupportedPotential(format!(
                    "{}: potential does not preserve the polarization",
                    spec.name
                )));
            }
            Ok(Reduced {
                j: DMatrix::from_element(1, 1, p.dotc(&(j * p)) / norm2),
                v: DMatrix::from_element(1, 1, coeff),
            })
        }
    }
}

/// Decaying solution directions of `J_r z′ = (μ − V_r) z` at `x = 0`, as columns.
fn decaying_directions(r: &Reduced, mu: C64) -> Result<DMatrix<C64>> {
    let dim = r.j.nrows();
    let j_inv = r.j.clone().try_inverse().ok_or_else(|| Error::Degenerate("singular leading coefficient".into()))?;
    let m = j_inv * (DMatrix::identity(dim, dim) * mu - &r.v);
    let pairs: Vec<(C64, DMatrix<C64>)> = if dim == 1 {
        vec![(m[(0, 0)], DMatrix::from_element(1, 1, C64::new(1.0, 0.0)))]
    } else {
        let m2 = Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        eig2x2(&m2)
            .into_iter()
            .map(|(k, v)| (k, DMatrix::from_iterator(2, 1, v.iter().copied())))
            .collect()
    };
    let mut cols = Vec::new();
    for (k, v) in pairs {
        if k.re.abs() < 1e-9 {
            return Err(Error::Degenerate(format!("characteristic exponent {k} on the imaginary axis")));
        }
        if k.re < 0.0 {
            cols.push(v);
        }
    }
    Ok(if cols.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&cols.iter().map(|c| c.column(0).into_owned()).collect::<Vec<_>>())
    })
}

/// Rows `sᴴ J_r` over a basis `s` of the boundary values allowed by the operator.
/// An adjoint vector `z` must satisfy `(J_r z(0), s) = 0` for all such `s`.
fn adjoint_constraints(r: &Reduced, endpoint: EndpointCondition, polarized: bool) -> DMatrix<C64> {
    let dim = r.j.nrows();
    let allowed: Vec<Vec<C64>> = match (endpoint, polarized) {
        (EndpointCondition::Minimal, _) => vec![],
        (EndpointCondition::Free, _) => (0..dim)
            .map(|k| (0..dim).map(|i| C64::from(if i == k { 1.0 } else { 0.0 })).collect())
            .collect(),
        (EndpointCondition::FirstComponentZero, false) => vec![vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]],
        // a polarized state φp with p¹ ≠ 0 has y¹(0) = 0 only if φ(0) = 0
        (EndpointCondition::FirstComponentZero, true) => vec![],
    };
    let mut rows = DMatrix::zeros(allowed.len(), dim);
    for (i, s) in allowed.iter().enumerate() {
        let s = DMatrix::from_iterator(dim, 1, s.iter().copied());
        let row = s.adjoint() * &r.j;
        rows.row_mut(i).copy_from(&row);
    }
    rows
}

fn count(r: &Reduced, spec: &OperatorSpec, mu: C64) -> Result<usize> {
    let decaying = decaying_directions(r, mu)?;
    let d = decaying.ncols();
    if d == 0 {
        return Ok(0);
    }
    let constraints = adjoint_constraints(r, spec.endpoint, spec.polarization.is_some());
    if constraints.nrows() == 0 {
        return Ok(d);
    }
    let restricted = constraints * decaying;
    Ok(d - restricted.rank(1e-10))
}

/// Deficiency indices by counting decaying characteristic directions at
/// `μ = ∓i` that satisfy the adjoint boundary condition.
pub fn deficiency_indices(spec: &OperatorSpec) -> Result<DeficiencyIndices> {
    let reduced = reduce(spec)?;
    Ok(DeficiencyIndices {
        n_plus: count(&reduced, spec, -I)?,
        n_minus: count(&reduced, spec, I)?,
    })
}
