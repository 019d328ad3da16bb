//! Acceptance checks, one test per criterion.
//!
//! Each test prints a single `PASS` or `FAIL` line with the measured values
//! before asserting, so a failing criterion still reports what it measured.
//! Reference values come from oracles written here (characteristics, direct
//! quadrature of the ODE, raw state entries) rather than from library helpers.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use greenlab::analysis::{
    backward_reachable, check_aux1, check_aux2, check_auxiliary, classify_part, deficiency_indices, admissible_state,
    polarized_state, polarized_subspace, snapshot_reachable, BumpFamily, DeficiencyIndices, EndpointCondition,
    OperatorSpec, Polarization,
};
use greenlab::boundary_control::{BoundarySolver, BumpShape, ControlSignal, Direction, Gauge, SolverMethod};
use greenlab::free_dynamics::{duhamel, duhamel_regularized, propagate};
use greenlab::green::{build_dirac, deficiency_modes, extend_self_adjoint, DeficiencyBasis, DiscreteGreenSystem, Potential, SelfAdjointExtension};
use greenlab::numerics::{CVector, Grid, TimeSamples, C64, I};
use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Setup {
    sys: DiscreteGreenSystem,
    ext: SelfAdjointExtension,
    basis: DeficiencyBasis,
}

fn setup(n: usize, length: f64) -> Setup {
    let grid = Grid::new(n, length).unwrap();
    let sys = build_dirac(grid.clone(), Potential::zero(&grid)).unwrap();
    let ext = extend_self_adjoint(&sys).unwrap();
    let basis = deficiency_modes(&sys).unwrap();
    Setup { sys, ext, basis }
}

impl Setup {
    fn lift(&self) -> BoundarySolver<'_> {
        BoundarySolver::new(&self.sys, &self.ext, &self.basis, SolverMethod::Lift(Gauge::MinimalNorm))
    }

    fn direct(&self) -> BoundarySolver<'_> {
        BoundarySolver::new(&self.sys, &self.ext, &self.basis, SolverMethod::Direct)
    }
}

fn verdict(id: u32, title: &str, pass: bool, detail: &str) {
    println!("{} criterion {id} ({title}): {detail}", if pass { "PASS" } else { "FAIL" });
}

/// Plain weighted norm from the raw entries and the trapezoid weights.
fn w_norm(u: &CVector, w: &[f64]) -> f64 {
    let n = w.len();
    (0..n).map(|j| w[j] * (u[j].norm_sqr() + u[n + j].norm_sqr())).sum::<f64>().sqrt()
}

fn w_inner(u: &CVector, v: &CVector, w: &[f64]) -> C64 {
    let n = w.len();
    (0..n).map(|j| (u[j] * v[j].conj() + u[n + j] * v[n + j].conj()) * w[j]).sum()
}

/// Least-squares slope of `−log e` against `log N`.
fn fitted_order(sizes: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    -sxy / sxx
}

#[test]
fn criterion_1_exact_green_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut worst_independent: f64 = 0.0;
    // the budget covers building the systems and evaluating the residuals;
    // the dense recomputation below is the test's own cross-check
    let mut library_time = 0.0;
    let oracle_start = Instant::now();
    for n in [64, 128, 256, 512] {
        let pairs: Vec<(CVector, CVector)> = (0..100)
            .map(|_| {
                let mut random = || CVector::from_fn(2 * n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                (random(), random())
            })
            .collect();
        let timer = Instant::now();
        let grid = Grid::new(n, 2.0).unwrap();
        let sys = build_dirac(grid.clone(), Potential::zero(&grid)).unwrap();
        let residuals: Vec<C64> = pairs.iter().map(|(u, v)| sys.green_residual(u, v)).collect();
        library_time += timer.elapsed().as_secs_f64();

        let w = sys.grid().weights().to_vec();
        let a = sys.matrix();
        for ((u, v), res) in pairs.iter().zip(&residuals) {
            let (au, av) = (&a * u, &a * v);
            let scale = w_norm(&au, &w) * w_norm(v, &w) + w_norm(u, &w) * w_norm(&av, &w);
            worst = worst.max(res.norm() / scale);
            // (Γ1u, Γ2v) − (Γ2u, Γ1v) from the raw endpoint entries
            let g1 = |z: &CVector| [z[0], z[n - 1]];
            let g2 = |z: &CVector| [z[n], -z[2 * n - 1]];
            let pair = |p: [C64; 2], q: [C64; 2]| p[0] * q[0].conj() + p[1] * q[1].conj();
            let form = pair(g1(u), g2(v)) - pair(g2(u), g1(v));
            let independent = w_inner(&au, v, &w) - w_inner(u, &av, &w) - form;
            worst_independent = worst_independent.max(independent.norm() / scale);
        }
    }
    let total = oracle_start.elapsed().as_secs_f64();
    let pass = worst <= 1e-12 && worst_independent <= 1e-12 && library_time < 1.0;
    verdict(
        1,
        "exact Green identity",
        pass,
        &format!(
            "max relative residual {worst:.2e} (raw-entry recomputation {worst_independent:.2e}) over 400 pairs, N=64..512, tol 1e-12; {library_time:.3}s (< 1s), {total:.2}s with cross-check"
        ),
    );
    assert!(pass);
}

/// `f(T − x)(1, i)` sampled directly from the bump formula.
fn characteristic_solution(sys: &DiscreteGreenSystem, horizon: f64, start: f64, end: f64) -> CVector {
    sys.sample(|x| {
        let s = horizon - x;
        let v = if s > start && s < end {
            (std::f64::consts::PI * (s - start) / (end - start)).sin().powi(2)
        } else {
            0.0
        };
        [C64::new(v, 0.0), I * v]
    })
}

#[test]
fn criterion_2_closed_form_reproduction() {
    let start = Instant::now();
    let (horizon, length, a, b) = (1.0, 2.0, 0.2, 0.6);
    let f = ControlSignal::bump(BumpShape::SinSquared, a, b, C64::new(1.0, 0.0)).unwrap();
    let sizes = [64, 128, 256];
    let mut lift_errors = Vec::new();
    let mut direct_errors = Vec::new();
    for n in sizes {
        let s = setup(n, length);
        let exact = characteristic_solution(&s.sys, horizon, a, b);
        let w = s.sys.grid().weights();
        let scale = w_norm(&exact, w);
        let lift = s.lift().terminal_state(&f, horizon).unwrap().state;
        let direct = s.direct().terminal_state(&f, horizon).unwrap().state;
        lift_errors.push(w_norm(&(lift - &exact), w) / scale);
        direct_errors.push(w_norm(&(direct - &exact), w) / scale);
    }
    let (lift_order, direct_order) = (fitted_order(&sizes, &lift_errors), fitted_order(&sizes, &direct_errors));
    let elapsed = start.elapsed().as_secs_f64();
    let error_ok = lift_errors[2] <= 5e-3 && direct_errors[2] <= 5e-3;
    let order_ok = (lift_order - 2.0).abs() <= 0.3 && (direct_order - 2.0).abs() <= 0.3;
    let pass = error_ok && order_ok && elapsed < 60.0;
    verdict(
        2,
        "closed-form reproduction",
        pass,
        &format!(
            "N=256 relative error lift {:.2e}, direct {:.2e} (tol 5e-3); order lift {lift_order:.2}, direct {direct_order:.2} (2.0 +- 0.3); {elapsed:.1}s (< 60s)",
            lift_errors[2], direct_errors[2]
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_duality_identities() {
    let start = Instant::now();
    let (horizon, t_neg) = (1.0, -0.3);
    let f = ControlSignal::bump(BumpShape::SinQuartic, 0.2, 0.6, C64::new(1.0, 0.0)).unwrap();
    let sizes = [64, 128, 256];
    let mut residuals = [Vec::new(), Vec::new(), Vec::new()];
    for n in sizes {
        let s = setup(n, 2.0);
        let y = admissible_state(&s.sys, 6, 42);
        let solver = s.lift();
        residuals[0].push(check_auxiliary(&solver, &f, &y, horizon).unwrap().scaled_residual);
        residuals[1].push(check_aux1(&solver, &f, &y, horizon).unwrap().scaled_residual);
        residuals[2].push(check_aux2(&solver, &f, &y, t_neg, horizon).unwrap().scaled_residual);
    }
    let orders: Vec<f64> = residuals.iter().map(|r| fitted_order(&sizes, r)).collect();
    let elapsed = start.elapsed().as_secs_f64();
    let at_256_ok = residuals.iter().all(|r| r[2] <= 1e-3);
    let orders_ok = orders.iter().all(|o| (o - 2.0).abs() <= 0.5);
    let pass = at_256_ok && orders_ok && elapsed < 120.0;
    verdict(
        3,
        "duality identities",
        pass,
        &format!(
            "scaled residuals at N=256: auxiliary {:.2e}, first {:.2e}, second {:.2e} (tol 1e-3); orders {:.2}, {:.2}, {:.2} (about 2); {elapsed:.1}s (< 120s)",
            residuals[0][2], residuals[1][2], residuals[2][2], orders[0], orders[1], orders[2]
        ),
    );
    assert!(pass);
}

/// Relative W-norm of the component along `p` (unnormalized `(1, ±i)`).
fn polarization_fraction(u: &CVector, w: &[f64], p: [C64; 2]) -> f64 {
    let n = w.len();
    let part: f64 = (0..n)
        .map(|j| {
            let c = (u[j] * p[0].conj() + u[n + j] * p[1].conj()) / 2.0;
            w[j] * 2.0 * c.norm_sqr()
        })
        .sum();
    part.sqrt() / w_norm(u, w)
}

fn tail_beyond(u: &CVector, sys: &DiscreteGreenSystem, x0: f64) -> f64 {
    let w = sys.grid().weights();
    let n = w.len();
    let tail: f64 = (0..n)
        .filter(|&j| sys.grid().x(j) > x0 + 1e-12)
        .map(|j| w[j] * (u[j].norm_sqr() + u[n + j].norm_sqr()))
        .sum();
    tail.sqrt() / w_norm(u, w)
}

#[test]
fn criterion_4_reachable_set_structure() {
    let start = Instant::now();
    let horizon = 1.0;
    let s = setup(256, 2.0);
    let family = BumpFamily::spread(20, horizon, BumpShape::SinQuartic).unwrap();
    let solver = s.lift();
    let forward = snapshot_reachable(&solver, &family, horizon, 1e-8, None).unwrap();
    let backward = backward_reachable(&solver, &family, -horizon, 1e-8).unwrap();
    let w = s.sys.grid().weights();
    let left = [C64::new(1.0, 0.0), -I];
    let right = [C64::new(1.0, 0.0), I];

    let mut fwd_pol: f64 = 0.0;
    let mut fwd_tail: f64 = 0.0;
    let mut bwd_pol: f64 = 0.0;
    let mut bwd_tail: f64 = 0.0;
    for f in family.controls(Direction::Forward) {
        let u = solver.terminal_state(&f, horizon).unwrap().state;
        fwd_pol = fwd_pol.max(polarization_fraction(&u, w, left));
        fwd_tail = fwd_tail.max(tail_beyond(&u, &s.sys, horizon));
    }
    for f in family.controls(Direction::Backward) {
        let u = solver.terminal_state(&f, -horizon).unwrap().state;
        bwd_pol = bwd_pol.max(polarization_fraction(&u, w, right));
        bwd_tail = bwd_tail.max(tail_beyond(&u, &s.sys, horizon));
    }
    let angle = forward.smallest_angle_deg(&backward, &s.sys).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    // the library report must agree with the independent recomputation
    let agrees = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.max(1e-12);
    let consistent = agrees(forward.polarization_residual, fwd_pol) && agrees(backward.polarization_residual, bwd_pol);
    let pass = fwd_pol <= 1e-3 && fwd_tail <= 1e-6 && bwd_pol <= 1e-3 && bwd_tail <= 1e-6 && angle >= 80.0 && consistent && elapsed < 120.0;
    verdict(
        4,
        "reachable-set structure",
        pass,
        &format!(
            "20 snapshots at N=256: forward (1,-i)-content {fwd_pol:.2e} (tol 1e-3), tail beyond T {fwd_tail:.2e} (tol 1e-6); backward (1,i)-content {bwd_pol:.2e} (tol 1e-3), tail {bwd_tail:.2e}; smallest forward/backward angle {angle:.1} deg (>= 80); report consistent {consistent}; {elapsed:.1}s (< 120s)"
        ),
    );
    assert!(pass);
}

/// Dimension of the initial data in `allowed` whose solutions of
/// `z' = −J(μ − V) z` decay as `x → ∞`.
///
/// The decaying subspace is found by shooting: integrated towards `−∞` those
/// solutions grow fastest, so RK4 from a generic vector, renormalized every
/// unit of length, aligns with them. The count is `dim(allowed ∩ decaying)`.
fn shooting_count(mu: C64, v: Matrix2<C64>, allowed: &[Vector2<C64>]) -> usize {
    if allowed.is_empty() {
        return 0;
    }
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let j = Matrix2::new(zero, one, -one, zero);
    let m = -(j * (Matrix2::identity() * mu - v));
    let h = -1e-3;
    let mut z = Vector2::new(C64::new(0.3, 0.7), C64::new(-0.9, 0.2));
    for _ in 0..40 {
        for _ in 0..1000 {
            let k1 = m * z;
            let k2 = m * (z + k1 * C64::from(h / 2.0));
            let k3 = m * (z + k2 * C64::from(h / 2.0));
            let k4 = m * (z + k3 * C64::from(h));
            z += (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(h / 6.0);
        }
        z /= C64::from(z.norm());
    }
    let rank = |cols: &[Vector2<C64>]| {
        let mat = nalgebra::DMatrix::from_fn(2, cols.len(), |r, c| cols[c][r]);
        let sv = mat.singular_values();
        let top = sv.max();
        sv.iter().filter(|&&s| s > 1e-8 * top).count()
    };
    let mut with_decaying = allowed.to_vec();
    with_decaying.push(z);
    rank(allowed) + 1 - rank(&with_decaying)
}

#[test]
fn criterion_5_maximal_part_and_deficiency_table() {
    let start = Instant::now();
    let s = setup(256, 2.0);
    let sys = &s.sys;
    let basis = polarized_subspace(sys, Polarization::LeftMoving).unwrap();
    let x_end = sys.grid().length();
    let samples: Vec<CVector> = (1..=6)
        .map(|k| polarized_state(sys, Polarization::LeftMoving, |x| C64::from((k as f64 * std::f64::consts::PI * x / x_end).sin())))
        .map(|u| sys.restrict_to_minimal_domain(&u))
        .collect();
    let h = sys.grid().h();
    let c = classify_part(sys, &basis, &samples, Some(&OperatorSpec::dirac_left_part()), 10.0 * h * h).unwrap();
    let part_ok = c.invariant
        && c.invariance_residual <= 10.0 * h * h
        && c.indices == Some(DeficiencyIndices { n_plus: 0, n_minus: 1 })
        && c.in_class_m == Some(true);

    let zero = Matrix2::zeros();
    let one = C64::new(1.0, 0.0);
    let e1 = Vector2::new(one, C64::new(0.0, 0.0));
    let e2 = Vector2::new(C64::new(0.0, 0.0), one);
    // n₊ counts A*z = −iz, n₋ counts A*z = +iz
    let (minus_i, plus_i) = (-I, I);
    let mut rows = Vec::new();
    for (spec, expected) in [
        (OperatorSpec::dirac_minimal(), (1, 1)),
        (OperatorSpec::dirac_self_adjoint(), (0, 0)),
        (OperatorSpec::dirac_left_part(), (0, 1)),
    ] {
        let computed = deficiency_indices(&spec).unwrap();
        // initial data admitted by the adjoint domain
        let allowed: Vec<Vector2<C64>> = match (spec.polarization, spec.endpoint) {
            (Some(p), _) => vec![p],
            (None, EndpointCondition::FirstComponentZero) => vec![e2],
            (None, _) => vec![e1, e2],
        };
        let oracle = (shooting_count(minus_i, zero, &allowed), shooting_count(plus_i, zero, &allowed));
        rows.push((spec.name.clone(), computed, oracle, expected));
    }
    let table_ok = rows
        .iter()
        .all(|(_, c, o, e)| (c.n_plus, c.n_minus) == *e && *o == *e);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = part_ok && table_ok && elapsed < 10.0;
    let table: Vec<String> = rows
        .iter()
        .map(|(name, c, o, _)| format!("{name}: ({}, {}) shooting ({}, {})", c.n_plus, c.n_minus, o.0, o.1))
        .collect();
    verdict(
        5,
        "maximal part and deficiency table",
        pass,
        &format!(
            "predicted unreachable part invariant={} residual {:.2e} (<= 10h^2 = {:.2e}), indices {:?}, in class M {:?}; {}; {elapsed:.2}s (< 10s)",
            c.invariant,
            c.invariance_residual,
            10.0 * h * h,
            c.indices.map(|i| (i.n_plus, i.n_minus)),
            c.in_class_m,
            table.join("; ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_duhamel_consistency() {
    let start = Instant::now();
    let grid = Grid::new(64, 2.0).unwrap();
    let sys = build_dirac(grid.clone(), Potential::zero(&grid)).unwrap();
    let ext = extend_self_adjoint(&sys).unwrap();
    let w = sys.grid().weights().to_vec();
    // C¹ sources: smooth profile times a time factor, and a sin² ramp
    let profile = sys.project_to_constraint(&sys.sample(|x| {
        let b = (-(x - 1.0).powi(2) / 0.05).exp();
        [C64::new(b, 0.0), C64::new(0.0, -b * (x - 1.0))]
    }));
    type Source<'a> = (Box<dyn Fn(f64) -> C64 + 'a>, Box<dyn Fn(f64) -> C64 + 'a>);
    let sources: Vec<Source> = vec![
        (
            Box::new(|s: f64| C64::new((2.0 * s).sin(), (3.0 * s).cos())),
            Box::new(|s: f64| C64::new(2.0 * (2.0 * s).cos(), -3.0 * (3.0 * s).sin())),
        ),
        (
            Box::new(|s: f64| C64::from(if s < 0.5 { (std::f64::consts::PI * s).sin().powi(2) } else { 1.0 })),
            Box::new(|s: f64| C64::from(if s < 0.5 { std::f64::consts::PI * (2.0 * std::f64::consts::PI * s).sin() } else { 0.0 })),
        ),
    ];
    let mut representation: f64 = 0.0;
    for (g, gp) in &sources {
        let gs = TimeSamples::from_fn(0.0, 1.0, 8001, |s| &profile * g(s)).unwrap();
        let gps = TimeSamples::from_fn(0.0, 1.0, 8001, |s| &profile * gp(s)).unwrap();
        let w1 = duhamel(&ext, &gs, 0.0, 1.0).unwrap();
        let w2 = duhamel_regularized(&ext, &gs, &gps, 0.0, 1.0).unwrap();
        representation = representation.max(w_norm(&(&w1 - &w2), &w) / w_norm(&w1, &w));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = sys.n_points();
    let mut state = || {
        let mut y = CVector::from_fn(2 * n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        y[0] = C64::new(0.0, 0.0);
        y[n - 1] = C64::new(0.0, 0.0);
        y
    };
    let mut unitarity: f64 = 0.0;
    let mut group: f64 = 0.0;
    for k in 0..20 {
        let y = state();
        let t = -3.0 + 0.3 * k as f64;
        let v = propagate(&ext, &y, 0.0, t).unwrap();
        unitarity = unitarity.max((w_norm(&v, &w) - w_norm(&y, &w)).abs() / w_norm(&y, &w));
        let (a, b) = (0.37 * (k as f64 - 10.0) / 10.0, 1.3 - 0.11 * k as f64);
        let two = propagate(&ext, &propagate(&ext, &y, 0.0, a).unwrap(), 0.0, b).unwrap();
        let one = propagate(&ext, &y, 0.0, a + b).unwrap();
        group = group.max(w_norm(&(two - one), &w) / w_norm(&y, &w));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = representation <= 1e-6 && unitarity <= 1e-10 && group <= 1e-9 && elapsed < 30.0;
    verdict(
        6,
        "Duhamel consistency",
        pass,
        &format!(
            "two representations differ by {representation:.2e} (tol 1e-6); unitarity defect {unitarity:.2e} (tol 1e-10); group defect {group:.2e} (tol 1e-9); {elapsed:.1}s (< 30s)"
        ),
    );
    assert!(pass);
}

fn lab(args: &[&str], root: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .env("LAB_OUTPUT_ROOT", root)
        .output()
        .expect("lab binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn report_files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_7_cli_determinism_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path.to_string_lossy().into_owned()
    };
    let good = write(
        "good.toml",
        "scenario = \"duality-aux2\"\nn = 64\nmethod = \"both\"\ncontrol_shape = \"sin4\"\nseed = 11\n",
    );
    let traced = write("traced.toml", "scenario = \"oracle-agreement\"\nn = 64\ntolerance = 1.0\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let mut codes = Vec::new();
    for root in [&a, &b] {
        codes.push(lab(&["run", &good], root).0);
        codes.push(lab(&["run", &traced], root).0);
    }
    let (files_a, files_b) = (report_files(&a), report_files(&b));
    let identical = !files_a.is_empty() && files_a == files_b;
    let manifest = a.join("manifest.json").exists();
    let has_csv = files_a.iter().any(|(name, bytes)| {
        name.ends_with(".csv") && bytes.starts_with(b"t,x,re_u1,im_u1,re_u2,im_u2\n")
    });

    let tolerance_fail = write("tight.toml", "scenario = \"green-identity\"\nn = 64\npairs = 5\ntolerance = 0.0\n");
    let bad_value = write("bad.toml", "scenario = \"green-identity\"\nn = 8\n");
    let unknown = write("unknown.toml", "scenario = \"no-such-scenario\"\n");
    let c = dir.path().join("c");
    let forced = [lab(&["run", &tolerance_fail], &c).0, lab(&["run", &bad_value], &c).0, lab(&["run", &unknown], &c).0];

    let pass = codes.iter().all(|&c| c == 0) && identical && manifest && has_csv && forced == [1, 2, 2];
    verdict(
        7,
        "CLI determinism and exit codes",
        pass,
        &format!(
            "repeated runs exit {codes:?}, {} report files byte-identical: {identical}, manifest written: {manifest}, CSV header ok: {has_csv}; forced failures exit {forced:?} (expected [1, 2, 2])",
            files_a.len()
        ),
    );
    assert!(pass);
}
