//! Dense and structural oracles for the operators and solvers.

use std::sync::Arc;

use coercive_stokes::assembly::StokesOperators;
use coercive_stokes::cases::{case_linear, case_sinusoidal, ExactSolution, ManufacturedCase};
use coercive_stokes::experiments::{compute_errors, Method, StudyConfig, run_single};
use coercive_stokes::fem::{DofMap, SpaceKind};
use coercive_stokes::linalg::{
    mass_mean, numerical_rank, pcg_observed, symmetric_eigenvalues, CholeskyFactor, DiagonalOperator,
    LinearOperator, PcgOptions, SchurOperator, ZeroMeanProjector,
};
use coercive_stokes::mesh::{structured_unit_square, structured_unit_square_with, Diagonal, Mesh, Point};
use coercive_stokes::solvers::{solve_cr, solve_ep_exact, CoerciveSolver, Discretization};
use nalgebra::{DMatrix, DVector};

fn ops(n: usize, kind: SpaceKind) -> (Mesh, StokesOperators) {
    let mesh = structured_unit_square(n).unwrap();
    let ops = StokesOperators::assemble(&mesh, DofMap::new(&mesh, kind)).unwrap();
    (mesh, ops)
}

fn probe(n: usize, seed: f64) -> Vec<f64> {
    (0..n).map(|i| ((i as f64 + 1.0) * seed).sin()).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b).max(f64::MIN_POSITIVE)
}

#[test]
fn stiffness_is_spd() {
    for kind in [SpaceKind::P1Vector, SpaceKind::CrVector] {
        let (_, ops) = ops(5, kind);
        assert!(ops.a_ff.is_symmetric(1e-12));
        let ev = symmetric_eigenvalues(&ops.a_ff.to_dense()).unwrap();
        assert!(ev[0] > 1e-8, "{kind:?} smallest eigenvalue {}", ev[0]);
    }
}

#[test]
fn augmented_stiffness_is_spd() {
    let (_, ops) = ops(5, SpaceKind::P1Vector);
    for lambda in [1.0, 10.0, 1e3] {
        let ev = symmetric_eigenvalues(&ops.augmented(lambda).unwrap().to_dense()).unwrap();
        assert!(ev[0] > 0.0);
    }
}

#[test]
fn cholesky_inverts_stiffness() {
    let (_, ops) = ops(4, SpaceKind::P1Vector);
    let chol = CholeskyFactor::new(&ops.a_ff).unwrap();
    let n = chol.dim();
    let a = ops.a_ff.to_dense();
    let mut inv = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        inv.set_column(j, &DVector::from_vec(chol.solve(&e)));
    }
    let err = (&a * &inv - DMatrix::<f64>::identity(n, n)).norm();
    assert!(err < 1e-10, "||A A^-1 - I||_F = {err:e}");

    let f = probe(n, 0.7);
    let x = chol.solve(&f);
    let r: Vec<f64> = ops.a_ff.mul_vec(&x).iter().zip(&f).map(|(a, b)| a - b).collect();
    assert!(norm(&r) < 1e-12 * norm(&f));
}

#[test]
fn cholesky_rejects_indefinite() {
    let (_, ops) = ops(3, SpaceKind::P1Vector);
    let neg = ops.a_ff.scale(-1.0);
    assert!(CholeskyFactor::new(&neg).is_err());
}

#[test]
fn schur_operator_matches_dense_complement() {
    for kind in [SpaceKind::P1Vector, SpaceKind::CrVector] {
        let (_, ops) = ops(4, kind);
        let chol = CholeskyFactor::new(&ops.a_ff).unwrap();
        let schur = SchurOperator::new(&ops.b_f, &chol).unwrap();
        let a_inv = ops.a_ff.to_dense().try_inverse().unwrap();
        let b = ops.b_f.to_dense();
        let dense = &b * a_inv * b.transpose();
        for seed in [0.3, 1.1, 2.9] {
            let x = probe(schur.dim(), seed);
            let mut y = vec![0.0; x.len()];
            schur.apply(&x, &mut y);
            let yd = &dense * DVector::from_column_slice(&x);
            assert!(rel_diff(&y, yd.as_slice()) < 1e-10);
        }
    }
}

#[test]
fn coupling_kernels() {
    // CR: ker B^T is exactly the constants.
    let (_, cr) = ops(4, SpaceKind::CrVector);
    let rank = numerical_rank(&cr.b_f.to_dense(), 1e-10).unwrap();
    assert_eq!(cr.num_pressure() - rank, 1);
    let ones = vec![1.0; cr.num_pressure()];
    assert!(norm(&cr.b_f.mul_transpose_vec(&ones)) < 1e-12);

    // P1: constants plus spurious modes; dim V_h bounds the rank.
    for n in [3, 4, 6] {
        let (_, p1) = ops(n, SpaceKind::P1Vector);
        let rank = numerical_rank(&p1.b_f.to_dense(), 1e-10).unwrap();
        let kernel = p1.num_pressure() - rank;
        assert!(kernel >= 1);
        assert!(kernel >= p1.num_pressure() - p1.num_velocity());
        println!("P1 n={n}: dim ker B^T = {kernel}, {} beyond constants", kernel - 1);
    }
}

#[test]
fn pcg_iterates_stay_zero_mean() {
    let (_, ops) = ops(6, SpaceKind::CrVector);
    let chol = CholeskyFactor::new(&ops.a_ff).unwrap();
    let schur = SchurOperator::new(&ops.b_f, &chol).unwrap();
    let precond = DiagonalOperator::inverse_of(&ops.mass);
    let projector = ZeroMeanProjector::new(&ops.mass);
    let rhs = ops.b_f.mul_vec(&probe(ops.num_velocity(), 0.37));
    let mut worst = 0.0f64;
    let opts = PcgOptions {
        tol: 1e-12,
        max_iter: 500,
        projector: Some(&projector),
    };
    let out = pcg_observed(&schur, &precond, &rhs, &opts, |_, x| {
        worst = worst.max(mass_mean(x, &ops.mass).abs());
    })
    .unwrap();
    assert!(worst < 1e-13, "iterate mean {worst:e}");
    let mut y = vec![0.0; rhs.len()];
    schur.apply(&out.solution, &mut y);
    assert!(rel_diff(&y, &rhs) < 1e-9);
    assert!(out.history.windows(2).count() + 1 == out.history.len());
}

struct Zero;

impl ExactSolution for Zero {
    fn velocity(&self, _x: Point) -> [f64; 2] {
        [0.0, 0.0]
    }
    fn velocity_gradient(&self, _x: Point) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }
    fn pressure(&self, _x: Point) -> f64 {
        0.0
    }
    fn velocity_laplacian(&self, _x: Point) -> Option<[f64; 2]> {
        Some([0.0, 0.0])
    }
    fn pressure_gradient(&self, _x: Point) -> Option<[f64; 2]> {
        Some([0.0, 0.0])
    }
    fn homogeneous_boundary(&self) -> bool {
        true
    }
}

/// `(c u, c p)` for an underlying exact solution.
struct Scaled(Arc<dyn ExactSolution>, f64);

impl ExactSolution for Scaled {
    fn velocity(&self, x: Point) -> [f64; 2] {
        self.0.velocity(x).map(|v| self.1 * v)
    }
    fn velocity_gradient(&self, x: Point) -> [[f64; 2]; 2] {
        self.0.velocity_gradient(x).map(|r| r.map(|v| self.1 * v))
    }
    fn pressure(&self, x: Point) -> f64 {
        self.1 * self.0.pressure(x)
    }
    fn velocity_laplacian(&self, x: Point) -> Option<[f64; 2]> {
        self.0.velocity_laplacian(x).map(|l| l.map(|v| self.1 * v))
    }
    fn pressure_gradient(&self, x: Point) -> Option<[f64; 2]> {
        self.0.pressure_gradient(x).map(|l| l.map(|v| self.1 * v))
    }
    fn homogeneous_boundary(&self) -> bool {
        self.0.homogeneous_boundary()
    }
}

#[test]
fn zero_data_gives_zero_solution() {
    let mesh = structured_unit_square(6).unwrap();
    let case = ManufacturedCase::new("zero", Zero, 1e-3);
    let cr = solve_cr(&Discretization::new(&mesh, SpaceKind::CrVector, &case).unwrap()).unwrap();
    assert!(norm(&cr.velocity) == 0.0 && norm(&cr.pressure) == 0.0);
    let disc = Discretization::new(&mesh, SpaceKind::P1Vector, &case).unwrap();
    let ep = solve_ep_exact(&disc, 10.0).unwrap();
    assert!(norm(&ep.velocity) == 0.0 && norm(&ep.pressure) == 0.0);
}

#[test]
fn solutions_scale_with_data() {
    let mesh = structured_unit_square(8).unwrap();
    for base in [case_linear(), case_sinusoidal().with_nu(1e-3)] {
        let scaled = ManufacturedCase::new("scaled", Scaled(base.exact.clone(), 3.5), base.nu);
        for kind in [SpaceKind::CrVector, SpaceKind::P1Vector] {
            let d0 = Discretization::new(&mesh, kind, &base).unwrap();
            let d1 = Discretization::new(&mesh, kind, &scaled).unwrap();
            let (s0, s1) = match kind {
                SpaceKind::CrVector => (solve_cr(&d0).unwrap(), solve_cr(&d1).unwrap()),
                _ => (solve_ep_exact(&d0, 10.0).unwrap(), solve_ep_exact(&d1, 10.0).unwrap()),
            };
            let u0: Vec<f64> = s0.velocity.iter().map(|v| 3.5 * v).collect();
            let p0: Vec<f64> = s0.pressure.iter().map(|v| 3.5 * v).collect();
            assert!(rel_diff(&s1.velocity, &u0) < 1e-9, "{} {kind:?}", base.name);
            assert!(rel_diff(&s1.pressure, &p0) < 1e-9, "{} {kind:?}", base.name);
        }
    }
}

#[test]
fn one_post_step_from_projected_pressure_is_exact_ep() {
    let mesh = structured_unit_square(8).unwrap();
    let case = case_sinusoidal().with_nu(1e-2);
    let disc = Discretization::new(&mesh, SpaceKind::P1Vector, &case).unwrap();
    let ep = solve_ep_exact(&disc, 10.0).unwrap();
    let solver = CoerciveSolver::new(&disc, 10.0).unwrap();
    let post = solver.iterate(&disc.projected_pressure(), 1, 1e-12).unwrap();
    assert!(rel_diff(&post.velocity, &ep.velocity) < 1e-10);
    assert!(rel_diff(&post.pressure, &ep.pressure) < 1e-10);
}

#[test]
fn post_limit_is_a_fixed_point() {
    let mesh = structured_unit_square(6).unwrap();
    let case = case_sinusoidal();
    let disc = Discretization::new(&mesh, SpaceKind::CrVector, &case).unwrap();
    let solver = CoerciveSolver::new(&disc, 10.0).unwrap();
    let lim = solver.iterate(&vec![0.0; disc.ops.num_pressure()], 500, 1e-13).unwrap();
    assert!(lim.diagnostics.iterations < 500);
    let again = solver.iterate(&lim.pressure, 1, 1e-15).unwrap();
    assert!(rel_diff(&again.pressure, &lim.pressure) < 1e-10);
    assert!(rel_diff(&again.velocity, &lim.velocity) < 1e-10);
    // The limit of the CR pair is the Uzawa solution.
    let cr = solve_cr(&disc).unwrap();
    assert!(rel_diff(&lim.velocity, &cr.velocity) < 1e-8);
    assert!(rel_diff(&lim.pressure, &cr.pressure) < 1e-8);
}

#[test]
fn diagonal_orientation_changes_errors_by_less_than_ten_percent() {
    let case = case_sinusoidal();
    for kind in [SpaceKind::CrVector, SpaceKind::P1Vector] {
        let mut reports = Vec::new();
        for diag in [Diagonal::Rising, Diagonal::Falling] {
            let mesh = structured_unit_square_with(16, diag).unwrap();
            let disc = Discretization::new(&mesh, kind, &case).unwrap();
            let sol = match kind {
                SpaceKind::CrVector => solve_cr(&disc).unwrap(),
                _ => solve_ep_exact(&disc, 1.0).unwrap(),
            };
            reports.push(compute_errors(&mesh, &case, &sol, &disc.projected_pressure()).unwrap());
        }
        let (a, b) = (&reports[0], &reports[1]);
        for (x, y) in [(a.velocity_l2, b.velocity_l2), (a.pressure_l2, b.pressure_l2), (a.velocity_h1, b.velocity_h1)] {
            assert!((x - y).abs() <= 0.1 * x.max(y), "{kind:?}: {x:e} vs {y:e}");
        }
    }
}

#[test]
fn exact_cr_for_affine_velocity_with_rt_load() {
    let cfg = StudyConfig::new(case_linear().with_nu(1e-6), Method::CrRt, vec![8]);
    let out = run_single(&cfg, 8).unwrap();
    assert!(out.row.eu0 < 1e-10);
}
