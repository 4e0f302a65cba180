//! Property tests over meshes, interpolation, projection and sparse algebra.

use coercive_stokes::fem::{interpolate_cr, interpolate_p1, Quadrature, Rt0Field, SpaceKind, VelocityField};
use coercive_stokes::linalg::{mass_mean, zero_mean_project, CholeskyFactor};
use coercive_stokes::mesh::{graded_unit_square, structured_unit_square_with, Diagonal, Mesh};
use coercive_stokes::sparse::CsrMatrix;
use nalgebra::DVector;
use proptest::prelude::*;

fn mesh_strategy() -> impl Strategy<Value = Mesh> {
    (1usize..10, any::<bool>(), 1.0f64..3.0, 0.2f64..0.8, 0.2f64..0.8).prop_map(|(n, falling, g, cx, cy)| {
        if g < 1.5 {
            let d = if falling { Diagonal::Falling } else { Diagonal::Rising };
            structured_unit_square_with(n, d).unwrap()
        } else {
            graded_unit_square(n, [cx, cy], g).unwrap()
        }
    })
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn mesh_topology(mesh in mesh_strategy()) {
        let (v, e, t) = (mesh.num_vertices() as i64, mesh.num_edges() as i64, mesh.num_triangles() as i64);
        prop_assert_eq!(v - e + t, 1);
        let area: f64 = (0..mesh.num_triangles()).map(|t| mesh.area(t)).sum();
        prop_assert!((area - 1.0).abs() < 1e-12);
        prop_assert!((0..mesh.num_triangles()).all(|t| mesh.area(t) > 0.0));
        let boundary = mesh.edges().iter().filter(|e| !e.interior).count() as i64;
        prop_assert_eq!(3 * t, 2 * e - boundary);
        // Interior edges are seen with opposite orientations from their two triangles.
        let mut sign_sum = vec![0.0; mesh.num_edges()];
        for t in 0..mesh.num_triangles() {
            for (local, e) in mesh.triangle_edges(t).into_iter().enumerate() {
                sign_sum[e] += mesh.edge_sign(t, local);
            }
        }
        for (edge, s) in mesh.edges().iter().zip(&sign_sum) {
            prop_assert_eq!(s.abs(), if edge.interior { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn zero_mean_projection(p in prop::collection::vec(-10.0f64..10.0, 1..40), shift in -5.0f64..5.0) {
        let mass: Vec<f64> = (0..p.len()).map(|i| 0.5 + (i as f64 * 0.37).sin().abs()).collect();
        let q = zero_mean_project(&p, &mass);
        prop_assert!(mass_mean(&q, &mass).abs() < 1e-12);
        let shifted: Vec<f64> = p.iter().map(|v| v + shift).collect();
        let q2 = zero_mean_project(&shifted, &mass);
        for (a, b) in q.iter().zip(&q2) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let q3 = zero_mean_project(&q, &mass);
        for (a, b) in q.iter().zip(&q3) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn p1_reproduces_affine_fields(mesh in mesh_strategy(), c in prop::array::uniform6(-3.0f64..3.0)) {
        let f = |x: [f64; 2]| [c[0] + c[1] * x[0] + c[2] * x[1], c[3] + c[4] * x[0] + c[5] * x[1]];
        let coeffs = interpolate_p1(&mesh, f);
        let field = VelocityField::new(&mesh, SpaceKind::P1Vector, &coeffs).unwrap();
        for t in 0..mesh.num_triangles() {
            let g = field.gradient(t).unwrap();
            prop_assert!((g[0][0] - c[1]).abs() < 1e-10 && (g[0][1] - c[2]).abs() < 1e-10);
            prop_assert!((g[1][0] - c[4]).abs() < 1e-10 && (g[1][1] - c[5]).abs() < 1e-10);
            let x = mesh.centroid(t);
            let v = field.value(t, [1.0 / 3.0; 3]);
            let e = f(x);
            prop_assert!((v[0] - e[0]).abs() < 1e-10 && (v[1] - e[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn rt0_divergence_equals_broken_divergence(mesh in mesh_strategy(), seed in 0.1f64..10.0) {
        let n = mesh.num_edges();
        let coeffs: Vec<f64> = (0..2 * n).map(|i| ((i as f64 + 1.0) * seed).sin()).collect();
        let field = VelocityField::new(&mesh, SpaceKind::CrVector, &coeffs).unwrap();
        let rt = Rt0Field::from_velocity(&field);
        for t in 0..mesh.num_triangles() {
            let d = field.divergence(t).unwrap();
            prop_assert!((rt.divergence(&mesh, t) - d).abs() < 1e-9 * (1.0 + d.abs()));
        }
    }

    #[test]
    fn cr_reproduces_affine_fields(mesh in mesh_strategy(), c in prop::array::uniform6(-3.0f64..3.0)) {
        let f = |x: [f64; 2]| [c[0] + c[1] * x[0] + c[2] * x[1], c[3] + c[4] * x[0] + c[5] * x[1]];
        let coeffs = interpolate_cr(&mesh, f);
        let field = VelocityField::new(&mesh, SpaceKind::CrVector, &coeffs).unwrap();
        for t in 0..mesh.num_triangles() {
            let d = field.divergence(t).unwrap();
            prop_assert!((d - (c[1] + c[5])).abs() < 1e-10);
        }
    }

    #[test]
    fn quadrature_integrates_barycentric_monomials(
        degree in 1usize..=5,
        pts in prop::array::uniform6(-2.0f64..2.0),
        a in 0usize..6,
        b in 0usize..6,
    ) {
        let tri = [[pts[0], pts[1]], [pts[2], pts[3]], [pts[4], pts[5]]];
        let area = 0.5 * ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1])).abs();
        prop_assume!(area > 1e-3);
        prop_assume!(a + b <= degree);
        let q = Quadrature::new(degree).unwrap();
        let approx: f64 = q
            .on_triangle(tri, area)
            .map(|(l, _, w)| w * l[0].powi(a as i32) * l[1].powi(b as i32))
            .sum();
        let exact = 2.0 * area * factorial(a) * factorial(b) / factorial(a + b + 2);
        prop_assert!((approx - exact).abs() < 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn csr_matches_dense(
        entries in prop::collection::vec((0usize..7, 0usize..5, -4.0f64..4.0), 0..40),
        x in prop::collection::vec(-2.0f64..2.0, 5),
    ) {
        let m = CsrMatrix::from_triplets(7, 5, entries.clone());
        let mut dense = nalgebra::DMatrix::<f64>::zeros(7, 5);
        for (i, j, v) in entries {
            dense[(i, j)] += v;
        }
        let y = m.mul_vec(&x);
        let yd = &dense * DVector::from_column_slice(&x);
        for (a, b) in y.iter().zip(yd.iter()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((m.to_dense() - &dense).norm() < 1e-12);
        prop_assert!((m.transpose().transpose().to_dense() - &dense).norm() < 1e-12);
    }

    #[test]
    fn cholesky_solves_diagonally_dominant_systems(
        off in prop::collection::vec((0usize..12, 0usize..12, -1.0f64..1.0), 0..30),
        rhs in prop::collection::vec(-5.0f64..5.0, 12),
    ) {
        let mut entries = Vec::new();
        let mut row_sum = [0.0f64; 12];
        for (i, j, v) in off {
            if i != j {
                entries.push((i, j, v));
                entries.push((j, i, v));
                row_sum[i] += v.abs();
                row_sum[j] += v.abs();
            }
        }
        for (i, s) in row_sum.iter().enumerate() {
            entries.push((i, i, s + 1.0));
        }
        let a = CsrMatrix::from_triplets(12, 12, entries);
        let x = CholeskyFactor::new(&a).unwrap().solve(&rhs);
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip(&rhs) {
            prop_assert!((ri - bi).abs() < 1e-10);
        }
    }
}
