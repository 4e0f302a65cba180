//! Nodal interpolants, the elementwise L2 projection onto P0 and the lowest
//! order Raviart-Thomas interpolant.

use crate::error::Result;
use crate::fem::basis::TriangleGeometry;
use crate::fem::field::VelocityField;
use crate::fem::quadrature::{Quadrature, GAUSS3};
use crate::mesh::{Mesh, Point};

fn nodal<const C: usize>(nodes: impl ExactSizeIterator<Item = Point>, f: impl Fn(Point) -> [f64; C]) -> Vec<f64> {
    let n = nodes.len();
    let mut out = vec![0.0; C * n];
    for (k, x) in nodes.enumerate() {
        let v = f(x);
        for c in 0..C {
            out[c * n + k] = v[c];
        }
    }
    out
}

/// Vertex values, component-major.
pub fn interpolate_p1<const C: usize>(mesh: &Mesh, f: impl Fn(Point) -> [f64; C]) -> Vec<f64> {
    nodal(mesh.vertices().iter().copied(), f)
}

/// Edge-midpoint values, component-major.
pub fn interpolate_cr<const C: usize>(mesh: &Mesh, f: impl Fn(Point) -> [f64; C]) -> Vec<f64> {
    nodal((0..mesh.num_edges()).map(|e| mesh.edge_midpoint(e)), f)
}

/// Elementwise means of `f` by the degree-5 rule.
pub fn project_p0(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Vec<f64> {
    let q = Quadrature::new(5).expect("degree 5 rule");
    project_p0_elementwise(mesh, &q, |_, _, x| f(x))
}

/// Elementwise means of an integrand that may depend on the triangle and the
/// barycentric coordinates, which is how finite element fields are projected.
pub fn project_p0_elementwise(mesh: &Mesh, q: &Quadrature, f: impl Fn(usize, [f64; 3], Point) -> f64) -> Vec<f64> {
    (0..mesh.num_triangles())
        .map(|t| {
            let area = mesh.area(t);
            let s: f64 = q.on_triangle(mesh.triangle_points(t), area).map(|(l, x, w)| w * f(t, l, x)).sum();
            s / area
        })
        .collect()
}

/// Local RT0 basis of triangle `t` attached to local edge `local`, oriented
/// by the global edge normal: `sigma (x - x_opp) / (2|T|)`.
pub fn rt0_local_basis(mesh: &Mesh, t: usize, local: usize, x: Point) -> [f64; 2] {
    let opp = mesh.vertices()[mesh.triangles()[t][local]];
    let s = mesh.edge_sign(t, local) / (2.0 * mesh.area(t));
    [s * (x[0] - opp[0]), s * (x[1] - opp[1])]
}

/// Lowest-order Raviart-Thomas field: one normal flux per edge, measured
/// against the global edge normal.
#[derive(Clone, Debug, PartialEq)]
pub struct Rt0Field {
    pub fluxes: Vec<f64>,
}

impl Rt0Field {
    /// Edge fluxes of `f` by three-point Gauss on every edge.
    pub fn from_function(mesh: &Mesh, f: impl Fn(Point) -> [f64; 2]) -> Self {
        let fluxes = mesh
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                let a = mesh.vertices()[edge.vertices[0]];
                let b = mesh.vertices()[edge.vertices[1]];
                let n = mesh.edge_normal(e);
                let len = mesh.edge_length(e);
                GAUSS3
                    .iter()
                    .map(|&(s, w)| {
                        let v = f([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
                        w * (v[0] * n[0] + v[1] * n[1])
                    })
                    .sum::<f64>()
                    * len
            })
            .collect();
        Self { fluxes }
    }

    /// Exact interpolant of a P1 or CR field: both are affine along every edge
    /// and single-valued at edge midpoints, so the midpoint rule is exact.
    pub fn from_velocity(field: &VelocityField<'_>) -> Self {
        let mesh = field.mesh();
        let fluxes = (0..mesh.num_edges())
            .map(|e| {
                let v = field.edge_midpoint_value(e);
                let n = mesh.edge_normal(e);
                mesh.edge_length(e) * (v[0] * n[0] + v[1] * n[1])
            })
            .collect();
        Self { fluxes }
    }

    pub fn eval(&self, mesh: &Mesh, t: usize, x: Point) -> [f64; 2] {
        let mut v = [0.0; 2];
        for (local, &e) in mesh.triangle_edges(t).iter().enumerate() {
            let phi = rt0_local_basis(mesh, t, local, x);
            v[0] += self.fluxes[e] * phi[0];
            v[1] += self.fluxes[e] * phi[1];
        }
        v
    }

    /// Constant divergence on triangle `t`: net outward flux over the area.
    pub fn divergence(&self, mesh: &Mesh, t: usize) -> f64 {
        let net: f64 = mesh
            .triangle_edges(t)
            .iter()
            .enumerate()
            .map(|(local, &e)| mesh.edge_sign(t, local) * self.fluxes[e])
            .sum();
        net / mesh.area(t)
    }
}

/// Per-triangle geometry for every triangle of the mesh.
pub fn geometries(mesh: &Mesh) -> Result<Vec<TriangleGeometry>> {
    (0..mesh.num_triangles()).map(|t| TriangleGeometry::of(mesh, t)).collect()
}
