//! Assembly of the Stokes operators and load vectors.

use crate::cases::ManufacturedCase;
use crate::error::{Error, Result};
use crate::fem::basis::{CrBasis, TriangleGeometry};
use crate::fem::interpolation::rt0_local_basis;
use crate::fem::{DofMap, Quadrature, SpaceKind};
use crate::mesh::{Mesh, Point};
use crate::sparse::{CsrMatrix, TripletBuffer};

/// How the velocity load is evaluated from the exact solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// `nu (grad u, grad psi) - (z_f, div psi)` elementwise. Equals `<f, psi>`
    /// for conforming test functions.
    #[default]
    Consistent,
    /// `int f . psi` with `f = -nu Lap u + grad p` at quadrature nodes.
    Pointwise,
    /// `int f . pi_RT psi`, the test function replaced by its RT0 interpolant.
    RaviartThomas,
}

/// Values and gradients of the three local scalar basis functions.
fn local_values(kind: SpaceKind, bary: [f64; 3]) -> [f64; 3] {
    match kind {
        SpaceKind::P1Vector => bary,
        _ => CrBasis::values(bary),
    }
}

fn local_gradients(kind: SpaceKind, geom: &TriangleGeometry) -> [[f64; 2]; 3] {
    match kind {
        SpaceKind::P1Vector => geom.grads,
        _ => CrBasis::from_geometry(geom).gradients(),
    }
}

fn check_velocity(dofmap: &DofMap, mesh: &Mesh) -> Result<()> {
    if !dofmap.kind().is_velocity() {
        return Err(Error::InvalidArgument(format!("{:?} is not a velocity space", dofmap.kind())));
    }
    if dofmap.num_entities() != dofmap.kind().num_entities(mesh) {
        return Err(Error::ShapeMismatch("dof map does not match the mesh".into()));
    }
    Ok(())
}

/// Vector stiffness `sum_T int grad u : grad v` over all dofs (boundary
/// included).
pub fn assemble_stiffness_full(mesh: &Mesh, dofmap: &DofMap) -> Result<CsrMatrix> {
    check_velocity(dofmap, mesh)?;
    let n = dofmap.len();
    let mut trip = TripletBuffer::with_capacity(n, n, 18 * mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let geom = TriangleGeometry::of(mesh, t)?;
        let g = local_gradients(dofmap.kind(), &geom);
        let ents = dofmap.local_entities(mesh, t);
        for i in 0..3 {
            for j in 0..3 {
                let v = geom.area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                for c in 0..2 {
                    trip.push(dofmap.dof(c, ents[i]), dofmap.dof(c, ents[j]), v);
                }
            }
        }
    }
    Ok(trip.into_csr())
}

/// `(BU)_T = int_T div u_h` over all velocity dofs.
pub fn assemble_coupling_full(mesh: &Mesh, dofmap: &DofMap) -> Result<CsrMatrix> {
    check_velocity(dofmap, mesh)?;
    let mut trip = TripletBuffer::with_capacity(mesh.num_triangles(), dofmap.len(), 6 * mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let geom = TriangleGeometry::of(mesh, t)?;
        let g = local_gradients(dofmap.kind(), &geom);
        let ents = dofmap.local_entities(mesh, t);
        for i in 0..3 {
            for c in 0..2 {
                trip.push(t, dofmap.dof(c, ents[i]), geom.area * g[i][c]);
            }
        }
    }
    Ok(trip.into_csr())
}

/// Stiffness restricted to free rows and columns.
pub fn assemble_stiffness(mesh: &Mesh, dofmap: &DofMap) -> Result<CsrMatrix> {
    let full = assemble_stiffness_full(mesh, dofmap)?;
    Ok(full.select(Some(dofmap.free_dofs()), Some(dofmap.free_dofs())))
}

/// Coupling against free velocity dofs: rows are P0 dofs.
pub fn assemble_coupling(mesh: &Mesh, dofmap: &DofMap) -> Result<CsrMatrix> {
    let full = assemble_coupling_full(mesh, dofmap)?;
    Ok(full.select(None, Some(dofmap.free_dofs())))
}

/// Diagonal of the P0 mass matrix: the triangle areas.
pub fn assemble_pressure_mass(mesh: &Mesh) -> Vec<f64> {
    (0..mesh.num_triangles()).map(|t| mesh.area(t)).collect()
}

/// `A + lambda B^T M^-1 B`.
pub fn assemble_augmented(a: &CsrMatrix, b: &CsrMatrix, mass: &[f64], lambda: f64) -> Result<CsrMatrix> {
    if a.rows() != a.cols() || b.cols() != a.rows() || b.rows() != mass.len() {
        return Err(Error::ShapeMismatch(format!(
            "A is {}x{}, B is {}x{}, M has {} entries",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            mass.len()
        )));
    }
    if lambda == 0.0 {
        return Ok(a.clone());
    }
    let inv: Vec<f64> = mass.iter().map(|m| 1.0 / m).collect();
    a.add_scaled(&b.transpose_diag_product(&inv)?, lambda)
}

/// The matrices of one velocity space on one mesh, split into free (`_f`)
/// and constrained (`_c`) velocity columns.
#[derive(Clone, Debug)]
pub struct StokesOperators {
    pub velocity: DofMap,
    pub a_ff: CsrMatrix,
    pub a_fc: CsrMatrix,
    pub a_cc: CsrMatrix,
    pub b_f: CsrMatrix,
    pub b_c: CsrMatrix,
    pub mass: Vec<f64>,
}

impl StokesOperators {
    pub fn assemble(mesh: &Mesh, velocity: DofMap) -> Result<Self> {
        let a = assemble_stiffness_full(mesh, &velocity)?;
        let b = assemble_coupling_full(mesh, &velocity)?;
        let (free, con) = (velocity.free_dofs(), velocity.constrained_dofs());
        Ok(Self {
            a_ff: a.select(Some(free), Some(free)),
            a_fc: a.select(Some(free), Some(con)),
            a_cc: a.select(Some(con), Some(con)),
            b_f: b.select(None, Some(free)),
            b_c: b.select(None, Some(con)),
            mass: assemble_pressure_mass(mesh),
            velocity,
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.velocity.kind()
    }

    pub fn num_velocity(&self) -> usize {
        self.a_ff.rows()
    }

    pub fn num_pressure(&self) -> usize {
        self.mass.len()
    }

    pub fn augmented(&self, lambda: f64) -> Result<CsrMatrix> {
        assemble_augmented(&self.a_ff, &self.b_f, &self.mass, lambda)
    }

    /// Boundary values on the constrained dofs.
    pub fn boundary_values(&self) -> Vec<f64> {
        self.velocity.constrained_values()
    }

    /// `B_c g`: the divergence of the boundary lifting per triangle.
    pub fn lifting_divergence(&self) -> Vec<f64> {
        self.b_c.mul_vec(&self.boundary_values())
    }

    /// `A_fc g`.
    pub fn lifting_stiffness(&self) -> Vec<f64> {
        self.a_fc.mul_vec(&self.boundary_values())
    }

    /// Net discrete flux of the boundary data, `1^T B_c g`.
    pub fn boundary_flux(&self) -> f64 {
        self.lifting_divergence().iter().sum()
    }
}

/// Velocity load on the free dofs of `dofmap`.
pub fn assemble_velocity_load(mesh: &Mesh, dofmap: &DofMap, case: &ManufacturedCase, mode: LoadMode) -> Result<Vec<f64>> {
    check_velocity(dofmap, mesh)?;
    let q = Quadrature::new(5)?;
    let kind = dofmap.kind();
    let exact = case.exact.as_ref();
    let mut full = vec![0.0; dofmap.len()];
    for t in 0..mesh.num_triangles() {
        let geom = TriangleGeometry::of(mesh, t)?;
        let ents = dofmap.local_entities(mesh, t);
        let mut local = [[0.0; 3]; 2];
        match mode {
            LoadMode::Consistent => {
                let g = local_gradients(kind, &geom);
                for (_, x, w) in q.on_triangle(geom.points, geom.area) {
                    let du = exact.velocity_gradient(x);
                    let z = exact.pressure_potential(x);
                    for i in 0..3 {
                        for c in 0..2 {
                            let visc = du[c][0] * g[i][0] + du[c][1] * g[i][1];
                            local[c][i] += w * (case.nu * visc - z * g[i][c]);
                        }
                    }
                }
            }
            LoadMode::Pointwise => {
                for (l, x, w) in q.on_triangle(geom.points, geom.area) {
                    let f = case.forcing(x)?;
                    let phi = local_values(kind, l);
                    for i in 0..3 {
                        for c in 0..2 {
                            local[c][i] += w * f[c] * phi[i];
                        }
                    }
                }
            }
            LoadMode::RaviartThomas => {
                // RT0 coefficients of each scalar test function on the local
                // edges, before the component's normal factor.
                let edges = mesh.triangle_edges(t);
                let mut coef = [[0.0; 3]; 3];
                for (j, &e) in edges.iter().enumerate() {
                    let mut mid = [0.5; 3];
                    mid[j] = 0.0;
                    let phi = local_values(kind, mid);
                    for i in 0..3 {
                        coef[i][j] = mesh.edge_length(e) * phi[i];
                    }
                }
                let normals = edges.map(|e| mesh.edge_normal(e));
                for (_, x, w) in q.on_triangle(geom.points, geom.area) {
                    let f = case.forcing(x)?;
                    let fb = [0, 1, 2].map(|j| {
                        let b = rt0_local_basis(mesh, t, j, x);
                        f[0] * b[0] + f[1] * b[1]
                    });
                    for i in 0..3 {
                        for c in 0..2 {
                            let s: f64 = (0..3).map(|j| coef[i][j] * normals[j][c] * fb[j]).sum();
                            local[c][i] += w * s;
                        }
                    }
                }
            }
        }
        for i in 0..3 {
            for c in 0..2 {
                full[dofmap.dof(c, ents[i])] += local[c][i];
            }
        }
    }
    Ok(dofmap.restrict(&full))
}

/// Pressure datum against P0 test functions.
#[derive(Clone, Copy)]
pub enum PressureData<'a> {
    Function(&'a dyn Fn(Point) -> f64),
    Field(&'a [f64]),
}

/// `F_{p,T} = int_T z`.
pub fn assemble_pressure_rhs(mesh: &Mesh, z: PressureData<'_>) -> Result<Vec<f64>> {
    match z {
        PressureData::Function(f) => {
            let q = Quadrature::new(5)?;
            Ok((0..mesh.num_triangles())
                .map(|t| q.on_triangle(mesh.triangle_points(t), mesh.area(t)).map(|(_, x, w)| w * f(x)).sum())
                .collect())
        }
        PressureData::Field(p) => {
            if p.len() != mesh.num_triangles() {
                return Err(Error::ShapeMismatch(format!(
                    "P0 field of length {} on {} triangles",
                    p.len(),
                    mesh.num_triangles()
                )));
            }
            Ok(p.iter().enumerate().map(|(t, v)| v * mesh.area(t)).collect())
        }
    }
}
