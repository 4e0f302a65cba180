use crate::error::{Error, Result};
use crate::fem::basis::{CrBasis, TriangleGeometry};
use crate::fem::dofmap::SpaceKind;
use crate::mesh::Mesh;

/// A P1 or CR vector field given by its full (boundary-included) coefficient
/// vector in component-major layout.
#[derive(Clone, Copy, Debug)]
pub struct VelocityField<'a> {
    mesh: &'a Mesh,
    kind: SpaceKind,
    coeffs: &'a [f64],
}

impl<'a> VelocityField<'a> {
    pub fn new(mesh: &'a Mesh, kind: SpaceKind, coeffs: &'a [f64]) -> Result<Self> {
        if !kind.is_velocity() {
            return Err(Error::InvalidArgument(format!("{kind:?} is not a velocity space")));
        }
        let expected = 2 * kind.num_entities(mesh);
        if coeffs.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "velocity coefficients have length {}, expected {expected}",
                coeffs.len()
            )));
        }
        Ok(Self { mesh, kind, coeffs })
    }

    pub fn mesh(&self) -> &'a Mesh {
        self.mesh
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn coefficients(&self) -> &'a [f64] {
        self.coeffs
    }

    fn local(&self, t: usize) -> [[f64; 3]; 2] {
        let ents = match self.kind {
            SpaceKind::P1Vector => self.mesh.triangles()[t],
            _ => self.mesh.triangle_edges(t),
        };
        let n = self.coeffs.len() / 2;
        [ents.map(|k| self.coeffs[k]), ents.map(|k| self.coeffs[n + k])]
    }

    pub fn value(&self, t: usize, bary: [f64; 3]) -> [f64; 2] {
        let c = self.local(t);
        let phi = match self.kind {
            SpaceKind::P1Vector => bary,
            _ => CrBasis::values(bary),
        };
        let dot = |v: [f64; 3]| v[0] * phi[0] + v[1] * phi[1] + v[2] * phi[2];
        [dot(c[0]), dot(c[1])]
    }

    /// Jacobian on triangle `t`, row `i` is the gradient of component `i`.
    pub fn gradient_with(&self, t: usize, geom: &TriangleGeometry) -> [[f64; 2]; 2] {
        let c = self.local(t);
        let scale = if self.kind == SpaceKind::P1Vector { 1.0 } else { -2.0 };
        let g = geom.grads;
        let row = |v: [f64; 3]| {
            [
                scale * (v[0] * g[0][0] + v[1] * g[1][0] + v[2] * g[2][0]),
                scale * (v[0] * g[0][1] + v[1] * g[1][1] + v[2] * g[2][1]),
            ]
        };
        [row(c[0]), row(c[1])]
    }

    pub fn gradient(&self, t: usize) -> Result<[[f64; 2]; 2]> {
        Ok(self.gradient_with(t, &TriangleGeometry::of(self.mesh, t)?))
    }

    pub fn divergence(&self, t: usize) -> Result<f64> {
        let g = self.gradient(t)?;
        Ok(g[0][0] + g[1][1])
    }

    /// Value at the midpoint of edge `e`, taken from its first adjacent
    /// triangle. Both P1 and CR fields are single-valued there.
    pub fn edge_midpoint_value(&self, e: usize) -> [f64; 2] {
        let t = self.mesh.edges()[e].triangles[0];
        let local = self.mesh.triangle_edges(t).iter().position(|&x| x == e).expect("edge incidence");
        let mut bary = [0.5; 3];
        bary[local] = 0.0;
        self.value(t, bary)
    }
}
