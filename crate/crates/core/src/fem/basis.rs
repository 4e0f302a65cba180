//! Lowest-order bases on a single triangle.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

pub type Gradient = [f64; 2];

/// Geometry of one triangle together with its barycentric gradients.
#[derive(Clone, Copy, Debug)]
pub struct TriangleGeometry {
    pub points: [Point; 3],
    pub area: f64,
    pub grads: [Gradient; 3],
}

impl TriangleGeometry {
    pub fn new(points: [Point; 3]) -> Result<Self> {
        let [a, b, c] = points;
        let twice_area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        if !(twice_area.abs() > f64::EPSILON * 1e-3) {
            return Err(Error::DegenerateTriangle {
                triangle: usize::MAX,
                area: 0.5 * twice_area,
            });
        }
        let inv = 1.0 / twice_area;
        let grads = [
            [(b[1] - c[1]) * inv, (c[0] - b[0]) * inv],
            [(c[1] - a[1]) * inv, (a[0] - c[0]) * inv],
            [(a[1] - b[1]) * inv, (b[0] - a[0]) * inv],
        ];
        Ok(Self {
            points,
            area: 0.5 * twice_area.abs(),
            grads,
        })
    }

    pub fn of(mesh: &Mesh, t: usize) -> Result<Self> {
        Self::new(mesh.triangle_points(t)).map_err(|e| match e {
            Error::DegenerateTriangle { area, .. } => Error::DegenerateTriangle { triangle: t, area },
            other => other,
        })
    }

    pub fn point(&self, bary: [f64; 3]) -> Point {
        let [a, b, c] = self.points;
        [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        ]
    }
}

/// Gradients of the three barycentric coordinates (the P1 shape functions).
pub fn p1_gradients(points: [Point; 3]) -> Result<[Gradient; 3]> {
    TriangleGeometry::new(points).map(|g| g.grads)
}

/// Crouzeix-Raviart basis `phi_i = 1 - 2 lambda_i`, attached to the edge
/// opposite local vertex `i`.
#[derive(Clone, Copy, Debug)]
pub struct CrBasis {
    grads: [Gradient; 3],
}

impl CrBasis {
    pub fn new(points: [Point; 3]) -> Result<Self> {
        Ok(Self::from_geometry(&TriangleGeometry::new(points)?))
    }

    pub fn from_geometry(geom: &TriangleGeometry) -> Self {
        let g = geom.grads;
        Self {
            grads: [
                [-2.0 * g[0][0], -2.0 * g[0][1]],
                [-2.0 * g[1][0], -2.0 * g[1][1]],
                [-2.0 * g[2][0], -2.0 * g[2][1]],
            ],
        }
    }

    pub fn values(bary: [f64; 3]) -> [f64; 3] {
        [1.0 - 2.0 * bary[0], 1.0 - 2.0 * bary[1], 1.0 - 2.0 * bary[2]]
    }

    pub fn gradients(&self) -> [Gradient; 3] {
        self.grads
    }
}
