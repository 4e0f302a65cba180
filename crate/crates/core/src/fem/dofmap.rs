//! Numbering of velocity and pressure unknowns with Dirichlet constraints.
//!
//! Vector spaces use a component-major layout: the dof of component `c` on
//! entity `k` is `c * num_entities + k`.

use crate::mesh::{Mesh, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Continuous piecewise-linear vector fields, two dofs per vertex.
    P1Vector,
    /// Crouzeix-Raviart vector fields, two dofs per edge.
    CrVector,
    /// Piecewise constants, one dof per triangle.
    P0,
    /// Lowest-order Raviart-Thomas, one signed normal flux per edge.
    Rt0,
}

impl SpaceKind {
    pub fn components(self) -> usize {
        match self {
            SpaceKind::P1Vector | SpaceKind::CrVector => 2,
            SpaceKind::P0 | SpaceKind::Rt0 => 1,
        }
    }

    pub fn num_entities(self, mesh: &Mesh) -> usize {
        match self {
            SpaceKind::P1Vector => mesh.num_vertices(),
            SpaceKind::CrVector | SpaceKind::Rt0 => mesh.num_edges(),
            SpaceKind::P0 => mesh.num_triangles(),
        }
    }

    pub fn is_velocity(self) -> bool {
        matches!(self, SpaceKind::P1Vector | SpaceKind::CrVector)
    }
}

#[derive(Clone, Debug)]
pub struct DofMap {
    kind: SpaceKind,
    num_entities: usize,
    free_index: Vec<Option<usize>>,
    free: Vec<usize>,
    constrained: Vec<usize>,
    prescribed: Vec<f64>,
}

impl DofMap {
    /// Velocity spaces get every boundary dof constrained to zero; P0 and RT0
    /// carry no constraints.
    pub fn new(mesh: &Mesh, kind: SpaceKind) -> Self {
        let num_entities = kind.num_entities(mesh);
        let on_boundary: Vec<bool> = match kind {
            SpaceKind::P1Vector => (0..num_entities).map(|v| mesh.is_boundary_vertex(v)).collect(),
            SpaceKind::CrVector => mesh.edges().iter().map(|e| e.is_boundary()).collect(),
            SpaceKind::P0 | SpaceKind::Rt0 => vec![false; num_entities],
        };
        let n = num_entities * kind.components();
        let mut free_index = vec![None; n];
        let mut free = Vec::new();
        let mut constrained = Vec::new();
        for dof in 0..n {
            if on_boundary[dof % num_entities] {
                constrained.push(dof);
            } else {
                free_index[dof] = Some(free.len());
                free.push(dof);
            }
        }
        Self {
            kind,
            num_entities,
            free_index,
            free,
            constrained,
            prescribed: vec![0.0; n],
        }
    }

    /// Prescribe constrained velocity dofs by evaluating `g` at the nodes
    /// (vertices for P1, edge midpoints for CR).
    pub fn with_boundary_values(mut self, mesh: &Mesh, g: impl Fn(Point) -> [f64; 2]) -> Self {
        let nodes = self.node_positions(mesh);
        let comps = self.kind.components();
        for &dof in &self.constrained {
            let k = dof % self.num_entities;
            let c = dof / self.num_entities;
            if comps == 2 {
                self.prescribed[dof] = g(nodes[k])[c];
            }
        }
        self
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn len(&self) -> usize {
        self.free_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.free_index.is_empty()
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    pub fn dof(&self, component: usize, entity: usize) -> usize {
        component * self.num_entities + entity
    }

    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn constrained_dofs(&self) -> &[usize] {
        &self.constrained
    }

    /// Full-length vector with prescribed values on constrained dofs and zero
    /// elsewhere.
    pub fn prescribed(&self) -> &[f64] {
        &self.prescribed
    }

    pub fn is_homogeneous(&self) -> bool {
        self.constrained.iter().all(|&d| self.prescribed[d] == 0.0)
    }

    /// Prescribed values restricted to the constrained dofs, in the order of
    /// [`DofMap::constrained_dofs`].
    pub fn constrained_values(&self) -> Vec<f64> {
        self.constrained.iter().map(|&d| self.prescribed[d]).collect()
    }

    /// Full vector from free values plus the prescribed boundary values.
    pub fn expand(&self, free_values: &[f64]) -> Vec<f64> {
        assert_eq!(free_values.len(), self.free.len());
        let mut full = self.prescribed.clone();
        for (i, &dof) in self.free.iter().enumerate() {
            full[dof] = free_values[i];
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        assert_eq!(full.len(), self.len());
        self.free.iter().map(|&d| full[d]).collect()
    }

    /// Positions of the entities carrying the dofs.
    pub fn node_positions(&self, mesh: &Mesh) -> Vec<Point> {
        match self.kind {
            SpaceKind::P1Vector => mesh.vertices().to_vec(),
            SpaceKind::CrVector | SpaceKind::Rt0 => (0..mesh.num_edges()).map(|e| mesh.edge_midpoint(e)).collect(),
            SpaceKind::P0 => (0..mesh.num_triangles()).map(|t| mesh.centroid(t)).collect(),
        }
    }

    /// Entities attached to the three local basis functions of triangle `t`.
    /// For P1 these are the vertices, for CR and RT0 the edges (local edge `i`
    /// opposite vertex `i`).
    pub fn local_entities(&self, mesh: &Mesh, t: usize) -> [usize; 3] {
        match self.kind {
            SpaceKind::P1Vector => mesh.triangles()[t],
            SpaceKind::CrVector | SpaceKind::Rt0 => mesh.triangle_edges(t),
            SpaceKind::P0 => [t; 3],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_unit_square;

    #[test]
    fn free_and_constrained_partition() {
        let mesh = structured_unit_square(3).unwrap();
        for kind in [SpaceKind::P1Vector, SpaceKind::CrVector, SpaceKind::P0, SpaceKind::Rt0] {
            let map = DofMap::new(&mesh, kind);
            let mut all: Vec<usize> = map.free_dofs().iter().chain(map.constrained_dofs()).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..map.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn counts() {
        let mesh = structured_unit_square(2).unwrap();
        let p1 = DofMap::new(&mesh, SpaceKind::P1Vector);
        assert_eq!(p1.len(), 18);
        assert_eq!(p1.num_free(), 2);
        let cr = DofMap::new(&mesh, SpaceKind::CrVector);
        assert_eq!(cr.len(), 2 * 16);
        assert_eq!(cr.num_free(), 2 * 8);
        assert_eq!(DofMap::new(&mesh, SpaceKind::P0).len(), 8);
        assert_eq!(DofMap::new(&mesh, SpaceKind::Rt0).num_free(), 16);
    }

    #[test]
    fn boundary_values_and_expand() {
        let mesh = structured_unit_square(2).unwrap();
        let map = DofMap::new(&mesh, SpaceKind::P1Vector).with_boundary_values(&mesh, |x| [x[0], -x[1]]);
        assert!(!map.is_homogeneous());
        let full = map.expand(&[7.0, 8.0]);
        // Centre vertex is index 4.
        assert_eq!(full[4], 7.0);
        assert_eq!(full[9 + 4], 8.0);
        assert_eq!(full[2], 1.0);
        assert_eq!(full[9 + 6], -1.0);
        assert_eq!(map.restrict(&full), vec![7.0, 8.0]);
    }
}
