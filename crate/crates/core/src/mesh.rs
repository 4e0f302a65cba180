//! Triangulations of the unit square.
//!
//! Meshes are built from a uniform `n x n` grid of cells, each split along one
//! diagonal. The graded variant remaps the grid vertices toward an interior
//! point while keeping the square boundary and the connectivity.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Which diagonal splits every grid cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Diagonal {
    /// Lower-left to upper-right.
    #[default]
    Rising,
    /// Lower-right to upper-left.
    Falling,
}

/// An edge stored with its vertices in increasing index order (the global
/// orientation used for CR and RT0 signs).
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// First adjacent triangle, and the second one for interior edges.
    pub triangles: [usize; 2],
    pub interior: bool,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        !self.interior
    }

    pub fn adjacent(&self) -> &[usize] {
        if self.interior {
            &self.triangles
        } else {
            &self.triangles[..1]
        }
    }
}

/// A 2D simplicial triangulation with edge incidence and boundary flags.
#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// Local edge `i` of a triangle is the one opposite local vertex `i`.
    triangle_edges: Vec<[usize; 3]>,
    boundary_vertex: Vec<bool>,
    h: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshStatistics {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub h_max: f64,
    pub h_min: f64,
    pub min_area: f64,
}

impl Mesh {
    /// Builds a mesh from raw vertices and counterclockwise triangles.
    pub fn from_triangles(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, h: f64) -> Result<Self> {
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidArgument(format!(
                    "triangle {t} references a vertex out of range"
                )));
            }
            let area = signed_area(&vertices, tri);
            if area <= 0.0 {
                return Err(Error::DegenerateTriangle { triangle: t, area });
            }
        }

        let mut lookup: HashMap<[usize; 2], usize> = HashMap::with_capacity(triangles.len() * 3 / 2 + 8);
        let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 3 / 2 + 8);
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for (i, slot) in local.iter_mut().enumerate() {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                let key = [a.min(b), a.max(b)];
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: key,
                        triangles: [t, usize::MAX],
                        interior: false,
                    });
                    edges.len() - 1
                });
                let edge = &mut edges[e];
                if edge.triangles[0] != t {
                    if edge.interior {
                        return Err(Error::InvalidArgument(format!(
                            "edge {key:?} shared by more than two triangles"
                        )));
                    }
                    edge.triangles[1] = t;
                    edge.interior = true;
                }
                *slot = e;
            }
            triangle_edges.push(local);
        }

        let mut boundary_vertex = vec![false; vertices.len()];
        for edge in edges.iter().filter(|e| e.is_boundary()) {
            boundary_vertex[edge.vertices[0]] = true;
            boundary_vertex[edge.vertices[1]] = true;
        }

        Ok(Self {
            vertices,
            triangles,
            edges,
            triangle_edges,
            boundary_vertex,
            h,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Nominal mesh size `1/n` of the generating grid.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].vertices;
        distance(self.vertices[a], self.vertices[b])
    }

    /// Unit normal of edge `e` for the global orientation: the tangent runs
    /// from the lower to the higher vertex index and the normal is the tangent
    /// rotated clockwise.
    pub fn edge_normal(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let len = distance(pa, pb);
        let t = [(pb[0] - pa[0]) / len, (pb[1] - pa[1]) / len];
        [t[1], -t[0]]
    }

    /// `+1` if the global normal of local edge `i` of triangle `t` points out
    /// of `t`, `-1` otherwise.
    pub fn edge_sign(&self, t: usize, local: usize) -> f64 {
        let e = self.triangle_edges[t][local];
        let n = self.edge_normal(e);
        let opposite = self.vertices[self.triangles[t][local]];
        let mid = self.edge_midpoint(e);
        let out = [mid[0] - opposite[0], mid[1] - opposite[1]];
        if n[0] * out[0] + n[1] * out[1] > 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn statistics(&self) -> MeshStatistics {
        let mut h_max = 0.0f64;
        let mut h_min = f64::INFINITY;
        for e in 0..self.edges.len() {
            let l = self.edge_length(e);
            h_max = h_max.max(l);
            h_min = h_min.min(l);
        }
        let min_area = (0..self.triangles.len())
            .map(|t| self.area(t))
            .fold(f64::INFINITY, f64::min);
        MeshStatistics {
            vertices: self.vertices.len(),
            edges: self.edges.len(),
            triangles: self.triangles.len(),
            h_max,
            h_min,
            min_area,
        }
    }

    /// Writes the plain-text debug dump: a `V E T` header line, the vertex
    /// coordinates, then the triangle vertex triples.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {} {}", self.num_vertices(), self.num_edges(), self.num_triangles())?;
        for p in &self.vertices {
            writeln!(out, "{} {}", p[0], p[1])?;
        }
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

fn distance(a: Point, b: Point) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

fn signed_area(vertices: &[Point], tri: &[usize; 3]) -> f64 {
    let (a, b, c) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn grid_triangles(n: usize, diagonal: Diagonal) -> Vec<[usize; 3]> {
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut tris = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            match diagonal {
                Diagonal::Rising => {
                    tris.push([v00, v10, v11]);
                    tris.push([v00, v11, v01]);
                }
                Diagonal::Falling => {
                    tris.push([v00, v10, v01]);
                    tris.push([v10, v11, v01]);
                }
            }
        }
    }
    tris
}

fn grid_vertices(n: usize) -> Vec<Point> {
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    vertices
}

/// Uniform `n x n` grid, every cell split along the rising diagonal.
pub fn structured_unit_square(n: usize) -> Result<Mesh> {
    structured_unit_square_with(n, Diagonal::Rising)
}

pub fn structured_unit_square_with(n: usize, diagonal: Diagonal) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("mesh resolution n must be >= 1".into()));
    }
    Mesh::from_triangles(grid_vertices(n), grid_triangles(n, diagonal), 1.0 / n as f64)
}

/// Uniform grid remapped toward `center`.
///
/// A vertex at gauge distance `s` (0 at the centre, 1 on the square boundary,
/// measured along the ray from the centre) is moved along that ray to gauge
/// distance `s^grading`.
pub fn graded_unit_square(n: usize, center: Point, grading: f64) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("mesh resolution n must be >= 1".into()));
    }
    if !(center[0] > 0.0 && center[0] < 1.0 && center[1] > 0.0 && center[1] < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grading centre {center:?} must lie in the open unit square"
        )));
    }
    if !(grading >= 1.0) {
        return Err(Error::InvalidArgument(format!("grading exponent {grading} must be >= 1")));
    }
    let mut vertices = grid_vertices(n);
    if grading != 1.0 {
        for p in vertices.iter_mut() {
            let d = [p[0] - center[0], p[1] - center[1]];
            let s = gauge(d, center);
            if s > 0.0 && s < 1.0 {
                let scale = s.powf(grading - 1.0);
                *p = [center[0] + d[0] * scale, center[1] + d[1] * scale];
            }
        }
    }
    let triangles = grid_triangles(n, Diagonal::Rising);
    for (t, tri) in triangles.iter().enumerate() {
        let area = signed_area(&vertices, tri);
        if area <= 0.0 {
            return Err(Error::InvertedTriangle { triangle: t, area });
        }
    }
    Mesh::from_triangles(vertices, triangles, 1.0 / n as f64)
}

/// Gauge function of the unit square about `center`.
fn gauge(d: [f64; 2], center: Point) -> f64 {
    let axis = |di: f64, ci: f64| if di >= 0.0 { di / (1.0 - ci) } else { -di / ci };
    axis(d[0], center[0]).max(axis(d[1], center[1]))
}
