//! Symmetric quadrature rules on the reference triangle.

use crate::error::{Error, Result};
use crate::mesh::Point;

/// Barycentric points and weights on the reference triangle; the weights sum
/// to its area 1/2.
#[derive(Clone, Debug)]
pub struct Quadrature {
    degree: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl Quadrature {
    /// A positive-weight rule exact for polynomials of total degree `degree`.
    pub fn new(degree: usize) -> Result<Self> {
        let (points, weights) = match degree {
            1 => (vec![[1.0 / 3.0; 3]], vec![0.5]),
            2 => {
                let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
                (vec![[a, b, b], [b, a, b], [b, b, a]], vec![1.0 / 6.0; 3])
            }
            // Dunavant 6-point rule; exact to degree 4.
            3 | 4 => {
                let mut pts = Vec::with_capacity(6);
                let mut w = Vec::with_capacity(6);
                orbit(&mut pts, &mut w, 0.445_948_490_915_965, 0.223_381_589_678_011);
                orbit(&mut pts, &mut w, 0.091_576_213_509_771, 0.109_951_743_655_322);
                (pts, w)
            }
            // Radon 7-point rule; exact to degree 5.
            5 => {
                let s15 = 15f64.sqrt();
                let mut pts = vec![[1.0 / 3.0; 3]];
                let mut w = vec![9.0 / 40.0];
                orbit(&mut pts, &mut w, (6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
                orbit(&mut pts, &mut w, (6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
                (pts, w)
            }
            d => return Err(Error::UnsupportedQuadrature(d)),
        };
        // Tabulated weights are normalized to unit area.
        let scale = if degree <= 2 { 1.0 } else { 0.5 };
        Ok(Self {
            degree,
            points,
            weights: weights.into_iter().map(|w| w * scale).collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Quadrature nodes mapped onto a physical triangle: `(bary, x, weight)`
    /// with the weights summing to the triangle's area.
    pub fn on_triangle(&self, tri: [Point; 3], area: f64) -> impl Iterator<Item = ([f64; 3], Point, f64)> + '_ {
        self.points.iter().zip(&self.weights).map(move |(l, &w)| {
            let x = [
                l[0] * tri[0][0] + l[1] * tri[1][0] + l[2] * tri[2][0],
                l[0] * tri[0][1] + l[1] * tri[1][1] + l[2] * tri[2][1],
            ];
            (*l, x, 2.0 * area * w)
        })
    }
}

fn orbit(points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, a: f64, w: f64) {
    let b = 1.0 - 2.0 * a;
    points.extend([[a, a, b], [a, b, a], [b, a, a]]);
    weights.extend([w; 3]);
}

/// Three-point Gauss-Legendre rule on [0, 1].
pub(crate) const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];
