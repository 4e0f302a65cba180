//! Manufactured solutions. The body force is implied by
//! `f = -nu Lap u + grad p` and the pressure potential equals the pressure.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Point;

pub type Jacobian = [[f64; 2]; 2];

/// Closed-form exact solution of a Stokes problem on the unit square.
pub trait ExactSolution: Send + Sync {
    fn velocity(&self, x: Point) -> [f64; 2];

    /// Row `i` is the gradient of component `i`.
    fn velocity_gradient(&self, x: Point) -> Jacobian;

    /// Zero-mean exact pressure.
    fn pressure(&self, x: Point) -> f64;

    fn pressure_potential(&self, x: Point) -> f64 {
        self.pressure(x)
    }

    fn velocity_laplacian(&self, _x: Point) -> Option<[f64; 2]> {
        None
    }

    fn pressure_gradient(&self, _x: Point) -> Option<[f64; 2]> {
        None
    }

    /// Whether the velocity vanishes on the boundary.
    fn homogeneous_boundary(&self) -> bool;
}

#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub exact: Arc<dyn ExactSolution>,
    pub nu: f64,
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("nu", &self.nu)
            .finish_non_exhaustive()
    }
}

impl ManufacturedCase {
    pub fn new(name: impl Into<String>, exact: impl ExactSolution + 'static, nu: f64) -> Self {
        Self {
            name: name.into(),
            exact: Arc::new(exact),
            nu,
        }
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    /// `f = -nu Lap u + grad p`.
    pub fn forcing(&self, x: Point) -> Result<[f64; 2]> {
        let lap = self.exact.velocity_laplacian(x).ok_or_else(|| self.missing("a velocity Laplacian"))?;
        let gp = self.exact.pressure_gradient(x).ok_or_else(|| self.missing("a pressure gradient"))?;
        Ok([-self.nu * lap[0] + gp[0], -self.nu * lap[1] + gp[1]])
    }

    fn missing(&self, what: &'static str) -> Error {
        Error::MissingCallable {
            case: self.name.clone(),
            what,
        }
    }
}

/// Rigid rotation `u = (-y, x)` with `p = x^3 + y^3 - 1/2`, so `f = grad p`.
#[derive(Clone, Copy, Debug, Default)]
pub struct LinearVelocity;

impl ExactSolution for LinearVelocity {
    fn velocity(&self, x: Point) -> [f64; 2] {
        [-x[1], x[0]]
    }

    fn velocity_gradient(&self, _x: Point) -> Jacobian {
        [[0.0, -1.0], [1.0, 0.0]]
    }

    fn pressure(&self, x: Point) -> f64 {
        x[0].powi(3) + x[1].powi(3) - 0.5
    }

    fn velocity_laplacian(&self, _x: Point) -> Option<[f64; 2]> {
        Some([0.0, 0.0])
    }

    fn pressure_gradient(&self, x: Point) -> Option<[f64; 2]> {
        Some([3.0 * x[0] * x[0], 3.0 * x[1] * x[1]])
    }

    fn homogeneous_boundary(&self) -> bool {
        false
    }
}

/// `u = ((1 - cos 2pi x) sin 2pi y, -(1 - cos 2pi y) sin 2pi x)`,
/// `p = sin 2pi x sin 2pi y`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sinusoidal;

impl ExactSolution for Sinusoidal {
    fn velocity(&self, x: Point) -> [f64; 2] {
        let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
        let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
        [(1.0 - cx) * sy, -(1.0 - cy) * sx]
    }

    fn velocity_gradient(&self, x: Point) -> Jacobian {
        let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
        let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
        let k = 2.0 * PI;
        [[k * sx * sy, k * (1.0 - cx) * cy], [k * (cy - 1.0) * cx, -k * sy * sx]]
    }

    fn pressure(&self, x: Point) -> f64 {
        (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin()
    }

    fn velocity_laplacian(&self, x: Point) -> Option<[f64; 2]> {
        let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
        let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
        let k2 = 4.0 * PI * PI;
        Some([k2 * sy * (2.0 * cx - 1.0), -k2 * sx * (2.0 * cy - 1.0)])
    }

    fn pressure_gradient(&self, x: Point) -> Option<[f64; 2]> {
        let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
        let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
        Some([2.0 * PI * cx * sy, 2.0 * PI * sx * cy])
    }

    fn homogeneous_boundary(&self) -> bool {
        true
    }
}

/// `u = rho^alpha e_theta`, `p = rho - mean(rho)` in polar coordinates about
/// `center`.
#[derive(Clone, Copy, Debug)]
pub struct LowRegularity {
    pub alpha: f64,
    pub center: Point,
}

impl Default for LowRegularity {
    fn default() -> Self {
        Self {
            alpha: 0.45,
            center: [0.5, 0.5],
        }
    }
}

/// Mean of the distance to the centre over the unit square.
pub const MEAN_RHO_CENTERED: f64 = 0.382_597_858_232_106_2;

impl LowRegularity {
    fn offset(&self, x: Point) -> (f64, f64, f64) {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        (dx, dy, dx.hypot(dy))
    }

    fn mean_rho(&self) -> f64 {
        if self.center == [0.5, 0.5] {
            MEAN_RHO_CENTERED
        } else {
            mean_distance(self.center)
        }
    }
}

/// Mean of `|x - c|` over the unit square, assembled from the closed form for
/// a rectangle with a corner at the origin.
pub fn mean_distance(c: Point) -> f64 {
    // Integral of sqrt(x^2 + y^2) over [0,a]x[0,b].
    fn corner(a: f64, b: f64) -> f64 {
        if a <= 0.0 || b <= 0.0 {
            return 0.0;
        }
        let r = a.hypot(b);
        (2.0 * a * b * r + a.powi(3) * (b / a).asinh() + b.powi(3) * (a / b).asinh()) / 6.0
    }
    let (x0, x1) = (c[0], 1.0 - c[0]);
    let (y0, y1) = (c[1], 1.0 - c[1]);
    corner(x0, y0) + corner(x1, y0) + corner(x0, y1) + corner(x1, y1)
}

impl ExactSolution for LowRegularity {
    fn velocity(&self, x: Point) -> [f64; 2] {
        let (dx, dy, r) = self.offset(x);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let s = r.powf(self.alpha - 1.0);
        [-s * dy, s * dx]
    }

    fn velocity_gradient(&self, x: Point) -> Jacobian {
        let (dx, dy, r) = self.offset(x);
        if r == 0.0 {
            return [[0.0; 2]; 2];
        }
        let a = self.alpha;
        let s1 = r.powf(a - 1.0);
        let s3 = (a - 1.0) * r.powf(a - 3.0);
        [[-s3 * dx * dy, -s3 * dy * dy - s1], [s3 * dx * dx + s1, s3 * dx * dy]]
    }

    fn pressure(&self, x: Point) -> f64 {
        self.offset(x).2 - self.mean_rho()
    }

    fn velocity_laplacian(&self, x: Point) -> Option<[f64; 2]> {
        let (dx, dy, r) = self.offset(x);
        if r == 0.0 {
            return Some([0.0, 0.0]);
        }
        let s = (self.alpha * self.alpha - 1.0) * r.powf(self.alpha - 3.0);
        Some([-s * dy, s * dx])
    }

    fn pressure_gradient(&self, x: Point) -> Option<[f64; 2]> {
        let (dx, dy, r) = self.offset(x);
        if r == 0.0 {
            return Some([0.0, 0.0]);
        }
        Some([dx / r, dy / r])
    }

    fn homogeneous_boundary(&self) -> bool {
        false
    }
}

pub fn case_linear() -> ManufacturedCase {
    ManufacturedCase::new("linear", LinearVelocity, 1.0)
}

pub fn case_sinusoidal() -> ManufacturedCase {
    ManufacturedCase::new("sinus", Sinusoidal, 1.0)
}

pub fn case_low_regularity() -> ManufacturedCase {
    ManufacturedCase::new("lowreg", LowRegularity::default(), 1.0)
}

/// Look a case up by its command-line name.
pub fn case_by_name(name: &str) -> Option<ManufacturedCase> {
    match name {
        "linear" => Some(case_linear()),
        "sinus" | "sinusoidal" => Some(case_sinusoidal()),
        "lowreg" | "low-regularity" => Some(case_low_regularity()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_jacobian(e: &dyn ExactSolution, x: Point) -> Jacobian {
        let h = 1e-6;
        let mut j = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let (up, um) = (e.velocity(xp), e.velocity(xm));
            for i in 0..2 {
                j[i][k] = (up[i] - um[i]) / (2.0 * h);
            }
        }
        j
    }

    #[test]
    fn gradients_match_finite_differences() {
        let cases: [&dyn ExactSolution; 3] = [&LinearVelocity, &Sinusoidal, &LowRegularity::default()];
        for e in cases {
            for x in [[0.3, 0.7], [0.11, 0.42], [0.83, 0.2]] {
                let g = e.velocity_gradient(x);
                let fd = fd_jacobian(e, x);
                for i in 0..2 {
                    for k in 0..2 {
                        assert!((g[i][k] - fd[i][k]).abs() <= 1e-6 * (1.0 + g[i][k].abs()));
                    }
                }
                assert!((g[0][0] + g[1][1]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sinusoidal_vanishes_on_boundary() {
        for s in [0.0, 0.25, 0.6, 1.0] {
            for x in [[0.0, s], [1.0, s], [s, 0.0], [s, 1.0]] {
                let u = Sinusoidal.velocity(x);
                assert!(u[0].abs() < 1e-14 && u[1].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn low_regularity_magnitude() {
        let e = LowRegularity::default();
        let u = e.velocity([0.51, 0.5]);
        assert!((u[0].hypot(u[1]) - 10f64.powf(-0.9)).abs() < 1e-14);
    }

    #[test]
    fn mean_distance_closed_form() {
        let exact = (2f64.sqrt() + 1f64.asinh()) / 6.0;
        assert!((mean_distance([0.5, 0.5]) - exact).abs() < 1e-15);
        assert!((MEAN_RHO_CENTERED - exact).abs() < 1e-15);
    }

    #[test]
    fn missing_callables_are_reported() {
        struct Bare;
        impl ExactSolution for Bare {
            fn velocity(&self, _: Point) -> [f64; 2] {
                [0.0; 2]
            }
            fn velocity_gradient(&self, _: Point) -> Jacobian {
                [[0.0; 2]; 2]
            }
            fn pressure(&self, _: Point) -> f64 {
                0.0
            }
            fn homogeneous_boundary(&self) -> bool {
                true
            }
        }
        let case = ManufacturedCase::new("bare", Bare, 1.0);
        assert!(matches!(case.forcing([0.5, 0.5]), Err(Error::MissingCallable { .. })));
    }
}
