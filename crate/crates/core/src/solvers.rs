//! Resolution strategies: the Crouzeix-Raviart Uzawa baseline, the one-shot
//! coercive solve and its iterated post-processing.

use std::time::Instant;

use nalgebra::DMatrix;

use crate::assembly::{assemble_pressure_rhs, assemble_velocity_load, LoadMode, PressureData, StokesOperators};
use crate::cases::ManufacturedCase;
use crate::error::{Error, Result};
use crate::fem::{project_p0, DofMap, SpaceKind, VelocityField};
use crate::linalg::{
    pcg, symmetric_eigenvalues_limited, zero_mean_project, CholeskyFactor, DiagonalOperator, PcgOptions, SchurOperator,
    ZeroMeanProjector, DENSE_LIMIT,
};
use crate::mesh::Mesh;

/// Largest admissible net boundary flux of the Dirichlet data.
pub const FLUX_TOLERANCE: f64 = 1e-10;

/// Default tolerance of the Uzawa pressure solve.
pub const PCG_TOLERANCE: f64 = 1e-12;

/// `lambda = 1` for unit viscosity and `10` otherwise.
pub fn default_lambda(nu: f64) -> f64 {
    if nu == 1.0 {
        1.0
    } else {
        10.0
    }
}

/// Operators, boundary data and velocity load of one case on one mesh.
#[derive(Clone, Debug)]
pub struct Discretization<'m> {
    pub mesh: &'m Mesh,
    pub ops: StokesOperators,
    pub case: ManufacturedCase,
    pub load_mode: LoadMode,
    /// `F_u` on the free velocity dofs, before lifting.
    pub load: Vec<f64>,
}

impl<'m> Discretization<'m> {
    /// Consistent load for P1, pointwise load for CR.
    pub fn new(mesh: &'m Mesh, kind: SpaceKind, case: &ManufacturedCase) -> Result<Self> {
        let mode = match kind {
            SpaceKind::P1Vector => LoadMode::Consistent,
            _ => LoadMode::Pointwise,
        };
        Self::with_load(mesh, kind, case, mode)
    }

    pub fn with_load(mesh: &'m Mesh, kind: SpaceKind, case: &ManufacturedCase, load_mode: LoadMode) -> Result<Self> {
        if !kind.is_velocity() {
            return Err(Error::InvalidArgument(format!("{kind:?} is not a velocity space")));
        }
        if !(case.nu > 0.0) {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {}", case.nu)));
        }
        let mut dofmap = DofMap::new(mesh, kind);
        if !case.exact.homogeneous_boundary() {
            let exact = case.exact.clone();
            dofmap = dofmap.with_boundary_values(mesh, move |x| exact.velocity(x));
        }
        let ops = StokesOperators::assemble(mesh, dofmap)?;
        let flux = ops.boundary_flux();
        if flux.abs() > FLUX_TOLERANCE {
            return Err(Error::IncompatibleBoundaryData {
                flux,
                tolerance: FLUX_TOLERANCE,
            });
        }
        let load = assemble_velocity_load(mesh, &ops.velocity, case, load_mode)?;
        Ok(Self {
            mesh,
            ops,
            case: case.clone(),
            load_mode,
            load,
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.ops.kind()
    }

    pub fn nu(&self) -> f64 {
        self.case.nu
    }

    /// `F_u - nu A_fc g`.
    pub fn lifted_load(&self) -> Vec<f64> {
        let lift = self.ops.lifting_stiffness();
        self.load.iter().zip(&lift).map(|(f, l)| f - self.nu() * l).collect()
    }

    /// `(z, phi_T)` for the exact pressure potential.
    pub fn exact_pressure_data(&self) -> Result<Vec<f64>> {
        let exact = self.case.exact.clone();
        let z = move |x| exact.pressure_potential(x);
        assemble_pressure_rhs(self.mesh, PressureData::Function(&z))
    }

    /// Elementwise means of the exact pressure.
    pub fn projected_pressure(&self) -> Vec<f64> {
        let exact = self.case.exact.clone();
        project_p0(self.mesh, move |x| exact.pressure(x))
    }

    /// Full velocity vector from free values.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        self.ops.velocity.expand(free)
    }

    /// Broken energy norm `|U|_A` of the full field.
    pub fn energy_norm(&self, free: &[f64]) -> f64 {
        let g = self.ops.boundary_values();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let e = dot(free, &self.ops.a_ff.mul_vec(free))
            + 2.0 * dot(free, &self.ops.a_fc.mul_vec(&g))
            + dot(&g, &self.ops.a_cc.mul_vec(&g));
        e.max(0.0).sqrt()
    }

    /// `B U` of the full field, lifting included.
    pub fn divergence(&self, free: &[f64]) -> Vec<f64> {
        let mut bu = self.ops.b_f.mul_vec(free);
        for (a, b) in bu.iter_mut().zip(self.ops.lifting_divergence()) {
            *a += b;
        }
        bu
    }

    /// `|M^{-1/2} B U|_2`.
    pub fn divergence_norm(&self, free: &[f64]) -> f64 {
        let bu = self.divergence(free);
        bu.iter().zip(&self.ops.mass).map(|(b, m)| b * b / m).sum::<f64>().sqrt()
    }

    pub fn mass_norm(&self, p: &[f64]) -> f64 {
        p.iter().zip(&self.ops.mass).map(|(v, m)| m * v * v).sum::<f64>().sqrt()
    }

    pub fn velocity_field<'a>(&'a self, full: &'a [f64]) -> Result<VelocityField<'a>> {
        VelocityField::new(self.mesh, self.kind(), full)
    }
}

/// One outer iteration of a coercive solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    /// `|P^n - P^{n-1}|_M`.
    pub pressure_change: f64,
    /// `|U^n|_A`.
    pub velocity_energy: f64,
    /// `|M^{-1/2} B U^n|_2`.
    pub divergence: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    /// Outer iterations for the coercive solvers, PCG iterations for Uzawa.
    pub iterations: usize,
    pub records: Vec<IterationRecord>,
    pub pcg_history: Vec<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct StokesSolution {
    pub kind: SpaceKind,
    /// Free velocity values.
    pub velocity_free: Vec<f64>,
    /// Full velocity vector, boundary values included.
    pub velocity: Vec<f64>,
    /// P0 pressure with zero M-weighted mean.
    pub pressure: Vec<f64>,
    /// Pressure datum of the last step, `M^-1 F_p`.
    pub previous_pressure: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// Uzawa iteration for the Crouzeix-Raviart pair: prediction, PCG on the
/// Schur complement `B A^-1 B^T` with mass preconditioning, correction.
pub fn solve_cr(disc: &Discretization<'_>) -> Result<StokesSolution> {
    solve_uzawa(disc, PCG_TOLERANCE)
}

pub fn solve_uzawa(disc: &Discretization<'_>, tol: f64) -> Result<StokesSolution> {
    let start = Instant::now();
    let ops = &disc.ops;
    let nu = disc.nu();
    let chol = CholeskyFactor::new(&ops.a_ff)?;
    let mut u_star = chol.solve(&disc.lifted_load());
    u_star.iter_mut().for_each(|v| *v /= nu);
    let bu = ops.b_f.mul_vec(&u_star);
    let g = ops.lifting_divergence();
    let rhs: Vec<f64> = g.iter().zip(&bu).map(|(g, b)| nu * (-g - b)).collect();
    let schur = SchurOperator::new(&ops.b_f, &chol)?;
    let precond = DiagonalOperator::inverse_of(&ops.mass);
    let projector = ZeroMeanProjector::new(&ops.mass);
    let out = pcg(
        &schur,
        &precond,
        &rhs,
        &PcgOptions {
            tol,
            max_iter: 10 * ops.num_pressure().max(10),
            projector: Some(&projector),
        },
    )?;
    let pressure = zero_mean_project(&out.solution, &ops.mass);
    let mut du = chol.solve(&ops.b_f.mul_transpose_vec(&pressure));
    du.iter_mut().for_each(|v| *v /= nu);
    let velocity_free: Vec<f64> = u_star.iter().zip(&du).map(|(a, b)| a + b).collect();
    let diagnostics = Diagnostics {
        iterations: out.iterations,
        records: vec![IterationRecord {
            pressure_change: disc.mass_norm(&pressure),
            velocity_energy: disc.energy_norm(&velocity_free),
            divergence: disc.divergence_norm(&velocity_free),
        }],
        pcg_history: out.history,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok(StokesSolution {
        kind: disc.kind(),
        velocity: disc.expand(&velocity_free),
        velocity_free,
        previous_pressure: vec![0.0; ops.num_pressure()],
        pressure,
        diagnostics,
    })
}

/// Coercive solver with one Cholesky factor of `A_lambda` shared by every
/// pressure datum.
pub struct CoerciveSolver<'d, 'm> {
    disc: &'d Discretization<'m>,
    lambda: f64,
    factor: CholeskyFactor,
    lifted_load: Vec<f64>,
    lifted_div: Vec<f64>,
    pub setup_seconds: f64,
}

impl<'d, 'm> CoerciveSolver<'d, 'm> {
    pub fn new(disc: &'d Discretization<'m>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
        }
        let start = Instant::now();
        let factor = CholeskyFactor::new(&disc.ops.augmented(lambda)?)?;
        Ok(Self {
            lifted_load: disc.lifted_load(),
            lifted_div: disc.ops.lifting_divergence(),
            disc,
            lambda,
            factor,
            setup_seconds: start.elapsed().as_secs_f64(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn discretization(&self) -> &'d Discretization<'m> {
        self.disc
    }

    /// Solves `nu A_lambda U = F~ + B^T M^-1 F^_p`, then
    /// `P = M^-1 (F^_p - nu lambda B U)`, with
    /// `F^_p = F_p - nu lambda B_c g`.
    pub fn step(&self, f_p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let ops = &self.disc.ops;
        if f_p.len() != ops.num_pressure() {
            return Err(Error::ShapeMismatch(format!(
                "pressure datum of length {}, expected {}",
                f_p.len(),
                ops.num_pressure()
            )));
        }
        let nl = self.disc.nu() * self.lambda;
        let f_hat: Vec<f64> = f_p.iter().zip(&self.lifted_div).map(|(f, g)| f - nl * g).collect();
        let scaled: Vec<f64> = f_hat.iter().zip(&ops.mass).map(|(f, m)| f / m).collect();
        let mut rhs = ops.b_f.mul_transpose_vec(&scaled);
        for (r, f) in rhs.iter_mut().zip(&self.lifted_load) {
            *r += f;
        }
        self.factor.solve_in_place(&mut rhs);
        let u: Vec<f64> = rhs.iter().map(|v| v / self.disc.nu()).collect();
        let bu = ops.b_f.mul_vec(&u);
        let p: Vec<f64> = f_hat
            .iter()
            .zip(&bu)
            .zip(&ops.mass)
            .map(|((f, b), m)| (f - nl * b) / m)
            .collect();
        Ok((u, zero_mean_project(&p, &ops.mass)))
    }

    /// Single coercive solve for the datum `F_p`.
    pub fn solve_once(&self, f_p: &[f64]) -> Result<StokesSolution> {
        let start = Instant::now();
        let (u, p) = self.step(f_p)?;
        let prev: Vec<f64> = f_p.iter().zip(&self.disc.ops.mass).map(|(f, m)| f / m).collect();
        let change: Vec<f64> = p.iter().zip(&prev).map(|(a, b)| a - b).collect();
        let record = IterationRecord {
            pressure_change: self.disc.mass_norm(&change),
            velocity_energy: self.disc.energy_norm(&u),
            divergence: self.disc.divergence_norm(&u),
        };
        Ok(self.finish(u, p, prev, vec![record], start))
    }

    /// Post-processing iterations `F_p = M P^{n-1}` from `p_init`, stopped
    /// when `|dP|_M <= eps |U|_A` or after `max_outer` iterations.
    pub fn iterate(&self, p_init: &[f64], max_outer: usize, eps: f64) -> Result<StokesSolution> {
        if max_outer == 0 {
            return Err(Error::InvalidArgument("at least one outer iteration is required".into()));
        }
        let start = Instant::now();
        let mass = &self.disc.ops.mass;
        let mut prev = zero_mean_project(p_init, mass);
        let mut records = Vec::with_capacity(max_outer);
        let mut last = None;
        for _ in 0..max_outer {
            let f_p: Vec<f64> = prev.iter().zip(mass).map(|(p, m)| p * m).collect();
            let (u, p) = self.step(&f_p)?;
            let change: Vec<f64> = p.iter().zip(&prev).map(|(a, b)| a - b).collect();
            let record = IterationRecord {
                pressure_change: self.disc.mass_norm(&change),
                velocity_energy: self.disc.energy_norm(&u),
                divergence: self.disc.divergence_norm(&u),
            };
            records.push(record);
            let done = record.pressure_change <= eps * record.velocity_energy;
            let old = std::mem::replace(&mut prev, p.clone());
            last = Some((u, p, old));
            if done {
                break;
            }
        }
        let (u, p, old) = last.expect("at least one iteration");
        Ok(self.finish(u, p, old, records, start))
    }

    fn finish(&self, u: Vec<f64>, p: Vec<f64>, prev: Vec<f64>, records: Vec<IterationRecord>, start: Instant) -> StokesSolution {
        StokesSolution {
            kind: self.disc.kind(),
            velocity: self.disc.expand(&u),
            velocity_free: u,
            pressure: p,
            previous_pressure: prev,
            diagnostics: Diagnostics {
                iterations: records.len(),
                records,
                pcg_history: Vec::new(),
                seconds: start.elapsed().as_secs_f64() + self.setup_seconds,
            },
        }
    }
}

/// One coercive solve with pressure datum `z`.
pub fn solve_ep(disc: &Discretization<'_>, lambda: f64, z: PressureData<'_>) -> Result<StokesSolution> {
    let f_p = assemble_pressure_rhs(disc.mesh, z)?;
    CoerciveSolver::new(disc, lambda)?.solve_once(&f_p)
}

/// One coercive solve with the exact pressure potential as datum.
pub fn solve_ep_exact(disc: &Discretization<'_>, lambda: f64) -> Result<StokesSolution> {
    let f_p = disc.exact_pressure_data()?;
    CoerciveSolver::new(disc, lambda)?.solve_once(&f_p)
}

/// Iterated post-processing of a P0 pressure.
pub fn solve_post(disc: &Discretization<'_>, lambda: f64, p_init: &[f64], max_outer: usize, eps: f64) -> Result<StokesSolution> {
    CoerciveSolver::new(disc, lambda)?.iterate(p_init, max_outer, eps)
}

/// Which algorithm a nonhomogeneous run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Cr,
    Ep,
    Post,
}

#[derive(Clone, Copy, Debug)]
pub struct PostSettings {
    pub lambda: f64,
    pub max_outer: usize,
    pub eps: f64,
}

impl PostSettings {
    pub fn for_nu(nu: f64) -> Self {
        Self {
            lambda: default_lambda(nu),
            max_outer: 8,
            eps: 1e-12,
        }
    }
}

/// Builds the right discretization for `variant` with the boundary trace of
/// the exact velocity, and solves. Post starts from the CR pressure.
pub fn solve_nonhomogeneous(variant: Variant, mesh: &Mesh, case: &ManufacturedCase, settings: PostSettings) -> Result<StokesSolution> {
    match variant {
        Variant::Cr => solve_cr(&Discretization::new(mesh, SpaceKind::CrVector, case)?),
        Variant::Ep => solve_ep_exact(&Discretization::new(mesh, SpaceKind::P1Vector, case)?, settings.lambda),
        Variant::Post => {
            let cr = solve_cr(&Discretization::new(mesh, SpaceKind::CrVector, case)?)?;
            let disc = Discretization::new(mesh, SpaceKind::P1Vector, case)?;
            solve_post(&disc, settings.lambda, &cr.pressure, settings.max_outer, settings.eps)
        }
    }
}

/// Spectrum of the inverse iteration operator `(I + lambda S)^-1` with
/// `S = M^-1/2 B A^-1 B^T M^-1/2`, restricted to the complement of the kernel
/// of `S`.
#[derive(Clone, Debug)]
pub struct IterationSpectrum {
    pub lambda: f64,
    /// Ascending eigenvalues in `(0, 1)`.
    pub eigenvalues: Vec<f64>,
    /// Spectral radius, `0` for an empty restricted space.
    pub rho: f64,
    /// Dimension of the discarded kernel.
    pub kernel_dim: usize,
}

/// Ascending eigenvalues of `S = M^-1/2 B A^-1 B^T M^-1/2`.
pub fn schur_eigenvalues(a: &CholeskyFactor, b: &crate::sparse::CsrMatrix, mass: &[f64]) -> Result<Vec<f64>> {
    schur_eigenvalues_limited(a, b, mass, DENSE_LIMIT)
}

/// [`schur_eigenvalues`] with an explicit cap on the pressure dimension.
pub fn schur_eigenvalues_limited(a: &CholeskyFactor, b: &crate::sparse::CsrMatrix, mass: &[f64], limit: usize) -> Result<Vec<f64>> {
    let np = b.rows();
    if np > limit {
        return Err(Error::SizeLimit { size: np, limit });
    }
    let mut s = DMatrix::zeros(np, np);
    let inv_sqrt: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    for j in 0..np {
        let mut e = vec![0.0; np];
        e[j] = inv_sqrt[j];
        let mut w = b.mul_transpose_vec(&e);
        a.solve_in_place(&mut w);
        let col = b.mul_vec(&w);
        for i in 0..np {
            s[(i, j)] = inv_sqrt[i] * col[i];
        }
    }
    let sym = (&s + s.transpose()) * 0.5;
    symmetric_eigenvalues_limited(&sym, limit)
}

pub fn iteration_matrix_spectrum(a: &CholeskyFactor, b: &crate::sparse::CsrMatrix, mass: &[f64], lambda: f64) -> Result<IterationSpectrum> {
    Ok(spectrum_from_schur(&schur_eigenvalues(a, b, mass)?, lambda))
}

pub fn iteration_matrix_spectrum_limited(
    a: &CholeskyFactor,
    b: &crate::sparse::CsrMatrix,
    mass: &[f64],
    lambda: f64,
    limit: usize,
) -> Result<IterationSpectrum> {
    Ok(spectrum_from_schur(&schur_eigenvalues_limited(a, b, mass, limit)?, lambda))
}

/// Maps Schur eigenvalues `sigma > 1e-10 sigma_max` to `1 / (1 + lambda sigma)`.
pub fn spectrum_from_schur(sigma: &[f64], lambda: f64) -> IterationSpectrum {
    let smax = sigma.iter().fold(0.0f64, |a, &b| a.max(b));
    let kept: Vec<f64> = sigma.iter().copied().filter(|&s| smax > 0.0 && s > 1e-10 * smax).collect();
    let mut eigenvalues: Vec<f64> = kept.iter().map(|s| 1.0 / (1.0 + lambda * s)).collect();
    eigenvalues.sort_by(f64::total_cmp);
    IterationSpectrum {
        lambda,
        rho: eigenvalues.last().copied().unwrap_or(0.0),
        kernel_dim: sigma.len() - kept.len(),
        eigenvalues,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{case_linear, case_sinusoidal};
    use crate::mesh::structured_unit_square;

    #[test]
    fn default_lambda_rule() {
        assert_eq!(default_lambda(1.0), 1.0);
        assert_eq!(default_lambda(1e-6), 10.0);
    }

    #[test]
    fn ep_reproduces_affine_velocity() {
        let mesh = structured_unit_square(6).unwrap();
        let case = case_linear().with_nu(1e-6);
        let disc = Discretization::new(&mesh, SpaceKind::P1Vector, &case).unwrap();
        let sol = solve_ep_exact(&disc, 1.0).unwrap();
        let exact = crate::fem::interpolate_p1(&mesh, |x| [-x[1], x[0]]);
        for (a, b) in sol.velocity.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-9);
        }
        let p0 = disc.projected_pressure();
        for (a, b) in sol.pressure.iter().zip(&p0) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn post_fixed_point() {
        let mesh = structured_unit_square(4).unwrap();
        let case = case_linear();
        let disc = Discretization::new(&mesh, SpaceKind::P1Vector, &case).unwrap();
        let p0 = disc.projected_pressure();
        let sol = solve_post(&disc, 1.0, &p0, 8, 1e-12).unwrap();
        assert_eq!(sol.diagnostics.iterations, 1);
        assert!(sol.diagnostics.records[0].pressure_change < 1e-12);
    }

    #[test]
    fn cr_homogeneous_has_zero_mean_and_small_divergence() {
        let mesh = structured_unit_square(8).unwrap();
        let disc = Discretization::new(&mesh, SpaceKind::CrVector, &case_sinusoidal()).unwrap();
        let sol = solve_cr(&disc).unwrap();
        let mean: f64 = sol.pressure.iter().zip(&disc.ops.mass).map(|(p, m)| p * m).sum();
        assert!(mean.abs() < 1e-12);
        assert!(disc.divergence_norm(&sol.velocity_free) < 1e-8 * disc.energy_norm(&sol.velocity_free));
    }

    #[test]
    fn empty_spectrum_convention() {
        let s = spectrum_from_schur(&[0.0, 0.0], 1.0);
        assert_eq!(s.rho, 0.0);
        assert!(s.eigenvalues.is_empty());
        assert_eq!(s.kernel_dim, 2);
    }
}
