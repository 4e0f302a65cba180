//! Error metrics, a-priori bound checks and convergence studies.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::LoadMode;
use crate::cases::ManufacturedCase;
use crate::error::{Error, Result};
use crate::fem::basis::TriangleGeometry;
use crate::fem::{interpolate_cr, interpolate_p1, Quadrature, SpaceKind, VelocityField};
use crate::mesh::{graded_unit_square, structured_unit_square, Mesh};
use crate::solvers::{default_lambda, solve_cr, solve_ep_exact, CoerciveSolver, Discretization, StokesSolution};

/// `||(u, p)||_{X,nu} = (||grad u||^2 + nu^-2 ||p||^2)^{1/2}` by the degree-5
/// rule on `mesh`.
pub fn solution_norm(mesh: &Mesh, case: &ManufacturedCase) -> f64 {
    let q = Quadrature::new(5).expect("degree 5 rule");
    let (mut g2, mut p2) = (0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        for (_, x, w) in q.on_triangle(mesh.triangle_points(t), mesh.area(t)) {
            let du = case.exact.velocity_gradient(x);
            g2 += w * (du[0][0].powi(2) + du[0][1].powi(2) + du[1][0].powi(2) + du[1][1].powi(2));
            p2 += w * case.exact.pressure(x).powi(2);
        }
    }
    (g2 + p2 / (case.nu * case.nu)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    /// `||I_h u - u_h||_{L2}`, relative.
    pub velocity_l2: f64,
    /// `nu^-1 ||Pi_0 p - p_h||_{L2}`, relative.
    pub pressure_l2: f64,
    /// `||grad_h (I_cg u - u_h)||_{L2}`, relative.
    pub velocity_h1: f64,
    /// `||div_h u_h||_{L2}`, relative.
    pub divergence: f64,
}

impl ErrorReport {
    /// Divergence indicator over the gradient error.
    pub fn divergence_ratio(&self) -> f64 {
        self.divergence / self.velocity_h1
    }
}

/// Interpolant of the exact velocity in the solution's own space.
pub fn interpolate_velocity(mesh: &Mesh, kind: SpaceKind, case: &ManufacturedCase) -> Vec<f64> {
    let u = |x| case.exact.velocity(x);
    match kind {
        SpaceKind::P1Vector => interpolate_p1(mesh, u),
        _ => interpolate_cr(mesh, u),
    }
}

/// The four relative errors, each normalised by `||(u,p)||_{X,nu}`.
pub fn compute_errors(mesh: &Mesh, case: &ManufacturedCase, sol: &StokesSolution, projected_pressure: &[f64]) -> Result<ErrorReport> {
    let norm = solution_norm(mesh, case);
    let q = Quadrature::new(2)?;
    let interp = interpolate_velocity(mesh, sol.kind, case);
    let diff: Vec<f64> = interp.iter().zip(&sol.velocity).map(|(a, b)| a - b).collect();
    let diff_field = VelocityField::new(mesh, sol.kind, &diff)?;
    let uh = VelocityField::new(mesh, sol.kind, &sol.velocity)?;
    let cg = interpolate_p1(mesh, |x| case.exact.velocity(x));
    let cg_field = VelocityField::new(mesh, SpaceKind::P1Vector, &cg)?;
    let (mut l2, mut h1, mut div) = (0.0, 0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        let geom = TriangleGeometry::of(mesh, t)?;
        for (l, _, w) in q.on_triangle(geom.points, geom.area) {
            let v = diff_field.value(t, l);
            l2 += w * (v[0] * v[0] + v[1] * v[1]);
        }
        let gu = uh.gradient_with(t, &geom);
        let gi = cg_field.gradient_with(t, &geom);
        h1 += geom.area * (0..2).flat_map(|i| (0..2).map(move |k| (i, k))).map(|(i, k)| (gi[i][k] - gu[i][k]).powi(2)).sum::<f64>();
        div += geom.area * (gu[0][0] + gu[1][1]).powi(2);
    }
    let p2: f64 = (0..mesh.num_triangles())
        .map(|t| mesh.area(t) * (projected_pressure[t] - sol.pressure[t]).powi(2))
        .sum();
    Ok(ErrorReport {
        velocity_l2: l2.sqrt() / norm,
        pressure_l2: p2.sqrt() / case.nu / norm,
        velocity_h1: h1.sqrt() / norm,
        divergence: div.sqrt() / norm,
    })
}

/// `||grad_h (u - v_h)||_{L2}` against the exact velocity, degree-5 rule.
pub fn gradient_error(mesh: &Mesh, case: &ManufacturedCase, kind: SpaceKind, coeffs: &[f64]) -> Result<f64> {
    let q = Quadrature::new(5)?;
    let field = VelocityField::new(mesh, kind, coeffs)?;
    let mut s = 0.0;
    for t in 0..mesh.num_triangles() {
        let geom = TriangleGeometry::of(mesh, t)?;
        let g = field.gradient_with(t, &geom);
        for (_, x, w) in q.on_triangle(geom.points, geom.area) {
            let du = case.exact.velocity_gradient(x);
            s += w * (0..2).flat_map(|i| (0..2).map(move |k| (i, k))).map(|(i, k)| (du[i][k] - g[i][k]).powi(2)).sum::<f64>();
        }
    }
    Ok(s.sqrt())
}

fn l2_p0(mesh: &Mesh, a: &[f64], b: &[f64]) -> f64 {
    (0..mesh.num_triangles()).map(|t| mesh.area(t) * (a[t] - b[t]).powi(2)).sum::<f64>().sqrt()
}

/// Both sides of the two a-priori estimates for a coercive solve whose
/// pressure datum was `p_old` (for the exact datum, `p_old = Pi_0 z`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    /// `(||grad(u_h - u)||^2 + lambda^-1 nu^-2 ||p_h - Pi_0 z||^2)^{1/2}`.
    pub combined_lhs: f64,
    /// `sqrt(1 + 2 lambda) ||grad(u - I_cg u)|| + (sqrt(lambda) nu)^-1 ||Pi_0 z - p_old||`.
    pub combined_rhs: f64,
    /// `||p_h - Pi_0 z||`.
    pub transfer_lhs: f64,
    /// `sqrt(lambda) nu sqrt(1 + 2 lambda) ||grad(u - I_cg u)|| + ||Pi_0 z - p_old||`.
    pub transfer_rhs: f64,
}

impl BoundCheck {
    pub fn holds_with_slack(&self, slack: f64) -> bool {
        self.combined_lhs <= slack * self.combined_rhs && self.transfer_lhs <= slack * self.transfer_rhs
    }
}

pub fn check_bounds(disc: &Discretization<'_>, sol: &StokesSolution, lambda: f64) -> Result<BoundCheck> {
    let mesh = disc.mesh;
    let case = &disc.case;
    let nu = case.nu;
    let pz = disc.projected_pressure();
    let grad_h = gradient_error(mesh, case, sol.kind, &sol.velocity)?;
    let interp = interpolate_p1(mesh, |x| case.exact.velocity(x));
    let best = gradient_error(mesh, case, SpaceKind::P1Vector, &interp)?;
    let dp = l2_p0(mesh, &sol.pressure, &pz);
    let dold = l2_p0(mesh, &pz, &sol.previous_pressure);
    let sl = lambda.sqrt();
    let k = (1.0 + 2.0 * lambda).sqrt();
    Ok(BoundCheck {
        combined_lhs: (grad_h * grad_h + (dp / (sl * nu)).powi(2)).sqrt(),
        combined_rhs: k * best + dold / (sl * nu),
        transfer_lhs: dp,
        transfer_rhs: sl * nu * k * best + dold,
    })
}

/// Least-squares slope of `ln err` against `ln h`.
pub fn fit_rate(h: &[f64], err: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(err)
        .filter(|(h, e)| **h > 0.0 && **e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Crouzeix-Raviart Uzawa with the pointwise load.
    Cr,
    /// Crouzeix-Raviart Uzawa with the Raviart-Thomas load.
    CrRt,
    /// Coercive P1 solve with the exact pressure potential.
    Ep,
    /// Coercive P1 post-processing started from the CR pressure.
    Post { iterations: usize },
    /// Coercive P1 post-processing started from the CR-RT pressure.
    PostRt { iterations: usize },
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Cr => "cr".into(),
            Method::CrRt => "cr-rt".into(),
            Method::Ep => "ep".into(),
            Method::Post { iterations } => format!("post-{iterations}"),
            Method::PostRt { iterations } => format!("post-rt-{iterations}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub case: ManufacturedCase,
    pub method: Method,
    /// Defaults to `1` for unit viscosity and `10` otherwise.
    pub lambda: Option<f64>,
    pub sizes: Vec<usize>,
    /// Radial grading exponent toward the centre; `None` for uniform meshes.
    pub grading: Option<f64>,
    pub eps: f64,
}

impl StudyConfig {
    pub fn new(case: ManufacturedCase, method: Method, sizes: Vec<usize>) -> Self {
        Self {
            case,
            method,
            lambda: None,
            sizes,
            grading: None,
            eps: 1e-12,
        }
    }

    pub fn with_grading(mut self, grading: f64) -> Self {
        self.grading = Some(grading);
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn lambda(&self) -> f64 {
        match self.method {
            Method::PostRt { .. } => self.lambda.unwrap_or(1.0),
            Method::Ep => self.lambda.unwrap_or(1.0),
            _ => self.lambda.unwrap_or_else(|| default_lambda(self.case.nu)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidArgument("no mesh sizes given".into()));
        }
        if self.sizes.contains(&0) {
            return Err(Error::InvalidArgument("mesh sizes must be positive".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("mesh sizes must strictly increase (h strictly decreasing)".into()));
        }
        if !(self.case.nu > 0.0) {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {}", self.case.nu)));
        }
        if !(self.lambda() > 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {}", self.lambda())));
        }
        if let Method::Post { iterations } | Method::PostRt { iterations } = self.method {
            if iterations == 0 {
                return Err(Error::InvalidArgument("post iterations must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn mesh(&self, n: usize) -> Result<Mesh> {
        match self.grading {
            Some(g) => graded_unit_square(n, [0.5, 0.5], g),
            None => structured_unit_square(n),
        }
    }
}

/// One line of a study, with the CSV column names.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub h: f64,
    #[serde(rename = "eU0")]
    pub eu0: f64,
    #[serde(rename = "eP0")]
    pub ep0: f64,
    #[serde(rename = "eU1")]
    pub eu1: f64,
    #[serde(rename = "eUD")]
    pub eud: f64,
    pub iters: usize,
    pub seconds: f64,
}

impl StudyRow {
    pub fn new(h: f64, e: &ErrorReport, iters: usize, seconds: f64) -> Self {
        Self {
            h,
            eu0: e.velocity_l2,
            ep0: e.pressure_l2,
            eu1: e.velocity_h1,
            eud: e.divergence,
            iters,
            seconds,
        }
    }

    pub fn errors(&self) -> ErrorReport {
        ErrorReport {
            velocity_l2: self.eu0,
            pressure_l2: self.ep0,
            velocity_h1: self.eu1,
            divergence: self.eud,
        }
    }
}

/// Everything produced on one mesh of a study.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub n: usize,
    pub row: StudyRow,
    pub solution: StokesSolution,
    /// CR starting point of the post-processing methods.
    pub initial: Option<StudyRow>,
    /// Errors after the first post-processing iteration.
    pub first_iterate: Option<StudyRow>,
    /// A-priori bound sides of the final coercive step.
    pub bounds: Option<BoundCheck>,
}

pub fn run_single(cfg: &StudyConfig, n: usize) -> Result<RunOutcome> {
    let mesh = cfg.mesh(n)?;
    let h = 1.0 / n as f64;
    let case = &cfg.case;
    let lambda = cfg.lambda();
    let start = Instant::now();
    let cr_mode = match cfg.method {
        Method::CrRt | Method::PostRt { .. } => LoadMode::RaviartThomas,
        _ => LoadMode::Pointwise,
    };
    match cfg.method {
        Method::Cr | Method::CrRt => {
            let disc = Discretization::with_load(&mesh, SpaceKind::CrVector, case, cr_mode)?;
            let sol = solve_cr(&disc)?;
            let e = compute_errors(&mesh, case, &sol, &disc.projected_pressure())?;
            Ok(RunOutcome {
                n,
                row: StudyRow::new(h, &e, sol.diagnostics.iterations, start.elapsed().as_secs_f64()),
                solution: sol,
                initial: None,
                first_iterate: None,
                bounds: None,
            })
        }
        Method::Ep => {
            let disc = Discretization::new(&mesh, SpaceKind::P1Vector, case)?;
            let sol = solve_ep_exact(&disc, lambda)?;
            let e = compute_errors(&mesh, case, &sol, &disc.projected_pressure())?;
            let bounds = check_bounds(&disc, &sol, lambda)?;
            Ok(RunOutcome {
                n,
                row: StudyRow::new(h, &e, sol.diagnostics.iterations, start.elapsed().as_secs_f64()),
                solution: sol,
                initial: None,
                first_iterate: None,
                bounds: Some(bounds),
            })
        }
        Method::Post { iterations } | Method::PostRt { iterations } => {
            let cr_disc = Discretization::with_load(&mesh, SpaceKind::CrVector, case, cr_mode)?;
            let cr = solve_cr(&cr_disc)?;
            let pz = cr_disc.projected_pressure();
            let cr_err = compute_errors(&mesh, case, &cr, &pz)?;
            let cr_row = StudyRow::new(h, &cr_err, cr.diagnostics.iterations, start.elapsed().as_secs_f64());
            drop(cr_disc);
            let disc = Discretization::new(&mesh, SpaceKind::P1Vector, case)?;
            let solver = CoerciveSolver::new(&disc, lambda)?;
            let sol = solver.iterate(&cr.pressure, iterations, cfg.eps)?;
            let seconds = start.elapsed().as_secs_f64();
            let e = compute_errors(&mesh, case, &sol, &pz)?;
            let first_iterate = if iterations == 1 || sol.diagnostics.iterations == 1 {
                StudyRow::new(h, &e, 1, seconds)
            } else {
                let one = solver.iterate(&cr.pressure, 1, cfg.eps)?;
                StudyRow::new(h, &compute_errors(&mesh, case, &one, &pz)?, 1, one.diagnostics.seconds)
            };
            let bounds = check_bounds(&disc, &sol, lambda)?;
            Ok(RunOutcome {
                n,
                row: StudyRow::new(h, &e, sol.diagnostics.iterations, seconds),
                solution: sol,
                initial: Some(cr_row),
                first_iterate: Some(first_iterate),
                bounds: Some(bounds),
            })
        }
    }
}

#[derive(Clone, Debug)]
pub struct StudyReport {
    pub case: String,
    pub method: String,
    pub nu: f64,
    pub lambda: f64,
    /// Sorted by decreasing `h`.
    pub rows: Vec<StudyRow>,
}

impl StudyReport {
    pub fn new(case: impl Into<String>, method: impl Into<String>, nu: f64, lambda: f64, mut rows: Vec<StudyRow>) -> Self {
        rows.sort_by(|a, b| b.h.total_cmp(&a.h));
        Self {
            case: case.into(),
            method: method.into(),
            nu,
            lambda,
            rows,
        }
    }

    fn rate_of(&self, f: impl Fn(&StudyRow) -> f64) -> f64 {
        let h: Vec<f64> = self.rows.iter().map(|r| r.h).collect();
        let e: Vec<f64> = self.rows.iter().map(f).collect();
        fit_rate(&h, &e)
    }

    /// Average velocity rate from `eU0`.
    pub fn rate_u(&self) -> f64 {
        self.rate_of(|r| r.eu0)
    }

    /// Average pressure rate from `eP0`.
    pub fn rate_p(&self) -> f64 {
        self.rate_of(|r| r.ep0)
    }

    pub fn rate_h1(&self) -> f64 {
        self.rate_of(|r| r.eu1)
    }

    /// `<case>_<method>_nu<nu>.csv`.
    pub fn file_name(&self) -> String {
        format!("{}_{}_nu{:e}.csv", self.case, self.method, self.nu)
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let tmp: PathBuf = path.with_extension("csv.partial");
        {
            let mut w = csv::Writer::from_path(&tmp)?;
            for row in &self.rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read_rows(path: &Path) -> Result<Vec<StudyRow>> {
        let mut r = csv::Reader::from_path(path)?;
        r.deserialize().map(|row| row.map_err(Error::from)).collect()
    }

    /// Fixed-width text table followed by the fitted rates.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "case {}  method {}  nu {:e}  lambda {}\n{:>9} {:>11} {:>11} {:>11} {:>11} {:>6} {:>9}\n",
            self.case, self.method, self.nu, self.lambda, "h", "eU0", "eP0", "eU1", "eUD", "iters", "seconds"
        );
        for r in &self.rows {
            s += &format!(
                "{:>9.5} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>6} {:>9.3}\n",
                r.h, r.eu0, r.ep0, r.eu1, r.eud, r.iters, r.seconds
            );
        }
        s += &format!("rates: tau_u {:.2}  tau_p {:.2}  tau_1 {:.2}\n", self.rate_u(), self.rate_p(), self.rate_h1());
        s
    }
}

/// Runs every mesh of the study.
pub fn run_study(cfg: &StudyConfig) -> Result<Vec<RunOutcome>> {
    cfg.validate()?;
    cfg.sizes.iter().map(|&n| run_single(cfg, n)).collect()
}

pub fn report_of(cfg: &StudyConfig, outcomes: &[RunOutcome]) -> StudyReport {
    StudyReport::new(
        cfg.case.name.clone(),
        cfg.method.label(),
        cfg.case.nu,
        cfg.lambda(),
        outcomes.iter().map(|o| o.row).collect(),
    )
}

pub fn convergence_study(cfg: &StudyConfig) -> Result<StudyReport> {
    Ok(report_of(cfg, &run_study(cfg)?))
}
