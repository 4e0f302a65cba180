//! Command-line front end of `stokes-bench`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cases::{case_by_name, ManufacturedCase};
use crate::error::{Error, Result};
use crate::experiments::{report_of, run_study, Method, StudyConfig, StudyReport};
use crate::fem::{DofMap, SpaceKind};
use crate::linalg::CholeskyFactor;
use crate::mesh::{graded_unit_square, structured_unit_square};
use crate::assembly::StokesOperators;
use crate::solvers::iteration_matrix_spectrum;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "stokes-bench", about = "Convergence studies for coercive and Crouzeix-Raviart Stokes solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convergence study over a list of meshes, one CSV per run.
    Study(RunArgs),
    /// Spectral radius of the post-processing iteration on small meshes.
    Spectrum(RunArgs),
    /// CR with Raviart-Thomas loads followed by post-processing.
    CompareRt(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CaseName {
    Linear,
    Sinus,
    Lowreg,
}

impl CaseName {
    fn key(self) -> &'static str {
        match self {
            CaseName::Linear => "linear",
            CaseName::Sinus => "sinus",
            CaseName::Lowreg => "lowreg",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Cr,
    Ep,
    Post,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value = "sinus")]
    pub case: CaseName,
    #[arg(long, value_enum, default_value = "cr")]
    pub method: MethodName,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Comma-separated; defaults to 1 for nu = 1 and 10 otherwise
    /// (1 for compare-rt, 1,10 for spectrum).
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// Comma-separated mesh resolutions (cells per side).
    #[arg(long = "n", value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Defaults to 8 for study and 1 for compare-rt.
    #[arg(long)]
    pub post_iters: Option<usize>,
    #[arg(long, default_value_t = 1e-12)]
    pub eps: f64,
    /// Grading exponent toward the centre; defaults to 2 for lowreg.
    #[arg(long)]
    pub grading: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub case: ManufacturedCase,
    pub method: MethodName,
    pub lambdas: Vec<f64>,
    pub sizes: Vec<usize>,
    pub post_iters: Option<usize>,
    pub eps: f64,
    pub grading: Option<f64>,
    pub out: PathBuf,
}

impl RunArgs {
    pub fn config(&self) -> Result<RunConfig> {
        if !(self.nu > 0.0) {
            return Err(Error::InvalidArgument(format!("--nu must be positive, got {}", self.nu)));
        }
        if self.lambda.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::InvalidArgument("--lambda values must be positive".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::InvalidArgument("--n needs at least one mesh size".into()));
        }
        if self.sizes.contains(&0) {
            return Err(Error::InvalidArgument("--n values must be positive".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("--n must be strictly increasing".into()));
        }
        if self.post_iters == Some(0) {
            return Err(Error::InvalidArgument("--post-iters must be positive".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidArgument("--eps must be positive".into()));
        }
        if let Some(g) = self.grading {
            if !(g >= 1.0) {
                return Err(Error::InvalidArgument(format!("--grading must be >= 1, got {g}")));
            }
        }
        let case = case_by_name(self.case.key()).expect("known case").with_nu(self.nu);
        let grading = match (self.grading, self.case) {
            (Some(g), _) if g == 1.0 => None,
            (Some(g), _) => Some(g),
            (None, CaseName::Lowreg) => Some(2.0),
            (None, _) => None,
        };
        Ok(RunConfig {
            case,
            method: self.method,
            lambdas: self.lambda.clone(),
            sizes: self.sizes.clone(),
            post_iters: self.post_iters,
            eps: self.eps,
            grading,
            out: self.out.clone(),
        })
    }
}

impl RunConfig {
    fn study(&self, method: Method) -> StudyConfig {
        let mut cfg = StudyConfig::new(self.case.clone(), method, self.sizes.clone());
        cfg.lambda = self.lambdas.first().copied();
        cfg.grading = self.grading;
        cfg.eps = self.eps;
        cfg
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let (args, cmd): (&RunArgs, fn(&RunConfig, &mut dyn Write) -> Result<()>) = match &cli.command {
        Command::Study(a) => (a, cmd_study),
        Command::Spectrum(a) => (a, cmd_spectrum),
        Command::CompareRt(a) => (a, cmd_compare_rt),
    };
    let config = match args.config() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    match cmd(&config, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Error::NotConverged { history, .. } = &e {
                let _ = writeln!(err, "residual history: {history:?}");
            }
            EXIT_FAILURE
        }
    }
}

fn write_report(report: &StudyReport, dir: &Path, out: &mut dyn Write) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(report.file_name());
    report.write_csv(&path)?;
    write!(out, "{}", report.summary())?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(path)
}

pub fn cmd_study(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let method = match cfg.method {
        MethodName::Cr => Method::Cr,
        MethodName::Ep => Method::Ep,
        MethodName::Post => Method::Post {
            iterations: cfg.post_iters.unwrap_or(8),
        },
    };
    let study = cfg.study(method);
    let outcomes = run_study(&study)?;
    write_report(&report_of(&study, &outcomes), &cfg.out, out)?;
    Ok(())
}

pub fn cmd_compare_rt(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let mut study = cfg.study(Method::PostRt {
        iterations: cfg.post_iters.unwrap_or(1),
    });
    study.lambda = Some(cfg.lambdas.first().copied().unwrap_or(1.0));
    let outcomes = run_study(&study)?;
    let initial: Vec<_> = outcomes.iter().filter_map(|o| o.initial).collect();
    let before = StudyReport::new(study.case.name.clone(), "cr-rt", study.case.nu, study.lambda(), initial);
    write_report(&before, &cfg.out, out)?;
    write_report(&report_of(&study, &outcomes), &cfg.out, out)?;
    Ok(())
}

pub fn cmd_spectrum(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let kind = match cfg.method {
        MethodName::Cr => SpaceKind::CrVector,
        _ => SpaceKind::P1Vector,
    };
    let mut lambdas = if cfg.lambdas.is_empty() { vec![1.0, 10.0] } else { cfg.lambdas.clone() };
    lambdas.sort_by(f64::total_cmp);
    for &n in &cfg.sizes {
        let mesh = match cfg.grading {
            Some(g) => graded_unit_square(n, [0.5, 0.5], g)?,
            None => structured_unit_square(n)?,
        };
        let ops = StokesOperators::assemble(&mesh, DofMap::new(&mesh, kind))?;
        let chol = CholeskyFactor::new(&ops.a_ff)?;
        let mut last = f64::INFINITY;
        for &lambda in &lambdas {
            let s = iteration_matrix_spectrum(&chol, &ops.b_f, &ops.mass, lambda)?;
            writeln!(
                out,
                "n {n:>3}  {kind:?}  lambda {lambda:>8}  rho {:.6}  restricted dim {}  kernel dim {}",
                s.rho,
                s.eigenvalues.len(),
                s.kernel_dim
            )?;
            if s.rho > last {
                return Err(Error::InvalidArgument(format!(
                    "spectral radius increased from {last} to {} at lambda {lambda}",
                    s.rho
                )));
            }
            last = s.rho;
        }
    }
    Ok(())
}
