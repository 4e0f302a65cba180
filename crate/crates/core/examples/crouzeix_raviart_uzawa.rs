//! Crouzeix-Raviart solve by Uzawa iteration with mass-preconditioned PCG.

use coercive_stokes::cases::case_sinusoidal;
use coercive_stokes::experiments::compute_errors;
use coercive_stokes::fem::SpaceKind;
use coercive_stokes::mesh::structured_unit_square;
use coercive_stokes::solvers::{solve_cr, Discretization};

fn main() -> coercive_stokes::Result<()> {
    let case = case_sinusoidal();
    for n in [10, 20, 40] {
        let mesh = structured_unit_square(n)?;
        let disc = Discretization::new(&mesh, SpaceKind::CrVector, &case)?;
        let sol = solve_cr(&disc)?;
        let e = compute_errors(&mesh, &case, &sol, &disc.projected_pressure())?;
        println!(
            "n {n:>3}: {} PCG iterations, final residual {:.1e}, eU0 {:.3e}, eP0 {:.3e}, eUD {:.1e}",
            sol.diagnostics.iterations,
            sol.diagnostics.pcg_history.last().copied().unwrap_or(0.0),
            e.velocity_l2,
            e.pressure_l2,
            e.divergence
        );
    }
    Ok(())
}
