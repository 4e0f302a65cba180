//! Iterated post-processing of a Crouzeix-Raviart pressure.

use coercive_stokes::cases::case_low_regularity;
use coercive_stokes::experiments::compute_errors;
use coercive_stokes::fem::SpaceKind;
use coercive_stokes::mesh::graded_unit_square;
use coercive_stokes::solvers::{default_lambda, solve_cr, CoerciveSolver, Discretization};

fn main() -> coercive_stokes::Result<()> {
    let case = case_low_regularity().with_nu(1e-6);
    let mesh = graded_unit_square(40, [0.5, 0.5], 2.0)?;
    let cr_disc = Discretization::new(&mesh, SpaceKind::CrVector, &case)?;
    let cr = solve_cr(&cr_disc)?;
    let pz = cr_disc.projected_pressure();
    let e = compute_errors(&mesh, &case, &cr, &pz)?;
    println!("CR      eU0 {:.3e} eP0 {:.3e}", e.velocity_l2, e.pressure_l2);

    let disc = Discretization::new(&mesh, SpaceKind::P1Vector, &case)?;
    let solver = CoerciveSolver::new(&disc, default_lambda(case.nu))?;
    for its in [1, 2, 4, 8] {
        let sol = solver.iterate(&cr.pressure, its, 1e-12)?;
        let e = compute_errors(&mesh, &case, &sol, &pz)?;
        println!(
            "Post-{its} eU0 {:.3e} eP0 {:.3e} eUD/eU1 {:.3}",
            e.velocity_l2,
            e.pressure_l2,
            e.divergence_ratio()
        );
    }
    let sol = solver.iterate(&cr.pressure, 8, 1e-12)?;
    for (k, r) in sol.diagnostics.records.iter().enumerate() {
        println!("  iteration {}: |dP|_M {:.3e}  |div u| {:.3e}", k + 1, r.pressure_change, r.divergence);
    }
    Ok(())
}
