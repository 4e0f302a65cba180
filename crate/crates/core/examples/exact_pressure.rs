//! Coercive P1xP0 solve fed with the exact pressure datum.
//!
//! The affine case is reproduced to round-off.

use coercive_stokes::cases::{case_linear, case_sinusoidal};
use coercive_stokes::experiments::compute_errors;
use coercive_stokes::fem::SpaceKind;
use coercive_stokes::mesh::structured_unit_square;
use coercive_stokes::solvers::{solve_ep_exact, Discretization};

fn main() -> coercive_stokes::Result<()> {
    for case in [case_linear().with_nu(1e-6), case_sinusoidal()] {
        for n in [10, 20, 40] {
            let mesh = structured_unit_square(n)?;
            let disc = Discretization::new(&mesh, SpaceKind::P1Vector, &case)?;
            let sol = solve_ep_exact(&disc, 1.0)?;
            let e = compute_errors(&mesh, &case, &sol, &disc.projected_pressure())?;
            println!(
                "{:<7} nu {:e} n {n:>3}: eU0 {:.3e} eP0 {:.3e} eU1 {:.3e}",
                case.name, case.nu, e.velocity_l2, e.pressure_l2, e.velocity_h1
            );
        }
    }
    Ok(())
}
