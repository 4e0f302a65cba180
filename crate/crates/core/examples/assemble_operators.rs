//! Stiffness, coupling and mass for both velocity spaces.

use coercive_stokes::assembly::StokesOperators;
use coercive_stokes::fem::{DofMap, SpaceKind};
use coercive_stokes::linalg::numerical_rank;
use coercive_stokes::mesh::structured_unit_square;

fn main() -> coercive_stokes::Result<()> {
    let mesh = structured_unit_square(6)?;
    for kind in [SpaceKind::P1Vector, SpaceKind::CrVector] {
        let ops = StokesOperators::assemble(&mesh, DofMap::new(&mesh, kind))?;
        let rank = numerical_rank(&ops.b_f.to_dense(), 1e-10)?;
        println!(
            "{kind:?}: {} velocity dofs, {} pressures, nnz(A) {}, nnz(B) {}, dim ker B^T {}",
            ops.num_velocity(),
            ops.num_pressure(),
            ops.a_ff.nnz(),
            ops.b_f.nnz(),
            ops.num_pressure() - rank
        );
        let a10 = ops.augmented(10.0)?;
        println!("  A + 10 B^T M^-1 B: nnz {}, symmetric {}", a10.nnz(), a10.is_symmetric(1e-12));
    }
    Ok(())
}
