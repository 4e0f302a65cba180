//! Spectrum of the post-processing iteration operator on small meshes.

use coercive_stokes::assembly::StokesOperators;
use coercive_stokes::fem::{DofMap, SpaceKind};
use coercive_stokes::linalg::CholeskyFactor;
use coercive_stokes::mesh::structured_unit_square;
use coercive_stokes::solvers::{schur_eigenvalues, spectrum_from_schur};

fn main() -> coercive_stokes::Result<()> {
    for kind in [SpaceKind::CrVector, SpaceKind::P1Vector] {
        for n in [4, 8, 12] {
            let mesh = structured_unit_square(n)?;
            let ops = StokesOperators::assemble(&mesh, DofMap::new(&mesh, kind))?;
            let sigma = schur_eigenvalues(&CholeskyFactor::new(&ops.a_ff)?, &ops.b_f, &ops.mass)?;
            let rho: Vec<String> = [1.0, 10.0, 100.0]
                .iter()
                .map(|&l| format!("{:.4}", spectrum_from_schur(&sigma, l).rho))
                .collect();
            let s = spectrum_from_schur(&sigma, 1.0);
            println!("{kind:?} n {n:>2}: kernel {:>3}, rho(1, 10, 100) = {}", s.kernel_dim, rho.join(", "));
        }
    }
    Ok(())
}
