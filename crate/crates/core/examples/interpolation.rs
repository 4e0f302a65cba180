//! Interpolants, L2 projection onto P0, and the Raviart-Thomas reconstruction.

use coercive_stokes::cases::case_sinusoidal;
use coercive_stokes::fem::{interpolate_cr, project_p0, Rt0Field, SpaceKind, VelocityField};
use coercive_stokes::mesh::structured_unit_square;

fn main() -> coercive_stokes::Result<()> {
    let case = case_sinusoidal();
    let u = |x| case.exact.velocity(x);
    for n in [4, 8, 16, 32] {
        let mesh = structured_unit_square(n)?;
        let coeffs = interpolate_cr(&mesh, u);
        let field = VelocityField::new(&mesh, SpaceKind::CrVector, &coeffs)?;
        let rt = Rt0Field::from_velocity(&field);
        let flux = Rt0Field::from_function(&mesh, u);

        // The flux interpolant of a solenoidal field is solenoidal up to edge quadrature;
        // the midpoint CR interpolant is not, and its RT0 lift keeps div_h.
        let (mut div_cr, mut div_lift, mut div_flux) = (0.0f64, 0.0f64, 0.0f64);
        for t in 0..mesh.num_triangles() {
            div_cr = div_cr.max(field.divergence(t)?.abs());
            div_lift = div_lift.max(rt.divergence(&mesh, t).abs());
            div_flux = div_flux.max(flux.divergence(&mesh, t).abs());
        }
        let p0 = project_p0(&mesh, |x| case.exact.pressure(x));
        let mean: f64 = p0.iter().enumerate().map(|(t, p)| p * mesh.area(t)).sum();
        println!(
            "n {n:>2}: max |div| CR {div_cr:.2e}, RT0 lift {div_lift:.2e}, RT0 flux {div_flux:.1e}; mean of projected p {mean:.1e}"
        );
    }
    Ok(())
}
