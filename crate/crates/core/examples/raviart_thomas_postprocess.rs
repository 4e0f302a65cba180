//! Pressure-robust CR solve with Raviart-Thomas reconstructed loads, then
//! one post-processing step with lambda = 1.

use coercive_stokes::cases::{case_linear, case_sinusoidal};
use coercive_stokes::experiments::{run_study, Method, StudyConfig};

fn main() -> coercive_stokes::Result<()> {
    for case in [case_linear().with_nu(1e-6), case_sinusoidal().with_nu(1e-6)] {
        let cfg = StudyConfig::new(case, Method::PostRt { iterations: 1 }, vec![10, 20, 40]).with_lambda(1.0);
        for o in run_study(&cfg)? {
            let before = o.initial.expect("post-processing run");
            println!(
                "{:<7} n {:>3}: CR-RT eU0 {:.2e} eP0 {:.2e} | Post-1 eU0 {:.2e} eP0 {:.2e} eUD {:.2e}",
                cfg.case.name, o.n, before.eu0, before.ep0, o.row.eu0, o.row.ep0, o.row.eud
            );
        }
    }
    Ok(())
}
