//! Convergence study written to CSV, with fitted rates.
//!
//! `cargo run --release --example convergence_study -- [case] [method]`

use coercive_stokes::cases::case_by_name;
use coercive_stokes::experiments::{convergence_study, Method, StudyConfig};

fn main() -> coercive_stokes::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "sinus".into());
    let method = match args.next().as_deref() {
        Some("ep") => Method::Ep,
        Some("post") => Method::Post { iterations: 8 },
        _ => Method::Cr,
    };
    let case = case_by_name(&name)
        .ok_or_else(|| coercive_stokes::Error::InvalidArgument(format!("unknown case {name}")))?
        .with_nu(1e-6);
    let mut cfg = StudyConfig::new(case, method, vec![10, 20, 40, 80]);
    if name == "lowreg" {
        cfg = cfg.with_grading(2.0);
    }
    let report = convergence_study(&cfg)?;
    print!("{}", report.summary());
    let path = std::env::temp_dir().join(report.file_name());
    report.write_csv(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
