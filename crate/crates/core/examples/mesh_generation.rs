//! Structured and graded meshes of the unit square.

use coercive_stokes::mesh::{graded_unit_square, structured_unit_square_with, Diagonal};

fn main() -> coercive_stokes::Result<()> {
    for diag in [Diagonal::Rising, Diagonal::Falling] {
        let mesh = structured_unit_square_with(8, diag)?;
        println!("{diag:?}: {:?}", mesh.statistics());
    }
    for grading in [1.0, 2.0, 3.0] {
        let mesh = graded_unit_square(16, [0.5, 0.5], grading)?;
        let s = mesh.statistics();
        println!("graded {grading}: h_min {:.4}, h_max {:.4}, min area {:.2e}", s.h_min, s.h_max, s.min_area);
    }

    let mesh = graded_unit_square(4, [0.5, 0.5], 2.0)?;
    let path = std::env::temp_dir().join("graded4.mesh");
    mesh.write_dump(std::fs::File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
