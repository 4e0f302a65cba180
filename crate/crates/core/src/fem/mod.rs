pub mod basis;
pub mod dofmap;
pub mod field;
pub mod interpolation;
pub mod quadrature;

pub use basis::{p1_gradients, CrBasis, TriangleGeometry};
pub use dofmap::{DofMap, SpaceKind};
pub use field::VelocityField;
pub use interpolation::{interpolate_cr, interpolate_p1, project_p0, project_p0_elementwise, Rt0Field};
pub use quadrature::Quadrature;
