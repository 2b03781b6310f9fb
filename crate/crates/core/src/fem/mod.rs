//! Piecewise-linear finite elements for Neumann eigenvalues on spherical domains.

pub mod assembly;
pub mod domains;
pub mod eigen;
pub mod experiments;
pub mod geometry;
pub mod job;
pub mod mesh;
pub mod mesher;
pub mod sparse;

pub use assembly::assemble_p1;
pub use eigen::{neumann_spectrum, SpectrumResult};
pub use mesh::SurfaceMesh;
pub use sparse::SparseSpd;
