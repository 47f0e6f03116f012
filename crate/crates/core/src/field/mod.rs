//! Uniform-grid fields, finite differences and free-boundary geometry.

mod calculus;
mod contour;
pub mod dump;
mod fit;
mod grid;
mod measure;
mod types;

pub use calculus::{gradient, hessian};
pub use contour::{extract_free_boundary, extract_free_boundary_in, FbVertex, FreeBoundary, Polyline};
pub(crate) use contour::Level;
pub use fit::{positive_side_fit, LocalFit};
pub use grid::{GridSpec, Point, Region};
pub(crate) use grid::{dot, norm, sub};
pub use measure::{polygon_disk_area, positivity_measure};
pub(crate) use measure::cell_positive_area;
pub use types::{MatrixField, ScalarField, Sym2, VectorField};
