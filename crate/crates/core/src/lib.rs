//! Discrete local minimizers of the one-phase Bernoulli functional
//! `J_F(u) = ∫ F(|∇u|²) + λ χ{u>0}` on 2D grids, together with the density
//! `K(r)` of the positivity set at free-boundary points and the diagnostics
//! that accompany its monotonicity: the drift equation for `w = ∇u·x − u`,
//! blow-up homogeneity and free-boundary curvature identities.

pub mod cli;
pub mod error;
pub mod exec;
pub mod field;
pub mod functional;
pub mod minimizer;
pub mod monotonicity;
pub mod oracles;

pub use error::{LabError, Result};
pub use exec::Exec;
