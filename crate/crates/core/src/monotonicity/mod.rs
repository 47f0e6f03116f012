//! Diagnostics around free-boundary points: the density `K(r)` and its
//! derivative, the fields `w`, `v`, `c`, the radial deficit, blow-ups and
//! curvature relations.

mod blowup;
mod curvature;
mod density;
mod fields;

pub use blowup::{blowup, default_t_samples, homogeneity_defect, BlowupSequence};
pub use curvature::{curvature_identity_check, curvature_profile, default_window, CurvatureReport};
pub use density::{density_k, density_profile, dk_boundary_integral, DensityProfile};
pub use fields::{b_dot_y, c_field, diagnostic_mask, radial_deficit, v_field, w_field, RadialDeficit};
