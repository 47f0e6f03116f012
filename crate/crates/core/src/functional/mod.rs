//! Energy densities, the functionals `J` and `J_F`, and PDE residuals.

mod density;
mod energy;
mod residual;

pub use density::{
    default_samples, lambda_star, validate_density, BernoulliParams, Condition, Density, DensityReport,
    EnergyDensity, Violation,
};
pub(crate) use energy::{cell_grad_sq, cell_values};
pub use energy::{dirichlet_energy, energy, positive_area};
pub use residual::{
    coefficient_at, coefficients_a, drift_at, drift_b, interior_mask, pde_residual, w_residual, w_residual_scaled,
    w_values, MaskedField, DRIFT_SCALE,
};
