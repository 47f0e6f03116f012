use serde::Serialize;

use crate::error::{invalid, Result};
use crate::field::{gradient, hessian, norm, sub, FreeBoundary, Point, ScalarField};
use crate::functional::{coefficient_at, drift_at, interior_mask, Density, MaskedField, DRIFT_SCALE};

/// Nodes of `{u > 0}` at least `3h` from the free boundary, the grid edge
/// and the centre.
pub fn diagnostic_mask(u: &ScalarField, center: Point) -> Vec<bool> {
    let g = *u.grid();
    let h = g.h();
    let mut mask = interior_mask(u, 3.0 * h, 3);
    for (k, m) in mask.iter_mut().enumerate() {
        let (i, j) = g.ij(k);
        if norm(sub(g.point(i, j), center)) < 3.0 * h {
            *m = false;
        }
    }
    mask
}

fn check(u: &ScalarField, center: Point) -> Result<()> {
    if !u.grid().contains(center) {
        return invalid(format!("center {center:?} lies outside the grid"));
    }
    Ok(())
}

/// `w = ∇u·(x − x0) − u` on the diagnostic mask.
pub fn w_field(u: &ScalarField, center: Point) -> Result<MaskedField> {
    check(u, center)?;
    let field = crate::functional::w_values(u, center)?;
    Ok(MaskedField { field, mask: diagnostic_mask(u, center) })
}

/// `v = u/|y| − ∇u·y/|y|` with `y = x − x0`; equals `−w/|y|`.
pub fn v_field(u: &ScalarField, center: Point) -> Result<MaskedField> {
    let w = w_field(u, center)?;
    let g = *u.grid();
    let values = (0..g.len())
        .map(|k| {
            let (i, j) = g.ij(k);
            let r = norm(sub(g.point(i, j), center));
            if r > 0.0 {
                -w.field.values()[k] / r
            } else {
                0.0
            }
        })
        .collect();
    Ok(MaskedField { field: ScalarField::new(g, values)?, mask: w.mask })
}

/// Zeroth-order coefficient of the equation satisfied by `v`:
/// `c = b·y/|y|³ − 2 a(y, y)/|y|⁴ + (3 a(y, y)/|y|² − tr a)/|y|²`,
/// with `b` the drift of the `w`-equation (`DRIFT_SCALE` times [`drift_at`]).
pub fn c_field(u: &ScalarField, d: &Density, center: Point) -> Result<MaskedField> {
    check(u, center)?;
    let g = *u.grid();
    let gu = gradient(u)?;
    let hu = hessian(u)?;
    let values = (0..g.len())
        .map(|k| {
            let (i, j) = g.ij(k);
            let y = sub(g.point(i, j), center);
            let r2 = y[0] * y[0] + y[1] * y[1];
            if r2 == 0.0 {
                return 0.0;
            }
            let r = r2.sqrt();
            let a = coefficient_at(d, gu.values[k]);
            let b = drift_at(d, gu.values[k], &hu.values[k]);
            let by = DRIFT_SCALE * (b[0] * y[0] + b[1] * y[1]);
            let ayy = a.bilinear(y, y);
            by / (r2 * r) - 2.0 * ayy / (r2 * r2) + (3.0 * ayy / r2 - a.trace()) / r2
        })
        .collect();
    Ok(MaskedField { field: ScalarField::new(g, values)?, mask: diagnostic_mask(u, center) })
}

/// `b·(x − x0)` with the `w`-equation drift.
pub fn b_dot_y(u: &ScalarField, d: &Density, center: Point) -> Result<MaskedField> {
    check(u, center)?;
    let g = *u.grid();
    let gu = gradient(u)?;
    let hu = hessian(u)?;
    let values = (0..g.len())
        .map(|k| {
            let (i, j) = g.ij(k);
            let y = sub(g.point(i, j), center);
            let b = drift_at(d, gu.values[k], &hu.values[k]);
            DRIFT_SCALE * (b[0] * y[0] + b[1] * y[1])
        })
        .collect();
    Ok(MaskedField { field: ScalarField::new(g, values)?, mask: diagnostic_mask(u, center) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialDeficit {
    /// `ℓ̂² = max(0, sup −∇u·(y − x0)/|y − x0|)` over the window.
    pub ell_sq: f64,
    /// Vertices inside the window.
    pub samples: usize,
}

/// Radial deficit over free-boundary vertices with `r_min ≤ |y − x0| ≤ r_max`.
pub fn radial_deficit(fb: &FreeBoundary, center: Point, window: (f64, f64)) -> RadialDeficit {
    let mut sup = f64::NEG_INFINITY;
    let mut samples = 0;
    for v in fb.vertices() {
        let y = sub(v.position, center);
        let r = norm(y);
        if r < window.0 || r > window.1 || r == 0.0 {
            continue;
        }
        samples += 1;
        sup = sup.max(-(v.gradient[0] * y[0] + v.gradient[1] * y[1]) / r);
    }
    RadialDeficit { ell_sq: sup.max(0.0), samples }
}
