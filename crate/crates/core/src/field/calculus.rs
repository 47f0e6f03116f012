//! Finite-difference gradient and Hessian on the uniform grid.

use super::types::{MatrixField, ScalarField, Sym2, VectorField};
use crate::error::{invalid, Result};

/// First derivative along one axis at position `k` of a line of `n` samples:
/// central inside, second-order one-sided at the two ends.
#[inline]
fn d1(line: impl Fn(usize) -> f64, k: usize, n: usize, h: f64) -> f64 {
    if k == 0 {
        (-3.0 * line(0) + 4.0 * line(1) - line(2)) / (2.0 * h)
    } else if k == n - 1 {
        (3.0 * line(n - 1) - 4.0 * line(n - 2) + line(n - 3)) / (2.0 * h)
    } else {
        (line(k + 1) - line(k - 1)) / (2.0 * h)
    }
}

/// Second derivative: three-point inside, four-point one-sided (second order)
/// at the ends when the line is long enough.
#[inline]
fn d2(line: impl Fn(usize) -> f64, k: usize, n: usize, h: f64) -> f64 {
    let h2 = h * h;
    if k == 0 {
        if n >= 4 {
            (2.0 * line(0) - 5.0 * line(1) + 4.0 * line(2) - line(3)) / h2
        } else {
            (line(0) - 2.0 * line(1) + line(2)) / h2
        }
    } else if k == n - 1 {
        if n >= 4 {
            (2.0 * line(n - 1) - 5.0 * line(n - 2) + 4.0 * line(n - 3) - line(n - 4)) / h2
        } else {
            (line(n - 1) - 2.0 * line(n - 2) + line(n - 3)) / h2
        }
    } else {
        (line(k + 1) - 2.0 * line(k) + line(k - 1)) / h2
    }
}

fn check_finite(u: &ScalarField) -> Result<()> {
    if u.values().iter().any(|v| !v.is_finite()) {
        return invalid("field contains non-finite values");
    }
    Ok(())
}

fn dx_raw(values: &[f64], nx: usize, ny: usize, h: f64) -> Vec<f64> {
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        let row = &values[j * nx..(j + 1) * nx];
        for i in 0..nx {
            out[j * nx + i] = d1(|k| row[k], i, nx, h);
        }
    }
    out
}

fn dy_raw(values: &[f64], nx: usize, ny: usize, h: f64) -> Vec<f64> {
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            out[j * nx + i] = d1(|k| values[k * nx + i], j, ny, h);
        }
    }
    out
}

pub fn gradient(u: &ScalarField) -> Result<VectorField> {
    check_finite(u)?;
    let g = *u.grid();
    let (nx, ny, h) = (g.nx(), g.ny(), g.h());
    let ux = dx_raw(u.values(), nx, ny, h);
    let uy = dy_raw(u.values(), nx, ny, h);
    Ok(VectorField { grid: g, values: ux.into_iter().zip(uy).map(|(a, b)| [a, b]).collect() })
}

/// Hessian with the mixed term taken as `D_y(D_x u)`; the axis operators
/// commute, so this equals the centred mixed stencil at interior nodes and the
/// matrix is symmetric by construction.
pub fn hessian(u: &ScalarField) -> Result<MatrixField> {
    check_finite(u)?;
    let g = *u.grid();
    let (nx, ny, h) = (g.nx(), g.ny(), g.h());
    let v = u.values();
    let ux = dx_raw(v, nx, ny, h);
    let uxy = dy_raw(&ux, nx, ny, h);
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let uxx = d2(|k| v[j * nx + k], i, nx, h);
            let uyy = d2(|k| v[k * nx + i], j, ny, h);
            out.push(Sym2::new(uxx, uxy[j * nx + i], uyy));
        }
    }
    Ok(MatrixField { grid: g, values: out })
}
