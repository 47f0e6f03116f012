//! One-sided local polynomial fit of `u` at a free-boundary point.

use nalgebra::{DMatrix, DVector};

use super::grid::{dot, sub, Point};
use super::types::{ScalarField, Sym2};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalFit {
    pub gradient: Point,
    pub hessian: Option<Sym2>,
}

const FIT_RADIUS: f64 = 3.5;

/// Least-squares fit of `u(x) ~ c + a.d + d^T Q d / 2 + cubic` with `d = x - at`,
/// using only positive nodes within `3.5 h` on the positive side of `at`
/// (behind the tangent line by at most `h / 2`). The constant is left free:
/// pinning `u(at) = 0` would turn the `O(h²)` placement error of `at` into an
/// `O(1)` Hessian error. Falls back to lower degree when support is thin.
pub fn positive_side_fit(u: &ScalarField, at: Point, side: Point) -> Option<LocalFit> {
    let h = u.grid().h();
    // a cubic on a degenerate stencil gets one wider try before dropping degree
    for radius in [FIT_RADIUS, FIT_RADIUS + 1.0] {
        let pts = gather(u, at, side, radius);
        if pts.len() >= 14 {
            if let Some(f) = solve(&pts, 3, h) {
                return Some(f);
            }
        }
    }
    let pts = gather(u, at, side, FIT_RADIUS);
    let degree = match pts.len() {
        n if n >= 8 => 2,
        n if n >= 4 => 1,
        _ => return None,
    };
    (1..=degree).rev().find_map(|deg| solve(&pts, deg, h))
}

/// Positive nodes within `radius` cells of `at`, in cell units relative to `at`.
fn gather(u: &ScalarField, at: Point, side: Point, radius: f64) -> Vec<(Point, f64)> {
    let g = u.grid();
    let h = g.h();
    let o = g.origin();
    let reach = radius.ceil() as isize;
    let ci = ((at[0] - o[0]) / h).round() as isize;
    let cj = ((at[1] - o[1]) / h).round() as isize;
    let mut pts: Vec<(Point, f64)> = Vec::new();
    for dj in -reach..=reach {
        for di in -reach..=reach {
            let (i, j) = (ci + di, cj + dj);
            if i < 0 || j < 0 || i >= g.nx() as isize || j >= g.ny() as isize {
                continue;
            }
            let (i, j) = (i as usize, j as usize);
            let v = u.at(i, j);
            if v <= 0.0 {
                continue;
            }
            let d = sub(g.point(i, j), at);
            let d = [d[0] / h, d[1] / h];
            if dot(d, d) > radius * radius || dot(d, side) < -0.5 {
                continue;
            }
            pts.push((d, v));
        }
    }
    pts
}

fn basis(d: Point, degree: usize) -> Vec<f64> {
    let (x, y) = (d[0], d[1]);
    let mut b = vec![1.0, x, y];
    if degree >= 2 {
        b.extend([0.5 * x * x, x * y, 0.5 * y * y]);
    }
    if degree >= 3 {
        b.extend([x * x * x, x * x * y, x * y * y, y * y * y]);
    }
    b
}

fn solve(pts: &[(Point, f64)], degree: usize, h: f64) -> Option<LocalFit> {
    let ncols = basis([0.0, 0.0], degree).len();
    if pts.len() < ncols + 1 {
        return None;
    }
    let mut a = DMatrix::<f64>::zeros(pts.len(), ncols);
    let mut rhs = DVector::<f64>::zeros(pts.len());
    for (r, (d, v)) in pts.iter().enumerate() {
        for (c, b) in basis(*d, degree).into_iter().enumerate() {
            a[(r, c)] = b;
        }
        rhs[r] = *v;
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-8 * smax) {
        return None;
    }
    let coef = svd.solve(&rhs, 0.0).ok()?;
    let gradient = [coef[1] / h, coef[2] / h];
    let hessian = (degree >= 2).then(|| Sym2::new(coef[3] / (h * h), coef[4] / (h * h), coef[5] / (h * h)));
    Some(LocalFit { gradient, hessian })
}
