use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::exec::Exec;
use crate::field::{dot, positivity_measure, sub, FbVertex, FreeBoundary, Point, ScalarField};
use crate::oracles::dk_fd;

/// `K(r)` at a free-boundary point with two estimates of its derivative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityProfile {
    pub center: Point,
    pub radii: Vec<f64>,
    pub k: Vec<f64>,
    /// Centred differences of `k` over `radii`.
    pub dk_fd: Vec<f64>,
    /// Boundary integral `(1/(π r³)) ∫_{Γ ∩ B_r} ∇u·(y − x0) ds`.
    pub dk_bi: Vec<f64>,
    pub h: f64,
}

impl DensityProfile {
    /// Header `r,K,dK_fd,dK_bi`, then one row per radius at full precision.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "r,K,dK_fd,dK_bi")?;
        for i in 0..self.radii.len() {
            writeln!(w, "{:e},{:e},{:e},{:e}", self.radii[i], self.k[i], self.dk_fd[i], self.dk_bi[i])?;
        }
        Ok(())
    }

    /// Consecutive pairs with `K(r_{i+1}) < K(r_i) − slack · h / r_i`.
    pub fn monotonicity_violations(&self, slack: f64) -> usize {
        self.k
            .windows(2)
            .zip(&self.radii)
            .filter(|(w, r)| w[1] < w[0] - slack * self.h / **r)
            .count()
    }
}

fn check_center(u: &ScalarField, fb: &FreeBoundary, center: Point, radii: &[f64]) -> Result<()> {
    let h = u.grid().h();
    if fb.is_empty() || fb.distance(center) > h * (1.0 + 1e-9) {
        return invalid("no free boundary point near requested center");
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return invalid("radii must be positive and strictly increasing");
    }
    let rmax = *radii.last().unwrap();
    if !u.grid().contains_disk(center, rmax) {
        return invalid(format!("ball of radius {rmax} at {center:?} exceeds the grid extent"));
    }
    Ok(())
}

/// `K(r) = |{u > 0} ∩ B_r| / (π r²)` with the finite-difference derivative.
/// The `dk_bi` column is filled by [`density_profile`]; here it is NaN.
pub fn density_k(u: &ScalarField, fb: &FreeBoundary, center: Point, radii: &[f64], exec: Exec) -> Result<DensityProfile> {
    check_center(u, fb, center, radii)?;
    let k = exec
        .map_slice(radii, |&r| positivity_measure(u, center, r).map(|m| m / (PI * r * r)))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok(DensityProfile {
        center,
        radii: radii.to_vec(),
        dk_fd: dk_fd(radii, &k),
        dk_bi: vec![f64::NAN; radii.len()],
        k,
        h: u.grid().h(),
    })
}

/// All three columns.
pub fn density_profile(u: &ScalarField, fb: &FreeBoundary, center: Point, radii: &[f64], exec: Exec) -> Result<DensityProfile> {
    let mut p = density_k(u, fb, center, radii, exec)?;
    p.dk_bi = exec.map_slice(radii, |&r| dk_boundary_integral(fb, center, r));
    Ok(p)
}

/// Parameter interval of `a + t (b − a)`, `t ∈ [0, 1]`, inside `B_r(c)`.
fn clip(a: Point, b: Point, c: Point, r: f64) -> Option<(f64, f64)> {
    let d = sub(b, a);
    let f = sub(a, c);
    let qa = dot(d, d);
    let qb = 2.0 * dot(f, d);
    let qc = dot(f, f) - r * r;
    if qa == 0.0 {
        return (qc <= 0.0).then_some((0.0, 1.0));
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let t0 = ((-qb - s) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + s) / (2.0 * qa)).min(1.0);
    (t1 > t0).then_some((t0, t1))
}

/// `(1/(π r³)) ∫_{Γ ∩ B_r(x0)} ∇u·(y − x0) ds`, the gradient interpolated
/// linearly along each segment and the segments clipped to the disk exactly.
/// The integrand is quadratic per segment, so Simpson's rule is exact.
pub fn dk_boundary_integral(fb: &FreeBoundary, center: Point, r: f64) -> f64 {
    let mut acc = 0.0;
    for pl in &fb.polylines {
        for s in 0..pl.segment_count() {
            let (va, vb): (&FbVertex, &FbVertex) = pl.segment(s);
            let (a, b) = (va.position, vb.position);
            let Some((t0, t1)) = clip(a, b, center, r) else { continue };
            let len = dot(sub(b, a), sub(b, a)).sqrt();
            let f = |t: f64| {
                let y = [a[0] + t * (b[0] - a[0]) - center[0], a[1] + t * (b[1] - a[1]) - center[1]];
                let g = [
                    va.gradient[0] + t * (vb.gradient[0] - va.gradient[0]),
                    va.gradient[1] + t * (vb.gradient[1] - va.gradient[1]),
                ];
                g[0] * y[0] + g[1] * y[1]
            };
            acc += len * (t1 - t0) * (f(t0) + 4.0 * f(0.5 * (t0 + t1)) + f(t1)) / 6.0;
        }
    }
    acc / (PI * r * r * r)
}
