use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::field::{dot, norm, sub, FreeBoundary, Point, Polyline};
use crate::functional::{Density, EnergyDensity};

/// Signed curvature per vertex, positive when the curve bends away from the
/// normal (the positivity set lies on the concave side), as for the rim of
/// a dead core. `None` where the local fit is unavailable.
pub fn curvature_profile(fb: &FreeBoundary, window: f64) -> Vec<Vec<Option<f64>>> {
    fb.polylines.iter().map(|pl| polyline_curvature(pl, window)).collect()
}

/// Window half-width for [`curvature_identity_check`]: `max(6h, √h)`. A fixed
/// multiple of `h` stalls, since vertex placement noise is `O(h²)` and the
/// parabola coefficient divides it by the window squared.
pub fn default_window(h: f64) -> f64 {
    (6.0 * h).max(h.sqrt())
}

/// Least-squares parabola `η = a + b ξ + c ξ²/2` through the vertices within
/// `window` of vertex `k` along the polyline, in the frame of its normal;
/// curvature `−c / (1 + b²)^{3/2}`. Needs three vertices on each side.
fn polyline_curvature(pl: &Polyline, window: f64) -> Vec<Option<f64>> {
    let n = pl.vertices.len();
    let pos = |k: usize| pl.vertices[k].position;
    (0..n)
        .map(|k| {
            let p0 = pos(k);
            let nrm = pl.vertices[k].normal;
            let tan = [nrm[1], -nrm[0]];
            let mut pts = vec![(0.0, 0.0)];
            let mut sides = [0usize; 2];
            for (side, dir) in [(0usize, -1isize), (1, 1)] {
                let mut idx = k as isize;
                for _ in 0..n {
                    idx += dir;
                    if pl.closed {
                        idx = idx.rem_euclid(n as isize);
                    } else if idx < 0 || idx >= n as isize {
                        break;
                    }
                    if idx as usize == k {
                        break;
                    }
                    let d = sub(pos(idx as usize), p0);
                    if norm(d) > window {
                        break;
                    }
                    pts.push((dot(d, tan), dot(d, nrm)));
                    sides[side] += 1;
                }
            }
            if sides[0] < 3 || sides[1] < 3 {
                return None;
            }
            let mut ata = Matrix3::zeros();
            let mut atb = Vector3::zeros();
            for (xi, eta) in pts {
                let row = Vector3::new(1.0, xi, 0.5 * xi * xi);
                ata += row * row.transpose();
                atb += row * eta;
            }
            let sol = ata.lu().solve(&atb)?;
            let (b, c) = (sol[1], sol[2]);
            Some(-c / (1.0 + b * b).powf(1.5))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub vertices: usize,
    pub regular: usize,
    /// `sup |u_NT|` over regular vertices.
    pub sup_unt: f64,
    /// `sup |(1 + 2F''/F')(−u_NN) − k|` over regular vertices, `F` derivatives at `λ*²`.
    pub identity_error: f64,
    /// Same, divided by `|k|` vertexwise.
    pub identity_relative: f64,
    /// `min(−u_NN)` over regular vertices.
    pub min_neg_unn: f64,
    pub mean_curvature: f64,
}

/// Checks the free-boundary curvature relations on regular vertices: turning
/// angle over five vertices below 30° and `|∇u| ∈ [0.8, 1.2] λ*`. Second
/// derivatives come from the one-sided local fit stored on each vertex.
pub fn curvature_identity_check(fb: &FreeBoundary, d: &Density, lambda_star: f64, window: f64) -> CurvatureReport {
    let t = lambda_star * lambda_star;
    let factor = 1.0 + 2.0 * d.d2f(t) / d.df(t);
    let mut rep = CurvatureReport {
        vertices: fb.vertex_count(),
        regular: 0,
        sup_unt: 0.0,
        identity_error: 0.0,
        identity_relative: 0.0,
        min_neg_unn: f64::INFINITY,
        mean_curvature: 0.0,
    };
    let mut ksum = 0.0;
    for pl in &fb.polylines {
        let curv = polyline_curvature(pl, window);
        let n = pl.vertices.len();
        for k in 0..n {
            let Some(kappa) = curv[k] else { continue };
            let v = &pl.vertices[k];
            let Some(hs) = v.hessian else { continue };
            let at = |o: isize| -> Option<Point> {
                let i = k as isize + o;
                if pl.closed {
                    Some(pl.vertices[i.rem_euclid(n as isize) as usize].position)
                } else if i < 0 || i >= n as isize {
                    None
                } else {
                    Some(pl.vertices[i as usize].position)
                }
            };
            let (Some(a), Some(b), Some(c)) = (at(-2), at(0), at(2)) else { continue };
            let (t1, t2) = (sub(b, a), sub(c, b));
            let (l1, l2) = (norm(t1), norm(t2));
            if l1 == 0.0 || l2 == 0.0 {
                continue;
            }
            let turn = (dot(t1, t2) / (l1 * l2)).clamp(-1.0, 1.0).acos();
            let gnorm = norm(v.gradient);
            if turn >= 30f64.to_radians() || gnorm < 0.8 * lambda_star || gnorm > 1.2 * lambda_star {
                continue;
            }
            let nn = v.normal;
            let tt = [nn[1], -nn[0]];
            let unn = hs.bilinear(nn, nn);
            let unt = hs.bilinear(nn, tt);
            let err = (factor * (-unn) - kappa).abs();
            rep.regular += 1;
            rep.sup_unt = rep.sup_unt.max(unt.abs());
            rep.identity_error = rep.identity_error.max(err);
            if kappa != 0.0 {
                rep.identity_relative = rep.identity_relative.max(err / kappa.abs());
            }
            rep.min_neg_unn = rep.min_neg_unn.min(-unn);
            ksum += kappa;
        }
    }
    if rep.regular > 0 {
        rep.mean_curvature = ksum / rep.regular as f64;
    } else {
        rep.min_neg_unn = f64::NAN;
    }
    rep
}
