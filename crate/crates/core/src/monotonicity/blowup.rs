use serde::Serialize;

use crate::error::{invalid, Result};
use crate::exec::Exec;
use crate::field::{gradient, GridSpec, Point, ScalarField};

/// Rescalings `u_k(x) = u(x0 + r_k x) / r_k` on a common reference grid.
#[derive(Clone, Debug, Serialize)]
pub struct BlowupSequence {
    pub center: Point,
    pub scales: Vec<f64>,
    #[serde(skip)]
    pub fields: Vec<ScalarField>,
    /// `sup |u_k − u_{k−1}|` over the reference grid; NaN for `k = 0`.
    pub cauchy: Vec<f64>,
    /// `pairwise[a][b] = sup |u_a − u_b|`.
    pub pairwise: Vec<Vec<f64>>,
    /// Homogeneity defect of `u` on `B_{r_k}(x0)`.
    pub homogeneity: Vec<f64>,
}

/// Default dilation factors for [`homogeneity_defect`].
pub fn default_t_samples() -> Vec<f64> {
    vec![0.5, 0.625, 0.75, 0.875, 1.25, 1.5, 1.75, 2.0]
}

/// Blow-up at `center` over decreasing `scales` (each at least `4h`) on the
/// reference grid `[-1, 1]²` with `reference_cells` cells per side.
pub fn blowup(u: &ScalarField, center: Point, scales: &[f64], reference_cells: usize, exec: Exec) -> Result<BlowupSequence> {
    let g = *u.grid();
    let h = g.h();
    if scales.is_empty() || scales.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("scales must be strictly decreasing");
    }
    if let Some(r) = scales.iter().find(|&&r| r < 4.0 * h * (1.0 - 1e-12)) {
        return invalid(format!("scale {r} is below 4h = {}", 4.0 * h));
    }
    if !g.contains_disk(center, scales[0]) {
        return invalid(format!("scale {} around {center:?} leaves the grid", scales[0]));
    }
    if reference_cells < 2 || reference_cells % 2 != 0 {
        return invalid("reference grid needs an even number of cells, at least 2");
    }
    let refg = GridSpec::square(-1.0, 1.0, 2.0 / reference_cells as f64)?;
    let fields = exec
        .map_slice(scales, |&r| {
            ScalarField::from_fn(refg, |x| {
                let p = [center[0] + r * x[0], center[1] + r * x[1]];
                u.bilinear(p).unwrap_or(0.0) / r
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let sup_diff = |a: &ScalarField, b: &ScalarField| {
        a.values().iter().zip(b.values()).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    };
    let n = fields.len();
    let pairwise: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| sup_diff(&fields[a], &fields[b])).collect()).collect();
    let cauchy = (0..n).map(|k| if k == 0 { f64::NAN } else { pairwise[k][k - 1] }).collect();
    let ts = default_t_samples();
    let homogeneity = exec
        .map_slice(scales, |&r| homogeneity_defect(u, center, r, &ts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(BlowupSequence { center, scales: scales.to_vec(), fields, cauchy, pairwise, homogeneity })
}

/// `sup |u(x0 + t x) − t u(x0 + x)| / (|x| sup|∇u|)` over `t` in `t_samples`
/// and sample points on the annulus `R/2 ≤ |x| ≤ R`, `R = radius / max t`;
/// `sup|∇u|` is taken over the nodes of `B_radius(x0)`. Values come from
/// bilinear interpolation. Keeping `|x|` away from zero keeps the
/// interpolation error at a kink, `O(h)`, from being divided by `|x| ~ h`.
pub fn homogeneity_defect(u: &ScalarField, center: Point, radius: f64, t_samples: &[f64]) -> Result<f64> {
    let g = *u.grid();
    if !g.contains_disk(center, radius) {
        return invalid(format!("radius {radius} around {center:?} leaves the grid"));
    }
    if t_samples.iter().any(|&t| !(t > 0.0)) || t_samples.is_empty() {
        return invalid("dilation factors must be positive");
    }
    let grad = gradient(u)?;
    let mut gsup: f64 = 0.0;
    for k in 0..g.len() {
        let (i, j) = g.ij(k);
        let p = g.point(i, j);
        if (p[0] - center[0]).hypot(p[1] - center[1]) <= radius {
            let d = grad.values[k];
            gsup = gsup.max(d[0].hypot(d[1]));
        }
    }
    if gsup == 0.0 {
        return Ok(0.0);
    }
    let tmax = t_samples.iter().fold(1.0_f64, |a, &t| a.max(t));
    let outer = radius / tmax;
    let (nr, na) = (16, 64);
    let mut sup: f64 = 0.0;
    for ir in 1..=nr {
        let s = outer * (0.5 + 0.5 * (ir - 1) as f64 / (nr - 1) as f64);
        for ia in 0..na {
            let th = std::f64::consts::TAU * ia as f64 / na as f64;
            let x = [s * th.cos(), s * th.sin()];
            let base = u.bilinear([center[0] + x[0], center[1] + x[1]]).unwrap_or(0.0);
            for &t in t_samples {
                let v = u.bilinear([center[0] + t * x[0], center[1] + t * x[1]]).unwrap_or(0.0);
                sup = sup.max((v - t * base).abs() / (s * gsup));
            }
        }
    }
    Ok(sup)
}
