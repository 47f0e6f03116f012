//! Coefficients `a_ij`, drift `b`, and the residuals of `a_ij u_ij = 0` and
//! of the drifted equation satisfied by `w = ∇u·(x − x0) − u`.

use super::density::EnergyDensity;
use crate::error::{invalid, Result};
use crate::field::{extract_free_boundary, gradient, hessian, MatrixField, Point, ScalarField, Sym2, VectorField};

/// Scale applied to [`drift_b`] in the `w`-equation `a_ij w_ij = s b·∇w`.
/// Differentiating `a_ij u_ij = 0` along `x_m` gives `s = 2`; the refinement
/// study in the tests rejects `s = 1`.
pub const DRIFT_SCALE: f64 = 2.0;

/// `a = F'(|∇u|²) I + 2 F''(|∇u|²) ∇u ∇uᵀ` at one node.
#[inline]
pub fn coefficient_at<D: EnergyDensity + ?Sized>(d: &D, grad: Point) -> Sym2 {
    let t = grad[0] * grad[0] + grad[1] * grad[1];
    let (f1, f2) = (d.df(t), d.d2f(t));
    Sym2::new(f1 + 2.0 * f2 * grad[0] * grad[0], 2.0 * f2 * grad[0] * grad[1], f1 + 2.0 * f2 * grad[1] * grad[1])
}

/// `b = −{[F'' Δu + 2 F''' ∇u·D²u·∇u] ∇u + 2 F'' D²u ∇u}` at one node.
#[inline]
pub fn drift_at<D: EnergyDensity + ?Sized>(d: &D, grad: Point, hess: &Sym2) -> Point {
    let t = grad[0] * grad[0] + grad[1] * grad[1];
    let (f2, f3) = (d.d2f(t), d.d3f(t));
    let hg = hess.apply(grad);
    let quad = grad[0] * hg[0] + grad[1] * hg[1];
    let s = f2 * hess.trace() + 2.0 * f3 * quad;
    [-(s * grad[0] + 2.0 * f2 * hg[0]), -(s * grad[1] + 2.0 * f2 * hg[1])]
}

pub fn coefficients_a<D: EnergyDensity + ?Sized>(u: &ScalarField, d: &D) -> Result<MatrixField> {
    let g = gradient(u)?;
    Ok(MatrixField { grid: g.grid, values: g.values.iter().map(|&gr| coefficient_at(d, gr)).collect() })
}

pub fn drift_b<D: EnergyDensity + ?Sized>(u: &ScalarField, d: &D) -> Result<VectorField> {
    let g = gradient(u)?;
    let hs = hessian(u)?;
    let values = g.values.iter().zip(&hs.values).map(|(gr, hm)| drift_at(d, *gr, hm)).collect();
    Ok(VectorField { grid: g.grid, values })
}

/// A field together with the nodes on which it is meaningful.
#[derive(Clone, Debug)]
pub struct MaskedField {
    pub field: ScalarField,
    pub mask: Vec<bool>,
}

impl MaskedField {
    /// Sup-norm over the mask (0 for an empty mask).
    pub fn sup(&self) -> f64 {
        self.field.values().iter().zip(&self.mask).filter(|(_, &m)| m).fold(0.0, |a, (v, _)| a.max(v.abs()))
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn masked_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.field.values().iter().zip(&self.mask).filter(|(_, &m)| m).map(|(v, _)| *v)
    }
}

/// Nodes with `u > 0`, at distance at least `band` from the free boundary and
/// at least `margin` nodes from the grid edge.
pub fn interior_mask(u: &ScalarField, band: f64, margin: usize) -> Vec<bool> {
    let g = *u.grid();
    let fb = extract_free_boundary(u);
    let dist = fb.distance_field(&g, band + g.h());
    let mut mask = vec![false; g.len()];
    for j in margin..g.ny().saturating_sub(margin) {
        for i in margin..g.nx().saturating_sub(margin) {
            let k = g.idx(i, j);
            mask[k] = u.values()[k] > 0.0 && dist[k] >= band - 1e-12 * g.h();
        }
    }
    mask
}

/// `a_ij u_ij` on interior nodes of `{u > 0}` at distance ≥ 3h from the free boundary.
pub fn pde_residual<D: EnergyDensity + ?Sized>(u: &ScalarField, d: &D) -> Result<MaskedField> {
    let g = gradient(u)?;
    let hs = hessian(u)?;
    let values = g.values.iter().zip(&hs.values).map(|(gr, hm)| coefficient_at(d, *gr).contract(hm)).collect();
    let field = ScalarField::new(g.grid, values)?;
    let mask = interior_mask(u, 3.0 * u.grid().h(), 1);
    Ok(MaskedField { field, mask })
}

/// `w = ∇u·(x − center) − u` at every node.
pub fn w_values(u: &ScalarField, center: Point) -> Result<ScalarField> {
    let gr = *u.grid();
    let g = gradient(u)?;
    let values = (0..gr.len())
        .map(|k| {
            let (i, j) = gr.ij(k);
            let p = gr.point(i, j);
            let d = g.values[k];
            d[0] * (p[0] - center[0]) + d[1] * (p[1] - center[1]) - u.values()[k]
        })
        .collect();
    ScalarField::new(gr, values)
}

/// `a_ij w_ij − DRIFT_SCALE b·∇w`, derivatives of `w` by finite differences of the assembled field.
pub fn w_residual<D: EnergyDensity + ?Sized>(u: &ScalarField, d: &D, center: Point) -> Result<MaskedField> {
    w_residual_scaled(u, d, center, DRIFT_SCALE)
}

pub fn w_residual_scaled<D: EnergyDensity + ?Sized>(
    u: &ScalarField,
    d: &D,
    center: Point,
    drift_scale: f64,
) -> Result<MaskedField> {
    if !u.grid().contains(center) {
        return invalid(format!("center {center:?} lies outside the grid"));
    }
    let gu = gradient(u)?;
    let hu = hessian(u)?;
    let w = w_values(u, center)?;
    let gw = gradient(&w)?;
    let hw = hessian(&w)?;
    let values = (0..u.grid().len())
        .map(|k| {
            let a = coefficient_at(d, gu.values[k]);
            let b = drift_at(d, gu.values[k], &hu.values[k]);
            let gwk = gw.values[k];
            a.contract(&hw.values[k]) - drift_scale * (b[0] * gwk[0] + b[1] * gwk[1])
        })
        .collect();
    let field = ScalarField::new(*u.grid(), values)?;
    let mask = interior_mask(u, 3.0 * u.grid().h(), 2);
    Ok(MaskedField { field, mask })
}
