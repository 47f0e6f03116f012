use super::density::{BernoulliParams, EnergyDensity};
use crate::field::{cell_positive_area, GridSpec, Level, Region, ScalarField};

/// Squared gradient of a cell from its corner values: the mean of the two
/// x-edge and the two y-edge difference quotients, squared. For `F(t) = t`
/// this reproduces the five-point Laplacian as Euler-Lagrange operator.
#[inline]
pub(crate) fn cell_grad_sq(v00: f64, v10: f64, v01: f64, v11: f64, h: f64) -> f64 {
    let (a, b) = (v10 - v00, v11 - v01);
    let (c, d) = (v01 - v00, v11 - v10);
    0.5 * (a * a + b * b + c * c + d * d) / (h * h)
}

#[inline]
pub(crate) fn cell_values(u: &[f64], g: &GridSpec, i: usize, j: usize) -> (f64, f64, f64, f64) {
    let k = g.idx(i, j);
    let nx = g.nx();
    (u[k], u[k + 1], u[k + nx], u[k + nx + 1])
}

/// `∫ F(|∇u|²)` over the cells of `region`, one-point quadrature per cell.
pub fn dirichlet_energy<D: EnergyDensity + ?Sized>(u: &ScalarField, d: &D, region: &Region) -> f64 {
    let g = *u.grid();
    let h = g.h();
    let v = u.values();
    let mut total = 0.0;
    for j in 0..g.ny() - 1 {
        for i in 0..g.nx() - 1 {
            if !region.contains_cell(&g, i, j) {
                continue;
            }
            let (a, b, c, e) = cell_values(v, &g, i, j);
            total += h * h * d.f(cell_grad_sq(a, b, c, e, h));
        }
    }
    total
}

/// `|{u > 0}|` within `region`, from the subcell positivity polygons.
pub fn positive_area(u: &ScalarField, region: &Region) -> f64 {
    let g = *u.grid();
    let level = Level::new(u);
    let mut total = 0.0;
    for j in 0..g.ny() - 1 {
        for i in 0..g.nx() - 1 {
            if region.contains_cell(&g, i, j) {
                total += cell_positive_area(&level, i, j);
            }
        }
    }
    total
}

/// Sharp functional `J_F(u) = ∫ F(|∇u|²) + λ |{u > 0}|` restricted to `region`.
pub fn energy(u: &ScalarField, params: &BernoulliParams, region: &Region) -> f64 {
    dirichlet_energy(u, &params.density, region) + params.lambda * positive_area(u, region)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::Density;

    #[test]
    fn zero_field_has_zero_energy() {
        let g = GridSpec::square(-1.0, 1.0, 0.125).unwrap();
        let u = ScalarField::zeros(g);
        assert_eq!(energy(&u, &BernoulliParams::classical(), &Region::Whole), 0.0);
    }

    #[test]
    fn halfplane_energy_is_four() {
        for h in [1.0 / 16.0, 1.0 / 64.0] {
            let g = GridSpec::square(-1.0, 1.0, h).unwrap();
            let u = ScalarField::from_fn(g, |p| p[0].max(0.0)).unwrap();
            let j = energy(&u, &BernoulliParams::classical(), &Region::Whole);
            assert!((j - 4.0).abs() <= 2.0 * h, "h = {h}: {j}");
        }
    }

    #[test]
    fn perturbed_energy_tends_to_linear() {
        let g = GridSpec::square(-1.0, 1.0, 1.0 / 32.0).unwrap();
        let u = ScalarField::from_fn(g, |p| (p[0] + 0.3 * p[1] * p[1]).max(0.0)).unwrap();
        let lin = dirichlet_energy(&u, &Density::Linear, &Region::Whole);
        let mut prev = f64::INFINITY;
        for a in [0.5, 0.1, 0.01, 0.001] {
            let d = Density::perturbed(a).unwrap();
            let diff = (dirichlet_energy(&u, &d, &Region::Whole) - lin).abs();
            // F_a - F_0 = a (t - ln(1+t)) <= a t
            assert!(diff <= a * lin + 1e-12);
            assert!(diff < prev);
            prev = diff;
        }
    }

    #[test]
    fn energy_invariant_under_quarter_turn() {
        let g = GridSpec::square(-1.0, 1.0, 1.0 / 16.0).unwrap();
        let u = ScalarField::from_fn(g, |p| (p[0] + 0.4 * p[1] * p[1] - 0.1).max(0.0)).unwrap();
        let params = BernoulliParams::new(1.0, Density::perturbed(0.5).unwrap()).unwrap();
        let a = energy(&u, &params, &Region::Whole);
        let b = energy(&u.rotated_90().unwrap(), &params, &Region::Whole);
        assert!((a - b).abs() <= 1e-12 * a.abs(), "{a} vs {b}");
    }
}
