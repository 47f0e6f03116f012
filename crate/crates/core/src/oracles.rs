//! Exact one-phase solutions and brute-force references.
//!
//! Closed forms live here only; everything downstream sees grid samples.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{invalid, LabError, Result};
use crate::field::{norm, sub, GridSpec, Point, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum FbShape {
    /// `{x : x·normal = 0}`
    Line { normal: Point },
    /// `{|x − center| = radius}`
    Circle { center: Point, radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Oracle {
    /// `max(x·e, 0)`
    HalfPlane { e: Point },
    /// `|x·e|`, a degree-one cone that is a critical point but not a minimizer.
    TwoPlane { e: Point },
    /// `ρ ln(|x| / ρ)` outside `B_ρ`, zero inside; exact for `F(t) = t`, `λ = 1`
    /// with boundary value `ρ ln(R / ρ)` on `|x| = R`.
    DeadCore { center: Point, rho: f64, outer: f64 },
}

fn unit(e: Point) -> Result<Point> {
    let n = norm(e);
    if !(n > 0.0 && n.is_finite()) {
        return invalid("direction must be a non-zero finite vector");
    }
    Ok([e[0] / n, e[1] / n])
}

pub fn halfplane(e: Point) -> Result<Oracle> {
    Ok(Oracle::HalfPlane { e: unit(e)? })
}

pub fn twoplane(e: Point) -> Result<Oracle> {
    Ok(Oracle::TwoPlane { e: unit(e)? })
}

/// Dead core for boundary value 1 on `|x| = R`: the root of `ρ ln(R/ρ) = 1`
/// in `(0, R/e]`. Requires `R ≥ e`.
pub fn deadcore(outer: f64) -> Result<Oracle> {
    let rho = core_radius(outer, 1.0, Branch::Inner)?;
    Ok(Oracle::DeadCore { center: [0.0, 0.0], rho, outer })
}

/// Dead core with a prescribed core radius; valid on any disk of radius `outer ≥ ρ`.
pub fn deadcore_with_radius(rho: f64, outer: f64) -> Result<Oracle> {
    deadcore_at([0.0, 0.0], rho, outer)
}

/// Dead core of radius `rho` centred at `center`.
pub fn deadcore_at(center: Point, rho: f64, outer: f64) -> Result<Oracle> {
    if !(rho > 0.0 && outer >= rho && outer.is_finite() && center.iter().all(|c| c.is_finite())) {
        return invalid(format!("need 0 < ρ ≤ R, got ρ = {rho}, R = {outer}"));
    }
    Ok(Oracle::DeadCore { center, rho, outer })
}

/// Root branch of `ρ ln(R/ρ) = g`: `Inner` on `(0, R/e]`, `Outer` on `[R/e, R)`.
/// The outer root is the locally stable one for the radial energy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Inner,
    Outer,
}

pub fn core_radius(outer: f64, value: f64, branch: Branch) -> Result<f64> {
    if !(outer > 0.0 && value > 0.0 && outer.is_finite() && value.is_finite()) {
        return invalid(format!("need R > 0 and g > 0, got R = {outer}, g = {value}"));
    }
    let f = |rho: f64| rho * (outer / rho).ln();
    let peak = outer / E;
    if value > f(peak) + 1e-12 {
        return invalid(format!(
            "no dead core: boundary value {value} exceeds R/e = {peak} (outer radius R = {outer} too small)"
        ));
    }
    // f increases on (0, R/e] and decreases on [R/e, R)
    let (mut lo, mut hi) = match branch {
        Branch::Inner => (0.0, peak),
        Branch::Outer => (peak, outer),
    };
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = f(mid) < value;
        match (branch, below) {
            (Branch::Inner, true) | (Branch::Outer, false) => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(0.5 * (lo + hi))
}

impl Oracle {
    /// Parses `halfplane:ex`, `halfplane:ey`, `halfplane:theta=<rad>`, the same
    /// for `twoplane`, `deadcore:R=<outer>` or `deadcore:rho=<core>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let bad = || LabError::InvalidInput(format!("unknown oracle `{spec}`"));
        let (name, arg) = spec.split_once(':').ok_or_else(bad)?;
        let dir = |arg: &str| -> Result<Point> {
            match arg {
                "ex" => Ok([1.0, 0.0]),
                "ey" => Ok([0.0, 1.0]),
                _ => {
                    let th: f64 = arg
                        .strip_prefix("theta=")
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(bad)?;
                    Ok([th.cos(), th.sin()])
                }
            }
        };
        match name {
            "halfplane" => halfplane(dir(arg)?),
            "twoplane" => twoplane(dir(arg)?),
            "deadcore" => {
                if let Some(v) = arg.strip_prefix("R=") {
                    deadcore(v.parse().map_err(|_| bad())?)
                } else if let Some(v) = arg.strip_prefix("rho=") {
                    let rho: f64 = v.parse().map_err(|_| bad())?;
                    deadcore_with_radius(rho, f64::MAX)
                } else {
                    Err(bad())
                }
            }
            _ => Err(bad()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Oracle::HalfPlane { e } => format!("halfplane:theta={}", e[1].atan2(e[0])),
            Oracle::TwoPlane { e } => format!("twoplane:theta={}", e[1].atan2(e[0])),
            Oracle::DeadCore { rho, .. } => format!("deadcore:rho={rho}"),
        }
    }

    pub fn value(&self, p: Point) -> f64 {
        match *self {
            Oracle::HalfPlane { e } => (p[0] * e[0] + p[1] * e[1]).max(0.0),
            Oracle::TwoPlane { e } => (p[0] * e[0] + p[1] * e[1]).abs(),
            Oracle::DeadCore { center, rho, .. } => {
                let r = norm(sub(p, center));
                if r <= rho {
                    0.0
                } else {
                    rho * (r / rho).ln()
                }
            }
        }
    }

    /// Gradient on the positivity set (one-sided limit from `{u > 0}` on the free boundary).
    pub fn gradient(&self, p: Point) -> Point {
        match *self {
            Oracle::HalfPlane { e } => e,
            Oracle::TwoPlane { e } => {
                if p[0] * e[0] + p[1] * e[1] >= 0.0 {
                    e
                } else {
                    [-e[0], -e[1]]
                }
            }
            Oracle::DeadCore { center, rho, .. } => {
                let d = sub(p, center);
                let r = norm(d).max(rho);
                let s = rho / (r * r);
                [s * d[0], s * d[1]]
            }
        }
    }

    /// `∂²u/∂N²` on the free boundary along the inward normal.
    pub fn normal_second_derivative(&self) -> f64 {
        match *self {
            Oracle::HalfPlane { .. } | Oracle::TwoPlane { .. } => 0.0,
            Oracle::DeadCore { rho, .. } => -1.0 / rho,
        }
    }

    pub fn free_boundary(&self) -> FbShape {
        match *self {
            Oracle::HalfPlane { e } | Oracle::TwoPlane { e } => FbShape::Line { normal: e },
            Oracle::DeadCore { center, rho, .. } => FbShape::Circle { center, radius: rho },
        }
    }

    pub fn is_valid_at(&self, p: Point) -> bool {
        match *self {
            Oracle::DeadCore { center, outer, .. } => norm(sub(p, center)) <= outer,
            _ => true,
        }
    }

    /// Homogeneous of degree one about the origin.
    pub fn is_cone(&self) -> bool {
        !matches!(self, Oracle::DeadCore { .. })
    }

    /// `w = ∇u·(x − x0) − u` in closed form, zero off the positivity set.
    pub fn w(&self, p: Point, x0: Point) -> f64 {
        if self.value(p) <= 0.0 {
            return 0.0;
        }
        let g = self.gradient(p);
        g[0] * (p[0] - x0[0]) + g[1] * (p[1] - x0[1]) - self.value(p)
    }

    pub fn sample(&self, grid: GridSpec) -> Result<ScalarField> {
        ScalarField::from_fn(grid, |p| self.value(p))
    }

    /// Points on the free boundary, `n` of them, inside `[-extent, extent]^2`.
    pub fn boundary_points(&self, n: usize, extent: f64) -> Vec<Point> {
        match self.free_boundary() {
            FbShape::Line { normal } => {
                let t = [-normal[1], normal[0]];
                (0..n)
                    .map(|k| {
                        let s = extent * (2.0 * k as f64 / (n.max(2) - 1) as f64 - 1.0);
                        [s * t[0], s * t[1]]
                    })
                    .collect()
            }
            FbShape::Circle { center, radius } => (0..n)
                .map(|k| {
                    let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    [center[0] + radius * th.cos(), center[1] + radius * th.sin()]
                })
                .collect(),
        }
    }

    /// Largest `||∇u| − λ*|` over `n` free-boundary samples.
    pub fn fb_gradient_defect(&self, lambda_star: f64, n: usize) -> f64 {
        self.boundary_points(n, 1.0)
            .into_iter()
            .map(|p| (norm(self.gradient(p)) - lambda_star).abs())
            .fold(0.0, f64::max)
    }
}

/// `h² · #{nodes with u > 0 in B_r(center)}`.
pub fn pixel_measure(u: &ScalarField, center: Point, r: f64) -> f64 {
    let g = u.grid();
    let mut count = 0usize;
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let p = g.point(i, j);
            if u.at(i, j) > 0.0 && norm([p[0] - center[0], p[1] - center[1]]) <= r {
                count += 1;
            }
        }
    }
    count as f64 * g.h() * g.h()
}

/// Derivative of `k` with respect to `r` over an increasing radius list:
/// centred differences inside, one-sided at the ends.
pub fn dk_fd(radii: &[f64], k: &[f64]) -> Vec<f64> {
    let n = radii.len();
    assert_eq!(n, k.len());
    if n < 2 {
        return vec![f64::NAN; n];
    }
    (0..n)
        .map(|i| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (k[b] - k[a]) / (radii[b] - radii[a])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halfplane_values() {
        let o = halfplane([1.0, 0.0]).unwrap();
        assert_eq!(o.value([0.5, 0.3]), 0.5);
        assert_eq!(o.value([-0.5, 0.3]), 0.0);
        assert_eq!(o.w([0.5, 0.3], [0.0, 0.0]), 0.0);
    }

    #[test]
    fn deadcore_at_e_has_unit_core() {
        let o = deadcore(E).unwrap();
        let Oracle::DeadCore { rho, .. } = o else { unreachable!() };
        assert!((rho * (E / rho).ln() - 1.0).abs() <= 1e-12);
        assert!((rho - 1.0).abs() < 1e-6);
        assert!(o.fb_gradient_defect(1.0, 64) < 1e-12);
        assert!((o.normal_second_derivative() + 1.0 / rho).abs() < 1e-12);
    }

    #[test]
    fn deadcore_rejects_small_outer_radius() {
        assert!(deadcore(2.5).is_err());
    }

    #[test]
    fn both_branches_solve() {
        for b in [Branch::Inner, Branch::Outer] {
            let rho = core_radius(1.0, 0.3, b).unwrap();
            assert!((rho * (1.0 / rho).ln() - 0.3).abs() < 1e-12, "{b:?}");
        }
        let inner = core_radius(1.0, 0.3, Branch::Inner).unwrap();
        let outer = core_radius(1.0, 0.3, Branch::Outer).unwrap();
        assert!(inner < 1.0 / E && outer > 1.0 / E);
    }

    #[test]
    fn cones_have_unit_gradient_on_boundary() {
        for o in [halfplane([0.3, 0.7]).unwrap(), twoplane([0.0, 1.0]).unwrap()] {
            assert!(o.fb_gradient_defect(1.0, 50) < 1e-12);
            assert!(o.is_cone());
        }
    }

    #[test]
    fn pixel_measure_references() {
        let h = 1.0 / 64.0;
        let g = GridSpec::square(-1.0, 1.0, h).unwrap();
        let ones = ScalarField::from_fn(g, |_| 1.0).unwrap();
        let r = 0.7;
        let pi = std::f64::consts::PI;
        assert!((pixel_measure(&ones, [0.0, 0.0], r) - pi * r * r).abs() <= 4.0 * pi * r * h);
        let half = halfplane([1.0, 0.0]).unwrap().sample(g).unwrap();
        assert!((pixel_measure(&half, [0.0, 0.0], r) - 0.5 * pi * r * r).abs() <= 4.0 * r * h);
    }

    #[test]
    fn dk_fd_of_quadratic() {
        let r: Vec<f64> = (1..=10).map(|k| 0.1 * k as f64).collect();
        let k: Vec<f64> = r.iter().map(|x| x * x).collect();
        let d = dk_fd(&r, &k);
        for i in 1..9 {
            assert!((d[i] - 2.0 * r[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!(Oracle::parse("halfplane:ex").unwrap(), Oracle::HalfPlane { e: [1.0, 0.0] });
        assert!(matches!(Oracle::parse("deadcore:R=2.718281828459045").unwrap(), Oracle::DeadCore { .. }));
        assert!(Oracle::parse("deadcore:R=1").is_err());
        assert!(Oracle::parse("wedge:ex").is_err());
    }
}
