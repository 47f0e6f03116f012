//! Relaxation of `a_ij u_ij = 0` on a frozen positivity set.
//!
//! Nodes of `{u > level}` are unknowns. Where an axis neighbour lies outside,
//! the zero level is placed at the fractional distance `θ h` read off the
//! input, and the second difference on that axis uses the Shortley–Weller
//! three-point formula with the boundary value 0 there.

use super::config::{PolishReport, SolverConfig};
use super::descent::{optimal_omega, COLOURS};
use super::problem::{NodeRole, Problem};
use crate::error::Result;
use crate::field::ScalarField;
use crate::functional::{coefficient_at, Density};

/// Nodes closer than this fraction of a cell to the level set are held at
/// their excess instead of relaxed.
const THETA_MIN: f64 = 0.05;

#[derive(Clone, Copy, Debug)]
struct PNode {
    k: usize,
    /// Distances to W, E, S, N in units of `h`; 1 means the grid neighbour.
    theta: [f64; 4],
}

/// Distance fraction from a node with excess `vk > 0` towards a neighbour
/// with excess `vn ≤ 0`; `vkk` is the excess one node beyond `k` on the far side.
fn crossing_fraction(vk: f64, vn: f64, vkk: Option<f64>) -> f64 {
    if vn < 0.0 {
        return (vk / (vk - vn)).clamp(0.0, 1.0);
    }
    match vkk {
        Some(vkk) => {
            let ghost = 2.0 * vk - vkk;
            if ghost < 0.0 {
                (vk / (vk - ghost)).clamp(0.0, 1.0)
            } else {
                1.0
            }
        }
        None => 1.0,
    }
}

struct Layout {
    /// Per colour, per row: the active nodes.
    colours: Vec<Vec<Vec<PNode>>>,
    active: usize,
}

fn build_layout(u: &ScalarField, p: &Problem, level: f64) -> (Layout, Vec<f64>) {
    let g = *u.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let v = u.values();
    let ex = |k: usize| v[k] - level;
    let free = |k: usize| p.roles()[k] == NodeRole::Free;
    let inside: Vec<bool> = (0..g.len()).map(|k| free(k) && ex(k) > 0.0).collect();
    let offsets: [isize; 4] = [-1, 1, -(nx as isize), nx as isize];
    let theta_of = |k: usize, inside: &[bool]| -> [f64; 4] {
        let mut th = [1.0; 4];
        for (d, &off) in offsets.iter().enumerate() {
            let n = (k as isize + off) as usize;
            if !free(n) || inside[n] {
                continue;
            }
            let kk = k as isize - off;
            let (i, j) = g.ij(k);
            let far_ok = match d {
                0 => i + 1 < nx,
                1 => i >= 1,
                2 => j + 1 < ny,
                _ => j >= 1,
            };
            let vkk = (far_ok && inside_or_fixed(kk as usize, inside, p)).then(|| ex(kk as usize));
            th[d] = crossing_fraction(ex(k), ex(n).min(0.0), vkk);
        }
        th
    };
    let held: Vec<bool> =
        (0..g.len()).map(|k| inside[k] && theta_of(k, &inside).iter().any(|&t| t < THETA_MIN)).collect();
    let mut work = v.to_vec();
    for k in 0..g.len() {
        match p.roles()[k] {
            NodeRole::Free if held[k] => work[k] = ex(k),
            NodeRole::Free if !inside[k] => work[k] = 0.0,
            NodeRole::Exterior => work[k] = 0.0,
            NodeRole::Dirichlet => work[k] = p.g().values()[k],
            _ => {}
        }
    }
    let mut colours = vec![vec![Vec::new(); ny]; 4];
    let mut active = 0;
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let k = g.idx(i, j);
            if !inside[k] || held[k] {
                continue;
            }
            let mut theta = theta_of(k, &inside);
            for t in &mut theta {
                *t = t.max(THETA_MIN);
            }
            let c = COLOURS.iter().position(|&(a, b)| a == i % 2 && b == j % 2).unwrap();
            colours[c][j].push(PNode { k, theta });
            active += 1;
        }
    }
    for c in &mut colours {
        c.retain(|row| !row.is_empty());
    }
    (Layout { colours, active }, work)
}

fn inside_or_fixed(k: usize, inside: &[bool], p: &Problem) -> bool {
    inside[k] || p.roles()[k] == NodeRole::Dirichlet
}

/// Local operator at one node: returns `(residual, off-diagonal sum, diagonal)`
/// so that `residual = offdiag − diag · u0`.
#[inline]
fn local(u: &[f64], nx: usize, node: &PNode, h: f64, density: &Density, linear: bool) -> (f64, f64, f64) {
    let k = node.k;
    let [tw, te, ts, tn] = node.theta;
    let nb = |t: f64, idx: usize| if t < 1.0 { 0.0 } else { u[idx] };
    let (uw, ue, us, un) = (nb(tw, k - 1), nb(te, k + 1), nb(ts, k - nx), nb(tn, k + nx));
    let u0 = u[k];
    let h2 = h * h;
    let aw = 2.0 / ((tw + te) * tw * h2);
    let ae = 2.0 / ((tw + te) * te * h2);
    let as_ = 2.0 / ((ts + tn) * ts * h2);
    let an = 2.0 / ((ts + tn) * tn * h2);
    let (axx, axy, ayy) = if linear {
        (1.0, 0.0, 1.0)
    } else {
        let (dm, dp) = (tw * h, te * h);
        let gx = (dm * dm * (ue - u0) + dp * dp * (u0 - uw)) / (dm * dp * (dm + dp));
        let (dm, dp) = (ts * h, tn * h);
        let gy = (dm * dm * (un - u0) + dp * dp * (u0 - us)) / (dm * dp * (dm + dp));
        let a = coefficient_at(density, [gx, gy]);
        (a.xx, a.xy, a.yy)
    };
    let mut off = axx * (aw * uw + ae * ue) + ayy * (as_ * us + an * un);
    let diag = axx * (aw + ae) + ayy * (as_ + an);
    if axy != 0.0 {
        off += 2.0 * axy * mixed(u, nx, node, h);
    }
    (off - diag * u0, off, diag)
}

/// `u_xy` from the full cross stencil when every node is usable, otherwise
/// from one usable quadrant, otherwise 0.
fn mixed(u: &[f64], nx: usize, node: &PNode, h: f64) -> f64 {
    let k = node.k;
    let [tw, te, ts, tn] = node.theta;
    let full = |t: f64| t >= 1.0;
    let (sw, se, nw, ne) = (u[k - nx - 1], u[k - nx + 1], u[k + nx - 1], u[k + nx + 1]);
    if node.theta.iter().all(|&t| full(t)) && sw > 0.0 && se > 0.0 && nw > 0.0 && ne > 0.0 {
        return (ne - nw - se + sw) / (4.0 * h * h);
    }
    let u0 = u[k];
    let quads = [
        (te, tn, u[k + 1], u[k + nx], ne, 1.0),
        (tw, tn, u[k - 1], u[k + nx], nw, -1.0),
        (te, ts, u[k + 1], u[k - nx], se, -1.0),
        (tw, ts, u[k - 1], u[k - nx], sw, 1.0),
    ];
    for (tx, ty, ux, uy, ud, sign) in quads {
        if full(tx) && full(ty) && ux > 0.0 && uy > 0.0 && ud > 0.0 {
            return sign * (ud - ux - uy + u0) / (h * h);
        }
    }
    0.0
}

fn sup_residual(u: &[f64], nx: usize, layout: &Layout, h: f64, density: &Density, cfg: &SolverConfig) -> f64 {
    let linear = density.is_linear();
    let mut sup: f64 = 0.0;
    for rows in &layout.colours {
        let part = cfg.exec.map_slice(rows, |row| {
            row.iter().map(|n| local(u, nx, n, h, density, linear).0.abs()).fold(0.0, f64::max)
        });
        sup = part.into_iter().fold(sup, f64::max);
    }
    sup
}

/// Holds `{u > level}` fixed and relaxes `a_ij u_ij = 0` on its interior
/// nodes (nonlinear Gauss–Seidel with over-relaxation, coefficients lagged
/// one node update), with `u = 0` off the set and `u = g` on Dirichlet nodes.
/// Stops at sup-residual `≤ cfg.tol_polish`, at the sweep cap, or when the
/// residual stalls for 2000 sweeps.
pub fn harmonic_polish(u: &ScalarField, p: &Problem, level: f64, cfg: &SolverConfig) -> Result<(ScalarField, PolishReport)> {
    let g = *p.grid();
    if u.grid() != &g {
        return crate::error::invalid("field and problem grids differ");
    }
    let (nx, h) = (g.nx(), g.h());
    let density = p.params().density;
    let linear = density.is_linear();
    let (layout, mut work) = build_layout(u, p, level);
    let omega = cfg.omega.unwrap_or_else(|| optimal_omega(g.nx(), g.ny()));
    let initial = sup_residual(&work, nx, &layout, h, &density, cfg);
    let mut residual = initial;
    let mut best = initial;
    let mut best_at = 0;
    let mut sweeps = 0;
    let check = 10;
    while residual > cfg.tol_polish && sweeps < cfg.polish_max_sweeps {
        for rows in &layout.colours {
            let frozen: &[f64] = &work;
            let updates = cfg.exec.map_slice(rows, |row| {
                row.iter()
                    .map(|n| {
                        let (_, off, diag) = local(frozen, nx, n, h, &density, linear);
                        let u0 = frozen[n.k];
                        (n.k, (u0 + omega * (off / diag - u0)).max(0.0))
                    })
                    .collect::<Vec<_>>()
            });
            for row in updates {
                for (k, v) in row {
                    work[k] = v;
                }
            }
        }
        sweeps += 1;
        if sweeps % check == 0 {
            residual = sup_residual(&work, nx, &layout, h, &density, cfg);
            if residual < 0.99 * best {
                best = residual;
                best_at = sweeps;
            } else if sweeps - best_at > 2000 {
                break;
            }
        }
    }
    residual = sup_residual(&work, nx, &layout, h, &density, cfg);
    let report = PolishReport {
        sweeps,
        initial_residual: initial,
        residual,
        converged: residual <= cfg.tol_polish,
        active_nodes: layout.active,
    };
    Ok((ScalarField::new(g, work)?, report))
}
