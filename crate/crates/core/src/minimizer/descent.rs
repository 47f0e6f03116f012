//! Penalized descent: nonlinear SOR on
//! `J_ε(u) = Σ_cells h² F(|∇u|²) + λ Σ_nodes h² H_ε(u)`
//! with four-colour ordering, projection onto `u ≥ 0` and a backtracking
//! safeguard on every node update, so each sweep is a monotone descent step.

use super::config::{SolverConfig, StageRecord};
use super::interface::{heaviside, heaviside_d};
use super::problem::{NodeRole, Problem};
use crate::exec::Exec;
use crate::functional::{cell_grad_sq, cell_values, Density, EnergyDensity};

pub(crate) const COLOURS: [(usize, usize); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// `2 / (1 + sin(π / (n − 1)))` for the longer grid side.
pub(crate) fn optimal_omega(nx: usize, ny: usize) -> f64 {
    let n = nx.max(ny) as f64;
    2.0 / (1.0 + (std::f64::consts::PI / (n - 1.0)).sin())
}

/// Neighbour values in the order W, E, S, N, SW, SE, NW, NE.
#[inline]
fn gather(u: &[f64], nx: usize, k: usize) -> [f64; 8] {
    [u[k - 1], u[k + 1], u[k - nx], u[k + nx], u[k - nx - 1], u[k - nx + 1], u[k + nx - 1], u[k + nx + 1]]
}

/// Energy of the node as a function of its own value `s`.
struct NodeEnergy<'a> {
    density: &'a Density,
    linear: bool,
    nb: [f64; 8],
    /// Per adjacent cell: horizontal and vertical partner and the squared
    /// differences of the two edges not touching the node.
    cells: [(f64, f64, f64); 4],
    h2: f64,
    lam_h2: f64,
    eps: f64,
}

impl<'a> NodeEnergy<'a> {
    fn new(density: &'a Density, nb: [f64; 8], h: f64, lambda: f64, eps: f64) -> Self {
        let [w, e, s, n, sw, se, nw, ne] = nb;
        let sq = |x: f64| x * x;
        let cells = [
            (w, s, sq(s - sw) + sq(w - sw)),
            (e, s, sq(se - s) + sq(e - se)),
            (w, n, sq(nw - w) + sq(n - nw)),
            (e, n, sq(ne - n) + sq(ne - e)),
        ];
        Self { density, linear: density.is_linear(), nb, cells, h2: h * h, lam_h2: lambda * h * h, eps }
    }

    fn value(&self, s: f64) -> f64 {
        let pen = self.lam_h2 * heaviside(s, self.eps);
        if self.linear {
            let [w, e, so, n, ..] = self.nb;
            return (s - w) * (s - w) + (s - e) * (s - e) + (s - so) * (s - so) + (s - n) * (s - n) + pen;
        }
        let mut acc = 0.0;
        for &(a, b, r) in &self.cells {
            let t = 0.5 * ((s - a) * (s - a) + (s - b) * (s - b) + r) / self.h2;
            acc += self.h2 * self.density.f(t);
        }
        acc + pen
    }

    /// Derivative and a positive curvature estimate of the Dirichlet part.
    fn slope(&self, s: f64) -> (f64, f64) {
        let pen = self.lam_h2 * heaviside_d(s, self.eps);
        if self.linear {
            let [w, e, so, n, ..] = self.nb;
            return (2.0 * (4.0 * s - w - e - so - n) + pen, 8.0);
        }
        let (mut d1, mut d2) = (pen, 0.0);
        for &(a, b, r) in &self.cells {
            let q = (s - a) + (s - b);
            let t = 0.5 * ((s - a) * (s - a) + (s - b) * (s - b) + r) / self.h2;
            let f1 = self.density.df(t);
            d1 += f1 * q;
            d2 += 2.0 * f1 + self.density.d2f(t) * q * q / self.h2;
        }
        (d1, d2)
    }
}

/// One safeguarded relaxation of a node. Returns the new value and the
/// length of the unrelaxed projected step.
#[inline]
fn relax_node(ne: &NodeEnergy<'_>, s: f64, omega: f64) -> (f64, f64) {
    let (d1, d2) = ne.slope(s);
    let full = (s - d1 / d2).max(0.0);
    let step = (full - s).abs();
    if step == 0.0 {
        return (s, 0.0);
    }
    let target = (s + omega * (full - s)).max(0.0);
    let base = ne.value(s);
    let mut t = 1.0;
    for _ in 0..30 {
        let cand = s + t * (target - s);
        if ne.value(cand) <= base {
            return (cand, step);
        }
        t *= 0.5;
    }
    (s, step)
}

/// Penalized energy `J_ε` over active cells and non-exterior nodes.
pub fn penalized_energy(p: &Problem, u: &[f64], eps: f64, exec: Exec) -> f64 {
    let g = *p.grid();
    let h = g.h();
    let d = p.params().density;
    let lam = p.params().lambda;
    let rows = exec.map(g.ny(), |j| {
        let mut acc = 0.0;
        for i in 0..g.nx() {
            let k = g.idx(i, j);
            if p.roles()[k] != NodeRole::Exterior {
                acc += lam * h * h * heaviside(u[k], eps);
            }
            if i + 1 < g.nx() && j + 1 < g.ny() && p.cell_active(i, j) {
                let (a, b, c, e) = cell_values(u, &g, i, j);
                acc += h * h * d.f(cell_grad_sq(a, b, c, e, h));
            }
        }
        acc
    });
    rows.iter().sum()
}

/// Relaxes `u` at fixed `ε` until the largest node step drops below
/// `cfg.tol_grad` or `cfg.max_iter` sweeps have run.
pub(crate) fn run_stage(p: &Problem, u: &mut [f64], eps: f64, cfg: &SolverConfig) -> StageRecord {
    let g = *p.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let h = g.h();
    let omega = cfg.omega.unwrap_or_else(|| optimal_omega(nx, ny));
    let density = p.params().density;
    let lambda = p.params().lambda;
    let exec = cfg.exec;
    let mut energies = vec![penalized_energy(p, u, eps, exec)];
    let mut grad_norm = f64::INFINITY;
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < cfg.max_iter {
        sweeps += 1;
        let mut gmax: f64 = 0.0;
        for (ci, cj) in COLOURS {
            let rows: Vec<usize> = (1..ny - 1).filter(|j| j % 2 == cj).collect();
            let frozen: &[f64] = u;
            let updates = exec.map_slice(&rows, |&j| {
                let mut out = Vec::with_capacity(nx / 2);
                let mut gm: f64 = 0.0;
                let start = if ci == 0 { 2 } else { 1 };
                for i in (start..nx - 1).step_by(2) {
                    let k = g.idx(i, j);
                    if p.roles()[k] != NodeRole::Free {
                        continue;
                    }
                    let ne = NodeEnergy::new(&density, gather(frozen, nx, k), h, lambda, eps);
                    let (v, step) = relax_node(&ne, frozen[k], omega);
                    gm = gm.max(step);
                    out.push((k, v));
                }
                (out, gm)
            });
            for (out, gm) in updates {
                gmax = gmax.max(gm);
                for (k, v) in out {
                    u[k] = v;
                }
            }
        }
        grad_norm = gmax;
        if gmax <= cfg.tol_grad {
            converged = true;
        }
        if converged || sweeps % cfg.record_every == 0 {
            energies.push(penalized_energy(p, u, eps, exec));
        }
        if converged {
            break;
        }
    }
    if !converged && sweeps % cfg.record_every != 0 {
        energies.push(penalized_energy(p, u, eps, exec));
    }
    StageRecord { eps, h, sweeps, energies, converged, grad_norm }
}

/// Bilinear prolongation onto the grid with half the spacing.
pub(crate) fn prolong(coarse: &[f64], cnx: usize, cny: usize) -> Vec<f64> {
    let (nx, ny) = (2 * cnx - 1, 2 * cny - 1);
    let c = |i: usize, j: usize| coarse[j * cnx + i];
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let (ci, cj) = (i / 2, j / 2);
            out[j * nx + i] = match (i % 2, j % 2) {
                (0, 0) => c(ci, cj),
                (1, 0) => 0.5 * (c(ci, cj) + c(ci + 1, cj)),
                (0, 1) => 0.5 * (c(ci, cj) + c(ci, cj + 1)),
                _ => 0.25 * (c(ci, cj) + c(ci + 1, cj) + c(ci, cj + 1) + c(ci + 1, cj + 1)),
            };
        }
    }
    out
}
