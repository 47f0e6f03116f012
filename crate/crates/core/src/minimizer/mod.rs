//! Discrete local minimizers of `J_F` with Dirichlet data: annealed
//! smoothed-penalty descent followed by a polish on the positivity set.

mod certificate;
mod config;
mod descent;
mod interface;
mod polish;
mod problem;

pub use certificate::{bump, energy_certificate, perturbation_delta, Certificate, PerturbationOutcome};
pub use config::{PolishReport, SolveResult, SolverConfig, StageRecord};
pub use descent::penalized_energy;
pub use interface::{heaviside, heaviside_d, interface_level};
pub use polish::harmonic_polish;
pub use problem::{BoundaryData, Domain, NodeRole, Problem};

use crate::error::Result;
use crate::field::ScalarField;

/// Annealed descent on `J_ε` through the `ε` schedule. Wide stages run on
/// the coarsest grid with `2h ≤ ε` when `cfg.multilevel` is set. The result
/// carries the raw penalized field in both `u` and `penalized`; its free
/// boundary is the level `σ ε_min`.
pub fn minimize_penalized(p: &Problem, cfg: &SolverConfig) -> Result<SolveResult> {
    let h = p.grid().h();
    cfg.validate(h)?;
    let mut levels = vec![p.clone()];
    if cfg.multilevel {
        while let Some(c) = levels.last().unwrap().coarsened() {
            levels.push(c);
        }
    }
    let schedule = cfg.schedule(h);
    let level_for = |eps: f64| {
        (0..levels.len()).rev().find(|&l| 2.0 * levels[l].grid().h() <= eps * (1.0 + 1e-12)).unwrap_or(0)
    };
    let mut current = level_for(schedule[0]);
    let mut u = levels[current].initial_field().into_values();
    let mut stages = Vec::with_capacity(schedule.len());
    for &eps in &schedule {
        let target = level_for(eps).min(current);
        while current > target {
            let cg = *levels[current].grid();
            u = descent::prolong(&u, cg.nx(), cg.ny());
            current -= 1;
            levels[current].impose(&mut u);
        }
        let lp = &levels[current];
        stages.push(descent::run_stage(lp, &mut u, eps, cfg));
        for v in &mut u {
            *v = v.max(0.0);
        }
    }
    while current > 0 {
        let cg = *levels[current].grid();
        u = descent::prolong(&u, cg.nx(), cg.ny());
        current -= 1;
        levels[current].impose(&mut u);
    }
    let last = stages.last().expect("schedule is never empty");
    let eps_final = last.eps;
    let level = interface_level(&p.params().density, p.params().lambda)? * eps_final;
    let penalized = ScalarField::new(*p.grid(), u)?;
    let sharp = penalized.map(|v| (v - level).max(0.0))?;
    Ok(SolveResult {
        u: penalized.clone(),
        penalized,
        converged: last.converged,
        grad_norm: last.grad_norm,
        free_boundary: p.free_boundary(&sharp),
        stages,
        polish: None,
        interface_level: level,
    })
}

/// Descent followed by [`harmonic_polish`] on `{u > σ ε_min}`.
pub fn solve(p: &Problem, cfg: &SolverConfig) -> Result<SolveResult> {
    let mut res = minimize_penalized(p, cfg)?;
    let (u, report) = harmonic_polish(&res.penalized, p, res.interface_level, cfg)?;
    res.converged &= report.converged;
    res.free_boundary = p.free_boundary(&u);
    res.u = u;
    res.polish = Some(report);
    Ok(res)
}
