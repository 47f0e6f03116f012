use serde::Serialize;

use crate::exec::Exec;
use crate::field::{FreeBoundary, ScalarField};

/// Parameters of the penalized descent and the polish.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    /// First smoothing width `ε₀`.
    pub eps0: f64,
    /// `ε_{k+1} = factor · ε_k`.
    pub eps_factor: f64,
    /// Floor of the schedule as a multiple of the fine `h` (at least 2).
    pub eps_min_cells: f64,
    /// Over-relaxation factor; `None` picks the Laplacian optimum for the grid.
    pub omega: Option<f64>,
    /// Stage ends when the largest unrelaxed node step falls below this.
    pub tol_grad: f64,
    /// Sweep cap per stage.
    pub max_iter: usize,
    /// Target sup-norm of `a_ij u_ij` for the polish.
    pub tol_polish: f64,
    pub polish_max_sweeps: usize,
    /// Run early (wide `ε`) stages on coarser grids.
    pub multilevel: bool,
    /// Energy is recorded every this many sweeps.
    pub record_every: usize,
    /// Seed of the perturbation certificate.
    pub seed: u64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps0: 0.25,
            eps_factor: 0.5,
            eps_min_cells: 2.0,
            omega: None,
            tol_grad: 1e-10,
            max_iter: 20_000,
            tol_polish: 1e-8,
            polish_max_sweeps: 20_000,
            multilevel: true,
            record_every: 10,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, h: f64) -> crate::Result<()> {
        let bad = |key: &str, msg: String| Err(crate::LabError::Config { key: key.into(), msg });
        if !(self.eps_min_cells >= 2.0) {
            return bad("solver.eps_min_cells", format!("must be at least 2, got {}", self.eps_min_cells));
        }
        if !(self.eps0 >= self.eps_min_cells * h) {
            return bad("solver.eps0", format!("must be at least eps_min = {}", self.eps_min_cells * h));
        }
        if !(self.eps_factor > 0.0 && self.eps_factor < 1.0) {
            return bad("solver.eps_factor", format!("must lie in (0, 1), got {}", self.eps_factor));
        }
        if let Some(w) = self.omega {
            if !(w > 0.0 && w < 2.0) {
                return bad("solver.omega", format!("must lie in (0, 2), got {w}"));
            }
        }
        if !(self.tol_grad > 0.0) {
            return bad("solver.tol_grad", format!("must be positive, got {}", self.tol_grad));
        }
        if !(self.tol_polish > 0.0) {
            return bad("solver.tol_polish", format!("must be positive, got {}", self.tol_polish));
        }
        if self.max_iter == 0 {
            return bad("solver.max_iter", "must be positive".into());
        }
        if self.record_every == 0 {
            return bad("solver.record_every", "must be positive".into());
        }
        Ok(())
    }

    /// The `ε` schedule ending at `eps_min_cells · h`.
    pub fn schedule(&self, h: f64) -> Vec<f64> {
        let floor = self.eps_min_cells * h;
        let mut out = Vec::new();
        let mut e = self.eps0;
        while e > floor * (1.0 + 1e-12) {
            out.push(e);
            e *= self.eps_factor;
        }
        out.push(floor);
        out
    }
}

/// One `ε` stage of the descent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRecord {
    pub eps: f64,
    /// Spacing of the grid the stage ran on.
    pub h: f64,
    pub sweeps: usize,
    /// Penalized energy, recorded periodically; nonincreasing.
    pub energies: Vec<f64>,
    pub converged: bool,
    /// Largest unrelaxed node step of the last sweep.
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolishReport {
    pub sweeps: usize,
    pub initial_residual: f64,
    pub residual: f64,
    pub converged: bool,
    /// Nodes of the positivity set that were relaxed.
    pub active_nodes: usize,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Final field (after the polish when it ran).
    pub u: ScalarField,
    /// Output of the last descent stage.
    pub penalized: ScalarField,
    pub stages: Vec<StageRecord>,
    pub polish: Option<PolishReport>,
    pub converged: bool,
    pub free_boundary: FreeBoundary,
    pub grad_norm: f64,
    /// Absolute level `σ ε` of the penalized field taken as the free boundary.
    pub interface_level: f64,
}
