//! Local-minimality spot check of a solver output against random bumps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::problem::{NodeRole, Problem};
use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::functional::energy;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationOutcome {
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
    /// `J_F(max(u + φ, 0)) − J_F(u)`.
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub energy: f64,
    pub trials: Vec<PerturbationOutcome>,
    /// Relative slack allowed in `J_F(u) ≤ J_F(u + φ)`.
    pub tolerance: f64,
    pub passed: bool,
}

impl Certificate {
    pub fn failures(&self) -> usize {
        self.trials.iter().filter(|t| t.delta < -self.tolerance * self.energy.abs().max(1.0)).count()
    }
}

/// `J_F(max(u + φ, 0)) − J_F(u)` for a perturbation supported on free nodes.
pub fn perturbation_delta(u: &ScalarField, p: &Problem, phi: &ScalarField) -> Result<f64> {
    if u.grid() != p.grid() || phi.grid() != p.grid() {
        return invalid("field and problem grids differ");
    }
    let region = p.domain().region();
    let base = energy(u, p.params(), &region);
    let values: Vec<f64> = u
        .values()
        .iter()
        .zip(phi.values())
        .zip(p.roles())
        .map(|((&a, &b), r)| if *r == NodeRole::Free { (a + b).max(0.0) } else { a })
        .collect();
    let v = ScalarField::new(*u.grid(), values)?;
    Ok(energy(&v, p.params(), &region) - base)
}

/// `(1 − |x − c|²/r²)²` bump scaled by `amp`.
pub fn bump(grid: crate::field::GridSpec, center: [f64; 2], radius: f64, amp: f64) -> Result<ScalarField> {
    ScalarField::from_fn(grid, |x| {
        let q = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)) / (radius * radius);
        if q < 1.0 {
            amp * (1.0 - q) * (1.0 - q)
        } else {
            0.0
        }
    })
}

/// Evaluates the sharp `J_F` on `u` and on `trials` random bumps of height
/// at most `5h` and radius in `[2h, 8h]`, centred near the free boundary
/// half of the time. Deterministic in `seed`.
pub fn energy_certificate(u: &ScalarField, p: &Problem, trials: usize, seed: u64) -> Result<Certificate> {
    let g = *p.grid();
    let h = g.h();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free: Vec<usize> = (0..g.len()).filter(|&k| p.roles()[k] == NodeRole::Free).collect();
    let near: Vec<usize> = free
        .iter()
        .copied()
        .filter(|&k| {
            let (i, j) = g.ij(k);
            let v = u.at(i, j);
            let mut any_zero = false;
            let mut any_pos = v > 0.0;
            for (a, b) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
                let w = u.at(a, b);
                any_zero |= w <= 0.0;
                any_pos |= w > 0.0;
            }
            any_zero && any_pos
        })
        .collect();
    if free.is_empty() {
        return invalid("problem has no free nodes");
    }
    let region = p.domain().region();
    let base = energy(u, p.params(), &region);
    let tolerance = 1e-10;
    let mut out = Vec::with_capacity(trials);
    for t in 0..trials {
        let pool = if t % 2 == 0 && !near.is_empty() { &near } else { &free };
        let k = pool[rng.gen_range(0..pool.len())];
        let (i, j) = g.ij(k);
        let center = g.point(i, j);
        let radius = rng.gen_range(2.0..=8.0) * h;
        let amplitude = rng.gen_range(-5.0..=5.0) * h;
        let phi = bump(g, center, radius, amplitude)?;
        let delta = perturbation_delta(u, p, &phi)?;
        out.push(PerturbationOutcome { center, radius, amplitude, delta });
    }
    let mut cert = Certificate { energy: base, trials: out, tolerance, passed: false };
    cert.passed = cert.failures() == 0;
    Ok(cert)
}
