use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{invalid, LabError, Result};
use crate::field::{extract_free_boundary_in, norm, sub, FreeBoundary, GridSpec, Point, Region, ScalarField};
use crate::functional::BernoulliParams;
use crate::oracles::Oracle;

/// Computational domain inside the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    /// The whole grid rectangle; Dirichlet data on its edge.
    Rect,
    /// Nodes of a closed disk; Dirichlet data on the nodes next to its rim.
    Disk { center: Point, radius: f64 },
}

impl Domain {
    pub fn region(&self) -> Region {
        match *self {
            Domain::Rect => Region::Whole,
            Domain::Disk { center, radius } => Region::Disk { center, radius },
        }
    }
}

/// Boundary data `g`, sampled at every node of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundaryData {
    Zero,
    Constant { value: f64 },
    /// Values of an exact solution.
    Oracle { oracle: Oracle },
    /// `max(x + amp sin(mode π y), 0)`: half-plane data with a wavy trace.
    Wavy { amp: f64, mode: f64 },
}

impl BoundaryData {
    /// `zero`, `const:<v>`, `wavy:amp=<a>,mode=<m>` or any oracle name.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let bad = || LabError::InvalidInput(format!("unknown boundary data `{spec}`"));
        if spec == "zero" {
            return Ok(BoundaryData::Zero);
        }
        if let Some(v) = spec.strip_prefix("const:") {
            let value: f64 = v.trim_start_matches("v=").parse().map_err(|_| bad())?;
            return Ok(BoundaryData::Constant { value });
        }
        if let Some(rest) = spec.strip_prefix("wavy:") {
            let (mut amp, mut mode) = (None, None);
            for kv in rest.split(',') {
                let (k, v) = kv.split_once('=').ok_or_else(bad)?;
                let v: f64 = v.trim().parse().map_err(|_| bad())?;
                match k.trim() {
                    "amp" => amp = Some(v),
                    "mode" => mode = Some(v),
                    _ => return Err(bad()),
                }
            }
            return Ok(BoundaryData::Wavy { amp: amp.ok_or_else(bad)?, mode: mode.ok_or_else(bad)? });
        }
        Ok(BoundaryData::Oracle { oracle: Oracle::parse(spec)? })
    }

    pub fn value(&self, p: Point) -> f64 {
        match *self {
            BoundaryData::Zero => 0.0,
            BoundaryData::Constant { value } => value,
            BoundaryData::Oracle { oracle } => oracle.value(p),
            BoundaryData::Wavy { amp, mode } => (p[0] + amp * (mode * PI * p[1]).sin()).max(0.0),
        }
    }
}

impl fmt::Display for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryData::Zero => write!(f, "zero"),
            BoundaryData::Constant { value } => write!(f, "const:{value}"),
            BoundaryData::Oracle { oracle } => write!(f, "{}", oracle.name()),
            BoundaryData::Wavy { amp, mode } => write!(f, "wavy:amp={amp},mode={mode}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeRole {
    /// Unknown.
    Free,
    /// Held at `g`.
    Dirichlet,
    /// Outside the domain; held at zero and excluded from every sum.
    Exterior,
}

/// Dirichlet problem for the one-phase functional on a grid.
#[derive(Clone, Debug)]
pub struct Problem {
    grid: GridSpec,
    domain: Domain,
    data: BoundaryData,
    params: BernoulliParams,
    roles: Vec<NodeRole>,
    g: ScalarField,
}

impl Problem {
    pub fn new(grid: GridSpec, domain: Domain, data: BoundaryData, params: BernoulliParams) -> Result<Self> {
        let inside: Vec<bool> = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.ij(k);
                match domain {
                    Domain::Rect => true,
                    Domain::Disk { center, radius } => norm(sub(grid.point(i, j), center)) <= radius,
                }
            })
            .collect();
        if let Domain::Disk { radius, .. } = domain {
            if !(radius.is_finite() && radius > 2.0 * grid.h()) {
                return invalid(format!("disk radius {radius} must exceed two cells"));
            }
        }
        let (nx, ny) = (grid.nx(), grid.ny());
        let roles: Vec<NodeRole> = (0..grid.len())
            .map(|k| {
                if !inside[k] {
                    return NodeRole::Exterior;
                }
                let (i, j) = grid.ij(k);
                if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                    return NodeRole::Dirichlet;
                }
                let ring = (j - 1..=j + 1).all(|b| (i - 1..=i + 1).all(|a| inside[grid.idx(a, b)]));
                if ring {
                    NodeRole::Free
                } else {
                    NodeRole::Dirichlet
                }
            })
            .collect();
        let g = ScalarField::from_fn(grid, |p| data.value(p))?;
        for (k, role) in roles.iter().enumerate() {
            if *role == NodeRole::Dirichlet && g.values()[k] < 0.0 {
                let (i, j) = grid.ij(k);
                return invalid(format!("boundary data negative at node ({i}, {j})"));
            }
        }
        let p = Self { grid, domain, data, params, roles, g };
        if p.free_count() == 0 {
            return invalid("domain has no interior nodes");
        }
        if !p.is_connected() {
            return invalid("domain is not connected");
        }
        Ok(p)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn data(&self) -> BoundaryData {
        self.data
    }

    pub fn params(&self) -> &BernoulliParams {
        &self.params
    }

    pub fn roles(&self) -> &[NodeRole] {
        &self.roles
    }

    pub fn role(&self, i: usize, j: usize) -> NodeRole {
        self.roles[self.grid.idx(i, j)]
    }

    /// `g` sampled at every node.
    pub fn g(&self) -> &ScalarField {
        &self.g
    }

    pub fn free_count(&self) -> usize {
        self.roles.iter().filter(|r| **r == NodeRole::Free).count()
    }

    /// Whether all four corners of cell `(i, j)` are in the domain.
    pub fn cell_active(&self, i: usize, j: usize) -> bool {
        let nx = self.grid.nx();
        let k = self.grid.idx(i, j);
        [k, k + 1, k + nx, k + nx + 1].iter().all(|&c| self.roles[c] != NodeRole::Exterior)
    }

    /// Zero level of `u` within the domain.
    pub fn free_boundary(&self, u: &ScalarField) -> FreeBoundary {
        extract_free_boundary_in(u, |i, j| self.cell_active(i, j))
    }

    /// The same problem on every second node, when the grid allows it and
    /// keeps at least 9 nodes per side.
    pub fn coarsened(&self) -> Option<Self> {
        let grid = self.grid.coarsened()?;
        if grid.nx() < 9 || grid.ny() < 9 {
            return None;
        }
        Self::new(grid, self.domain, self.data, self.params).ok()
    }

    /// Initial iterate: `g` on Dirichlet nodes, zero elsewhere.
    pub fn initial_field(&self) -> ScalarField {
        let mut u = ScalarField::zeros(self.grid);
        self.impose(u.values_mut());
        u
    }

    /// Resets Dirichlet nodes to `g` and exterior nodes to zero.
    pub(crate) fn impose(&self, u: &mut [f64]) {
        for (k, role) in self.roles.iter().enumerate() {
            match role {
                NodeRole::Dirichlet => u[k] = self.g.values()[k],
                NodeRole::Exterior => u[k] = 0.0,
                NodeRole::Free => {}
            }
        }
    }

    fn is_connected(&self) -> bool {
        let g = &self.grid;
        let Some(start) = self.roles.iter().position(|r| *r != NodeRole::Exterior) else {
            return false;
        };
        let mut seen = vec![false; g.len()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut count = 1usize;
        while let Some(k) = queue.pop_front() {
            let (i, j) = g.ij(k);
            let nbrs = [
                (i > 0).then(|| k - 1),
                (i + 1 < g.nx()).then(|| k + 1),
                (j > 0).then(|| k - g.nx()),
                (j + 1 < g.ny()).then(|| k + g.nx()),
            ];
            for n in nbrs.into_iter().flatten() {
                if !seen[n] && self.roles[n] != NodeRole::Exterior {
                    seen[n] = true;
                    count += 1;
                    queue.push_back(n);
                }
            }
        }
        count == self.roles.iter().filter(|r| **r != NodeRole::Exterior).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_roles() {
        let g = GridSpec::square(-1.0, 1.0, 0.25).unwrap();
        let p = Problem::new(g, Domain::Rect, BoundaryData::Zero, BernoulliParams::classical()).unwrap();
        assert_eq!(p.free_count(), 7 * 7);
        assert_eq!(p.role(0, 4), NodeRole::Dirichlet);
    }

    #[test]
    fn disk_roles_and_coarsening() {
        let g = GridSpec::square(-1.0, 1.0, 1.0 / 16.0).unwrap();
        let d = Domain::Disk { center: [0.0, 0.0], radius: 0.95 };
        let p = Problem::new(g, d, BoundaryData::Constant { value: 0.3 }, BernoulliParams::classical()).unwrap();
        assert_eq!(p.role(0, 0), NodeRole::Exterior);
        assert_eq!(p.role(16, 16), NodeRole::Free);
        let c = p.coarsened().unwrap();
        assert_eq!(c.grid().nx(), 17);
        let u = p.initial_field();
        assert_eq!(u.at(0, 0), 0.0);
    }

    #[test]
    fn rejects_negative_data() {
        let g = GridSpec::square(-1.0, 1.0, 0.25).unwrap();
        let e = Problem::new(g, Domain::Rect, BoundaryData::Constant { value: -1.0 }, BernoulliParams::classical());
        assert!(e.is_err());
    }

    #[test]
    fn parses_data() {
        assert_eq!(BoundaryData::parse("zero").unwrap(), BoundaryData::Zero);
        assert_eq!(BoundaryData::parse("const:0.5").unwrap(), BoundaryData::Constant { value: 0.5 });
        assert_eq!(BoundaryData::parse("wavy:amp=0.1,mode=2").unwrap(), BoundaryData::Wavy { amp: 0.1, mode: 2.0 });
        assert!(matches!(BoundaryData::parse("halfplane:ex").unwrap(), BoundaryData::Oracle { .. }));
        assert!(BoundaryData::parse("wavy:amp=0.1").is_err());
    }
}
