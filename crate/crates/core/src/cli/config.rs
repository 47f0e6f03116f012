//! Flat `key = value` run configuration.
//!
//! One assignment per line; `#` starts a comment. Keys carry a section
//! prefix (`problem.`, `solver.`, `diag.`) except `output` and `seed`.
//! Every line is parsed and checked before anything runs, and every error
//! names the offending key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::field::{GridSpec, Point};
use crate::functional::{BernoulliParams, Density};
use crate::minimizer::{BoundaryData, Domain, Problem, SolverConfig};

/// Where diagnostics are centred.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum CenterRule {
    /// The free-boundary vertex nearest to the point.
    NearestFb { point: Point },
    /// The point itself; it must lie within `h` of the free boundary.
    Exact { point: Point },
}

impl CenterRule {
    /// `nearest-fb:x,y` or `x,y`.
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (nearest, rest) = match s.strip_prefix("nearest-fb:") {
            Some(r) => (true, r),
            None => (false, s),
        };
        let v = parse_list(rest)?;
        if v.len() != 2 {
            return Err(format!("expected two coordinates, got `{rest}`"));
        }
        let point = [v[0], v[1]];
        Ok(if nearest { CenterRule::NearestFb { point } } else { CenterRule::Exact { point } })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagConfig {
    pub center: Option<CenterRule>,
    pub radii: Vec<f64>,
    /// Slack multiplier in `K(r_{i+1}) ≥ K(r_i) − slack · h / r_i`.
    pub slack: f64,
    pub certificate_trials: usize,
    /// Allowed `| |∇u| − λ* |` on the free boundary.
    pub gradient_tol: f64,
    pub blowup_scales: Vec<f64>,
    pub reference_cells: usize,
}

impl Default for DiagConfig {
    fn default() -> Self {
        Self {
            center: None,
            radii: Vec::new(),
            slack: 3.0,
            certificate_trials: 50,
            gradient_tol: 0.15,
            blowup_scales: Vec::new(),
            reference_cells: 64,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProblemConfig {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub h: f64,
    pub domain: Domain,
    pub data: String,
    pub lambda: f64,
    pub density: Density,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub solver: SolverConfig,
    pub diag: DiagConfig,
    pub output: PathBuf,
    pub seed: u64,
    /// Assignments as written, sorted by key.
    pub echo: BTreeMap<String, String>,
}

fn cfg_err(key: &str, msg: impl Into<String>) -> LabError {
    LabError::Config { key: key.into(), msg: msg.into() }
}

/// A real number, also accepting `a/b`.
fn parse_num(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("not a number: `{s}`"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("not a number: `{s}`"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("not a number: `{s}`"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: `{s}`"))
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(parse_num).collect()
}

/// Comma list or `linspace:a,b,n`.
fn parse_radii(s: &str) -> std::result::Result<Vec<f64>, String> {
    if let Some(rest) = s.trim().strip_prefix("linspace:") {
        let v = parse_list(rest)?;
        if v.len() != 3 || v[2] < 2.0 || v[2].fract() != 0.0 {
            return Err("expected `linspace:start,stop,count` with count ≥ 2".into());
        }
        let n = v[2] as usize;
        return Ok((0..n).map(|i| v[0] + (v[1] - v[0]) * i as f64 / (n - 1) as f64).collect());
    }
    parse_list(s)
}

fn parse_domain(s: &str) -> std::result::Result<Domain, String> {
    let s = s.trim();
    if s == "rect" {
        return Ok(Domain::Rect);
    }
    if let Some(rest) = s.strip_prefix("disk:") {
        let v = parse_list(rest)?;
        if v.len() != 3 || !(v[2] > 0.0) {
            return Err("expected `disk:cx,cy,radius` with radius > 0".into());
        }
        return Ok(Domain::Disk { center: [v[0], v[1]], radius: v[2] });
    }
    Err(format!("expected `rect` or `disk:cx,cy,radius`, got `{s}`"))
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        o => Err(format!("expected true or false, got `{o}`")),
    }
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    s.trim().parse().map_err(|_| format!("expected a non-negative integer, got `{}`", s.trim()))
}

fn interval(s: &str) -> std::result::Result<[f64; 2], String> {
    let v = parse_list(s)?;
    if v.len() != 2 || !(v[0] < v[1]) {
        return Err(format!("expected `lo,hi` with lo < hi, got `{s}`"));
    }
    Ok([v[0], v[1]])
}

fn increasing_positive(v: &[f64]) -> bool {
    !v.is_empty() && v[0] > 0.0 && v.windows(2).all(|w| w[1] > w[0])
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut echo = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LabError::Parse { line: n + 1, msg: format!("expected `key = value`, got `{line}`") })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if echo.insert(k.clone(), v).is_some() {
                return Err(cfg_err(&k, "assigned more than once"));
            }
        }

        let mut problem = ProblemConfig {
            x: [-1.0, 1.0],
            y: [-1.0, 1.0],
            h: 1.0 / 64.0,
            domain: Domain::Rect,
            data: String::new(),
            lambda: 1.0,
            density: Density::Linear,
        };
        let mut solver = SolverConfig::default();
        let mut diag = DiagConfig::default();
        let mut output = None;
        let mut seed = 0u64;

        for (k, v) in &echo {
            let at = |r: std::result::Result<f64, String>| r.map_err(|m| cfg_err(k, m));
            let at_n = |r: std::result::Result<usize, String>| r.map_err(|m| cfg_err(k, m));
            match k.as_str() {
                "output" => output = Some(PathBuf::from(v)),
                "seed" => seed = v.parse().map_err(|_| cfg_err(k, format!("expected an unsigned integer, got `{v}`")))?,
                "problem.x" => problem.x = interval(v).map_err(|m| cfg_err(k, m))?,
                "problem.y" => problem.y = interval(v).map_err(|m| cfg_err(k, m))?,
                "problem.h" => problem.h = at(parse_num(v))?,
                "problem.domain" => problem.domain = parse_domain(v).map_err(|m| cfg_err(k, m))?,
                "problem.data" => {
                    BoundaryData::parse(v).map_err(|e| cfg_err(k, e.to_string()))?;
                    problem.data = v.clone();
                }
                "problem.lambda" => problem.lambda = at(parse_num(v))?,
                "problem.density" => problem.density = Density::parse(v).map_err(|e| cfg_err(k, e.to_string()))?,
                "solver.eps0" => solver.eps0 = at(parse_num(v))?,
                "solver.eps_factor" => solver.eps_factor = at(parse_num(v))?,
                "solver.eps_min_cells" => solver.eps_min_cells = at(parse_num(v))?,
                "solver.omega" => {
                    solver.omega = if v == "auto" { None } else { Some(at(parse_num(v))?) };
                }
                "solver.tol_grad" => solver.tol_grad = at(parse_num(v))?,
                "solver.max_iter" => solver.max_iter = at_n(parse_count(v))?,
                "solver.tol_polish" => solver.tol_polish = at(parse_num(v))?,
                "solver.polish_max_sweeps" => solver.polish_max_sweeps = at_n(parse_count(v))?,
                "solver.multilevel" => solver.multilevel = parse_bool(v).map_err(|m| cfg_err(k, m))?,
                "solver.record_every" => solver.record_every = at_n(parse_count(v))?,
                "diag.center" => diag.center = Some(CenterRule::parse(v).map_err(|m| cfg_err(k, m))?),
                "diag.radii" => {
                    diag.radii = parse_radii(v).map_err(|m| cfg_err(k, m))?;
                    if !increasing_positive(&diag.radii) {
                        return Err(cfg_err(k, "radii must be positive and strictly increasing"));
                    }
                }
                "diag.slack" => diag.slack = at(parse_num(v))?,
                "diag.certificate_trials" => diag.certificate_trials = at_n(parse_count(v))?,
                "diag.gradient_tol" => diag.gradient_tol = at(parse_num(v))?,
                "diag.blowup_scales" => {
                    diag.blowup_scales = parse_list(v).map_err(|m| cfg_err(k, m))?;
                    let mut rev = diag.blowup_scales.clone();
                    rev.reverse();
                    if !increasing_positive(&rev) {
                        return Err(cfg_err(k, "scales must be positive and strictly decreasing"));
                    }
                }
                "diag.reference_cells" => diag.reference_cells = at_n(parse_count(v))?,
                _ => return Err(cfg_err(k, "unknown key")),
            }
        }

        if problem.data.is_empty() {
            return Err(cfg_err("problem.data", "missing"));
        }
        if !(problem.lambda > 0.0) {
            return Err(cfg_err("problem.lambda", format!("must be positive, got {}", problem.lambda)));
        }
        if !(problem.h > 0.0) {
            return Err(cfg_err("problem.h", format!("must be positive, got {}", problem.h)));
        }
        if !(diag.slack >= 0.0) {
            return Err(cfg_err("diag.slack", "must be non-negative"));
        }
        if !(diag.gradient_tol > 0.0) {
            return Err(cfg_err("diag.gradient_tol", "must be positive"));
        }
        if diag.reference_cells < 2 || diag.reference_cells % 2 != 0 {
            return Err(cfg_err("diag.reference_cells", "must be even and at least 2"));
        }
        solver.validate(problem.h)?;
        solver.seed = seed;
        let output = output.ok_or_else(|| cfg_err("output", "missing"))?;
        Ok(Self { problem, solver, diag, output, seed, echo })
    }

    pub fn params(&self) -> Result<BernoulliParams> {
        BernoulliParams::new(self.problem.lambda, self.problem.density).map_err(|e| cfg_err("problem.lambda", e.to_string()))
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::rect(self.problem.x, self.problem.y, self.problem.h).map_err(|e| cfg_err("problem.h", e.to_string()))
    }

    /// Builds the problem; data that is negative or a disconnected domain is
    /// reported against `problem.data` and `problem.domain`.
    pub fn build_problem(&self) -> Result<Problem> {
        let grid = self.grid()?;
        let data = BoundaryData::parse(&self.problem.data).map_err(|e| cfg_err("problem.data", e.to_string()))?;
        let key = if matches!(self.problem.domain, Domain::Disk { .. }) { "problem.domain" } else { "problem.data" };
        Problem::new(grid, self.problem.domain, data, self.params()?).map_err(|e| cfg_err(key, e.to_string()))
    }
}
