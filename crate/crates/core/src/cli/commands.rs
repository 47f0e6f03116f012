use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::{CenterRule, RunConfig};
use crate::error::{invalid, LabError, Result};
use crate::exec::Exec;
use crate::field::dump::{load_field, write_field};
use crate::field::{extract_free_boundary, extract_free_boundary_in, norm, FreeBoundary, Point, ScalarField};
use crate::functional::energy;
use crate::minimizer::{energy_certificate, solve, PolishReport, StageRecord};
use crate::monotonicity::{
    b_dot_y, blowup, c_field, curvature_identity_check, default_window, density_profile, homogeneity_defect,
    default_t_samples, radial_deficit, w_field, CurvatureReport, DensityProfile,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

/// Exit status for an error: configuration and I/O problems are 1, anything
/// the run itself rejects is 2.
pub fn exit_code(e: &LabError) -> i32 {
    match e {
        LabError::Config { .. } | LabError::Parse { .. } | LabError::Io(_) | LabError::Json(_) => EXIT_CONFIG,
        LabError::InvalidInput(_) => EXIT_FAILED,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Check {
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    fn at_most(value: f64, tolerance: f64) -> Self {
        Self { passed: value <= tolerance, value, tolerance }
    }
}

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a BTreeMap<String, String>,
    pub wall_time_s: f64,
    pub grid: [f64; 3],
    pub energy: f64,
    pub interface_level: f64,
    pub converged: bool,
    pub stages: &'a [StageRecord],
    pub polish: Option<&'a PolishReport>,
    pub checks: BTreeMap<&'static str, Check>,
}

/// Writes through a temporary sibling and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn field_bytes(u: &ScalarField) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_field(u, &mut buf)?;
    Ok(buf)
}

fn fb_csv(fb: &FreeBoundary) -> Vec<u8> {
    let mut s = String::from("polyline,closed,vertex,x,y,nx,ny,gx,gy,weight\n");
    for (p, pl) in fb.polylines.iter().enumerate() {
        for (k, v) in pl.vertices.iter().enumerate() {
            s.push_str(&format!(
                "{p},{},{k},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                pl.closed as u8,
                v.position[0],
                v.position[1],
                v.normal[0],
                v.normal[1],
                v.gradient[0],
                v.gradient[1],
                v.weight
            ));
        }
    }
    s.into_bytes()
}

fn density_csv(p: &DensityProfile) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    p.write_csv(&mut buf)?;
    Ok(buf)
}

/// Resolves a centre rule against a free boundary.
pub fn resolve_center(rule: CenterRule, fb: &FreeBoundary) -> Result<Point> {
    match rule {
        CenterRule::NearestFb { point } => match fb.nearest_vertex(point) {
            Some((v, _)) => Ok(v.position),
            None => invalid("no free boundary point near requested center"),
        },
        CenterRule::Exact { point } => Ok(point),
    }
}

/// Largest `| |∇u| − λ* |` over vertices at least `3h` inside the grid.
fn fb_gradient_error(fb: &FreeBoundary, u: &ScalarField, lambda_star: f64) -> f64 {
    let g = u.grid();
    let m = 3.0 * g.h();
    let (lo, hi) = (g.origin(), g.max_corner());
    fb.vertices()
        .filter(|v| {
            let p = v.position;
            p[0] >= lo[0] + m && p[0] <= hi[0] - m && p[1] >= lo[1] + m && p[1] <= hi[1] - m
        })
        .map(|v| (norm(v.gradient) - lambda_star).abs())
        .fold(0.0, f64::max)
}

/// Summary of one `solve` run, shared with `sweep`.
#[derive(Clone, Debug)]
pub struct SolveSummary {
    pub code: i32,
    pub output: PathBuf,
    pub converged: bool,
    pub checks: BTreeMap<&'static str, Check>,
}

/// Runs the solver for a parsed configuration and writes `u.dump`,
/// `free_boundary.csv`, optionally `density.csv`, and `manifest.json` under
/// the output directory.
pub fn run_solve(cfg: &RunConfig, exec: Exec) -> Result<SolveSummary> {
    let start = Instant::now();
    let problem = cfg.build_problem()?;
    let mut scfg = cfg.solver;
    scfg.exec = exec;
    let res = solve(&problem, &scfg)?;
    fs::create_dir_all(&cfg.output)?;
    let out = |name: &str| cfg.output.join(name);
    write_atomic(&out("u.dump"), &field_bytes(&res.u)?)?;
    write_atomic(&out("free_boundary.csv"), &fb_csv(&res.free_boundary))?;

    let params = problem.params();
    let mut checks = BTreeMap::new();
    checks.insert("converged", Check { passed: res.converged, value: res.grad_norm, tolerance: cfg.solver.tol_grad });
    if !res.free_boundary.is_empty() {
        let e = fb_gradient_error(&res.free_boundary, &res.u, params.lambda_star);
        checks.insert("fb_gradient", Check::at_most(e, cfg.diag.gradient_tol));
    }
    if cfg.diag.certificate_trials > 0 {
        let cert = energy_certificate(&res.u, &problem, cfg.diag.certificate_trials, cfg.seed)?;
        checks.insert("certificate", Check::at_most(cert.failures() as f64, 0.0));
    }
    if let (Some(rule), false) = (cfg.diag.center, cfg.diag.radii.is_empty()) {
        let center = resolve_center(rule, &res.free_boundary)?;
        let prof = density_profile(&res.u, &res.free_boundary, center, &cfg.diag.radii, exec)?;
        checks.insert("monotonicity", Check::at_most(prof.monotonicity_violations(cfg.diag.slack) as f64, 0.0));
        write_atomic(&out("density.csv"), &density_csv(&prof)?)?;
    }
    let g = problem.grid();
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: &cfg.echo,
        wall_time_s: start.elapsed().as_secs_f64(),
        grid: [g.nx() as f64, g.ny() as f64, g.h()],
        energy: energy(&res.u, params, &problem.domain().region()),
        interface_level: res.interface_level,
        converged: res.converged,
        stages: &res.stages,
        polish: res.polish.as_ref(),
        checks: checks.clone(),
    };
    write_atomic(&out("manifest.json"), serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(SolveSummary {
        code: if res.converged { EXIT_OK } else { EXIT_FAILED },
        output: cfg.output.clone(),
        converged: res.converged,
        checks,
    })
}

pub fn cmd_solve(config: &Path) -> Result<i32> {
    let cfg = RunConfig::load(config)?;
    Ok(run_solve(&cfg, Exec::default())?.code)
}

#[derive(Serialize)]
struct SignStats {
    nodes: usize,
    negative: usize,
    max: f64,
}

#[derive(Serialize)]
struct Diagnostics {
    center: Point,
    fb_vertices: usize,
    ell_sq: f64,
    ell_samples: usize,
    /// `sup |w|` over the diagnostic mask.
    sup_w: f64,
    /// `sup |w|` over mask nodes within `6h` of the free boundary.
    sup_w_band: f64,
    c_field: SignStats,
    b_dot_y_min: f64,
    b_dot_y_max: f64,
    curvature: CurvatureReport,
    homogeneity_defect: Option<f64>,
    monotonicity_violations: usize,
    /// `max |dK_bi − dK_fd| / max(|dK_fd|, 1e-3)` over interior radii.
    dk_relative_gap: f64,
}

/// Diagnostics of a field dump. Writes `density.csv` and `diagnostics.json`
/// under the configured output directory.
pub fn run_diagnose(u: &ScalarField, cfg: &RunConfig, exec: Exec) -> Result<()> {
    let rule = cfg.diag.center.ok_or_else(|| LabError::Config { key: "diag.center".into(), msg: "missing".into() })?;
    if cfg.diag.radii.is_empty() {
        return Err(LabError::Config { key: "diag.radii".into(), msg: "missing".into() });
    }
    let params = cfg.params()?;
    let d = params.density;
    let g = *u.grid();
    let h = g.h();
    let region = cfg.problem.domain.region();
    let fb = extract_free_boundary_in(u, |i, j| region.contains_cell(&g, i, j));
    let center = resolve_center(rule, &fb)?;
    let prof = density_profile(u, &fb, center, &cfg.diag.radii, exec)?;
    let rmax = *cfg.diag.radii.last().unwrap();
    let n = prof.radii.len();
    let dk_relative_gap = (1..n.saturating_sub(1))
        .map(|i| (prof.dk_bi[i] - prof.dk_fd[i]).abs() / prof.dk_fd[i].abs().max(1e-3))
        .fold(0.0, f64::max);

    let w = w_field(u, center)?;
    let dist = fb.distance_field(&g, 7.0 * h);
    let sup_w_band = w
        .field
        .values()
        .iter()
        .zip(&w.mask)
        .zip(&dist)
        .filter(|((_, &m), &dd)| m && dd <= 6.0 * h)
        .fold(0.0, |a: f64, ((v, _), _)| a.max(v.abs()));
    let c = c_field(u, &d, center)?;
    let by = b_dot_y(u, &d, center)?;
    let (bmin, bmax) = by.masked_values().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let deficit = radial_deficit(&fb, center, (3.0 * h, rmax));
    let diag = Diagnostics {
        center,
        fb_vertices: fb.vertex_count(),
        ell_sq: deficit.ell_sq,
        ell_samples: deficit.samples,
        sup_w: w.sup(),
        sup_w_band,
        c_field: SignStats {
            nodes: c.count(),
            negative: c.masked_values().filter(|&v| v < 0.0).count(),
            max: c.masked_values().fold(f64::NEG_INFINITY, f64::max),
        },
        b_dot_y_min: bmin,
        b_dot_y_max: bmax,
        curvature: curvature_identity_check(&fb, &d, params.lambda_star, default_window(h)),
        homogeneity_defect: homogeneity_defect(u, center, rmax, &default_t_samples()).ok(),
        monotonicity_violations: prof.monotonicity_violations(cfg.diag.slack),
        dk_relative_gap,
    };
    fs::create_dir_all(&cfg.output)?;
    write_atomic(&cfg.output.join("density.csv"), &density_csv(&prof)?)?;
    write_atomic(&cfg.output.join("diagnostics.json"), serde_json::to_string_pretty(&diag)?.as_bytes())?;
    Ok(())
}

pub fn cmd_diagnose(dump: &Path, config: &Path) -> Result<i32> {
    let cfg = RunConfig::load(config)?;
    let u = load_field(dump)?;
    run_diagnose(&u, &cfg, Exec::default())?;
    Ok(EXIT_OK)
}

/// Rescaled dumps `blowup_<k>.dump` and `blowup.csv` with columns
/// `k,r_k,cauchy_diff,homog_defect`.
pub fn run_blowup(u: &ScalarField, rule: CenterRule, scales: &[f64], reference_cells: usize, out: &Path) -> Result<()> {
    let fb = extract_free_boundary(u);
    let center = resolve_center(rule, &fb)?;
    let seq = blowup(u, center, scales, reference_cells, Exec::default())?;
    fs::create_dir_all(out)?;
    let mut csv = String::from("k,r_k,cauchy_diff,homog_defect\n");
    for (k, f) in seq.fields.iter().enumerate() {
        csv.push_str(&format!("{k},{:e},{:e},{:e}\n", seq.scales[k], seq.cauchy[k], seq.homogeneity[k]));
        write_atomic(&out.join(format!("blowup_{k}.dump")), &field_bytes(f)?)?;
    }
    write_atomic(&out.join("blowup.csv"), csv.as_bytes())
}

pub fn cmd_blowup(dump: &Path, center: &str, scales: &str, reference_cells: usize, out: &Path) -> Result<i32> {
    let rule = CenterRule::parse(center).map_err(|msg| LabError::Config { key: "center".into(), msg })?;
    let scales: Vec<f64> = scales
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| LabError::Config { key: "scales".into(), msg: e.to_string() })?;
    let u = load_field(dump)?;
    run_blowup(&u, rule, &scales, reference_cells, out)?;
    Ok(EXIT_OK)
}

/// Runs every configuration matching `pattern` concurrently and writes
/// `sweep.csv` into `out` with one row per run.
pub fn cmd_sweep(pattern: &str, out: &Path) -> Result<i32> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(|e| LabError::Config { key: "pattern".into(), msg: e.to_string() })?
        .filter_map(|p| p.ok())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(LabError::Config { key: "pattern".into(), msg: format!("no file matches `{pattern}`") });
    }
    // runs are independent; each solve is sequential inside
    let runs = Exec::default().map_slice(&paths, |p| RunConfig::load(p).and_then(|cfg| run_solve(&cfg, Exec::Sequential)));
    let names = ["converged", "fb_gradient", "certificate", "monotonicity"];
    let mut csv = format!("config,output,exit_code,{}\n", names.join(","));
    let mut worst = EXIT_OK;
    for (p, r) in paths.iter().zip(&runs) {
        let (code, output, flags) = match r {
            Ok(s) => {
                let flags: Vec<String> =
                    names.iter().map(|n| s.checks.get(n).map_or(String::new(), |c| c.passed.to_string())).collect();
                (s.code, s.output.display().to_string(), flags)
            }
            Err(e) => {
                eprintln!("{}: {e}", p.display());
                (exit_code(e), String::new(), vec![String::new(); names.len()])
            }
        };
        worst = worst.max(code);
        csv.push_str(&format!("{},{},{},{}\n", p.display(), output, code, flags.join(",")));
    }
    fs::create_dir_all(out)?;
    write_atomic(&out.join("sweep.csv"), csv.as_bytes())?;
    Ok(if worst == EXIT_OK { EXIT_OK } else if runs.iter().any(|r| r.is_err()) { EXIT_CONFIG } else { EXIT_FAILED })
}
