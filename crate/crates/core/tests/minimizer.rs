use bernoulli_lab::field::{GridSpec, ScalarField};
use bernoulli_lab::functional::{pde_residual, BernoulliParams, Density};
use bernoulli_lab::minimizer::*;
use bernoulli_lab::oracles::{core_radius, deadcore_with_radius, halfplane, Branch};
use bernoulli_lab::LabError;

fn norm(p: [f64; 2]) -> f64 {
    p[0].hypot(p[1])
}

fn halfplane_problem(h: f64) -> Problem {
    let g = GridSpec::square(-1.0, 1.0, h).unwrap();
    let data = BoundaryData::Oracle { oracle: halfplane([1.0, 0.0]).unwrap() };
    Problem::new(g, Domain::Rect, data, BernoulliParams::classical()).unwrap()
}

fn assert_stage_histories_monotone(res: &SolveResult) {
    for s in &res.stages {
        for w in s.energies.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "eps = {}: {} -> {}", s.eps, w[0], w[1]);
        }
    }
}

#[test]
fn zero_data_gives_zero_field() {
    let g = GridSpec::square(-1.0, 1.0, 1.0 / 32.0).unwrap();
    let p = Problem::new(g, Domain::Rect, BoundaryData::Zero, BernoulliParams::classical()).unwrap();
    let res = solve(&p, &SolverConfig::default()).unwrap();
    assert!(res.converged);
    assert!(res.u.values().iter().all(|&v| v == 0.0));
    assert!(res.free_boundary.is_empty());
    let cert = energy_certificate(&res.u, &p, 50, 7).unwrap();
    assert_eq!(cert.energy, 0.0);
    assert!(cert.passed);
}

#[test]
fn halfplane_data_recovers_halfplane() {
    let h = 1.0 / 32.0;
    let p = halfplane_problem(h);
    let res = solve(&p, &SolverConfig::default()).unwrap();
    assert!(res.converged);
    assert_stage_histories_monotone(&res);
    let exact = p.g();
    let err = res.u.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 2.0 * h, "sup error {err}");
    // maximum principle and boundary values
    let gmax = exact.max();
    for (k, (&v, r)) in res.u.values().iter().zip(p.roles()).enumerate() {
        assert!((0.0..=gmax + 1e-12).contains(&v));
        if *r == NodeRole::Dirichlet {
            assert_eq!(v, exact.values()[k]);
        }
    }
    for v in res.free_boundary.vertices() {
        assert!((norm(v.gradient) - 1.0).abs() < 0.15, "|grad u| = {}", norm(v.gradient));
    }
    let polish = res.polish.as_ref().unwrap();
    assert!(polish.converged);
    assert!(pde_residual(&res.u, &Density::linear()).unwrap().sup() <= 10.0 * SolverConfig::default().tol_polish);
    let cert = energy_certificate(&res.u, &p, 50, 1).unwrap();
    assert!(cert.passed, "{} failures", cert.failures());
}

#[test]
fn polish_is_a_fixed_point_on_exact_solutions() {
    // tilted so the free boundary cuts cells at irregular offsets
    let g = GridSpec::square(-1.0, 1.0, 1.0 / 32.0).unwrap();
    let oracle = halfplane([0.3f64.cos(), 0.3f64.sin()]).unwrap();
    let p = Problem::new(g, Domain::Rect, BoundaryData::Oracle { oracle }, BernoulliParams::classical()).unwrap();
    let cfg = SolverConfig::default();
    let exact = oracle.sample(g).unwrap();
    let (again, rep) = harmonic_polish(&exact, &p, 0.0, &cfg).unwrap();
    assert!(rep.converged);
    let diff = again.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-7, "moved by {diff}");
}

#[test]
fn corrupted_output_fails_certificate() {
    let p = halfplane_problem(1.0 / 32.0);
    let res = solve(&p, &SolverConfig::default()).unwrap();
    let h = p.grid().h();
    let b = bump(*p.grid(), [0.5, 0.0], 0.4, 3.0 * h).unwrap();
    let corrupted =
        ScalarField::new(*p.grid(), res.u.values().iter().zip(b.values()).map(|(a, c)| a + c).collect()).unwrap();
    let undo = b.map(|v| -v).unwrap();
    assert!(perturbation_delta(&corrupted, &p, &undo).unwrap() < 0.0);
    let cert = energy_certificate(&corrupted, &p, 200, 3).unwrap();
    assert!(!cert.passed);
    assert!(cert.failures() > 0);
}

#[test]
fn disk_with_constant_data_finds_stable_core() {
    // g = 0.3 on the disk of radius 1.05; the radial energy is minimized at
    // the outer root of ρ ln(R/ρ) = g
    let (outer, value, h) = (1.05, 0.3, 1.0 / 64.0);
    let rho = core_radius(outer, value, Branch::Outer).unwrap();
    let g = GridSpec::square(-1.125, 1.125, h).unwrap();
    let domain = Domain::Disk { center: [0.0, 0.0], radius: outer };
    let p = Problem::new(g, domain, BoundaryData::Constant { value }, BernoulliParams::classical()).unwrap();
    let res = solve(&p, &SolverConfig::default()).unwrap();
    assert!(res.converged);
    assert_stage_histories_monotone(&res);
    assert_eq!(res.free_boundary.polylines.len(), 1);
    for v in res.free_boundary.vertices() {
        let r = norm(v.position);
        assert!((r - rho).abs() <= 2.0 * h, "vertex at r = {r}, core radius {rho}");
    }
}

#[test]
fn deadcore_polish_reduces_residual() {
    let h = 1.0 / 64.0;
    let g = GridSpec::square(-1.0, 1.0, h).unwrap();
    let oracle = deadcore_with_radius(0.6, 2.0).unwrap();
    let p = Problem::new(g, Domain::Rect, BoundaryData::Oracle { oracle }, BernoulliParams::classical()).unwrap();
    let res = solve(&p, &SolverConfig::default()).unwrap();
    let rep = res.polish.unwrap();
    assert!(rep.converged);
    assert!(rep.residual * 10.0 <= rep.initial_residual, "{rep:?}");
    for v in res.free_boundary.vertices() {
        assert!((norm(v.position) - 0.6).abs() <= 2.0 * h);
    }
}

#[test]
fn solve_is_deterministic_across_exec_policies() {
    let p = halfplane_problem(1.0 / 32.0);
    let mut cfg = SolverConfig::default();
    cfg.exec = bernoulli_lab::exec::Exec::Sequential;
    let a = solve(&p, &cfg).unwrap();
    cfg.exec = bernoulli_lab::exec::Exec::Parallel;
    let b = solve(&p, &cfg).unwrap();
    assert_eq!(a.u, b.u);
}

#[test]
fn config_errors_name_the_key() {
    let h = 1.0 / 32.0;
    let cfg = SolverConfig { eps0: h, ..Default::default() };
    match cfg.validate(h) {
        Err(LabError::Config { key, .. }) => assert_eq!(key, "solver.eps0"),
        other => panic!("{other:?}"),
    }
    let cfg = SolverConfig { tol_polish: 0.0, ..Default::default() };
    assert!(matches!(cfg.validate(h), Err(LabError::Config { key, .. }) if key == "solver.tol_polish"));
}

#[test]
fn negative_data_is_rejected() {
    let g = GridSpec::square(-1.0, 1.0, 0.125).unwrap();
    let r = Problem::new(g, Domain::Rect, BoundaryData::Constant { value: -1.0 }, BernoulliParams::classical());
    assert!(r.is_err());
}
