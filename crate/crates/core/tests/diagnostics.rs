use bernoulli_lab::exec::Exec;
use bernoulli_lab::field::{extract_free_boundary, FreeBoundary, GridSpec, ScalarField};
use bernoulli_lab::functional::Density;
use bernoulli_lab::monotonicity::*;
use bernoulli_lab::oracles::{deadcore_with_radius, halfplane, twoplane, Oracle};

fn sampled(o: Oracle, h: f64) -> (ScalarField, FreeBoundary) {
    let u = o.sample(GridSpec::square(-1.0, 1.0, h).unwrap()).unwrap();
    let fb = extract_free_boundary(&u);
    (u, fb)
}

fn radii() -> Vec<f64> {
    (1..=10).map(|i| 0.08 * i as f64).collect()
}

#[test]
fn halfplane_density_is_one_half() {
    let h = 1.0 / 64.0;
    let (u, fb) = sampled(halfplane([0.3f64.cos(), 0.3f64.sin()]).unwrap(), h);
    let prof = density_profile(&u, &fb, [0.0, 0.0], &radii(), Exec::default()).unwrap();
    for (i, &r) in prof.radii.iter().enumerate() {
        assert!((prof.k[i] - 0.5).abs() <= h / r, "K({r}) = {}", prof.k[i]);
        assert!(prof.dk_bi[i].abs() <= 2.0 * h / (r * r), "dK_bi({r}) = {}", prof.dk_bi[i]);
    }
    assert_eq!(prof.monotonicity_violations(3.0), 0);
    let mut csv = Vec::new();
    prof.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("r,K,dK_fd,dK_bi\n"));
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn twoplane_density_is_one() {
    let h = 1.0 / 64.0;
    let (u, fb) = sampled(twoplane([1.0, 0.0]).unwrap(), h);
    let prof = density_profile(&u, &fb, [0.0, 0.0], &radii(), Exec::default()).unwrap();
    for (i, &r) in prof.radii.iter().enumerate() {
        assert!((prof.k[i] - 1.0).abs() <= 2.0 * h / r, "K({r}) = {}", prof.k[i]);
        assert!(prof.dk_bi[i].abs() <= 2.0 * h / (r * r));
    }
}

#[test]
fn center_away_from_boundary_is_rejected() {
    let (u, fb) = sampled(halfplane([1.0, 0.0]).unwrap(), 1.0 / 32.0);
    let err = density_k(&u, &fb, [0.5, 0.0], &radii()[..3], Exec::default()).unwrap_err();
    assert!(err.to_string().contains("no free boundary point near requested center"));
    let flat = ScalarField::from_fn(*u.grid(), |_| 1.0).unwrap();
    let none = extract_free_boundary(&flat);
    assert!(density_k(&flat, &none, [0.0, 0.0], &radii()[..3], Exec::default()).is_err());
    assert_eq!(dk_boundary_integral(&none, [0.0, 0.0], 0.3), 0.0);
}

#[test]
fn oversized_ball_is_rejected() {
    let (u, fb) = sampled(halfplane([1.0, 0.0]).unwrap(), 1.0 / 32.0);
    assert!(density_k(&u, &fb, [0.0, 0.0], &[0.5, 1.5], Exec::default()).is_err());
}

#[test]
fn cones_have_vanishing_w_and_v() {
    for o in [halfplane([0.6, 0.8]).unwrap(), twoplane([1.0, 0.0]).unwrap()] {
        let (u, _) = sampled(o, 1.0 / 64.0);
        assert!(w_field(&u, [0.0, 0.0]).unwrap().sup() < 1e-12);
        assert!(v_field(&u, [0.0, 0.0]).unwrap().sup() < 1e-12);
    }
}

#[test]
fn deadcore_w_matches_closed_form_at_second_order() {
    let rho = 0.4;
    let o = deadcore_with_radius(rho, 2.0).unwrap();
    let err = |h: f64| {
        let (u, _) = sampled(o, h);
        let w = w_field(&u, [0.0, 0.0]).unwrap();
        let g = *u.grid();
        let mut e: f64 = 0.0;
        for (k, &m) in w.mask.iter().enumerate() {
            let (i, j) = g.ij(k);
            let p = g.point(i, j);
            let r = p[0].hypot(p[1]);
            if m && r > rho + 0.1 {
                e = e.max((w.field.values()[k] - (rho - rho * (r / rho).ln())).abs());
            }
        }
        e
    };
    let (e1, e2) = (err(1.0 / 32.0), err(1.0 / 64.0));
    assert!(e2 < e1 / 3.0, "{e1} -> {e2}");
}

#[test]
fn c_is_negative_and_drift_vanishes_for_linear_density() {
    let d = Density::linear();
    for o in [halfplane([1.0, 0.0]).unwrap(), deadcore_with_radius(0.5, 2.0).unwrap()] {
        let (u, _) = sampled(o, 1.0 / 64.0);
        let c = c_field(&u, &d, [0.2, 0.1]).unwrap();
        assert!(c.count() > 0);
        assert!(c.masked_values().all(|v| v < 0.0));
        assert_eq!(b_dot_y(&u, &d, [0.2, 0.1]).unwrap().sup(), 0.0);
    }
}

#[test]
fn c_reduces_to_minus_inverse_square_for_linear_density() {
    let (u, _) = sampled(halfplane([1.0, 0.0]).unwrap(), 1.0 / 32.0);
    let c = c_field(&u, &Density::linear(), [0.0, 0.0]).unwrap();
    let g = *u.grid();
    for (k, &m) in c.mask.iter().enumerate() {
        if m {
            let (i, j) = g.ij(k);
            let p = g.point(i, j);
            let expect = -1.0 / (p[0] * p[0] + p[1] * p[1]);
            assert!((c.field.values()[k] - expect).abs() <= 1e-12 * expect.abs());
        }
    }
}

#[test]
fn cones_have_no_radial_deficit() {
    for o in [halfplane([1.0, 0.0]).unwrap(), twoplane([0.0, 1.0]).unwrap()] {
        let (_, fb) = sampled(o, 1.0 / 64.0);
        let d = radial_deficit(&fb, [0.0, 0.0], (0.05, 0.8));
        assert!(d.samples > 0);
        assert!(d.ell_sq < 1e-9, "{d:?}");
    }
}

#[test]
fn blowup_of_a_cone_is_stationary() {
    let h = 1.0 / 128.0;
    let (u, _) = sampled(halfplane([0.8, 0.6]).unwrap(), h);
    let seq = blowup(&u, [0.0, 0.0], &[0.8, 0.4, 0.2, 0.1], 64, Exec::default()).unwrap();
    for row in &seq.pairwise {
        for &d in row {
            assert!(d <= 2.0 * h / 0.1, "pairwise {d}");
        }
    }
    assert!(seq.cauchy[0].is_nan());
    for &d in &seq.homogeneity {
        assert!(d <= 2.0 * h / 0.1);
    }
}

#[test]
fn blowup_rejects_small_or_unsorted_scales() {
    let h = 1.0 / 32.0;
    let (u, _) = sampled(halfplane([1.0, 0.0]).unwrap(), h);
    assert!(blowup(&u, [0.0, 0.0], &[0.5, 3.0 * h], 16, Exec::default()).is_err());
    assert!(blowup(&u, [0.0, 0.0], &[0.2, 0.4], 16, Exec::default()).is_err());
    assert!(blowup(&u, [0.0, 0.0], &[0.5, 4.0 * h], 16, Exec::default()).is_ok());
}

#[test]
fn deadcore_is_not_homogeneous() {
    let rho = 0.5;
    let (u, _) = sampled(deadcore_with_radius(rho, 2.0).unwrap(), 1.0 / 64.0);
    let d = homogeneity_defect(&u, [rho, 0.0], 0.4, &default_t_samples()).unwrap();
    assert!(d > 0.05, "defect {d}");
}

#[test]
fn halfplane_curvature_relations_are_exact() {
    let (_, fb) = sampled(halfplane([0.3f64.cos(), 0.3f64.sin()]).unwrap(), 1.0 / 64.0);
    let h = fb.h;
    for k in curvature_profile(&fb, default_window(h)).into_iter().flatten().flatten() {
        assert!(k.abs() < 1e-9);
    }
    let rep = curvature_identity_check(&fb, &Density::linear(), 1.0, default_window(h));
    assert!(rep.regular > 0);
    assert!(rep.sup_unt < 1e-9 && rep.identity_error < 1e-9, "{rep:?}");
}

#[test]
fn deadcore_curvature_identity_converges() {
    let rho = 0.6;
    let o = deadcore_with_radius(rho, 2.0).unwrap();
    let rel = |h: f64| {
        let (_, fb) = sampled(o, h);
        let rep = curvature_identity_check(&fb, &Density::linear(), 1.0, default_window(h));
        assert!(rep.min_neg_unn > 0.0);
        assert!((rep.mean_curvature - 1.0 / rho).abs() < 0.05 / rho);
        rep.identity_relative
    };
    let (a, b) = (rel(1.0 / 64.0), rel(1.0 / 128.0));
    assert!(b < a && b < 0.05, "{a} -> {b}");
}
