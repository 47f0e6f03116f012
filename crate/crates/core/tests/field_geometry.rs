use bernoulli_lab::field::{extract_free_boundary, positivity_measure, GridSpec, ScalarField};
use bernoulli_lab::oracles::{deadcore_with_radius, halfplane, pixel_measure};
use proptest::prelude::*;

#[test]
fn halfplane_boundary_is_vertical_line() {
    let h = 1.0 / 32.0;
    let g = GridSpec::square(-1.0, 1.0, h).unwrap();
    let u = ScalarField::from_fn(g, |p| p[0].max(0.0)).unwrap();
    let fb = extract_free_boundary(&u);
    assert_eq!(fb.polylines.len(), 1);
    let line = &fb.polylines[0];
    assert!(!line.closed);
    assert!((line.length() - 2.0).abs() < 1e-9);
    for v in fb.vertices() {
        assert!(v.position[0].abs() <= h);
        assert!((v.normal[0] - 1.0).abs() < 1e-9);
        assert!(v.weight > 0.0);
    }
}

#[test]
fn deadcore_boundary_is_circle() {
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        let g = GridSpec::square(-1.0, 1.0, h).unwrap();
        let rho = 0.6;
        let u = deadcore_with_radius(rho, 2.0).unwrap().sample(g).unwrap();
        let fb = extract_free_boundary(&u);
        assert_eq!(fb.polylines.len(), 1);
        assert!(fb.polylines[0].closed);
        for v in fb.vertices() {
            let r = v.position[0].hypot(v.position[1]);
            assert!((r - rho).abs() <= h, "h = {h}: r = {r}");
            assert!((v.normal[0] * v.normal[0] + v.normal[1] * v.normal[1] - 1.0).abs() <= 1e-12);
            assert!(v.normal[0] * v.position[0] + v.normal[1] * v.position[1] > 0.0);
            assert!(v.normal[0] * v.gradient[0] + v.normal[1] * v.gradient[1] > 0.0);
        }
    }
}

#[test]
fn constant_field_has_no_boundary() {
    let g = GridSpec::square(-1.0, 1.0, 0.1).unwrap();
    let u = ScalarField::from_fn(g, |_| 1.0).unwrap();
    assert!(extract_free_boundary(&u).is_empty());
}

#[test]
fn two_signed_vertices_lie_on_zero_level() {
    let g = GridSpec::square(-1.0, 1.0, 1.0 / 16.0).unwrap();
    let u = ScalarField::from_fn(g, |p| p[0] - 0.3 + 0.5 * p[1] * p[1]).unwrap();
    let fb = extract_free_boundary(&u);
    assert!(!fb.is_empty());
    for v in fb.vertices() {
        assert!(u.bilinear(v.position).unwrap().abs() <= 1e-10 * u.max_abs());
    }
}

#[test]
fn measure_matches_pixel_count() {
    let h = 1.0 / 64.0;
    let g = GridSpec::square(-1.0, 1.0, h).unwrap();
    let u = ScalarField::from_fn(g, |p| (p[0] + 0.3 * (3.0 * p[1]).sin() + 0.2 * p[0] * p[1]).max(0.0)).unwrap();
    for r in [0.2, 0.5, 0.8] {
        let exact = positivity_measure(&u, [0.0, 0.0], r).unwrap();
        let pix = pixel_measure(&u, [0.0, 0.0], r);
        assert!((exact - pix).abs() <= 2.0 * std::f64::consts::PI * r * h, "r = {r}: {exact} vs {pix}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn measure_is_monotone_and_bounded(a in -0.5f64..0.5, b in -0.5f64..0.5, c in 0.5f64..3.0) {
        let g = GridSpec::square(-1.0, 1.0, 1.0 / 24.0).unwrap();
        let u = ScalarField::from_fn(g, |p| (p[0] + a * (c * p[1]).sin() + b * p[1] * p[1]).max(0.0)).unwrap();
        let mut prev = 0.0;
        for k in 1..=18 {
            let r = 0.05 * k as f64;
            let m = positivity_measure(&u, [0.0, 0.0], r).unwrap();
            prop_assert!(m >= prev - 1e-12);
            prop_assert!(m <= std::f64::consts::PI * r * r + 1e-12);
            prev = m;
        }
    }

    #[test]
    fn normals_are_unit_and_inward(theta in 0.0f64..std::f64::consts::TAU, off in -0.3f64..0.3) {
        let e = [theta.cos(), theta.sin()];
        let g = GridSpec::square(-1.0, 1.0, 1.0 / 16.0).unwrap();
        let u = ScalarField::from_fn(g, |p| (p[0] * e[0] + p[1] * e[1] - off).max(0.0)).unwrap();
        let fb = extract_free_boundary(&u);
        for v in fb.vertices() {
            let n2 = v.normal[0] * v.normal[0] + v.normal[1] * v.normal[1];
            prop_assert!((n2 - 1.0).abs() <= 1e-12);
            prop_assert!(v.normal[0] * e[0] + v.normal[1] * e[1] > 0.0);
        }
    }
}

#[test]
fn halfplane_oracle_samples_match() {
    let g = GridSpec::square(-1.0, 1.0, 0.25).unwrap();
    let u = halfplane([1.0, 0.0]).unwrap().sample(g).unwrap();
    assert_eq!(u.at(6, 3), 0.5);
}
