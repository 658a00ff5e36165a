mod common;

use num_complex::Complex64 as C64;
use vortexbc::grid::{RadialFunction, RadialGrid, RadialSpec, SpectralGrid, SpectralSpec};
use vortexbc::stokes::pair;
use vortexbc::weber_orr::WeberOrr;

const Z: C64 = C64::new(0.0, 0.0);

fn transform(dr: f64, dl: f64) -> WeberOrr {
    let mut rs = RadialSpec::new(1.0);
    rs.panel_width = dr;
    let mut ss = SpectralSpec::new(1.0, rs.r_max);
    ss.lambda_max = 30.0;
    ss.panel_width = dl;
    WeberOrr::new(RadialGrid::new(&rs).unwrap(), SpectralGrid::new(&ss).unwrap())
}

fn round_trip(wo: &WeberOrr, k: i32) -> f64 {
    let f = wo.project_moment_free(k, &common::bump(&wo.radial, 1.0), Z).unwrap();
    let (a, b) = pair(k);
    let back = wo.inverse(a, b, &wo.forward(a, b, &f).unwrap()).unwrap();
    back.sub(&f).norm_l2() / f.norm_l2()
}

#[test]
fn round_trip_converges_under_doubling() {
    let coarse = transform(1.0, 1.2);
    let fine = transform(0.5, 0.6);
    for k in 0..=3 {
        let (ec, ef) = (round_trip(&coarse, k), round_trip(&fine, k));
        assert!(ef <= 1e-6, "k = {k}: {ef:e}");
        assert!(ec / ef >= 4.0, "k = {k}: {ec:e} -> {ef:e}");
    }
}

#[test]
fn projection_hits_target_moment() {
    let wo = common::transform(0.4);
    let f = common::bump(&wo.radial, 1.0);
    for k in 0..=3 {
        let t = C64::new(0.2, -0.7);
        let p = wo.project_moment_free(k, &f, t).unwrap();
        assert!((p.moment(k) - t).norm() <= 1e-13);
    }
}

#[test]
fn derivative_rules_hold() {
    let wo = common::transform(0.4);
    for k in 1..=3 {
        let f = wo.project_moment_free(k, &common::bump(&wo.radial, 1.0), Z).unwrap();
        let r = wo.check_derivative_rules(k, &f).unwrap();
        assert!(r.radial_derivative <= 1e-8, "{r:?}");
        assert!(r.order_multiplier <= 1e-8, "{r:?}");
        assert!(r.lambda_multiplier <= 1e-8, "{r:?}");
    }
    let f = common::bump(&wo.radial, 1.0);
    assert!(wo.check_derivative_rules(0, &f).is_err());
}

#[test]
fn bessel_inequality_on_deterministic_bumps() {
    let wo = common::transform(0.4);
    for k in 1..=3 {
        let (a, b) = pair(k);
        for j in 0..20 {
            let c = 1.2 + 0.4 * j as f64;
            let s = 0.3 + 0.05 * j as f64;
            let f = RadialFunction::from_real(&wo.radial, |r| (-((r - c) / s).powi(2)).exp());
            let hat = wo.forward(a, b, &f).unwrap();
            assert!(hat.norm_l2() <= f.norm_l2() * (1.0 + 1e-6), "k = {k}, bump {j}");
        }
    }
}

#[test]
fn zero_in_zero_out_and_tails() {
    let wo = common::transform(0.4);
    let z = RadialFunction::zeros(&wo.radial);
    let hat = wo.forward(2, 1, &z).unwrap();
    assert!(hat.values.iter().all(|v| *v == Z));
    assert!(wo.inverse(2, 1, &hat).unwrap().values.iter().all(|v| *v == Z));
    let f = wo.project_moment_free(2, &common::bump(&wo.radial, 1.0), Z).unwrap();
    assert!(wo.radial_tail_fraction(&f) <= 1e-8);
    assert!(wo.spectral_tail_fraction(&wo.forward(2, 1, &f).unwrap()) <= 1e-8);
}

#[test]
fn grid_mismatch_is_rejected() {
    let a = common::transform(0.4);
    let b = common::transform(0.5);
    let f = RadialFunction::zeros(&b.radial);
    assert!(a.forward(1, 0, &f).is_err());
}

#[test]
fn bad_spectral_spec_is_rejected() {
    let mut ss = SpectralSpec::new(1.0, 40.0);
    ss.lambda_max = 0.5;
    assert!(SpectralGrid::new(&ss).is_err());
}
