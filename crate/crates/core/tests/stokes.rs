mod common;

use num_complex::Complex64 as C64;
use vortexbc::biot_savart::{moment, VorticityState};
use vortexbc::grid::RadialFunction;
use vortexbc::stokes::*;

#[test]
fn matches_crank_nicolson_oracle() {
    let wo = common::transform(0.4);
    let w0 = common::moment_free_state(&wo, 3, 3, 1.0);
    let res = evolve_stokes(&wo, &w0, 0.5).unwrap();
    let coarse = HeatOracle::new(20.0, 1000);
    let fine = HeatOracle::new(20.0, 2000);
    for k in 0..=3i32 {
        let (a, b) = pair(k);
        let mut errs = Vec::new();
        for (oracle, steps) in [(coarse, 100), (fine, 200)] {
            let o = oracle.run(k, &w0.modes[k as usize], 0.5, steps).unwrap();
            let ev = wo.inverse_at(a, b, &res.spectral[k as usize], &o.grid.nodes).unwrap();
            let e = RadialFunction { grid: o.grid.clone(), values: ev };
            errs.push(e.sub(&o).norm_l2() / e.norm_l2());
        }
        assert!(errs[1] <= 1e-3, "k = {k}: {errs:?}");
        // Oracle error dominates and is second order.
        assert!(errs[0] / errs[1] >= 3.0, "k = {k}: {errs:?}");
    }
}

#[test]
fn zero_time_is_identity_and_zero_stays_zero() {
    let wo = common::transform(0.4);
    let w0 = common::moment_free_state(&wo, 2, 2, 1.0);
    let res = evolve_stokes(&wo, &w0, 0.0).unwrap();
    assert!(res.state.sub(&w0).norm_l2() <= 1e-6 * w0.norm_l2());
    let z = VorticityState::zeros(&wo.radial, 2);
    assert_eq!(evolve_stokes(&wo, &z, 0.3).unwrap().state.norm_l2(), 0.0);
    assert!(evolve_stokes(&wo, &w0, -0.1).is_err());
}

#[test]
fn semigroup_bounds_and_composition() {
    let wo = common::transform(0.4);
    let w0 = common::moment_free_state(&wo, 3, 3, 1.0);
    for r in verify_semigroup_bounds(&wo, &w0, &[0.1, 0.5, 1.0]).unwrap() {
        assert!(r.max() <= 1.02, "{r:?}");
    }
    assert!(composition_error(&wo, &w0, 0.3, 0.2).unwrap() <= 1e-6);
}

#[test]
fn moments_are_invariant() {
    let wo = common::transform(0.4);
    let mut w0 = common::moment_free_state(&wo, 4, 4, 1.0);
    // Nonzero moments are carried unchanged as well.
    w0.modes[2].axpy(C64::new(0.3, -0.1), &wo.bump(2));
    let n0 = w0.norm_l2();
    let m0: Vec<C64> = (0..=4).map(|k| moment(k, &w0)).collect();
    for t in [0.1, 0.25, 0.5, 1.0] {
        let w = evolve_stokes(&wo, &w0, t).unwrap().state;
        for (k, m) in m0.iter().enumerate() {
            let d = (moment(k as i32, &w) - m).norm();
            assert!(d <= 1e-6 * n0, "t = {t}, k = {k}: {d:e}");
        }
    }
}

#[test]
fn robin_condition_holds_after_evolution() {
    let wo = common::transform(0.2);
    let w0 = common::moment_free_state(&wo, 3, 3, 1.0);
    let w = evolve_stokes(&wo, &w0, 0.5).unwrap().state;
    for (k, r) in robin_residual(&w).iter().enumerate() {
        let nk = w.modes[k].norm_l2();
        assert!(r.norm() <= 1e-4 * nk, "k = {k}: {:e} vs {nk:e}", r.norm());
    }
}
