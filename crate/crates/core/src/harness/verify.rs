//! Identity and property checks run against the scenario's own discretization.

use super::{Scenario, Setup, Versions, VERSIONS};
use crate::bessel::{bessel_j, bessel_y};
use crate::biot_savart::VorticityState;
use crate::error::Result;
use crate::grid::RadialFunction;
use crate::stokes::{pair, verify_semigroup_bounds};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize)]
pub struct VerifyCheck {
    pub name: &'static str,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub versions: Versions,
    pub scenario: Scenario,
    pub passed: bool,
    pub checks: Vec<VerifyCheck>,
}

fn check(name: &'static str, value: f64, tolerance: f64) -> VerifyCheck {
    VerifyCheck {
        name,
        value,
        tolerance,
        passed: value.is_finite() && value <= tolerance,
    }
}

/// Relative defect of `J_{k+1} Y_k - J_k Y_{k+1} = 2 / (pi x)`.
fn wronskian() -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 0..=8 {
        for &x in &[0.05, 0.5, 1.0, 3.7, 10.0, 42.0, 250.0] {
            let w = bessel_j(k + 1, x) * bessel_y(k, x)? - bessel_j(k, x) * bessel_y(k + 1, x)?;
            worst = worst.max((w * PI * x / 2.0 - 1.0).abs());
        }
    }
    Ok(worst)
}

fn gaussian(setup: &Setup, c: f64, s: f64) -> RadialFunction {
    let r0 = setup.transform.r0();
    RadialFunction::from_real(&setup.transform.radial, move |r| (-((r - c * r0) / (s * r0)).powi(2)).exp())
}

fn probe(setup: &Setup) -> RadialFunction {
    gaussian(setup, 4.0, std::f64::consts::FRAC_1_SQRT_2)
}

/// The scenario's initial data, or a fixed bump state when that is zero.
fn probe_state(setup: &Setup) -> Result<VorticityState> {
    if setup.initial.norm_l2() > 0.0 {
        return Ok(setup.initial.clone());
    }
    let wo = &setup.transform;
    let n = setup.initial.n();
    let mut w = VorticityState::zeros(&wo.radial, n);
    for k in 0..=n {
        let f = probe(setup).scale(C64::from_polar(1.0, 0.4 * k as f64));
        w.modes[k] = wo.project_moment_free(k as i32, &f, C64::new(0.0, 0.0))?;
    }
    w.enforce_symmetry();
    Ok(w)
}

pub fn run_verify(setup: &Setup) -> Result<VerifyReport> {
    let wo = &setup.transform;
    let kmax = setup.initial.n().clamp(1, 3) as i32;
    let mut checks = vec![check("wronskian", wronskian()?, 1e-12)];

    let mut bessel = 0.0f64;
    for k in 1..=kmax {
        let (a, b) = pair(k);
        for j in 0..20 {
            let f = gaussian(setup, 1.2 + 0.4 * j as f64, 0.3 + 0.05 * j as f64);
            let hat = wo.forward(a, b, &f)?;
            bessel = bessel.max(hat.norm_l2() / f.norm_l2());
        }
    }
    checks.push(check("bessel_inequality", bessel, 1.0 + 1e-6));

    let mut round = 0.0f64;
    for k in 0..=kmax {
        let (a, b) = pair(k);
        let f = wo.project_moment_free(k, &probe(setup), C64::new(0.0, 0.0))?;
        let back = wo.inverse(a, b, &wo.forward(a, b, &f)?)?;
        round = round.max(back.sub(&f).norm_l2() / f.norm_l2());
    }
    checks.push(check("round_trip", round, 1e-6));

    let w0 = probe_state(setup)?;
    let ratios = verify_semigroup_bounds(wo, &w0, &[0.1, 0.5, 1.0])?;
    let worst = ratios.iter().map(|r| r.max()).fold(0.0, f64::max);
    checks.push(check("semigroup_bounds", worst, 1.02));

    let mut deriv = 0.0f64;
    for k in 1..=kmax {
        let f = wo.project_moment_free(k, &probe(setup), C64::new(0.0, 0.0))?;
        let r = wo.check_derivative_rules(k, &f)?;
        deriv = deriv.max(r.radial_derivative).max(r.order_multiplier).max(r.lambda_multiplier);
    }
    checks.push(check("derivative_rules", deriv, 1e-8));

    Ok(VerifyReport {
        versions: VERSIONS,
        scenario: setup.scenario.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
