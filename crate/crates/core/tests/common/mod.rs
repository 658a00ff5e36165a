#![allow(dead_code)]

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::Arc;
use vortexbc::biot_savart::VorticityState;
use vortexbc::grid::{RadialFunction, RadialGrid, RadialSpec, SpectralGrid, SpectralSpec};
use vortexbc::weber_orr::WeberOrr;

/// Transform on `[1, 40]` with radial panels of width `dr` and `lambda <= 30`.
pub fn transform(dr: f64) -> WeberOrr {
    let mut rs = RadialSpec::new(1.0);
    rs.panel_width = dr;
    let g = RadialGrid::new(&rs).unwrap();
    let mut ss = SpectralSpec::new(1.0, rs.r_max);
    ss.lambda_max = 30.0;
    WeberOrr::new(g, SpectralGrid::new(&ss).unwrap())
}

pub fn bump(g: &Arc<RadialGrid>, amp: f64) -> RadialFunction {
    RadialFunction::from_real(g, |r| amp * (-(r - 4.0f64).powi(2) / 0.5).exp())
}

/// Moment-free Gaussian bumps in modes `0..=min(n, filled)`.
pub fn moment_free_state(wo: &WeberOrr, n: usize, filled: usize, amp: f64) -> VorticityState {
    let g = wo.radial.clone();
    let mut w = VorticityState::zeros(&g, n);
    for k in 0..=n.min(filled) {
        let phase = C64::from_polar(1.0, 0.4 * k as f64);
        let f = bump(&g, amp).scale(phase);
        w.modes[k] = wo.project_moment_free(k as i32, &f, C64::new(0.0, 0.0)).unwrap();
    }
    w.enforce_symmetry();
    w
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (mut q0, mut q1) = (1.0, x);
                for m in 2..=n {
                    let q2 = ((2 * m - 1) as f64 * x * q1 - (m - 1) as f64 * q0) / m as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                ws[i] = 2.0 / ((1.0 - x * x) * dq * dq);
                break;
            }
        }
        xs[i] = x;
    }
    (xs, ws)
}
