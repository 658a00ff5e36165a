//! Boundary controls that keep Helmholtz trajectories on the moment manifold.

use crate::biot_savart::{FarField, VelocityState, VorticityState};
use crate::conformal::{weighted_modes, ConformalMap};
use crate::error::{Error, Result};
use crate::nonlinear::{solve_helmholtz_mapped, step_count, BoundaryControl, SolverOptions, TrajectoryRecord};
use crate::weber_orr::WeberOrr;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// Robin data `u_k`, `k = 0..=N`, that cancels the moment flux of the advection term:
/// `u_k = -|k| r0^{|k|} int s^{-|k|} [H conj((Phi^{-1})') w]_k ds`
/// with `H = (v_r - v_inf,r) + i (v_phi - v_inf,phi)`.
pub fn noslip_rhs(w: &VorticityState, vel: &VelocityState, far: &FarField, map: Option<&ConformalMap>) -> Vec<C64> {
    let n = w.n() as i32;
    let g = w.grid().clone();
    let r0 = g.r0;
    let gw = weighted_modes(map, w);
    let nv = vel.n() as i32;
    let i1 = C64::new(0.0, 1.0);
    let h = |q: i32, i: usize| {
        if q.abs() > nv {
            return C64::new(0.0, 0.0);
        }
        (vel.vr_at(q, i) - far.r_coeff(q)) + i1 * (vel.vphi_at(q, i) - far.phi_coeff(q))
    };
    (0..=n)
        .into_par_iter()
        .map(|k| {
            if k == 0 {
                return C64::new(0.0, 0.0);
            }
            let f: Vec<C64> = g
                .nodes
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    let prod: C64 = (-n..=n).map(|m| h(k - m, i) * gw[(m + n) as usize].values[i]).sum();
                    prod * s.powi(-k)
                })
                .collect();
            -(k as f64) * r0.powi(k) * g.integrate(&f)
        })
        .collect()
}

/// Outcome of the outer control iteration.
#[derive(Debug, Clone)]
pub struct ControlSolution {
    pub control: BoundaryControl,
    pub trajectory: TrajectoryRecord,
    pub outer_iterations: usize,
    /// `sup |u^{(j+1)} - u^{(j)}|` per outer iteration.
    pub history: Vec<f64>,
}

/// Fixed point `u = F(u)` with `F` the no-slip data along the trajectory driven by `u`.
/// Controls act on modes `0..=n_control`; the state carries `w0.n()` modes.
#[allow(clippy::too_many_arguments)]
pub fn solve_noslip_control(
    wo: &WeberOrr,
    w0: &VorticityState,
    far: &FarField,
    map: Option<&ConformalMap>,
    n_control: usize,
    t_final: f64,
    dt: f64,
    opts: &SolverOptions,
) -> Result<ControlSolution> {
    let steps = step_count(t_final, dt)?;
    let nc = n_control.min(w0.n());
    let mut u = BoundaryControl::zeros(nc, steps, dt);
    let mut history = Vec::new();
    for outer in 1..=opts.max_outer {
        let traj = solve_helmholtz_mapped(wo, w0, far, map, &u, t_final, dt, opts)?;
        let mut next = BoundaryControl::zeros(nc, steps, dt);
        let rhs: Vec<Vec<C64>> = traj
            .states
            .par_iter()
            .zip(&traj.velocities)
            .map(|(w, v)| noslip_rhs(w, v, far, map))
            .collect();
        for (j, r) in rhs.iter().enumerate() {
            for k in 0..=nc {
                next.samples[k][j] = r[k];
            }
        }
        let d = next.sup_diff(&u);
        history.push(d);
        log::info!("control iteration {outer}: sup difference {d:.3e}");
        if d < opts.control_tol {
            return Ok(ControlSolution {
                control: u,
                trajectory: traj,
                outer_iterations: outer,
                history,
            });
        }
        if history.len() >= 3 {
            let l = history.len();
            if history[l - 1] >= history[l - 2] && history[l - 2] >= history[l - 3] {
                return Err(Error::NonConvergence(format!(
                    "control iteration not contracting: {:.3e} after {outer} iterations",
                    d
                )));
            }
        }
        u = next;
    }
    Err(Error::NonConvergence(format!(
        "control iteration did not reach {} in {} iterations (last {:.3e})",
        opts.control_tol,
        opts.max_outer,
        history.last().copied().unwrap_or(f64::NAN)
    )))
}
