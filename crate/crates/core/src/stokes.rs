//! Stokes (heat) evolution of vorticity modes through the Weber-Orr semigroup,
//! Robin residuals, semigroup estimates and a Crank-Nicolson reference solver.
//!
//! The semigroup acts on the moment-free part of each mode. The moment of the
//! input is carried by the projection bump and held fixed, so moments are
//! conserved exactly by construction.

use crate::biot_savart::VorticityState;
use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid, SpectralFunction};
use crate::weber_orr::WeberOrr;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::sync::Arc;

/// Order pair of the transform used for mode `k`.
#[inline]
pub fn pair(k: i32) -> (i32, i32) {
    let a = k.abs();
    (a, a - 1)
}

/// Mode `k` split into its moment and the transform of the moment-free rest.
#[derive(Debug, Clone)]
pub struct SplitMode {
    pub moment: C64,
    pub spectrum: SpectralFunction,
}

/// Output of [`evolve_stokes`].
#[derive(Debug, Clone)]
pub struct SemigroupResult {
    pub t: f64,
    pub state: VorticityState,
    /// `exp(-lambda^2 t) * W[w0_k - m_k phi_k]` per stored mode.
    pub spectral: Vec<SpectralFunction>,
}

/// Splits `f` into moment and spectrum of the moment-free remainder.
pub fn split(wo: &WeberOrr, k: i32, f: &RadialFunction) -> Result<SplitMode> {
    let m = f.moment(k);
    let free = if m == C64::new(0.0, 0.0) {
        f.clone()
    } else {
        let mut g = f.clone();
        g.axpy(-m, &wo.bump(k));
        g
    };
    let (a, b) = pair(k);
    Ok(SplitMode {
        moment: m,
        spectrum: wo.forward(a, b, &free)?,
    })
}

/// Inverse of [`split`].
pub fn join(wo: &WeberOrr, k: i32, s: &SplitMode) -> Result<RadialFunction> {
    let (a, b) = pair(k);
    let mut f = wo.inverse(a, b, &s.spectrum)?;
    if s.moment != C64::new(0.0, 0.0) {
        f.axpy(s.moment, &wo.bump(k));
    }
    Ok(f)
}

/// Multiplies a spectrum by `exp(-lambda^2 t)`.
pub fn decay(s: &SpectralFunction, t: f64) -> SpectralFunction {
    s.map(|l, v| v * (-l * l * t).exp())
}

/// `S(t) f` for a single mode.
pub fn apply_semigroup(wo: &WeberOrr, k: i32, f: &RadialFunction, t: f64) -> Result<RadialFunction> {
    let mut s = split(wo, k, f)?;
    s.spectrum = decay(&s.spectrum, t);
    join(wo, k, &s)
}

/// Stokes evolution `w(t) = S(t) w0` of every stored mode.
pub fn evolve_stokes(wo: &WeberOrr, w0: &VorticityState, t: f64) -> Result<SemigroupResult> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    let pairs: Vec<_> = (0..=w0.n() as i32).map(pair).collect();
    wo.prepare(&pairs);
    let out: Vec<(RadialFunction, SpectralFunction)> = w0
        .modes
        .par_iter()
        .enumerate()
        .map(|(k, f)| {
            let k = k as i32;
            let mut s = split(wo, k, f)?;
            if s.moment.norm() > 0.0 {
                log::debug!("mode {k}: moment {:.3e} held on the bump", s.moment.norm());
            }
            s.spectrum = decay(&s.spectrum, t);
            Ok((join(wo, k, &s)?, s.spectrum))
        })
        .collect::<Result<_>>()?;
    let (modes, spectral) = out.into_iter().unzip();
    let mut state = VorticityState { modes };
    state.enforce_symmetry();
    Ok(SemigroupResult { t, state, spectral })
}

/// `r0 w_k'(r0) + |k| w_k(r0)` with a one-sided three-point derivative.
pub fn robin_residual(w: &VorticityState) -> Vec<C64> {
    w.modes
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let g = &m.grid;
            g.r0 * g.boundary_derivative(&m.values) + m.values[0] * k as f64
        })
        .collect()
}

/// Ratios checked against the Stokes semigroup estimates at one time.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SemigroupRatios {
    pub t: f64,
    /// `||S(t) w0|| / ||w0||`.
    pub l2: f64,
    /// `sqrt(e t) ||grad S(t) w0|| / ||w0||`.
    pub gradient: f64,
    /// `sqrt(2 e t) ||grad S(t) w0|| / ||w0||`, the sharper constant; report only.
    pub gradient_sharp: f64,
    /// `||S(t) w0||_H1 / (sqrt 3 ||w0||_H1)`.
    pub h1: f64,
}

impl SemigroupRatios {
    pub fn max(&self) -> f64 {
        self.l2.max(self.gradient).max(self.h1)
    }
}

/// The three semigroup ratios at each requested time; all zero for `w0 = 0`.
pub fn verify_semigroup_bounds(wo: &WeberOrr, w0: &VorticityState, times: &[f64]) -> Result<Vec<SemigroupRatios>> {
    let n0 = w0.norm_l2();
    let h0 = w0.norm_h1();
    times
        .iter()
        .map(|&t| {
            if n0 == 0.0 {
                return Ok(SemigroupRatios {
                    t,
                    l2: 0.0,
                    gradient: 0.0,
                    gradient_sharp: 0.0,
                    h1: 0.0,
                });
            }
            let w = evolve_stokes(wo, w0, t)?.state;
            let g = w.norm_grad();
            let e = std::f64::consts::E;
            Ok(SemigroupRatios {
                t,
                l2: w.norm_l2() / n0,
                gradient: (e * t).sqrt() * g / n0,
                gradient_sharp: (2.0 * e * t).sqrt() * g / n0,
                h1: w.norm_h1() / (3f64.sqrt() * h0),
            })
        })
        .collect()
}

/// `||S(t+s) w0 - S(t) S(s) w0|| / ||w0||`.
pub fn composition_error(wo: &WeberOrr, w0: &VorticityState, t: f64, s: f64) -> Result<f64> {
    let direct = evolve_stokes(wo, w0, t + s)?.state;
    let half = evolve_stokes(wo, w0, s)?.state;
    let twice = evolve_stokes(wo, &half, t)?.state;
    let n0 = w0.norm_l2();
    Ok(if n0 == 0.0 {
        0.0
    } else {
        direct.sub(&twice).norm_l2() / n0
    })
}

/// Uniform-grid Crank-Nicolson solver for `w_t = Delta_k w` with Robin
/// condition at `r0` (ghost node) and Dirichlet at `r_max`.
#[derive(Debug, Clone, Copy)]
pub struct HeatOracle {
    pub r_max: f64,
    /// Number of uniform cells on `[r0, r_max]`; must be even.
    pub cells: usize,
    /// Frozen uniform advection `(c_x, c_y)` applied in mode space.
    pub advection: (f64, f64),
}

impl HeatOracle {
    pub fn new(r_max: f64, cells: usize) -> Self {
        HeatOracle {
            r_max,
            cells: cells + cells % 2,
            advection: (0.0, 0.0),
        }
    }

    /// Uniform grid (three-point panels, Simpson weights) the oracle lives on.
    pub fn grid(&self, r0: f64) -> Result<Arc<RadialGrid>> {
        let panels = self.cells / 2;
        let h2 = (self.r_max - r0) / panels as f64;
        let mut edges: Vec<f64> = (0..=panels).map(|i| r0 + i as f64 * h2).collect();
        *edges.last_mut().unwrap() = self.r_max;
        RadialGrid::from_edges(edges, 3)
    }

    /// Runs a single mode without advection.
    pub fn run(&self, k: i32, w0: &RadialFunction, t: f64, steps: usize) -> Result<RadialFunction> {
        let mut state = VorticityState::zeros(&w0.grid, k.unsigned_abs() as usize);
        state.modes[k.unsigned_abs() as usize] = w0.clone();
        let out = self.run_state(&state, t, steps)?;
        Ok(out.modes[k.unsigned_abs() as usize].clone())
    }

    /// Runs all modes `0..=N` of a state; with advection the modes couple.
    pub fn run_state(&self, w0: &VorticityState, t: f64, steps: usize) -> Result<VorticityState> {
        if steps < 1 {
            return Err(Error::Domain("oracle needs at least one step".into()));
        }
        let src = w0.grid();
        let g = self.grid(src.r0)?;
        let n = g.len();
        let h = g.nodes[1] - g.nodes[0];
        let dt = t / steps as f64;
        let nm = w0.n();
        let mut u: Vec<Vec<C64>> = w0
            .modes
            .iter()
            .map(|m| g.nodes.iter().map(|&r| src.interpolate(&m.values, r.min(src.r_max))).collect())
            .collect();
        for v in &mut u {
            v[n - 1] = C64::new(0.0, 0.0);
        }
        let advect = self.advection != (0.0, 0.0);
        for _ in 0..steps {
            if advect {
                // Advection couples modes; iterate the implicit half to convergence.
                let explicit: Vec<Vec<C64>> = (0..=nm)
                    .map(|k| {
                        let l = apply_lap(k as i32, &u[k], &g.nodes, h);
                        let a = apply_adv(k as i32, &u, &g.nodes, h, self.advection);
                        (0..n).map(|i| u[k][i] + 0.5 * dt * (l[i] + a[i])).collect()
                    })
                    .collect();
                let mut next = u.clone();
                for _ in 0..100 {
                    let prev = next.clone();
                    for k in 0..=nm {
                        let a = apply_adv(k as i32, &prev, &g.nodes, h, self.advection);
                        let rhs: Vec<C64> = (0..n).map(|i| explicit[k][i] + 0.5 * dt * a[i]).collect();
                        next[k] = implicit_solve(k as i32, &rhs, &g.nodes, h, dt);
                    }
                    let diff: f64 = next
                        .iter()
                        .zip(&prev)
                        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
                        .fold(0.0, f64::max);
                    if diff < 1e-14 {
                        break;
                    }
                }
                u = next;
            } else {
                for k in 0..=nm {
                    let l = apply_lap(k as i32, &u[k], &g.nodes, h);
                    let rhs: Vec<C64> = (0..n).map(|i| u[k][i] + 0.5 * dt * l[i]).collect();
                    u[k] = implicit_solve(k as i32, &rhs, &g.nodes, h, dt);
                }
            }
        }
        Ok(VorticityState {
            modes: u
                .into_iter()
                .map(|values| RadialFunction { grid: g.clone(), values })
                .collect(),
        })
    }
}

/// Tridiagonal coefficients `(lower, diag, upper)` of the discrete `Delta_k` at node `i`.
fn lap_coeffs(k: i32, nodes: &[f64], h: f64, i: usize) -> (f64, f64, f64) {
    let r = nodes[i];
    let kf = k.abs() as f64;
    if i == 0 {
        // Ghost node w_{-1} = w_1 + 2 h (|k| / r0) w_0.
        let d = -2.0 / (h * h) + 2.0 * kf / (r * h) - kf / (r * r) - kf * kf / (r * r);
        (0.0, d, 2.0 / (h * h))
    } else {
        let lo = 1.0 / (h * h) - 1.0 / (2.0 * h * r);
        let up = 1.0 / (h * h) + 1.0 / (2.0 * h * r);
        (lo, -2.0 / (h * h) - kf * kf / (r * r), up)
    }
}

fn apply_lap(k: i32, u: &[C64], nodes: &[f64], h: f64) -> Vec<C64> {
    let n = u.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for i in 0..n - 1 {
        let (a, b, c) = lap_coeffs(k, nodes, h, i);
        let left = if i > 0 { u[i - 1] * a } else { C64::new(0.0, 0.0) };
        out[i] = left + u[i] * b + u[i + 1] * c;
    }
    out
}

/// Mode-space `-(c . grad w)_k` for a uniform velocity, centered differences.
fn apply_adv(k: i32, u: &[Vec<C64>], nodes: &[f64], h: f64, c: (f64, f64)) -> Vec<C64> {
    let n = nodes.len();
    let nm = u.len() as i32 - 1;
    let get = |m: i32, i: usize| -> C64 {
        if m.abs() > nm {
            C64::new(0.0, 0.0)
        } else if m >= 0 {
            u[m as usize][i]
        } else {
            u[(-m) as usize][i].conj()
        }
    };
    let deriv = |m: i32, i: usize| -> C64 {
        if i == 0 {
            (get(m, 1) * 4.0 - get(m, 2) - get(m, 0) * 3.0) / (2.0 * h)
        } else {
            (get(m, i + 1) - get(m, i - 1)) / (2.0 * h)
        }
    };
    // Uniform stream: v_r and v_phi have only modes +-1 (coefficients as for the far field).
    let vr = |m: i32| C64::new(c.0, -(m as f64) * c.1) * 0.5;
    let vp = |m: i32| C64::new(c.1, m as f64 * c.0) * 0.5;
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (i, o) in out.iter_mut().enumerate().take(n - 1) {
        let r = nodes[i];
        let mut s = C64::new(0.0, 0.0);
        for q in [-1, 1] {
            let m = k - q;
            s += vr(q) * deriv(m, i) + vp(q) * C64::new(0.0, m as f64 / r) * get(m, i);
        }
        *o = -s;
    }
    out
}

/// Solves `(I - dt/2 Delta_k) x = rhs` with `x_{n-1} = 0`.
fn implicit_solve(k: i32, rhs: &[C64], nodes: &[f64], h: f64, dt: f64) -> Vec<C64> {
    let n = rhs.len();
    let m = n - 1;
    let mut cp = vec![0.0; m];
    let mut dp = vec![C64::new(0.0, 0.0); m];
    for i in 0..m {
        let (a, b, c) = lap_coeffs(k, nodes, h, i);
        let (a, b, c) = (-0.5 * dt * a, 1.0 - 0.5 * dt * b, -0.5 * dt * c);
        let denom = if i == 0 { b } else { b - a * cp[i - 1] };
        cp[i] = c / denom;
        let prev = if i == 0 { C64::new(0.0, 0.0) } else { dp[i - 1] * a };
        dp[i] = (rhs[i] - prev) / denom;
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for i in (0..m).rev() {
        let next = if i + 1 < m { x[i + 1] } else { C64::new(0.0, 0.0) };
        x[i] = dp[i] - next * cp[i];
    }
    x
}

/// Crank-Nicolson reference for one mode on `[r0, r_max]` of `w0`'s grid with 4000 cells.
pub fn oracle_heat_robin(k: i32, w0: &RadialFunction, t: f64, steps: usize) -> Result<RadialFunction> {
    if steps < 64 {
        return Err(Error::Domain("oracle needs at least 64 steps".into()));
    }
    HeatOracle::new(w0.grid.r_max.min(20.0 * w0.grid.r0), 4000).run(k, w0, t, steps)
}
