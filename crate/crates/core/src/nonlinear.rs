//! Mild-solution stepping for Oseen and Helmholtz vorticity equations with
//! Robin boundary controls.
//!
//! One step of size `dt` is
//! `w+ = S(dt) w + dt/2 (S(dt) N(w) + N(w+)) + [B(t+dt) - S(dt) B(t)]`
//! where `N = -(v . grad w)` and `B` is the response to the boundary controls.
//! The implicit `N(w+)` is resolved by Picard iteration.

use crate::biot_savart::{mode_value, reconstruct_velocity, FarField, VelocityState, VorticityState};
use crate::bessel::forcing_kernel_rho;
use crate::conformal::ConformalMap;
use crate::error::{Error, Result};
use crate::grid::{RadialFunction, SpectralFunction};
use crate::stokes::{decay, join, pair, split, SplitMode};
use crate::weber_orr::WeberOrr;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Tolerances for the inner and outer fixed-point iterations.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverOptions {
    pub picard_tol: f64,
    pub max_iter: usize,
    pub control_tol: f64,
    pub max_outer: usize,
    /// Small-data bound on `||w0||_H1`; exceeding it only logs a warning.
    pub small_data_bound: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            picard_tol: 1e-10,
            max_iter: 40,
            control_tol: 1e-8,
            max_outer: 30,
            small_data_bound: 0.1,
        }
    }
}

/// Controls `u_k(t_j)` on the uniform grid `t_j = j dt`, `k = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryControl {
    pub dt: f64,
    /// `samples[k][j]`.
    pub samples: Vec<Vec<C64>>,
}

impl BoundaryControl {
    pub fn zeros(n: usize, steps: usize, dt: f64) -> Self {
        BoundaryControl {
            dt,
            samples: vec![vec![ZERO; steps + 1]; n + 1],
        }
    }

    pub fn n(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn steps(&self) -> usize {
        self.samples[0].len() - 1
    }

    /// `u_k(t_j)`, conjugate-extended to `k < 0`, zero for `|k| > N`.
    pub fn at(&self, k: i32, j: usize) -> C64 {
        match self.samples.get(k.unsigned_abs() as usize) {
            None => ZERO,
            Some(s) if k >= 0 => s[j],
            Some(s) => s[j].conj(),
        }
    }

    /// Piecewise-linear `u_k(t)`.
    pub fn value(&self, k: i32, t: f64) -> C64 {
        let x = (t / self.dt).clamp(0.0, self.steps() as f64);
        let j = (x.floor() as usize).min(self.steps().saturating_sub(1));
        let f = x - j as f64;
        if self.steps() == 0 {
            return self.at(k, 0);
        }
        self.at(k, j) * (1.0 - f) + self.at(k, j + 1) * f
    }

    pub fn is_zero_mode(&self, k: usize) -> bool {
        self.samples.get(k).is_none_or(|s| s.iter().all(|v| *v == ZERO))
    }

    /// `sup_{k,j} |u_k(t_j) - v_k(t_j)|`.
    pub fn sup_diff(&self, other: &BoundaryControl) -> f64 {
        let n = self.n().max(other.n()) as i32;
        let mut d = 0.0f64;
        for k in 0..=n {
            for j in 0..=self.steps() {
                d = d.max((self.at(k, j) - other.at(k, j)).norm());
            }
        }
        d
    }
}

/// `(int_0^h e^{-mu s} ds, int_0^h s e^{-mu s} ds / h)` without cancellation.
fn exp_moments(mu: f64, h: f64) -> (f64, f64) {
    let x = mu * h;
    if x < 0.1 {
        let (mut i0, mut i1) = (0.0, 0.0);
        let mut term = 1.0;
        for n in 0..14 {
            let nf = n as f64;
            i0 += term / (nf + 1.0);
            i1 += term / (nf + 2.0);
            term *= -x / (nf + 1.0);
        }
        (h * i0, h * i1)
    } else {
        let e = (-x).exp();
        ((1.0 - e) / mu, (1.0 - e - x * e) / (mu * x))
    }
}

/// Exact-exponential product weights of a linear function over `[0, h]`:
/// `int_0^h e^{-mu (h - tau)} u(tau) dtau = a u(0) + b u(h)`.
pub fn linear_exp_weights(mu: f64, h: f64) -> (f64, f64) {
    let (i0, i1) = exp_moments(mu, h);
    (i1, i0 - i1)
}

/// `G(lambda, t) = int_0^t e^{-lambda^2 (t - tau)} u_k(tau) dtau` on the spectral grid.
pub fn control_integral(u: &BoundaryControl, k: i32, t: f64, lambdas: &[f64]) -> Vec<C64> {
    let mut g = vec![ZERO; lambdas.len()];
    let full = ((t / u.dt) * (1.0 + 1e-12)).floor() as usize;
    let full = full.min(u.steps());
    for j in 0..full {
        let (a, b) = (u.at(k, j), u.at(k, j + 1));
        for (gv, &l) in g.iter_mut().zip(lambdas) {
            let mu = l * l;
            let (wa, wb) = linear_exp_weights(mu, u.dt);
            *gv = *gv * (-mu * u.dt).exp() + a * wa + b * wb;
        }
    }
    let rest = t - full as f64 * u.dt;
    if rest > 1e-12 * u.dt {
        let (a, b) = (u.at(k, full), u.value(k, t));
        for (gv, &l) in g.iter_mut().zip(lambdas) {
            let mu = l * l;
            let (wa, wb) = linear_exp_weights(mu, rest);
            *gv = *gv * (-mu * rest).exp() + a * wa + b * wb;
        }
    }
    g
}

/// `rho_k(lambda) G(lambda, t)`, the spectral factor of the boundary forcing.
pub fn forcing_spectrum(wo: &WeberOrr, u: &BoundaryControl, k: i32, t: f64) -> Result<SpectralFunction> {
    let s = &wo.spectral;
    let g = control_integral(u, k, t, &s.lambdas);
    let values = s
        .lambdas
        .iter()
        .zip(g)
        .map(|(&l, v)| Ok(v * forcing_kernel_rho(k.abs(), l, wo.r0())?))
        .collect::<Result<_>>()?;
    Ok(SpectralFunction {
        grid: s.clone(),
        values,
    })
}

/// Smooth profile with `chi(r0) = 0` and `r0 chi'(r0) = 1`.
pub fn robin_lift(wo: &WeberOrr) -> RadialFunction {
    let r0 = wo.r0();
    RadialFunction::from_real(&wo.radial, |r| {
        let x = (r - r0) / r0;
        x * (-x * x).exp()
    })
}

/// Precomputed pieces for the forced response of one mode.
struct ForcingMode {
    k: i32,
    lift: RadialFunction,
    lift_hat: Vec<C64>,
    bump_hat: Vec<C64>,
    rho: Vec<f64>,
}

impl ForcingMode {
    fn new(wo: &WeberOrr, k: i32) -> Result<Self> {
        let lift = wo.project_moment_free(k, &robin_lift(wo), ZERO)?;
        let (a, b) = pair(k);
        let lift_hat = wo.forward(a, b, &lift)?.values;
        let bump_hat = wo.forward(a, b, &wo.bump(k))?.values;
        let rho = wo
            .spectral
            .lambdas
            .iter()
            .map(|&l| forcing_kernel_rho(k.abs(), l, wo.r0()))
            .collect::<Result<_>>()?;
        Ok(ForcingMode {
            k,
            lift,
            lift_hat,
            bump_hat,
            rho,
        })
    }

    /// Forced response at time `t`. Its transform is `-rho G`; the boundary
    /// layer is carried by `u(t) chi` and the moment flux by the bump, so the
    /// remaining spectrum decays fast and is regular at `lambda -> 0`.
    fn response(&self, wo: &WeberOrr, u: &BoundaryControl, t: f64) -> Result<RadialFunction> {
        let k = self.k;
        let s = &wo.spectral;
        let g = control_integral(u, k, t, &s.lambdas);
        let ut = u.value(k, t);
        let big_u = control_integral(u, k, t, &[0.0])[0];
        let flux = big_u * wo.r0().powi(-k.abs());
        let values = (0..s.len())
            .map(|j| -g[j] * self.rho[j] + flux * self.bump_hat[j] - ut * self.lift_hat[j])
            .collect();
        let (a, b) = pair(k);
        let mut out = wo.inverse(a, b, &SpectralFunction { grid: s.clone(), values })?;
        out.axpy(ut, &self.lift);
        out.axpy(-flux, &wo.bump(k));
        Ok(out)
    }
}

/// Forced response `B(t)`: zero initial data, Robin data `u_k` at `r0`.
///
/// Its Weber-Orr spectrum is `-rho_k(lambda) G(lambda, t)`; see [`forcing_spectrum`].
pub fn boundary_forcing(wo: &WeberOrr, u: &BoundaryControl, n: usize, t: f64) -> Result<VorticityState> {
    if t < -1e-12 || t > u.dt * u.steps() as f64 * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("time {t} outside the control grid")));
    }
    let mut out = VorticityState::zeros(&wo.radial, n);
    for k in 0..=n.min(u.n()) {
        if !u.is_zero_mode(k) {
            out.modes[k] = ForcingMode::new(wo, k as i32)?.response(wo, u, t)?;
        }
    }
    out.enforce_symmetry();
    Ok(out)
}

/// Per-step increments `B(t_{j+1}) - S(dt) B(t_j)` for every mode.
fn forcing_increments(wo: &WeberOrr, u: &BoundaryControl, n: usize) -> Result<Vec<Vec<Option<RadialFunction>>>> {
    let steps = u.steps();
    let per_mode: Vec<Vec<Option<RadialFunction>>> = (0..=n)
        .into_par_iter()
        .map(|k| {
            if k > u.n() || u.is_zero_mode(k) {
                return Ok(vec![None; steps]);
            }
            let fm = ForcingMode::new(wo, k as i32)?;
            let resp: Vec<RadialFunction> = (0..=steps)
                .map(|j| fm.response(wo, u, j as f64 * u.dt))
                .collect::<Result<_>>()?;
            (0..steps)
                .map(|j| {
                    let prev = crate::stokes::apply_semigroup(wo, k as i32, &resp[j], u.dt)?;
                    Ok(Some(resp[j + 1].sub(&prev)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    // Transpose to [step][mode].
    Ok((0..steps)
        .map(|j| per_mode.iter().map(|m| m[j].clone()).collect())
        .collect())
}

/// Mode-space `-(v . grad w)_k` for `k = 0..=N`, convolution truncated at `N`.
pub fn advection_term(w: &VorticityState, v: &VelocityState) -> VorticityState {
    let g = w.grid().clone();
    let n = w.n() as i32;
    let nv = v.n() as i32;
    let dw: Vec<RadialFunction> = w.modes.iter().map(|m| m.derivative()).collect();
    let modes = (0..=n)
        .into_par_iter()
        .map(|k| {
            let mut out = RadialFunction::zeros(&g);
            for m in -n..=n {
                let q = k - m;
                if q.abs() > nv {
                    continue;
                }
                for (i, &r) in g.nodes.iter().enumerate() {
                    let a = v.vr_at(q, i) * mode_value(&dw, m, i);
                    let b = v.vphi_at(q, i) * w.at(m, i) * C64::new(0.0, m as f64 / r);
                    out.values[i] -= a + b;
                }
            }
            out
        })
        .collect();
    let mut out = VorticityState { modes };
    out.enforce_symmetry();
    out
}

/// How the advecting velocity is obtained inside a step.
#[derive(Clone)]
pub enum Advection<'a> {
    /// Frozen externally supplied field (Oseen).
    Frozen(&'a VelocityState),
    /// Reconstructed from the current iterate (Helmholtz), optionally through a map.
    SelfConsistent {
        far: FarField,
        map: Option<&'a ConformalMap>,
    },
}

impl Advection<'_> {
    fn velocity(&self, w: &VorticityState) -> VelocityState {
        match self {
            Advection::Frozen(v) => (*v).clone(),
            Advection::SelfConsistent { far, map: None } => reconstruct_velocity(w, far),
            Advection::SelfConsistent { far, map: Some(m) } => {
                crate::conformal::mapped_reconstruct_velocity(m, w, far)
            }
        }
    }

    fn term(&self, w: &VorticityState, v: &VelocityState, lag: Option<&(VorticityState, f64)>) -> VorticityState {
        match self {
            Advection::SelfConsistent { map: Some(m), .. } if !m.is_identity() => {
                crate::conformal::mapped_advection_term(m, w, v, lag)
            }
            _ => advection_term(w, v),
        }
    }
}

/// Statistics of one step's Picard iteration.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct PicardStats {
    pub iterations: usize,
    /// Largest observed `||d_{j+1}|| / ||d_j||` (0 if fewer than three iterates).
    pub contraction: f64,
    pub converged: bool,
    pub last_update: f64,
}

/// Split modes of a state.
fn split_state(wo: &WeberOrr, w: &VorticityState) -> Result<Vec<SplitMode>> {
    w.modes
        .par_iter()
        .enumerate()
        .map(|(k, m)| split(wo, k as i32, m))
        .collect()
}

/// `sum_j a_j s_j` on split modes with per-mode decay `exp(-lambda^2 t_j)`.
fn combine(parts: &[(&SplitMode, C64, f64)]) -> SplitMode {
    let first = parts[0].0;
    let mut moment = ZERO;
    let mut values = vec![ZERO; first.spectrum.values.len()];
    for (s, a, t) in parts {
        moment += s.moment * *a;
        let l = &s.spectrum.grid.lambdas;
        for j in 0..values.len() {
            let e = if *t == 0.0 { 1.0 } else { (-l[j] * l[j] * t).exp() };
            values[j] += s.spectrum.values[j] * (*a * e);
        }
    }
    SplitMode {
        moment,
        spectrum: SpectralFunction {
            grid: first.spectrum.grid.clone(),
            values,
        },
    }
}

/// One step with the implicit nonlinear term resolved by Picard iteration.
#[allow(clippy::too_many_arguments)]
fn step_inner(
    wo: &WeberOrr,
    w: &VorticityState,
    adv: &Advection,
    increment: Option<&[Option<RadialFunction>]>,
    dt: f64,
    opts: &SolverOptions,
    prev: Option<&VorticityState>,
) -> Result<(VorticityState, VelocityState, PicardStats)> {
    let h = C64::new(0.5 * dt, 0.0);
    let one = C64::new(1.0, 0.0);
    let lag_now = prev.map(|p| (w.sub(p), dt));
    let v0 = adv.velocity(w);
    let n0 = adv.term(w, &v0, lag_now.as_ref());
    let sw = split_state(wo, w)?;
    let sn = split_state(wo, &n0)?;
    // Explicit part: S(dt) w + dt/2 S(dt) N(w) + increment.
    let explicit: Vec<RadialFunction> = (0..=w.n())
        .into_par_iter()
        .map(|k| {
            let s = combine(&[(&sw[k], one, dt), (&sn[k], h, dt)]);
            let mut f = join(wo, k as i32, &s)?;
            if let Some(Some(inc)) = increment.map(|i| &i[k]) {
                f.axpy(one, inc);
            }
            Ok(f)
        })
        .collect::<Result<_>>()?;
    let explicit = VorticityState { modes: explicit };
    let linear = matches!(adv, Advection::Frozen(v) if is_zero_velocity(v));
    let mut cur = explicit.clone();
    let mut stats = PicardStats::default();
    let mut deltas: Vec<f64> = Vec::new();
    let mut vel = v0;
    if linear {
        stats.converged = true;
        let mut out = explicit;
        out.enforce_symmetry();
        return Ok((out, vel, stats));
    }
    for it in 1..=opts.max_iter {
        vel = adv.velocity(&cur);
        let lag = Some((cur.sub(w), dt));
        let nn = adv.term(&cur, &vel, lag.as_ref());
        let next: Vec<RadialFunction> = (0..=w.n())
            .into_par_iter()
            .map(|k| {
                let s = split(wo, k as i32, &nn.modes[k])?;
                let s = SplitMode {
                    moment: s.moment,
                    spectrum: decay(&s.spectrum, 0.0),
                };
                let mut f = join(wo, k as i32, &s)?.scale(h);
                f.axpy(one, &explicit.modes[k]);
                Ok(f)
            })
            .collect::<Result<_>>()?;
        let mut next = VorticityState { modes: next };
        next.enforce_symmetry();
        let d = next.sub(&cur).norm_l2();
        deltas.push(d);
        cur = next;
        stats.iterations = it;
        stats.last_update = d;
        if deltas.len() >= 2 {
            let a = deltas[deltas.len() - 2];
            if d > 10.0 * opts.picard_tol && a > 0.0 {
                stats.contraction = stats.contraction.max(d / a);
            }
        }
        if d < opts.picard_tol {
            stats.converged = true;
            break;
        }
    }
    if !cur.is_finite() {
        return Err(Error::NonConvergence("non-finite state in Picard iteration".into()));
    }
    let vel = adv.velocity(&cur);
    Ok((cur, vel, stats))
}

fn is_zero_velocity(v: &VelocityState) -> bool {
    v.vr.iter().chain(&v.vphi).all(|m| m.values.iter().all(|x| *x == ZERO))
}

/// One Oseen step with a frozen advecting field and controls sampled at `t`, `t + dt`.
pub fn step_oseen(
    wo: &WeberOrr,
    w: &VorticityState,
    vel: &VelocityState,
    u: &BoundaryControl,
    t: f64,
    dt: f64,
) -> Result<VorticityState> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let cfl = dt * vel.max_speed() / wo.radial.h_min();
    if cfl > 1.0 {
        log::warn!("CFL-type number {cfl:.2} exceeds 1");
    }
    let n = w.n();
    let inc = single_increment(wo, u, n, t, dt)?;
    let (out, _, stats) = step_inner(wo, w, &Advection::Frozen(vel), Some(&inc), dt, &SolverOptions::default(), None)?;
    if !stats.converged {
        log::warn!("Oseen step at t = {t}: implicit iteration stopped after {} iterations", stats.iterations);
    }
    Ok(out)
}

fn single_increment(wo: &WeberOrr, u: &BoundaryControl, n: usize, t: f64, dt: f64) -> Result<Vec<Option<RadialFunction>>> {
    (0..=n)
        .map(|k| {
            if k > u.n() || u.is_zero_mode(k) {
                return Ok(None);
            }
            let fm = ForcingMode::new(wo, k as i32)?;
            let a = fm.response(wo, u, t)?;
            let b = fm.response(wo, u, t + dt)?;
            let prev = crate::stokes::apply_semigroup(wo, k as i32, &a, dt)?;
            Ok(Some(b.sub(&prev)))
        })
        .collect()
}

/// Per-step diagnostics of a trajectory.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub manifold_residual: Vec<[f64; 2]>,
    pub boundary_velocity_norm: f64,
    pub picard: PicardStats,
}

/// Trajectory of a Helmholtz run.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<VorticityState>,
    pub velocities: Vec<VelocityState>,
    pub records: Vec<StepRecord>,
}

fn record(t: f64, w: &VorticityState, v: &VelocityState, far: &FarField, map: Option<&ConformalMap>, picard: PicardStats) -> StepRecord {
    let res = match map {
        Some(m) => crate::conformal::mapped_manifold_residual(m, w, far),
        None => crate::biot_savart::manifold_residual(w, far),
    };
    StepRecord {
        t,
        manifold_residual: res.iter().map(|c| [c.re, c.im]).collect(),
        boundary_velocity_norm: crate::biot_savart::boundary_velocity_norm(v, w.n()),
        picard,
    }
}

/// Helmholtz trajectory on `[0, T]` with self-consistent velocity and controls `u`.
pub fn solve_helmholtz(
    wo: &WeberOrr,
    w0: &VorticityState,
    far: &FarField,
    u: &BoundaryControl,
    t_final: f64,
    dt: f64,
    opts: &SolverOptions,
) -> Result<TrajectoryRecord> {
    solve_helmholtz_mapped(wo, w0, far, None, u, t_final, dt, opts)
}

/// As [`solve_helmholtz`], optionally on a conformally mapped domain.
#[allow(clippy::too_many_arguments)]
pub fn solve_helmholtz_mapped(
    wo: &WeberOrr,
    w0: &VorticityState,
    far: &FarField,
    map: Option<&ConformalMap>,
    u: &BoundaryControl,
    t_final: f64,
    dt: f64,
    opts: &SolverOptions,
) -> Result<TrajectoryRecord> {
    let steps = step_count(t_final, dt)?;
    if u.steps() != steps || (u.dt - dt).abs() > 1e-12 * dt {
        return Err(Error::Domain("control grid must equal the solver time grid".into()));
    }
    let h1 = w0.norm_h1();
    if h1 > opts.small_data_bound {
        log::warn!("||w0||_H1 = {h1:.3e} exceeds the small-data bound {}", opts.small_data_bound);
    }
    let n = w0.n();
    let pairs: Vec<_> = (0..=n as i32).map(pair).collect();
    wo.prepare(&pairs);
    let incs = forcing_increments(wo, u, n)?;
    let adv = Advection::SelfConsistent { far: *far, map };
    let mut w = w0.clone();
    w.enforce_symmetry();
    let v = adv.velocity(&w);
    let mut rec = TrajectoryRecord {
        times: vec![0.0],
        states: vec![w.clone()],
        velocities: vec![v.clone()],
        records: vec![record(0.0, &w, &v, far, map, PicardStats::default())],
    };
    let mut bad = 0;
    let mut prev: Option<VorticityState> = None;
    for j in 0..steps {
        let (next, vel, stats) = step_inner(wo, &w, &adv, Some(&incs[j]), dt, opts, prev.as_ref())?;
        if stats.contraction >= 1.0 || !stats.converged {
            bad += 1;
            if bad >= 3 {
                return Err(Error::NonConvergence(format!(
                    "Picard contraction {:.3} at t = {:.4}; data too large for the small-data regime",
                    stats.contraction,
                    (j + 1) as f64 * dt
                )));
            }
        } else {
            bad = 0;
        }
        let t = (j + 1) as f64 * dt;
        rec.records.push(record(t, &next, &vel, far, map, stats));
        rec.times.push(t);
        rec.states.push(next.clone());
        rec.velocities.push(vel);
        if map.is_some() {
            prev = Some(w);
        }
        w = next;
    }
    Ok(rec)
}

/// Number of steps, requiring `dt` to divide `T` within rounding.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::Domain(format!("need dt > 0 and T >= 0, got dt = {dt}, T = {t_final}")));
    }
    let s = (t_final / dt).round();
    if (s * dt - t_final).abs() > 1e-9 * t_final.max(dt) {
        return Err(Error::Domain(format!("dt = {dt} does not divide T = {t_final}")));
    }
    Ok(s as usize)
}
