//! Scenario-driven runs and their emitted artifacts.

mod output;
mod scenario;
mod verify;

pub use scenario::{
    load_scenario, parse_scenario, Discretization, Geometry, InitialMode, Output, Physics, Profile, Run,
    Scenario, Solver,
};
pub use verify::{run_verify, VerifyCheck, VerifyReport};

use crate::biot_savart::{
    circulation, far_field_coeffs, manifold_residual, reconstruct_velocity, FarField, VelocityState,
    VorticityState,
};
use crate::conformal::{
    eval_inverse_map, eval_inverse_map_derivative, mapped_manifold_residual, mapped_reconstruct_velocity,
    project_mapped_manifold, ConformalMap,
};
use crate::control::solve_noslip_control;
use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid, SpectralGrid};
use crate::nonlinear::{solve_helmholtz_mapped, step_oseen, BoundaryControl, PicardStats, TrajectoryRecord};
use crate::stokes::{evolve_stokes, robin_residual, verify_semigroup_bounds, SemigroupRatios};
use crate::weber_orr::WeberOrr;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Diagnostics at one emission time.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `[re, im]` per `k = 0..=N`.
    pub manifold_residual: Vec<[f64; 2]>,
    pub robin_residual: Vec<[f64; 2]>,
    pub circulation: f64,
    pub boundary_velocity_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semigroup: Option<SemigroupRatios>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardStats>,
}

impl DiagnosticsRecord {
    pub fn is_finite(&self) -> bool {
        let pairs = self.manifold_residual.iter().chain(&self.robin_residual).flatten();
        pairs.chain([&self.circulation, &self.boundary_velocity_norm]).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub vortexbc: &'static str,
    pub format: u32,
}

pub const VERSIONS: Versions = Versions {
    vortexbc: env!("CARGO_PKG_VERSION"),
    format: 1,
};

#[derive(Debug, Clone, Serialize)]
pub struct ControlSummary {
    pub outer_iterations: usize,
    pub history: Vec<f64>,
}

/// Contents of `diagnostics.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub versions: Versions,
    pub solver: Solver,
    pub scenario: Scenario,
    pub records: Vec<DiagnosticsRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlSummary>,
}

/// In-memory result of a run, before anything is written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub diagnostics: Diagnostics,
    pub times: Vec<f64>,
    pub states: Vec<VorticityState>,
    pub velocities: Vec<VelocityState>,
    pub control: Option<BoundaryControl>,
    /// `(theta, z, dz)` on the boundary ring for `map` runs.
    pub ring: Vec<(f64, [f64; 2], [f64; 2])>,
    pub verify: Option<VerifyReport>,
}

/// Everything a solver needs, built once from a scenario.
pub struct Setup {
    pub scenario: Scenario,
    pub transform: WeberOrr,
    pub far: FarField,
    pub map: Option<ConformalMap>,
    pub initial: VorticityState,
}

impl Setup {
    pub fn new(sc: &Scenario) -> Result<Setup> {
        sc.validate()?;
        let radial = RadialGrid::new(&sc.radial_spec())?;
        let spectral = SpectralGrid::new(&sc.spectral_spec())?;
        let transform = WeberOrr::new(radial, spectral);
        let [vx, vy] = sc.physics.far_field;
        let far = far_field_coeffs(vx, vy);
        let map = if sc.geometry.map.is_empty() {
            None
        } else {
            let b = sc.geometry.map.iter().map(|c| C64::new(c[0], c[1])).collect();
            Some(ConformalMap::new(sc.geometry.r0, b).map_err(|e| Error::Validation {
                key: "geometry.map".into(),
                message: e.to_string(),
            })?)
        };
        let initial = initial_state(sc, &transform, &far, map.as_ref())?;
        Ok(Setup {
            scenario: sc.resolved(),
            transform,
            far,
            map,
            initial,
        })
    }

    fn residual(&self, w: &VorticityState) -> Vec<C64> {
        match &self.map {
            Some(m) => mapped_manifold_residual(m, w, &self.far),
            None => manifold_residual(w, &self.far),
        }
    }

    fn velocity(&self, w: &VorticityState) -> VelocityState {
        match &self.map {
            Some(m) => mapped_reconstruct_velocity(m, w, &self.far),
            None => reconstruct_velocity(w, &self.far),
        }
    }

    fn record(&self, t: f64, w: &VorticityState, v: &VelocityState) -> DiagnosticsRecord {
        let pairs = |c: Vec<C64>| c.iter().map(|c| [c.re, c.im]).collect();
        DiagnosticsRecord {
            t,
            manifold_residual: pairs(self.residual(w)),
            robin_residual: pairs(robin_residual(w)),
            circulation: circulation(w),
            boundary_velocity_norm: crate::biot_savart::boundary_velocity_norm(v, w.n()),
            semigroup: None,
            picard: None,
        }
    }
}

fn profile_value(m: &InitialMode, r0: f64, r: f64) -> f64 {
    match m.profile {
        Profile::GaussianBump => {
            let (c, s) = (m.center.unwrap_or(3.0 * r0), m.width.unwrap_or(r0));
            (-((r - c) / s).powi(2)).exp()
        }
        Profile::AnnularPatch => {
            let (a, b) = (m.inner.unwrap_or(r0), m.outer.unwrap_or(2.0 * r0));
            if r >= a && r <= b {
                1.0
            } else {
                0.0
            }
        }
        Profile::PowerTail => (r / r0).powf(-m.power.unwrap_or(3.0)),
    }
}

/// Sum of the configured profiles, optionally projected onto the moment manifold.
pub fn initial_state(sc: &Scenario, wo: &WeberOrr, far: &FarField, map: Option<&ConformalMap>) -> Result<VorticityState> {
    let n = sc.discretization.modes;
    let r0 = sc.geometry.r0;
    let mut w = VorticityState::zeros(&wo.radial, n);
    for m in &sc.physics.initial {
        let a = C64::new(m.amplitude[0], m.amplitude[1]);
        let f = RadialFunction::from_fn(&wo.radial, |r| a * profile_value(m, r0, r));
        w.modes[m.mode].axpy(C64::new(1.0, 0.0), &f);
    }
    w.enforce_symmetry();
    if !sc.physics.project {
        return Ok(w);
    }
    match map {
        Some(m) => project_mapped_manifold(m, &w, far),
        None => {
            for k in 0..=n {
                let target = far.phi_coeff(k as i32) * 2.0;
                w.modes[k] = wo.project_moment_free(k as i32, &w.modes[k], target)?;
            }
            w.enforce_symmetry();
            Ok(w)
        }
    }
}

/// Step indices at which output is emitted; the final step is always included.
pub fn emission_steps(steps: usize, every: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..=steps).step_by(every.max(1)).collect();
    if out.last() != Some(&steps) {
        out.push(steps);
    }
    out
}

impl RunOutput {
    fn new(setup: &Setup, solver: Solver) -> RunOutput {
        let mut scenario = setup.scenario.clone();
        scenario.run.solver = Some(solver);
        RunOutput {
            diagnostics: Diagnostics {
                versions: VERSIONS,
                solver,
                scenario,
                records: Vec::new(),
                control: None,
            },
            times: Vec::new(),
            states: Vec::new(),
            velocities: Vec::new(),
            control: None,
            ring: Vec::new(),
            verify: None,
        }
    }

    fn push(&mut self, t: f64, w: VorticityState, v: VelocityState, rec: DiagnosticsRecord) {
        self.times.push(t);
        self.states.push(w);
        self.velocities.push(v);
        self.diagnostics.records.push(rec);
    }

    fn push_trajectory(&mut self, setup: &Setup, tr: &TrajectoryRecord) {
        for j in emission_steps(tr.times.len() - 1, setup.scenario.output.emit_every) {
            let (w, v) = (&tr.states[j], &tr.velocities[j]);
            let mut rec = setup.record(tr.times[j], w, v);
            rec.picard = Some(tr.records[j].picard);
            self.push(tr.times[j], w.clone(), v.clone(), rec);
        }
    }
}

/// Runs `solver` on the scenario without touching the filesystem.
pub fn execute(sc: &Scenario, solver: Solver) -> Result<RunOutput> {
    let setup = Setup::new(sc)?;
    execute_setup(&setup, solver)
}

pub fn execute_setup(setup: &Setup, solver: Solver) -> Result<RunOutput> {
    let sc = &setup.scenario;
    let wo = &setup.transform;
    let (t_final, dt) = (sc.run.t_final, sc.run.dt);
    let steps = sc.steps();
    let n = sc.discretization.modes;
    let opts = sc.solver_options();
    let mut out = RunOutput::new(setup, solver);
    let w0 = &setup.initial;
    match solver {
        Solver::Stokes => {
            if setup.map.is_some() {
                log::warn!("stokes runs ignore geometry.map");
            }
            for j in emission_steps(steps, sc.output.emit_every) {
                let t = j as f64 * dt;
                let w = evolve_stokes(wo, w0, t)?.state;
                let v = setup.velocity(&w);
                let mut rec = setup.record(t, &w, &v);
                if t > 0.0 {
                    rec.semigroup = verify_semigroup_bounds(wo, w0, &[t])?.pop();
                }
                out.push(t, w, v, rec);
            }
        }
        Solver::Oseen => {
            // Frozen advecting field: the uniform stream at infinity.
            let mut stream = VelocityState::zeros(&wo.radial, n);
            stream.vr[1] = RadialFunction::from_fn(&wo.radial, |_| setup.far.r_coeff(1));
            stream.vphi[1] = RadialFunction::from_fn(&wo.radial, |_| setup.far.phi_coeff(1));
            let u = BoundaryControl::zeros(n, steps, dt);
            let emit = emission_steps(steps, sc.output.emit_every);
            let mut w = w0.clone();
            for j in 0..=steps {
                if emit.contains(&j) {
                    let v = setup.velocity(&w);
                    let rec = setup.record(j as f64 * dt, &w, &v);
                    out.push(j as f64 * dt, w.clone(), v, rec);
                }
                if j < steps {
                    w = step_oseen(wo, &w, &stream, &u, j as f64 * dt, dt)?;
                }
            }
        }
        Solver::Helmholtz => {
            let u = BoundaryControl::zeros(n, steps, dt);
            let tr = solve_helmholtz_mapped(wo, w0, &setup.far, setup.map.as_ref(), &u, t_final, dt, &opts)?;
            out.push_trajectory(setup, &tr);
        }
        Solver::Control => {
            let nc = sc.control_modes();
            let sol = solve_noslip_control(wo, w0, &setup.far, setup.map.as_ref(), nc, t_final, dt, &opts)?;
            out.push_trajectory(setup, &sol.trajectory);
            out.diagnostics.control = Some(ControlSummary {
                outer_iterations: sol.outer_iterations,
                history: sol.history,
            });
            out.control = Some(sol.control);
        }
        Solver::Map => {
            let map = setup.map.clone().unwrap_or_else(|| ConformalMap::identity(sc.geometry.r0));
            let ring = 256;
            for j in 0..ring {
                let th = 2.0 * std::f64::consts::PI * j as f64 / ring as f64;
                let z = C64::from_polar(sc.geometry.r0, th);
                let (p, d) = (eval_inverse_map(&map, z)?, eval_inverse_map_derivative(&map, z)?);
                out.ring.push((th, [p.re, p.im], [d.re, d.im]));
            }
            let v = setup.velocity(w0);
            let rec = setup.record(0.0, w0, &v);
            out.push(0.0, w0.clone(), v, rec);
        }
        Solver::Verify => {
            out.verify = Some(run_verify(setup)?);
        }
    }
    if let Some(bad) = out.diagnostics.records.iter().find(|r| !r.is_finite()) {
        return Err(Error::NonConvergence(format!("non-finite diagnostics at t = {}", bad.t)));
    }
    Ok(out)
}

/// Writes the artifacts of `out` into `dir` and returns the paths written.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut emit = |name: &str| {
        let p = dir.join(name);
        files.push(p.clone());
        p
    };
    if let Some(v) = &out.verify {
        output::write_json(&emit("verify.json"), v)?;
        return Ok(files);
    }
    output::write_modes(&emit("modes.csv"), &out.times, &out.states)?;
    output::write_velocity(&emit("velocity.csv"), &out.times, &out.velocities)?;
    if let Some(u) = &out.control {
        output::write_control(&emit("control.csv"), u)?;
    }
    if !out.ring.is_empty() {
        output::write_map(&emit("map.csv"), &out.ring)?;
    }
    output::write_json(&emit("diagnostics.json"), &out.diagnostics)?;
    Ok(files)
}

/// Executes the scenario and writes its artifacts.
pub fn run(sc: &Scenario, solver: Solver, dir: &Path) -> Result<Vec<PathBuf>> {
    let out = execute(sc, solver)?;
    write_outputs(&out, dir)
}
