//! Scenario files: TOML with strict keys and validation by key path.

use crate::error::{Error, Result};
use crate::grid::{RadialSpec, SpectralSpec};
use crate::nonlinear::SolverOptions;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Stokes,
    Oseen,
    Helmholtz,
    Control,
    Map,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub geometry: Geometry,
    pub discretization: Discretization,
    #[serde(default)]
    pub physics: Physics,
    pub run: Run,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub r0: f64,
    /// Laurent coefficients `b_n` of the inverse map as `[re, im]`, starting at `n = 0`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub map: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    /// Mode cutoff `N`.
    pub modes: usize,
    pub r_max: Option<f64>,
    pub radial_panel_width: Option<f64>,
    pub radial_points: Option<usize>,
    pub core_radius: Option<f64>,
    pub growth: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub spectral_panel_width: Option<f64>,
    pub spectral_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    /// `(v_x, v_y)` at infinity.
    #[serde(default)]
    pub far_field: [f64; 2],
    #[serde(default)]
    pub initial: Vec<InitialMode>,
    /// Project initial data onto the moment manifold.
    #[serde(default = "yes")]
    pub project: bool,
}

fn yes() -> bool {
    true
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            far_field: [0.0; 2],
            initial: Vec::new(),
            project: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `a exp(-((r - center) / width)^2)`.
    GaussianBump,
    /// `a` on `[inner, outer]`, zero elsewhere.
    AnnularPatch,
    /// `a (r / r0)^{-power}`.
    PowerTail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialMode {
    pub mode: usize,
    pub profile: Profile,
    /// Complex amplitude `[re, im]`.
    pub amplitude: [f64; 2],
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub inner: Option<f64>,
    pub outer: Option<f64>,
    pub power: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Run {
    pub solver: Option<Solver>,
    #[serde(default)]
    pub t_final: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Controlled modes for `control` runs; defaults to `modes / 2`.
    pub control_modes: Option<usize>,
    pub picard_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub control_tol: Option<f64>,
    pub max_outer: Option<usize>,
    pub small_data_bound: Option<f64>,
}

fn default_dt() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default = "default_dir")]
    pub directory: String,
    #[serde(default = "one")]
    pub emit_every: usize,
}

fn default_dir() -> String {
    "out".into()
}

fn one() -> usize {
    1
}

impl Default for Output {
    fn default() -> Self {
        Output {
            directory: default_dir(),
            emit_every: 1,
        }
    }
}

const KEYS: &[&str] = &[
    "geometry", "discretization", "physics", "run", "output", "r0", "map", "modes", "r_max",
    "radial_panel_width", "radial_points", "core_radius", "growth", "lambda_min", "lambda_max",
    "spectral_panel_width", "spectral_points", "far_field", "initial", "project", "mode", "profile",
    "amplitude", "center", "width", "inner", "outer", "power", "solver", "t_final", "dt",
    "control_modes", "picard_tol", "max_iter", "control_tol", "max_outer", "small_data_bound",
    "directory", "emit_every",
];

fn nearest_key(bad: &str) -> Option<&'static str> {
    KEYS.iter()
        .map(|k| (strsim::jaro_winkler(bad, k), *k))
        .filter(|(s, _)| *s > 0.7)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k)
}

/// Parses scenario text; unknown keys are errors that suggest the closest valid key.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let sc: Scenario = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
            .map(|l| format!(" (line {l})"))
            .unwrap_or_default();
        let hint = msg
            .strip_prefix("unknown field `")
            .and_then(|r| r.split('`').next())
            .and_then(nearest_key)
            .map(|k| format!("; did you mean `{k}`?"))
            .unwrap_or_default();
        Error::Parse(format!("{msg}{line}{hint}"))
    })?;
    sc.validate()?;
    Ok(sc)
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

fn invalid<T>(key: impl Into<String>, message: impl Into<String>) -> Result<T> {
    Err(Error::Validation {
        key: key.into(),
        message: message.into(),
    })
}

fn positive(key: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => invalid(key, format!("must be positive and finite, got {x}")),
        _ => Ok(()),
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        positive("geometry.r0", Some(g.r0))?;
        if g.map.iter().flatten().any(|v| !v.is_finite()) {
            return invalid("geometry.map", "coefficients must be finite");
        }
        let d = &self.discretization;
        if d.modes < 1 {
            return invalid("discretization.modes", "need N >= 1");
        }
        for (k, v) in [
            ("discretization.r_max", d.r_max),
            ("discretization.radial_panel_width", d.radial_panel_width),
            ("discretization.core_radius", d.core_radius),
            ("discretization.lambda_min", d.lambda_min),
            ("discretization.lambda_max", d.lambda_max),
            ("discretization.spectral_panel_width", d.spectral_panel_width),
        ] {
            positive(k, v)?;
        }
        if let Some(r) = d.r_max {
            if r <= g.r0 {
                return invalid("discretization.r_max", "must exceed geometry.r0");
            }
        }
        if let Some(gr) = d.growth {
            if !(gr >= 1.0) {
                return invalid("discretization.growth", format!("must be >= 1, got {gr}"));
            }
        }
        for (k, v) in [("discretization.radial_points", d.radial_points), ("discretization.spectral_points", d.spectral_points)] {
            if matches!(v, Some(p) if p < 3) {
                return invalid(k, "need at least 3 points per panel");
            }
        }
        let p = &self.physics;
        if p.far_field.iter().any(|v| !v.is_finite()) {
            return invalid("physics.far_field", "must be finite");
        }
        let r_max = self.radial_spec().r_max;
        for (i, m) in p.initial.iter().enumerate() {
            let key = |f: &str| format!("physics.initial[{i}].{f}");
            if m.mode > d.modes {
                return invalid(key("mode"), format!("exceeds discretization.modes = {}", d.modes));
            }
            if m.mode == 0 && m.amplitude[1] != 0.0 {
                return invalid(key("amplitude"), "mode 0 is real; imaginary part must be 0");
            }
            if m.amplitude.iter().any(|v| !v.is_finite()) {
                return invalid(key("amplitude"), "must be finite");
            }
            match m.profile {
                Profile::GaussianBump => {
                    let c = m.center.ok_or(()).or_else(|_| invalid(key("center"), "required for gaussian_bump"))?;
                    if !(c > g.r0 && c < r_max) {
                        return invalid(key("center"), "must lie inside (r0, r_max)");
                    }
                    positive(&key("width"), Some(m.width.unwrap_or(f64::NAN)))?;
                }
                Profile::AnnularPatch => {
                    let (a, b) = (m.inner.unwrap_or(f64::NAN), m.outer.unwrap_or(f64::NAN));
                    if !(a >= g.r0 && b > a && b <= r_max) {
                        return invalid(key("inner"), "need r0 <= inner < outer <= r_max");
                    }
                }
                Profile::PowerTail => {
                    let pw = m.power.unwrap_or(f64::NAN);
                    if !(pw > 2.0) {
                        return invalid(key("power"), "need power > 2 for finite L1(r dr) tails");
                    }
                }
            }
        }
        let r = &self.run;
        positive("run.dt", Some(r.dt))?;
        if !(r.t_final >= 0.0 && r.t_final.is_finite()) {
            return invalid("run.t_final", "must be finite and >= 0");
        }
        let steps = (r.t_final / r.dt).round();
        if (steps * r.dt - r.t_final).abs() > 1e-9 * r.t_final.max(r.dt) {
            return invalid("run.dt", format!("dt = {} does not divide t_final = {}", r.dt, r.t_final));
        }
        for (k, v) in [
            ("run.picard_tol", r.picard_tol),
            ("run.control_tol", r.control_tol),
            ("run.small_data_bound", r.small_data_bound),
        ] {
            positive(k, v)?;
        }
        for (k, v) in [("run.max_iter", r.max_iter), ("run.max_outer", r.max_outer)] {
            if v == Some(0) {
                return invalid(k, "must be >= 1");
            }
        }
        if let Some(c) = r.control_modes {
            if c < 1 || c > d.modes {
                return invalid("run.control_modes", format!("need 1 <= control_modes <= {}", d.modes));
            }
        }
        if self.output.emit_every == 0 {
            return invalid("output.emit_every", "must be >= 1");
        }
        Ok(())
    }

    pub fn radial_spec(&self) -> RadialSpec {
        let d = &self.discretization;
        let mut s = RadialSpec::new(self.geometry.r0);
        if let Some(v) = d.r_max {
            s.r_max = v;
        }
        if let Some(v) = d.radial_panel_width {
            s.panel_width = v;
        }
        if let Some(v) = d.radial_points {
            s.points = v;
        }
        if let Some(v) = d.core_radius {
            s.core_radius = v;
        }
        if let Some(v) = d.growth {
            s.growth = v;
        }
        s
    }

    pub fn spectral_spec(&self) -> SpectralSpec {
        let d = &self.discretization;
        let mut s = SpectralSpec::new(self.geometry.r0, self.radial_spec().r_max);
        if let Some(v) = d.lambda_min {
            s.lambda_min = v;
        }
        if let Some(v) = d.lambda_max {
            s.lambda_max = v;
        }
        if let Some(v) = d.spectral_panel_width {
            s.panel_width = v;
        }
        if let Some(v) = d.spectral_points {
            s.points = v;
        }
        s
    }

    pub fn solver_options(&self) -> SolverOptions {
        let r = &self.run;
        let d = SolverOptions::default();
        SolverOptions {
            picard_tol: r.picard_tol.unwrap_or(d.picard_tol),
            max_iter: r.max_iter.unwrap_or(d.max_iter),
            control_tol: r.control_tol.unwrap_or(d.control_tol),
            max_outer: r.max_outer.unwrap_or(d.max_outer),
            small_data_bound: r.small_data_bound.unwrap_or(d.small_data_bound),
        }
    }

    pub fn steps(&self) -> usize {
        (self.run.t_final / self.run.dt).round() as usize
    }

    pub fn control_modes(&self) -> usize {
        self.run.control_modes.unwrap_or((self.discretization.modes / 2).max(1))
    }

    /// Fills every optional value with its default so the echo reproduces the run.
    pub fn resolved(&self) -> Scenario {
        let mut s = self.clone();
        let rs = self.radial_spec();
        let ss = self.spectral_spec();
        let o = self.solver_options();
        let d = &mut s.discretization;
        d.r_max = Some(rs.r_max);
        d.radial_panel_width = Some(rs.panel_width);
        d.radial_points = Some(rs.points);
        d.core_radius = Some(rs.core_radius);
        d.growth = Some(rs.growth);
        d.lambda_min = Some(ss.lambda_min);
        d.lambda_max = Some(ss.lambda_max);
        d.spectral_panel_width = Some(ss.panel_width);
        d.spectral_points = Some(ss.points);
        let r = &mut s.run;
        r.picard_tol = Some(o.picard_tol);
        r.max_iter = Some(o.max_iter);
        r.control_tol = Some(o.control_tol);
        r.max_outer = Some(o.max_outer);
        r.small_data_bound = Some(o.small_data_bound);
        r.control_modes = Some(self.control_modes());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[geometry]\nr0 = 1.0\n[discretization]\nmodes = 4\n[run]\nsolver = \"stokes\"\nt_final = 0.5\n";

    #[test]
    fn minimal_scenario_gets_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.run.dt, 0.05);
        assert_eq!(s.output.emit_every, 1);
        assert!(s.physics.project);
        assert_eq!(s.radial_spec(), RadialSpec::new(1.0));
        assert_eq!(s.solver_options(), SolverOptions::default());
        assert_eq!(s.steps(), 10);
    }

    #[test]
    fn bad_dt_names_the_key() {
        let text = MINIMAL.replace("t_final = 0.5", "t_final = 0.5\ndt = -0.1");
        match parse_scenario(&text) {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "run.dt"),
            other => panic!("{other:?}"),
        }
        let text = MINIMAL.replace("t_final = 0.5", "t_final = 0.5\ndt = 0.07");
        assert!(matches!(parse_scenario(&text), Err(Error::Validation { key, .. }) if key == "run.dt"));
    }

    #[test]
    fn unknown_key_suggests_nearest() {
        let text = MINIMAL.replace("t_final", "t_fnal");
        let e = parse_scenario(&text).unwrap_err().to_string();
        assert!(e.contains("did you mean `t_final`"), "{e}");
        assert!(e.contains("line"), "{e}");
    }

    #[test]
    fn resolved_echo_round_trips() {
        let s = parse_scenario(MINIMAL).unwrap().resolved();
        let text = toml::to_string(&s).unwrap();
        let back = parse_scenario(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn initial_profiles_are_checked() {
        let text = format!(
            "{MINIMAL}[[physics.initial]]\nmode = 0\nprofile = \"gaussian_bump\"\namplitude = [0.1, 0.2]\ncenter = 3.0\nwidth = 0.5\n"
        );
        assert!(matches!(parse_scenario(&text), Err(Error::Validation { key, .. }) if key == "physics.initial[0].amplitude"));
        let text = format!("{MINIMAL}[[physics.initial]]\nmode = 2\nprofile = \"power_tail\"\namplitude = [0.1, 0.0]\npower = 1.5\n");
        assert!(matches!(parse_scenario(&text), Err(Error::Validation { key, .. }) if key == "physics.initial[0].power"));
    }
}
