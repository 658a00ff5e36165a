//! CSV and JSON emission. Numbers are written in shortest round-trip form.

use crate::biot_savart::{VelocityState, VorticityState};
use crate::error::Result;
use crate::nonlinear::BoundaryControl;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Folds `-0.0` into `0.0`.
fn z(x: f64) -> f64 {
    x + 0.0
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_modes(path: &Path, times: &[f64], states: &[VorticityState]) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "t,k,r,re_w,im_w")?;
    for (t, w) in times.iter().zip(states) {
        let g = w.grid();
        for (k, m) in w.modes.iter().enumerate() {
            for (r, v) in g.nodes.iter().zip(&m.values) {
                writeln!(f, "{t:e},{k},{r:e},{:e},{:e}", z(v.re), z(v.im))?;
            }
        }
    }
    f.flush()?;
    Ok(())
}

pub fn write_velocity(path: &Path, times: &[f64], vels: &[VelocityState]) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "t,k,r,re_vr,im_vr,re_vphi,im_vphi")?;
    for (t, v) in times.iter().zip(vels) {
        for k in 0..=v.n() {
            let g = &v.vr[k].grid;
            for (i, r) in g.nodes.iter().enumerate() {
                let (a, b) = (v.vr[k].values[i], v.vphi[k].values[i]);
                writeln!(f, "{t:e},{k},{r:e},{:e},{:e},{:e},{:e}", z(a.re), z(a.im), z(b.re), z(b.im))?;
            }
        }
    }
    f.flush()?;
    Ok(())
}

pub fn write_control(path: &Path, u: &BoundaryControl) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "t,k,re_u,im_u")?;
    for j in 0..=u.steps() {
        let t = j as f64 * u.dt;
        for k in 0..=u.n() {
            let v = u.samples[k][j];
            writeln!(f, "{t:e},{k},{:e},{:e}", z(v.re), z(v.im))?;
        }
    }
    f.flush()?;
    Ok(())
}

/// Boundary image `theta, Phi^{-1}(r0 e^{i theta}), (Phi^{-1})'(r0 e^{i theta})`.
pub fn write_map(path: &Path, ring: &[(f64, [f64; 2], [f64; 2])]) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "theta,re_z,im_z,re_dz,im_dz")?;
    for (th, p, dz) in ring {
        writeln!(f, "{th:e},{:e},{:e},{:e},{:e}", z(p[0]), z(p[1]), z(dz[0]), z(dz[1]))?;
    }
    f.flush()?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(std::io::Error::from)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}
