//! Exterior domains mapped onto the exterior of the disc `|z| >= r0`.
//!
//! The inverse map is `Phi^{-1}(z) = z + sum_n b_n z^{-n}` and its derivative
//! `h(z) = 1 + sum_n c_n z^{-n}` with `c_n = -(n-1) b_{n-1}`. On a circle of
//! radius `r` the harmonics of `h` are `h_{-n} = c_n r^{-n}`, so every map
//! factor is handled as a short Fourier series in closed form.
//!
//! The weight `conj(h)` is written `(Phi^{-1})'` throughout; some sources write
//! `Phi'^{-1}` for the same factor.

use crate::biot_savart::{mode_value, velocity_mode_sources, FarField, VelocityState, VorticityState};
use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::sync::Arc;

const ZERO: C64 = C64::new(0.0, 0.0);
const ALIAS_WARN: f64 = 1e-8;

/// Laurent coefficients of the inverse Riemann map.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMap {
    pub r0: f64,
    /// `b[n]` multiplies `z^{-n}`.
    pub b: Vec<C64>,
    c: Vec<C64>,
}

impl ConformalMap {
    pub fn new(r0: f64, b: Vec<C64>) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::Domain(format!("r0 must be positive, got {r0}")));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("map coefficients must be finite".into()));
        }
        let mut b = b;
        while b.last() == Some(&ZERO) {
            b.pop();
        }
        let mut c = vec![ZERO; b.len() + 1];
        c[0] = C64::new(1.0, 0.0);
        for n in 2..c.len() {
            c[n] = -b[n - 1] * (n as f64 - 1.0);
        }
        let map = ConformalMap { r0, b, c };
        // The boundary circle must map to a curve with nonvanishing tangent.
        let ring = 512;
        let min = (0..ring)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * j as f64 / ring as f64;
                map.h(C64::from_polar(r0, th)).norm()
            })
            .fold(f64::INFINITY, f64::min);
        if min < 1e-8 {
            return Err(Error::Domain(format!(
                "derivative of the inverse map vanishes on |z| = r0 (min {min:.2e})"
            )));
        }
        Ok(map)
    }

    pub fn identity(r0: f64) -> Self {
        ConformalMap {
            r0,
            b: Vec::new(),
            c: vec![C64::new(1.0, 0.0)],
        }
    }

    pub fn joukowski(r0: f64, b1: f64) -> Result<Self> {
        Self::new(r0, vec![ZERO, C64::new(b1, 0.0)])
    }

    pub fn is_identity(&self) -> bool {
        self.b.iter().all(|v| *v == ZERO)
    }

    /// Coefficients `c_n` of `(Phi^{-1})'`, `c_0 = 1`, `c_1 = 0`.
    pub fn c(&self) -> &[C64] {
        &self.c
    }

    /// `sum_{n >= from} |b_n| r^{-n}`.
    pub fn tail_bound(&self, r: f64, from: usize) -> f64 {
        self.b.iter().enumerate().skip(from).map(|(n, v)| v.norm() * r.powi(-(n as i32))).sum()
    }

    fn h(&self, z: C64) -> C64 {
        let zi = z.inv();
        let mut p = C64::new(1.0, 0.0);
        let mut s = ZERO;
        for c in &self.c {
            s += c * p;
            p *= zi;
        }
        s
    }

    fn check(&self, z: C64) -> Result<()> {
        if z.norm() < self.r0 * (1.0 - 1e-12) {
            return Err(Error::Domain(format!("|z| = {} is inside the disc r0 = {}", z.norm(), self.r0)));
        }
        Ok(())
    }

    /// Harmonics `g_n = conj(c_n) r^{-n}`, `n >= 0`, of `conj((Phi^{-1})')` on radius `r`.
    pub fn weight_harmonics(&self, r: f64) -> Vec<C64> {
        self.c
            .iter()
            .enumerate()
            .map(|(n, c)| c.conj() * r.powi(-(n as i32)))
            .collect()
    }

    fn alias_check(&self, n: usize) {
        let tail: f64 = self
            .c
            .iter()
            .enumerate()
            .skip(n + 1)
            .map(|(j, c)| c.norm() * self.r0.powi(-(j as i32)))
            .sum();
        if tail > ALIAS_WARN {
            log::warn!("map factor series tail {tail:.2e} beyond mode {n} at r0");
        }
    }
}

/// `Phi^{-1}(z)` for `|z| >= r0`.
pub fn eval_inverse_map(map: &ConformalMap, z: C64) -> Result<C64> {
    map.check(z)?;
    let zi = z.inv();
    let mut p = C64::new(1.0, 0.0);
    let mut s = z;
    for b in &map.b {
        s += b * p;
        p *= zi;
    }
    Ok(s)
}

/// `(Phi^{-1})'(z)` for `|z| >= r0`.
pub fn eval_inverse_map_derivative(map: &ConformalMap, z: C64) -> Result<C64> {
    map.check(z)?;
    Ok(map.h(z))
}

/// `q_k = [Re conj((Phi^{-1})') w]_k` and `r_k = [Im conj((Phi^{-1})') w]_k`, `k = 0..=N`.
#[derive(Debug, Clone)]
pub struct MappedSources {
    pub q_modes: Vec<RadialFunction>,
    pub r_modes: Vec<RadialFunction>,
}

/// Harmonics of a real part: `[Re f]_n = (f_n + conj(f_{-n})) / 2`.
fn re_part(f: &dyn Fn(i32) -> C64, n: i32) -> C64 {
    (f(n) + f(-n).conj()) * 0.5
}

fn im_part(f: &dyn Fn(i32) -> C64, n: i32) -> C64 {
    (f(n) - f(-n).conj()) * C64::new(0.0, -0.5)
}

pub fn transform_sources(map: &ConformalMap, w: &VorticityState) -> MappedSources {
    let n = w.n() as i32;
    map.alias_check(w.n());
    let g = w.grid().clone();
    let pairs: Vec<(RadialFunction, RadialFunction)> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let mut q = RadialFunction::zeros(&g);
            let mut rr = RadialFunction::zeros(&g);
            for (i, &r) in g.nodes.iter().enumerate() {
                let gh = map.weight_harmonics(r);
                let f = |j: i32| if j >= 0 { gh.get(j as usize).copied().unwrap_or(ZERO) } else { ZERO };
                let (mut qa, mut ra) = (ZERO, ZERO);
                for m in -n..=n {
                    let d = k - m;
                    if d.unsigned_abs() as usize >= gh.len() {
                        continue;
                    }
                    let wm = w.at(m, i);
                    qa += re_part(&f, d) * wm;
                    ra += im_part(&f, d) * wm;
                }
                q.values[i] = qa;
                rr.values[i] = ra;
            }
            (q, rr)
        })
        .collect();
    let (q_modes, r_modes) = pairs.into_iter().unzip();
    MappedSources { q_modes, r_modes }
}

/// Velocity modes on the mapped domain.
pub fn mapped_reconstruct_velocity(map: &ConformalMap, w: &VorticityState, far: &FarField) -> VelocityState {
    let src = transform_sources(map, w);
    let g = w.grid().clone();
    let (vr, vphi) = (0..=w.n())
        .map(|k| {
            let sg = C64::new(0.0, (k as i32).signum() as f64);
            let q = &src.q_modes[k].values;
            let r = &src.r_modes[k].values;
            let a: Vec<C64> = q.iter().zip(r).map(|(q, r)| q - sg * r).collect();
            let b: Vec<C64> = q.iter().zip(r).map(|(q, r)| q + sg * r).collect();
            velocity_mode_sources(k as i32, &a, &b, &g, far)
        })
        .unzip();
    VelocityState { vr, vphi }
}

/// `int s^{1-|k|} (q_k + i r_k) ds` over `[r0, r_max]`.
pub fn mapped_moment(map: &ConformalMap, k: usize, w: &VorticityState) -> C64 {
    let src = transform_sources(map, w);
    moment_from_sources(&src, k, w.grid())
}

fn moment_from_sources(src: &MappedSources, k: usize, g: &Arc<RadialGrid>) -> C64 {
    let i = C64::new(0.0, 1.0);
    let f: Vec<C64> = g
        .nodes
        .iter()
        .zip(src.q_modes[k].values.iter().zip(&src.r_modes[k].values))
        .map(|(&s, (q, r))| (q + i * r) * s.powi(1 - k as i32))
        .collect();
    g.integrate(&f)
}

/// Mapped moments minus `2 v_{inf,phi,k}`, `k = 0..=N`.
pub fn mapped_manifold_residual(map: &ConformalMap, w: &VorticityState, far: &FarField) -> Vec<C64> {
    let src = transform_sources(map, w);
    (0..=w.n())
        .map(|k| moment_from_sources(&src, k, w.grid()) - far.phi_coeff(k as i32) * 2.0)
        .collect()
}

/// Harmonics `(g w)_m`, `m = -N..=N`, of `conj((Phi^{-1})') w` (index `m + N`).
pub(crate) fn weighted_modes(map: Option<&ConformalMap>, w: &VorticityState) -> Vec<RadialFunction> {
    let n = w.n() as i32;
    let g = w.grid().clone();
    (-n..=n)
        .map(|m| {
            let mut out = RadialFunction::zeros(&g);
            for (i, &r) in g.nodes.iter().enumerate() {
                out.values[i] = match map {
                    None => w.at(m, i),
                    Some(map) => {
                        let gh = map.weight_harmonics(r);
                        gh.iter()
                            .enumerate()
                            .filter(|(j, _)| (m - *j as i32).abs() <= n)
                            .map(|(j, gj)| gj * w.at(m - j as i32, i))
                            .sum()
                    }
                };
            }
            out
        })
        .collect()
}

/// Mode `k` of a product of two series given as closures over harmonics.
fn convolve(k: i32, n: i32, a: impl Fn(i32) -> C64, b: impl Fn(i32) -> C64) -> C64 {
    (-n..=n).map(|m| a(k - m) * b(m)).sum()
}

/// `-B(v, w) + (1 - |h|^2) d_t w` with the time derivative lagged as `lag.0 / lag.1`.
pub fn mapped_advection_term(
    map: &ConformalMap,
    w: &VorticityState,
    v: &VelocityState,
    lag: Option<&(VorticityState, f64)>,
) -> VorticityState {
    let n = w.n() as i32;
    let nv = v.n() as i32;
    let g = w.grid().clone();
    let dw: Vec<RadialFunction> = w.modes.iter().map(|m| m.derivative()).collect();
    let cut = |f: &dyn Fn(i32) -> C64, q: i32| if q.abs() > nv { ZERO } else { f(q) };
    let modes = (0..=n)
        .into_par_iter()
        .map(|k| {
            let mut out = RadialFunction::zeros(&g);
            for (i, &r) in g.nodes.iter().enumerate() {
                let vr = |q: i32| v.vr_at(q, i);
                let vp = |q: i32| v.vphi_at(q, i);
                // (v, grad w) and (v_perp, grad w) with v_perp = (-v_phi, v_r).
                let adv = |p: i32| {
                    convolve(p, n, |q| cut(&vr, q), |m| mode_value(&dw, m, i))
                        + convolve(p, n, |q| cut(&vp, q), |m| w.at(m, i) * C64::new(0.0, m as f64 / r))
                };
                let perp = |p: i32| {
                    -convolve(p, n, |q| cut(&vp, q), |m| mode_value(&dw, m, i))
                        + convolve(p, n, |q| cut(&vr, q), |m| w.at(m, i) * C64::new(0.0, m as f64 / r))
                };
                let c = map.c();
                let h = |q: i32| {
                    if q <= 0 && ((-q) as usize) < c.len() {
                        c[(-q) as usize] * r.powi(q)
                    } else {
                        ZERO
                    }
                };
                let span = c.len() as i32;
                let mut acc = ZERO;
                for p in (k - span)..=(k + span) {
                    if p.abs() > n {
                        continue;
                    }
                    let d = k - p;
                    let (rh, ih) = (re_part(&h, d), im_part(&h, d));
                    if rh == ZERO && ih == ZERO {
                        continue;
                    }
                    acc -= rh * adv(p) - ih * perp(p);
                }
                if let Some((dwt, dt)) = lag {
                    // (1 - |h|^2)_d = -sum_j h_j conj(h_{j-d}) for d != 0.
                    for p in -n..=n {
                        let d = k - p;
                        let mut wgt: C64 = (-span..=0).map(|j| h(j) * h(j - d).conj()).sum();
                        wgt = if d == 0 { C64::new(1.0, 0.0) - wgt } else { -wgt };
                        if wgt != ZERO {
                            acc += wgt * dwt.at(p, i) / *dt;
                        }
                    }
                }
                out.values[i] = acc;
            }
            out
        })
        .collect();
    let mut out = VorticityState { modes };
    out.enforce_symmetry();
    out
}

/// Adds bump corrections so that the mapped manifold residuals vanish for `k = 0..=N`.
///
/// Mode 0 is corrected by two real bumps and every other mode by one complex
/// multiple of a bump; the residuals are affine in these `2N + 2` real unknowns.
pub fn project_mapped_manifold(map: &ConformalMap, w: &VorticityState, far: &FarField) -> Result<VorticityState> {
    let n = w.n();
    let g = w.grid().clone();
    let r0 = g.r0;
    let bump = |c: f64, s: f64| RadialFunction::from_real(&g, move |r| (-((r - c * r0) / (s * r0)).powi(2)).exp());
    let (b1, b2) = (bump(3.0, 0.45), bump(5.0, 0.6));
    let base = mapped_manifold_residual(map, w, far);
    let dim = 2 * n + 2;
    let perturb = |col: usize| {
        let mut d = VorticityState::zeros(&g, n);
        match col {
            0 => d.modes[0] = b1.clone(),
            1 => d.modes[0] = b2.clone(),
            c => {
                let k = c / 2;
                let a = if c % 2 == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
                d.modes[k] = b1.scale(a);
            }
        }
        d
    };
    let zero = mapped_manifold_residual(map, &VorticityState::zeros(&g, n), far);
    let mut a = vec![vec![0.0; dim + 1]; dim];
    for col in 0..dim {
        let r = mapped_manifold_residual(map, &perturb(col), far);
        for k in 0..=n {
            let d = r[k] - zero[k];
            a[2 * k][col] = d.re;
            a[2 * k + 1][col] = d.im;
        }
    }
    for k in 0..=n {
        a[2 * k][dim] = -base[k].re;
        a[2 * k + 1][dim] = -base[k].im;
    }
    let x = solve_dense(a)?;
    let mut out = w.clone();
    for (col, &xc) in x.iter().enumerate() {
        if xc != 0.0 {
            let p = perturb(col);
            for k in 0..=n {
                out.modes[k].axpy(C64::new(xc, 0.0), &p.modes[k]);
            }
        }
    }
    out.enforce_symmetry();
    Ok(out)
}

/// Gaussian elimination with complete pivoting on an augmented matrix;
/// directions with a negligible pivot are left at zero.
fn solve_dense(mut a: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let n = a.len();
    let scale = a.iter().flat_map(|r| r[..n].iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rank = n;
    for c in 0..n {
        let (mut pi, mut pj, mut pv) = (c, c, 0.0);
        for i in c..n {
            for j in c..n {
                if a[i][j].abs() > pv {
                    (pi, pj, pv) = (i, j, a[i][j].abs());
                }
            }
        }
        if pv <= 1e-13 * scale {
            rank = c;
            break;
        }
        a.swap(c, pi);
        for row in a.iter_mut() {
            row.swap(c, pj);
        }
        perm.swap(c, pj);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            if f != 0.0 {
                for j in c..=n {
                    a[i][j] -= f * a[c][j];
                }
            }
        }
    }
    for row in a.iter().skip(rank) {
        if row[n].abs() > 1e-10 * scale.max(1.0) {
            return Err(Error::Domain("manifold constraints are inconsistent for the chosen correction bumps".into()));
        }
    }
    let mut y = vec![0.0; n];
    for c in (0..rank).rev() {
        let s: f64 = (c + 1..rank).map(|j| a[c][j] * y[j]).sum();
        y[c] = (a[c][n] - s) / a[c][c];
    }
    let mut x = vec![0.0; n];
    for (c, &p) in perm.iter().enumerate() {
        x[p] = y[c];
    }
    Ok(x)
}
