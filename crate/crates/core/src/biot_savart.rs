//! Velocity reconstruction from vorticity modes in the exterior of a disc, and
//! the moment, manifold and circulation diagnostics.

use crate::grid::{RadialFunction, RadialGrid};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::Arc;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Uniform stream at infinity and its Fourier coefficients.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FarField {
    pub vx: f64,
    pub vy: f64,
}

impl FarField {
    pub const ZERO: FarField = FarField { vx: 0.0, vy: 0.0 };

    /// `v_{inf,r,k}`; nonzero only for `|k| = 1`.
    pub fn r_coeff(&self, k: i32) -> C64 {
        if k.abs() != 1 {
            return ZERO;
        }
        C64::new(self.vx, -(k as f64) * self.vy) * 0.5
    }

    /// `v_{inf,phi,k}`; nonzero only for `|k| = 1`.
    pub fn phi_coeff(&self, k: i32) -> C64 {
        if k.abs() != 1 {
            return ZERO;
        }
        C64::new(self.vy, k as f64 * self.vx) * 0.5
    }

    pub fn is_zero(&self) -> bool {
        self.vx == 0.0 && self.vy == 0.0
    }
}

/// Fourier coefficients of a uniform stream `(vx, vy)`.
pub fn far_field_coeffs(vx: f64, vy: f64) -> FarField {
    FarField { vx, vy }
}

/// Vorticity modes `w_k`, `k = 0..=n`; negative modes are conjugates.
#[derive(Debug, Clone)]
pub struct VorticityState {
    pub modes: Vec<RadialFunction>,
}

impl VorticityState {
    pub fn zeros(grid: &Arc<RadialGrid>, n: usize) -> Self {
        VorticityState {
            modes: (0..=n).map(|_| RadialFunction::zeros(grid)).collect(),
        }
    }

    /// Mode cutoff `N`.
    pub fn n(&self) -> usize {
        self.modes.len() - 1
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.modes[0].grid
    }

    /// `w_k(r_i)` for any `|k| <= N`, zero beyond.
    #[inline]
    pub fn at(&self, k: i32, i: usize) -> C64 {
        mode_value(&self.modes, k, i)
    }

    /// Forces `w_0` real, as required by conjugate symmetry.
    pub fn enforce_symmetry(&mut self) {
        for v in &mut self.modes[0].values {
            v.im = 0.0;
        }
    }

    /// `(sum_k ||w_k||^2)^(1/2)` over `k = -N..N`.
    pub fn norm_l2(&self) -> f64 {
        self.modes
            .iter()
            .enumerate()
            .map(|(k, m)| if k == 0 { 1.0 } else { 2.0 } * m.norm_l2().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Discrete H1 norm: `||w||^2 + ||d_r w||^2 + ||(k/r) w||^2` summed over `k = -N..N`.
    pub fn norm_h1(&self) -> f64 {
        let mut s = 0.0;
        for (k, m) in self.modes.iter().enumerate() {
            let kf = k as f64;
            let mult = if k == 0 { 1.0 } else { 2.0 };
            let kr = m.map(|r, v| v * (kf / r));
            s += mult * (m.norm_l2().powi(2) + m.derivative().norm_l2().powi(2) + kr.norm_l2().powi(2));
        }
        s.sqrt()
    }

    /// Gradient norm `(||d_r w||^2 + ||(k/r) w||^2)^(1/2)` summed over `k = -N..N`.
    pub fn norm_grad(&self) -> f64 {
        let mut s = 0.0;
        for (k, m) in self.modes.iter().enumerate() {
            let kf = k as f64;
            let mult = if k == 0 { 1.0 } else { 2.0 };
            let kr = m.map(|r, v| v * (kf / r));
            s += mult * (m.derivative().norm_l2().powi(2) + kr.norm_l2().powi(2));
        }
        s.sqrt()
    }

    pub fn scale(&self, a: f64) -> Self {
        VorticityState {
            modes: self.modes.iter().map(|m| m.scale(C64::new(a, 0.0))).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        VorticityState {
            modes: self.modes.iter().zip(&other.modes).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.modes.iter().all(|m| m.is_finite())
    }
}

#[inline]
pub(crate) fn mode_value(modes: &[RadialFunction], k: i32, i: usize) -> C64 {
    match modes.get(k.unsigned_abs() as usize) {
        None => ZERO,
        Some(m) if k >= 0 => m.values[i],
        Some(m) => m.values[i].conj(),
    }
}

/// Polar velocity modes `v_{r,k}`, `v_{phi,k}`, `k = 0..=n`.
#[derive(Debug, Clone)]
pub struct VelocityState {
    pub vr: Vec<RadialFunction>,
    pub vphi: Vec<RadialFunction>,
}

impl VelocityState {
    pub fn n(&self) -> usize {
        self.vr.len() - 1
    }

    #[inline]
    pub fn vr_at(&self, k: i32, i: usize) -> C64 {
        mode_value(&self.vr, k, i)
    }

    #[inline]
    pub fn vphi_at(&self, k: i32, i: usize) -> C64 {
        mode_value(&self.vphi, k, i)
    }

    pub fn zeros(grid: &Arc<RadialGrid>, n: usize) -> Self {
        VelocityState {
            vr: (0..=n).map(|_| RadialFunction::zeros(grid)).collect(),
            vphi: (0..=n).map(|_| RadialFunction::zeros(grid)).collect(),
        }
    }

    /// Largest pointwise speed bound `sum_k |v_k|` over the grid.
    pub fn max_speed(&self) -> f64 {
        let n = self.vr[0].values.len();
        (0..n)
            .map(|i| {
                self.vr
                    .iter()
                    .zip(&self.vphi)
                    .enumerate()
                    .map(|(k, (a, b))| {
                        let m = if k == 0 { 1.0 } else { 2.0 };
                        m * a.values[i].norm().hypot(b.values[i].norm())
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Velocity of mode `k >= 0` from a mode `w` through the disc Biot-Savart formulas.
pub(crate) fn velocity_mode(k: i32, w: &RadialFunction, far: &FarField) -> (RadialFunction, RadialFunction) {
    velocity_mode_sources(k, &w.values, &w.values, &w.grid, far)
}

/// Mode `k` of the velocity with separate sources for the inner integral
/// `int_{r0}^r s^{|k|+1} a ds` and the outer integral `int_r^inf s^{1-|k|} b ds`.
pub(crate) fn velocity_mode_sources(
    k: i32,
    a_src: &[C64],
    b_src: &[C64],
    g: &Arc<RadialGrid>,
    far: &FarField,
) -> (RadialFunction, RadialFunction) {
    let ka = k.abs();
    let inner: Vec<C64> = g
        .nodes
        .iter()
        .zip(a_src)
        .map(|(&s, &v)| v * s.powi(ka + 1))
        .collect();
    let outer: Vec<C64> = g
        .nodes
        .iter()
        .zip(b_src)
        .map(|(&s, &v)| v * s.powi(1 - ka))
        .collect();
    let a = g.cumulative(&inner);
    let b_cum = g.cumulative(&outer);
    let b_tot = *b_cum.last().unwrap();
    let sg = k.signum() as f64;
    let (fr, fp) = (far.r_coeff(k), far.phi_coeff(k));
    let mut vr = RadialFunction::zeros(g);
    let mut vp = RadialFunction::zeros(g);
    for (i, &r) in g.nodes.iter().enumerate() {
        let lo = a[i] * r.powi(-ka - 1);
        let hi = (b_tot - b_cum[i]) * r.powi(ka - 1);
        vr.values[i] = C64::new(0.0, 0.5 * sg) * (lo + hi) + fr;
        vp.values[i] = (lo - hi) * 0.5 + fp;
    }
    (vr, vp)
}

/// Velocity modes from vorticity modes; the integral to infinity is truncated at `r_max`.
pub fn reconstruct_velocity(w: &VorticityState, far: &FarField) -> VelocityState {
    let circ = circulation(w);
    if circ.abs() > 1e-8 * w.norm_l2().max(f64::MIN_POSITIVE) {
        log::warn!("nonzero circulation {circ:.3e}; Biot-Savart reconstruction assumes zero");
    }
    let tails = l1_tails(w);
    log::debug!("L1 tails of modes 0 and 1: {:.3e}, {:.3e}", tails[0], tails[1]);
    let (vr, vphi) = w
        .modes
        .iter()
        .enumerate()
        .map(|(k, m)| velocity_mode(k as i32, m, far))
        .unzip();
    VelocityState { vr, vphi }
}

/// `int_{r0}^{r_max} s^(1-|k|) w_k ds`.
pub fn moment(k: i32, w: &VorticityState) -> C64 {
    match w.modes.get(k.unsigned_abs() as usize) {
        None => ZERO,
        Some(m) if k >= 0 => m.moment(k),
        Some(m) => m.moment(k).conj(),
    }
}

/// `moment(k) - 2 v_{inf,phi,k}` for `k = 0..=N`.
pub fn manifold_residual(w: &VorticityState, far: &FarField) -> Vec<C64> {
    (0..=w.n() as i32)
        .map(|k| moment(k, w) - far.phi_coeff(k) * 2.0)
        .collect()
}

/// Total vorticity `2 pi int s w_0 ds`.
pub fn circulation(w: &VorticityState) -> f64 {
    let m = &w.modes[0];
    2.0 * PI * m.moment(0).re
}

/// `int |w_k| s ds` over the outermost radial panel for `k = 0, 1`.
pub fn l1_tails(w: &VorticityState) -> [f64; 2] {
    let g = w.grid();
    let start = g.last_panel_start();
    let tail = |k: usize| -> f64 {
        w.modes.get(k).map_or(0.0, |m| {
            (start..g.len())
                .map(|i| g.weights[i] * g.nodes[i] * m.values[i].norm())
                .sum()
        })
    };
    [tail(0), tail(1)]
}

/// `sqrt(sum_{|k|<=K} (1+|k|)(|v_{r,k}(r0)|^2 + |v_{phi,k}(r0)|^2))`.
pub fn boundary_velocity_norm(v: &VelocityState, cutoff: usize) -> f64 {
    let mut s = 0.0;
    for k in -(cutoff as i32)..=(cutoff as i32) {
        let a = v.vr_at(k, 0).norm_sqr() + v.vphi_at(k, 0).norm_sqr();
        s += (1.0 + k.abs() as f64) * a;
    }
    s.sqrt()
}
