//! Generalized Weber-Orr transforms on composite grids.
//!
//! `W_{k,l}[f](lambda) = int_{r0}^{r_max} R_{k,l}(lambda, s) f(s) s ds` and
//! `W^{-1}_{k,l}[g](r) = int_0^{lambda_max} R_{k,l}(lambda, r) g(lambda) lambda dlambda`.
//! Both directions share one kernel matrix per `(k, l)`, cached on first use.

use crate::bessel::{jy_orders, signed};
use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid, SpectralFunction, SpectralGrid};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Relative tail contribution above which a truncation warning is logged.
pub const TAIL_WARN: f64 = 1e-8;

/// Row-major `R_{k,l}(lambda_j, r_i)`.
struct KernelMatrix {
    data: Vec<f64>,
}

/// Transform engine bound to one radial and one spectral grid.
pub struct WeberOrr {
    pub radial: Arc<RadialGrid>,
    pub spectral: Arc<SpectralGrid>,
    cache: Mutex<HashMap<(i32, i32), Arc<KernelMatrix>>>,
    bumps: Mutex<HashMap<i32, Arc<RadialFunction>>>,
}

/// Residual norms of the three differentiation rules.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DerivativeReport {
    /// `d/dr W^{-1}_{k,k-1}[g]` against `(W^{-1}_{k-1,k-1} - W^{-1}_{k+1,k-1})[lambda g] / 2`.
    pub radial_derivative: f64,
    /// `(k/r) W^{-1}_{k,k-1}[g]` against `(W^{-1}_{k+1,k-1} + W^{-1}_{k-1,k-1})[lambda g] / 2`.
    pub order_multiplier: f64,
    /// `lambda W_{k,k-1}[f]` against `W_{k-1,k-1}[k f/r + f']`.
    pub lambda_multiplier: f64,
}

/// Fills `out[i] = R(lambda, r_i)` for every requested order pair at once.
fn kernel_rows(pairs: &[(i32, i32)], lambda: f64, r0: f64, nodes: &[f64], rows: &mut [&mut [f64]]) {
    let nmax = pairs
        .iter()
        .map(|&(k, l)| k.unsigned_abs().max(l.unsigned_abs()))
        .max()
        .unwrap_or(0) as usize;
    let (mut j, mut y) = (vec![0.0; nmax + 1], vec![0.0; nmax + 1]);
    jy_orders(nmax, lambda * r0, &mut j, &mut y);
    let bnd: Vec<(f64, f64, f64)> = pairs
        .iter()
        .map(|&(_, l)| {
            let (jl, yl) = (signed(&j, l), signed(&y, l));
            (jl, yl, 1.0 / jl.hypot(yl))
        })
        .collect();
    for (i, &r) in nodes.iter().enumerate() {
        jy_orders(nmax, lambda * r, &mut j, &mut y);
        for (p, &(k, _)) in pairs.iter().enumerate() {
            let (jl, yl, inv) = bnd[p];
            rows[p][i] = (signed(&j, k) * yl - signed(&y, k) * jl) * inv;
        }
    }
}

impl WeberOrr {
    pub fn new(radial: Arc<RadialGrid>, spectral: Arc<SpectralGrid>) -> Self {
        WeberOrr {
            radial,
            spectral,
            cache: Mutex::new(HashMap::new()),
            bumps: Mutex::new(HashMap::new()),
        }
    }

    pub fn r0(&self) -> f64 {
        self.radial.r0
    }

    /// Builds any missing kernel matrices for the given order pairs in one sweep.
    pub fn prepare(&self, pairs: &[(i32, i32)]) {
        let missing: Vec<(i32, i32)> = {
            let cache = self.cache.lock().unwrap();
            let mut m: Vec<_> = pairs.iter().copied().filter(|p| !cache.contains_key(p)).collect();
            m.sort();
            m.dedup();
            m
        };
        if missing.is_empty() {
            return;
        }
        let nr = self.radial.len();
        let nl = self.spectral.len();
        let r0 = self.r0();
        let mut mats: Vec<Vec<f64>> = vec![vec![0.0; nr * nl]; missing.len()];
        let nodes = &self.radial.nodes;
        {
            let mut chunks: Vec<_> = mats.iter_mut().map(|m| m.chunks_mut(nr)).collect();
            let mut per_row: Vec<Vec<&mut [f64]>> = (0..nl)
                .map(|_| chunks.iter_mut().map(|c| c.next().unwrap()).collect())
                .collect();
            per_row
                .par_iter_mut()
                .enumerate()
                .for_each(|(jdx, rows)| {
                    kernel_rows(&missing, self.spectral.lambdas[jdx], r0, nodes, rows);
                });
        }
        let mut cache = self.cache.lock().unwrap();
        for (p, data) in missing.into_iter().zip(mats) {
            cache.insert(p, Arc::new(KernelMatrix { data }));
        }
    }

    fn matrix(&self, k: i32, l: i32) -> Arc<KernelMatrix> {
        self.prepare(&[(k, l)]);
        self.cache.lock().unwrap()[&(k, l)].clone()
    }

    fn check_grid(&self, f: &RadialFunction) -> Result<()> {
        if !Arc::ptr_eq(&f.grid, &self.radial) && f.grid.nodes != self.radial.nodes {
            return Err(Error::Grid("function lives on a different radial grid".into()));
        }
        Ok(())
    }

    /// Forward transform `W_{k,l}[f]`.
    pub fn forward(&self, k: i32, l: i32, f: &RadialFunction) -> Result<SpectralFunction> {
        self.check_grid(f)?;
        let tail = self.radial_tail_fraction(f);
        if tail > TAIL_WARN {
            log::warn!("forward W_{{{k},{l}}}: last radial panel carries {tail:.2e} of the mass");
        }
        let g = &self.radial;
        let x: Vec<C64> = (0..g.len())
            .map(|i| f.values[i] * (g.nodes[i] * g.weights[i]))
            .collect();
        let m = self.matrix(k, l);
        let nr = g.len();
        let values = m
            .data
            .par_chunks(nr)
            .map(|row| {
                let (mut re, mut im) = (0.0, 0.0);
                for (a, v) in row.iter().zip(&x) {
                    re += a * v.re;
                    im += a * v.im;
                }
                C64::new(re, im)
            })
            .collect();
        Ok(SpectralFunction {
            grid: self.spectral.clone(),
            values,
        })
    }

    /// Inverse transform `W^{-1}_{k,l}[g]` on the radial nodes.
    pub fn inverse(&self, k: i32, l: i32, g: &SpectralFunction) -> Result<RadialFunction> {
        if g.grid.lambdas != self.spectral.lambdas {
            return Err(Error::Grid("function lives on a different spectral grid".into()));
        }
        let tail = self.spectral_tail_fraction(g);
        if tail > TAIL_WARN {
            log::warn!("inverse W_{{{k},{l}}}: top of the spectrum carries {tail:.2e} of the mass");
        }
        let s = &self.spectral;
        let m = self.matrix(k, l);
        let nr = self.radial.len();
        let (mut re, mut im) = (vec![0.0; nr], vec![0.0; nr]);
        for (j, row) in m.data.chunks(nr).enumerate() {
            let c = g.values[j] * (s.lambdas[j] * s.weights[j]);
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            for ((a, x), y) in row.iter().zip(re.iter_mut()).zip(im.iter_mut()) {
                *x += a * c.re;
                *y += a * c.im;
            }
        }
        Ok(RadialFunction {
            grid: self.radial.clone(),
            values: re.into_iter().zip(im).map(|(a, b)| C64::new(a, b)).collect(),
        })
    }

    /// Inverse transform evaluated at arbitrary radii `>= r0`.
    pub fn inverse_at(&self, k: i32, l: i32, g: &SpectralFunction, radii: &[f64]) -> Result<Vec<C64>> {
        if let Some(&r) = radii.iter().find(|&&r| r < self.r0()) {
            return Err(Error::Domain(format!("radius {r} inside r0")));
        }
        let s = &self.spectral;
        let n = radii.len();
        let parts: Vec<Vec<C64>> = (0..s.len())
            .into_par_iter()
            .map(|j| {
                let mut row = vec![0.0; n];
                kernel_rows(&[(k, l)], s.lambdas[j], self.r0(), radii, &mut [&mut row[..]]);
                let c = g.values[j] * (s.lambdas[j] * s.weights[j]);
                row.into_iter().map(|a| c * a).collect()
            })
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for p in parts {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// Share of `int |f| s ds` carried by the outermost radial panel.
    pub fn radial_tail_fraction(&self, f: &RadialFunction) -> f64 {
        let g = &self.radial;
        let a = |i: usize| g.weights[i] * g.nodes[i] * f.values[i].norm();
        let total: f64 = (0..g.len()).map(a).sum();
        if total == 0.0 {
            return 0.0;
        }
        (g.last_panel_start()..g.len()).map(a).sum::<f64>() / total
    }

    /// Share of `int |g| lambda dlambda` carried by `lambda > 0.9 lambda_max`.
    pub fn spectral_tail_fraction(&self, g: &SpectralFunction) -> f64 {
        let s = &self.spectral;
        let cut = 0.9 * s.lambda_max;
        let (mut tail, mut total) = (0.0, 0.0);
        for j in 0..s.len() {
            let a = s.weights[j] * s.lambdas[j] * g.values[j].norm();
            total += a;
            if s.lambdas[j] > cut {
                tail += a;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// Unit-moment Gaussian bump used by [`WeberOrr::project_moment_free`].
    pub fn bump(&self, k: i32) -> Arc<RadialFunction> {
        let k = k.abs();
        let mut bumps = self.bumps.lock().unwrap();
        bumps
            .entry(k)
            .or_insert_with(|| {
                let r0 = self.r0();
                let (c, w) = (3.0 * r0, 0.45 * r0);
                let raw = RadialFunction::from_real(&self.radial, |s| (-((s - c) / w).powi(2)).exp());
                let m = raw.moment(k).re;
                Arc::new(raw.scale(C64::new(1.0 / m, 0.0)))
            })
            .clone()
    }

    /// Adds a multiple of the bump so that `int s^(1-|k|) g ds = target`.
    pub fn project_moment_free(&self, k: i32, f: &RadialFunction, target: C64) -> Result<RadialFunction> {
        self.check_grid(f)?;
        let phi = self.bump(k);
        let mp = phi.moment(k);
        if mp.norm() < 1e-12 {
            return Err(Error::Misconfigured(format!("bump moment {mp} is below 1e-12")));
        }
        let c = (target - f.moment(k)) / mp;
        if c == C64::new(0.0, 0.0) {
            return Ok(f.clone());
        }
        log::debug!("moment projection of mode {k}: |c| = {:.3e}", c.norm());
        let mut g = f.clone();
        g.axpy(c, &phi);
        Ok(g)
    }

    /// Relative residuals of the three differentiation rules for `k >= 1`.
    pub fn check_derivative_rules(&self, k: i32, f: &RadialFunction) -> Result<DerivativeReport> {
        if k < 1 {
            return Err(Error::Domain("derivative rules need k >= 1".into()));
        }
        let rel = |a: f64, b: f64| if b == 0.0 { a } else { a / b };
        self.prepare(&[(k, k - 1), (k - 1, k - 1), (k + 1, k - 1)]);
        let g = self.forward(k, k - 1, f)?;
        let lg = g.map(|l, v| v * l);
        let base = self.inverse(k, k - 1, &g)?;
        let a = self.inverse(k - 1, k - 1, &lg)?;
        let b = self.inverse(k + 1, k - 1, &lg)?;
        let half = C64::new(0.5, 0.0);
        let mut rhs1 = a.clone();
        rhs1.axpy(C64::new(-1.0, 0.0), &b);
        let rhs1 = rhs1.scale(half);
        let mut rhs2 = a;
        rhs2.axpy(C64::new(1.0, 0.0), &b);
        let rhs2 = rhs2.scale(half);
        let lhs1 = base.derivative();
        let kf = k as f64;
        let lhs2 = base.map(|r, v| v * (kf / r));
        let df = f.derivative();
        let src = f.map(|r, v| v * (kf / r));
        let mut src = src;
        src.axpy(C64::new(1.0, 0.0), &df);
        let rhs3 = self.forward(k - 1, k - 1, &src)?;
        let d3 = SpectralFunction {
            grid: lg.grid.clone(),
            values: lg.values.iter().zip(&rhs3.values).map(|(a, b)| a - b).collect(),
        };
        Ok(DerivativeReport {
            radial_derivative: rel(lhs1.sub(&rhs1).norm_l2(), rhs1.norm_l2()),
            order_multiplier: rel(lhs2.sub(&rhs2).norm_l2(), rhs2.norm_l2()),
            lambda_multiplier: rel(d3.norm_l2(), rhs3.norm_l2()),
        })
    }
}
