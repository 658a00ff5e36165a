//! Radial and spectral grids with composite quadrature, and sampled functions on them.

use crate::error::{Error, Result};
use crate::quadrature::Rule;
use num_complex::Complex64 as C64;
use std::sync::Arc;

pub const DEFAULT_POINTS: usize = 16;

/// Parameters for a graded radial grid on `[r0, r_max]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RadialSpec {
    pub r0: f64,
    pub r_max: f64,
    /// Panels have this width up to `core_radius`.
    pub panel_width: f64,
    pub core_radius: f64,
    /// Geometric growth of panel widths beyond the core.
    pub growth: f64,
    pub points: usize,
}

impl RadialSpec {
    pub fn new(r0: f64) -> Self {
        RadialSpec {
            r0,
            r_max: 40.0 * r0,
            panel_width: 0.2 * r0,
            core_radius: 12.0 * r0,
            growth: 1.25,
            points: DEFAULT_POINTS,
        }
    }
}

/// Composite Gauss-Lobatto grid; neighbouring panels share their end node.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub r0: f64,
    pub r_max: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub edges: Vec<f64>,
    rule: Rule,
    bary: Vec<f64>,
}

impl RadialGrid {
    pub fn new(spec: &RadialSpec) -> Result<Arc<Self>> {
        let RadialSpec {
            r0,
            r_max,
            panel_width: h,
            core_radius,
            growth,
            points,
        } = *spec;
        if !(r0 > 0.0) {
            return Err(Error::Grid(format!("r0 must be positive, got {r0}")));
        }
        if !(r_max >= 10.0 * r0) {
            return Err(Error::Grid(format!("r_max/r0 must be at least 10, got {}", r_max / r0)));
        }
        if !(h > 0.0) || !(growth >= 1.0) {
            return Err(Error::Grid("panel width must be positive and growth >= 1".into()));
        }
        let mut edges = vec![r0];
        let core = core_radius.clamp(r0, r_max);
        let mut i = 1.0;
        while r0 + i * h < core - 1e-9 * h {
            edges.push(r0 + i * h);
            i += 1.0;
        }
        let mut w = h;
        let mut last = *edges.last().unwrap();
        while last < r_max {
            w *= growth;
            let mut next = last + w;
            if next > r_max - 0.5 * w {
                next = r_max;
            }
            edges.push(next);
            last = next;
        }
        Self::from_edges(edges, points)
    }

    /// Grid from explicit panel edges `r0 = e_0 < e_1 < ... = r_max`.
    pub fn from_edges(edges: Vec<f64>, points: usize) -> Result<Arc<Self>> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("panel edges must be strictly ascending".into()));
        }
        if points < 3 {
            return Err(Error::Grid("need at least 3 points per panel".into()));
        }
        let rule = Rule::gauss_lobatto(points);
        let npan = edges.len() - 1;
        let n = npan * (points - 1) + 1;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for p in 0..npan {
            let (a, b) = (edges[p], edges[p + 1]);
            let (c, s) = (0.5 * (a + b), 0.5 * (b - a));
            for q in 0..points {
                let i = p * (points - 1) + q;
                nodes[i] = if q == 0 {
                    a
                } else if q == points - 1 {
                    b
                } else {
                    c + s * rule.nodes[q]
                };
                weights[i] += s * rule.weights[q];
            }
        }
        let bary = (0..points)
            .map(|j| {
                1.0 / (0..points)
                    .filter(|&k| k != j)
                    .map(|k| rule.nodes[j] - rule.nodes[k])
                    .product::<f64>()
            })
            .collect();
        Ok(Arc::new(RadialGrid {
            bary,
            r0: edges[0],
            r_max: *edges.last().unwrap(),
            nodes,
            weights,
            edges,
            rule,
        }))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn points_per_panel(&self) -> usize {
        self.rule.nodes.len()
    }

    pub fn panels(&self) -> usize {
        self.edges.len() - 1
    }

    /// Smallest node spacing scale: narrowest panel over points per panel.
    pub fn h_min(&self) -> f64 {
        let w = self
            .edges
            .windows(2)
            .map(|e| e[1] - e[0])
            .fold(f64::INFINITY, f64::min);
        w / self.points_per_panel() as f64
    }

    /// `int_{r0}^{r_max} f ds`.
    pub fn integrate(&self, f: &[C64]) -> C64 {
        self.weights.iter().zip(f).map(|(w, v)| v * *w).sum()
    }

    pub fn integrate_real(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| v * w).sum()
    }

    /// `int_{r0}^{r_i} f ds` at every node.
    pub fn cumulative(&self, f: &[C64]) -> Vec<C64> {
        let m = self.points_per_panel();
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        let mut base = C64::new(0.0, 0.0);
        for p in 0..self.panels() {
            let s = 0.5 * (self.edges[p + 1] - self.edges[p]);
            let off = p * (m - 1);
            for q in 1..m {
                let row = &self.rule.integ[q];
                let v: C64 = (0..m).map(|j| f[off + j] * row[j]).sum();
                out[off + q] = base + v * s;
            }
            base = out[off + m - 1];
        }
        out
    }

    /// Derivative of the panelwise interpolant; shared nodes take the mean of both sides.
    pub fn derivative(&self, f: &[C64]) -> Vec<C64> {
        let m = self.points_per_panel();
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        let np = self.panels();
        for p in 0..np {
            let s = 0.5 * (self.edges[p + 1] - self.edges[p]);
            let off = p * (m - 1);
            for q in 0..m {
                let row = &self.rule.diff[q];
                let v: C64 = (0..m).map(|j| f[off + j] * row[j]).sum::<C64>() / s;
                let shared = (q == 0 && p > 0) || (q == m - 1 && p + 1 < np);
                out[off + q] += if shared { v * 0.5 } else { v };
            }
        }
        out
    }

    /// Three-point one-sided derivative at `r0`.
    pub fn boundary_derivative(&self, f: &[C64]) -> C64 {
        let (x0, x1, x2) = (self.nodes[0], self.nodes[1], self.nodes[2]);
        let (h1, h2) = (x1 - x0, x2 - x0);
        let a1 = h2 / (h1 * (h2 - h1));
        let a2 = -h1 / (h2 * (h2 - h1));
        let a0 = -(a1 + a2);
        f[0] * a0 + f[1] * a1 + f[2] * a2
    }

    /// Value at `r` of the panelwise Lagrange interpolant of `f`.
    pub fn interpolate(&self, f: &[C64], r: f64) -> C64 {
        let m = self.points_per_panel();
        let p = match self.edges.binary_search_by(|e| e.partial_cmp(&r).unwrap()) {
            Ok(i) => return f[(i * (m - 1)).min(self.len() - 1)],
            Err(0) => 0,
            Err(i) => (i - 1).min(self.panels() - 1),
        };
        let off = p * (m - 1);
        let nodes = &self.nodes[off..off + m];
        let mut num = C64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..m {
            let d = r - nodes[j];
            if d == 0.0 {
                return f[off + j];
            }
            let b = self.bary[j] / d;
            num += f[off + j] * b;
            den += b;
        }
        num / den
    }

    /// Index of the first node of the last panel.
    pub fn last_panel_start(&self) -> usize {
        (self.panels() - 1) * (self.points_per_panel() - 1)
    }
}

/// Parameters for the spectral grid on `[lambda_min, lambda_max]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpectralSpec {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// End of the logarithmically refined section.
    pub lambda_log: f64,
    /// Panels per decade in the refined section.
    pub log_panels_per_decade: usize,
    /// Width of the uniform panels above `lambda_log`.
    pub panel_width: f64,
    pub points: usize,
}

impl SpectralSpec {
    pub fn new(r0: f64, r_max: f64) -> Self {
        SpectralSpec {
            lambda_min: 1e-3 / r0,
            lambda_max: 60.0 / r0,
            lambda_log: 1.0 / r0,
            log_panels_per_decade: 3,
            panel_width: 16.0 / r_max,
            points: DEFAULT_POINTS,
        }
    }
}

/// Composite Gauss-Legendre grid in `lambda`.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    pub lambdas: Vec<f64>,
    pub weights: Vec<f64>,
    pub edges: Vec<f64>,
    pub lambda_max: f64,
}

impl SpectralGrid {
    pub fn new(spec: &SpectralSpec) -> Result<Arc<Self>> {
        let SpectralSpec {
            lambda_min,
            lambda_max,
            lambda_log,
            log_panels_per_decade,
            panel_width,
            points,
        } = *spec;
        if !(lambda_min > 0.0 && lambda_log > lambda_min && lambda_max > lambda_log) {
            return Err(Error::Grid(
                "need 0 < lambda_min < lambda_log < lambda_max".into(),
            ));
        }
        if !(panel_width > 0.0) || log_panels_per_decade == 0 || points == 0 {
            return Err(Error::Grid("spectral panel parameters must be positive".into()));
        }
        let decades = (lambda_log / lambda_min).log10();
        let nlog = ((decades * log_panels_per_decade as f64).ceil() as usize).max(1);
        let mut edges: Vec<f64> = (0..=nlog)
            .map(|i| lambda_min * (lambda_log / lambda_min).powf(i as f64 / nlog as f64))
            .collect();
        let nuni = ((lambda_max - lambda_log) / panel_width).ceil() as usize;
        let h = (lambda_max - lambda_log) / nuni as f64;
        edges.extend((1..=nuni).map(|i| lambda_log + i as f64 * h));
        *edges.last_mut().unwrap() = lambda_max;
        Ok(Self::from_edges(edges, points))
    }

    pub fn from_edges(edges: Vec<f64>, points: usize) -> Arc<Self> {
        let rule = Rule::gauss_legendre(points);
        let mut lambdas = Vec::new();
        let mut weights = Vec::new();
        for e in edges.windows(2) {
            let (c, s) = (0.5 * (e[0] + e[1]), 0.5 * (e[1] - e[0]));
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                lambdas.push(c + s * x);
                weights.push(s * w);
            }
        }
        Arc::new(SpectralGrid {
            lambdas,
            weights,
            lambda_max: *edges.last().unwrap(),
            edges,
        })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// Complex samples on a radial grid.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<C64>,
}

impl RadialFunction {
    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        RadialFunction {
            grid: grid.clone(),
            values: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> C64) -> Self {
        RadialFunction {
            grid: grid.clone(),
            values: grid.nodes.iter().map(|&r| f(r)).collect(),
        }
    }

    pub fn from_real(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |r| C64::new(f(r), 0.0))
    }

    /// `(int |f|^2 s ds)^(1/2)`.
    pub fn norm_l2(&self) -> f64 {
        self.grid
            .weights
            .iter()
            .zip(&self.grid.nodes)
            .zip(&self.values)
            .map(|((w, r), v)| w * r * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `int s^(1-|k|) f ds`.
    pub fn moment(&self, k: i32) -> C64 {
        let p = 1 - k.abs();
        self.grid
            .weights
            .iter()
            .zip(&self.grid.nodes)
            .zip(&self.values)
            .map(|((w, r), v)| v * (w * r.powi(p)))
            .sum()
    }

    pub fn derivative(&self) -> RadialFunction {
        RadialFunction {
            grid: self.grid.clone(),
            values: self.grid.derivative(&self.values),
        }
    }

    pub fn scale(&self, a: C64) -> RadialFunction {
        self.map(|_, v| v * a)
    }

    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> RadialFunction {
        RadialFunction {
            grid: self.grid.clone(),
            values: self
                .grid
                .nodes
                .iter()
                .zip(&self.values)
                .map(|(&r, &v)| f(r, v))
                .collect(),
        }
    }

    pub fn axpy(&mut self, a: C64, x: &RadialFunction) {
        for (y, v) in self.values.iter_mut().zip(&x.values) {
            *y += a * v;
        }
    }

    pub fn sub(&self, other: &RadialFunction) -> RadialFunction {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Complex samples on a spectral grid.
#[derive(Debug, Clone)]
pub struct SpectralFunction {
    pub grid: Arc<SpectralGrid>,
    pub values: Vec<C64>,
}

impl SpectralFunction {
    pub fn zeros(grid: &Arc<SpectralGrid>) -> Self {
        SpectralFunction {
            grid: grid.clone(),
            values: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    /// `(int |f|^2 lambda dlambda)^(1/2)`.
    pub fn norm_l2(&self) -> f64 {
        self.grid
            .weights
            .iter()
            .zip(&self.grid.lambdas)
            .zip(&self.values)
            .map(|((w, l), v)| w * l * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> SpectralFunction {
        SpectralFunction {
            grid: self.grid.clone(),
            values: self
                .grid
                .lambdas
                .iter()
                .zip(&self.values)
                .map(|(&l, &v)| f(l, v))
                .collect(),
        }
    }
}
