//! Bessel functions of integer order and the Weber-Orr kernels built from them.
//!
//! Evaluation uses the power series for small arguments, Miller's backward
//! recurrence normalized by `J0 + 2 sum J_2k = 1` for moderate arguments and
//! the Hankel expansion for large arguments. `Y0`, `Y1` in the Miller range
//! come from the Neumann series; higher `Y` orders by forward recurrence.

use crate::error::{domain, Result};
use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;
const HANKEL_LIMIT: f64 = 30.0;
const RESCALE: f64 = 1e250;

/// `J_k(x)` for any integer order and real `x`.
pub fn bessel_j(k: i32, x: f64) -> f64 {
    let n = k.unsigned_abs() as usize;
    if x < 0.0 {
        return parity(n) * bessel_j(k, -x);
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_LIMIT || x * x * 0.25 <= (n + 1) as f64 {
        return reflect(k) * series_j(n, x);
    }
    let mut j = vec![0.0; n + 1];
    let mut y = vec![0.0; n + 1];
    jy_orders(n, x, &mut j, &mut y);
    reflect(k) * j[n]
}

/// `Y_k(x)` for any integer order and `x > 0`.
pub fn bessel_y(k: i32, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("bessel_y requires x > 0, got {x}"));
    }
    let n = k.unsigned_abs() as usize;
    let mut j = vec![0.0; n + 1];
    let mut y = vec![0.0; n + 1];
    jy_orders(n, x, &mut j, &mut y);
    Ok(reflect(k) * y[n])
}

/// Fills `j[0..=nmax]` and `y[0..=nmax]` with `J_n(x)` and `Y_n(x)`, `x > 0`.
pub fn jy_orders(nmax: usize, x: f64, j: &mut [f64], y: &mut [f64]) {
    debug_assert!(x > 0.0);
    let (y0, y1) = if x < SERIES_LIMIT {
        for (n, v) in j.iter_mut().enumerate().take(nmax + 1) {
            *v = series_j(n, x);
        }
        series_y01(x, j[0], if nmax >= 1 { j[1] } else { series_j(1, x) })
    } else if x >= HANKEL_LIMIT {
        let (j0, y0) = hankel(0, x);
        let (j1, y1) = hankel(1, x);
        if (nmax as f64) < x {
            j[0] = j0;
            if nmax >= 1 {
                j[1] = j1;
            }
            for n in 1..nmax {
                j[n + 1] = 2.0 * n as f64 / x * j[n] - j[n - 1];
            }
        } else {
            miller(nmax, x, j);
        }
        (y0, y1)
    } else {
        miller(nmax, x, j)
    };
    y[0] = y0;
    if nmax >= 1 {
        y[1] = y1;
    }
    for n in 1..nmax {
        y[n + 1] = 2.0 * n as f64 / x * y[n] - y[n - 1];
    }
}

/// Signed-order lookup in tables produced by [`jy_orders`].
#[inline]
pub fn signed(table: &[f64], k: i32) -> f64 {
    reflect(k) * table[k.unsigned_abs() as usize]
}

#[inline]
fn parity(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn reflect(k: i32) -> f64 {
    if k < 0 {
        parity(k.unsigned_abs() as usize)
    } else {
        1.0
    }
}

fn series_j(n: usize, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= h / i as f64;
    }
    let q = -h * h;
    let mut sum = term;
    let mut m = 1.0;
    while term.abs() > 1e-18 * sum.abs() && m < 200.0 {
        term *= q / (m * (m + n as f64));
        sum += term;
        m += 1.0;
    }
    sum
}

fn series_y01(x: f64, j0: f64, j1: f64) -> (f64, f64) {
    let h = 0.5 * x;
    let q = h * h;
    let lg = h.ln();
    // Y0
    let mut harm = 0.0;
    let mut term = 1.0;
    let mut s0 = 0.0;
    for m in 1..60 {
        let mf = m as f64;
        harm += 1.0 / mf;
        term *= -q / (mf * mf);
        let t = -harm * term;
        s0 += t;
        if t.abs() < 1e-18 * s0.abs() {
            break;
        }
    }
    let y0 = FRAC_2_PI * ((lg + EULER_GAMMA) * j0 + s0);
    // Y1
    let mut hm = 0.0;
    let mut term = h;
    let mut s1 = (1.0 - 2.0 * EULER_GAMMA) * term;
    for m in 1..60 {
        let mf = m as f64;
        let hm1 = hm + 1.0 / mf;
        let hm2 = hm1 + 1.0 / (mf + 1.0);
        term *= -q / (mf * (mf + 1.0));
        let t = (-2.0 * EULER_GAMMA + hm1 + hm2) * term;
        s1 += t;
        hm = hm1;
        if t.abs() < 1e-18 * s1.abs() {
            break;
        }
    }
    let y1 = -FRAC_2_PI / x + FRAC_2_PI * lg * j1 - s1 / PI;
    (y0, y1)
}

/// Backward recurrence for `J_0..=J_nmax`; returns `(Y0, Y1)` from Neumann sums.
fn miller(nmax: usize, x: f64, j: &mut [f64]) -> (f64, f64) {
    let nn = (nmax as f64).max(x);
    let mut m = (nn + 16.0 + 1.5 * (40.0 * nn).sqrt()).ceil() as usize;
    m += m % 2;
    let (mut f2, mut f1) = (0.0f64, 1e-100f64);
    let (mut bs, mut su, mut sv) = (0.0, 0.0, 0.0);
    let mut f = 0.0;
    for k in (0..=m).rev() {
        f = 2.0 * (k + 1) as f64 / x * f1 - f2;
        if k <= nmax {
            j[k] = f;
        }
        let sgn = parity(k / 2);
        if k % 2 == 0 {
            if k != 0 {
                bs += 2.0 * f;
                su += sgn * f / k as f64;
            }
        } else if k > 1 {
            let kf = k as f64;
            sv += sgn * kf / (kf * kf - 1.0) * f;
        }
        f2 = f1;
        f1 = f;
        if f.abs() > RESCALE {
            let s = 1.0 / RESCALE;
            f *= s;
            f1 *= s;
            f2 *= s;
            bs *= s;
            su *= s;
            sv *= s;
            if k <= nmax {
                for v in &mut j[k..=nmax] {
                    *v *= s;
                }
            }
        }
    }
    let s0 = bs + f;
    for v in &mut j[..=nmax] {
        *v /= s0;
    }
    let j0 = j[0];
    let j1 = if nmax >= 1 { j[1] } else { f2 / s0 };
    let ec = (0.5 * x).ln() + EULER_GAMMA;
    let y0 = FRAC_2_PI * (ec * j0 - 4.0 * su / s0);
    let y1 = FRAC_2_PI * ((ec - 1.0) * j1 - j0 / x - 4.0 * sv / s0);
    (y0, y1)
}

/// Hankel asymptotic expansion for orders 0 and 1; returns `(J, Y)`.
fn hankel(nu: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (nu * nu) as f64;
    let (mut p, mut q) = (1.0, 0.0);
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let phase = 0.5 * nu as f64 * PI + FRAC_PI_4;
    let (sx, cx) = x.sin_cos();
    let (sa, ca) = phase.sin_cos();
    let cos_chi = cx * ca + sx * sa;
    let sin_chi = sx * ca - cx * sa;
    let amp = (FRAC_2_PI / x).sqrt();
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}

/// Modulus `sqrt(J_l^2 + Y_l^2)` at `x > 0`.
pub fn modulus(l: i32, x: f64) -> Result<f64> {
    let j = bessel_j(l, x);
    let y = bessel_y(l, x)?;
    Ok(j.hypot(y))
}

fn check_kernel_args(lambda: f64, r: f64, r0: f64) -> Result<()> {
    if !(r0 > 0.0) {
        return domain(format!("r0 must be positive, got {r0}"));
    }
    if !(lambda > 0.0) {
        return domain(format!("lambda must be positive, got {lambda}"));
    }
    if !(r >= r0) {
        return domain(format!("r = {r} lies inside r0 = {r0}"));
    }
    Ok(())
}

/// Un-normalized cross product `J_k(lr) Y_l(lr0) - Y_k(lr) J_l(lr0)`.
pub fn kernel_numerator(k: i32, l: i32, lambda: f64, r: f64, r0: f64) -> Result<f64> {
    check_kernel_args(lambda, r, r0)?;
    let (a, b) = (lambda * r, lambda * r0);
    Ok(bessel_j(k, a) * bessel_y(l, b)? - bessel_y(k, a)? * bessel_j(l, b))
}

/// Weber-Orr kernel `R_{k,l}(lambda, r)` normalized by the modulus of order `l` at `lambda r0`.
pub fn kernel_r(k: i32, l: i32, lambda: f64, r: f64, r0: f64) -> Result<f64> {
    let num = kernel_numerator(k, l, lambda, r, r0)?;
    Ok(num / modulus(l, lambda * r0)?)
}

/// `d/dr R_{k,l}(lambda, r)` through the recurrence `C_k' = C_{k-1} - (k/x) C_k`.
pub fn kernel_r_dr(k: i32, l: i32, lambda: f64, r: f64, r0: f64) -> Result<f64> {
    check_kernel_args(lambda, r, r0)?;
    let (a, b) = (lambda * r, lambda * r0);
    let kf = k as f64;
    let dj = bessel_j(k - 1, a) - kf / a * bessel_j(k, a);
    let dy = bessel_y(k - 1, a)? - kf / a * bessel_y(k, a)?;
    let (jl, yl) = (bessel_j(l, b), bessel_y(l, b)?);
    Ok(lambda * (dj * yl - dy * jl) / jl.hypot(yl))
}

/// Boundary forcing kernel `rho_k(lambda) = 2 / (pi r0 lambda M_{k-1}(lambda r0))`.
///
/// Written `r_k` in parts of the literature; renamed here to keep `r_k` for
/// the mapped vorticity source. Equals `R_{k,k-1}(lambda, r0)`.
pub fn forcing_kernel_rho(k: i32, lambda: f64, r0: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return domain(format!("lambda must be positive, got {lambda}"));
    }
    if !(r0 > 0.0) {
        return domain(format!("r0 must be positive, got {r0}"));
    }
    Ok(2.0 / (PI * r0 * lambda * modulus(k - 1, lambda * r0)?))
}
