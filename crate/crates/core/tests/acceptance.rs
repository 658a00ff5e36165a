//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --release --test acceptance`.

mod common;

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::time::{Duration, Instant};
use vortexbc::bessel::{bessel_j, bessel_y, forcing_kernel_rho, kernel_numerator, kernel_r};
use vortexbc::biot_savart::{manifold_residual, moment, reconstruct_velocity, FarField, VelocityState, VorticityState};
use vortexbc::conformal::*;
use vortexbc::control::{noslip_rhs, solve_noslip_control};
use vortexbc::grid::{RadialFunction, RadialGrid, RadialSpec, SpectralGrid, SpectralSpec};
use vortexbc::nonlinear::{advection_term, solve_helmholtz, step_oseen, BoundaryControl, SolverOptions};
use vortexbc::stokes::*;
use vortexbc::weber_orr::WeberOrr;

const Z: C64 = C64::new(0.0, 0.0);

type Check = Result<(bool, String), String>;

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn criterion(id: usize, name: &'static str, budget_s: f64, f: impl FnOnce() -> Check) -> Line {
    let start = Instant::now();
    let (ok, detail) = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => (false, format!("error: {e}")),
        Err(_) => (false, "panicked".into()),
    };
    let elapsed = start.elapsed();
    let budget = Duration::from_secs_f64(budget_s);
    let line = Line {
        id,
        name,
        pass: ok && elapsed <= budget,
        detail,
        elapsed,
        budget,
    };
    println!(
        "{} {:>2} {:<34} {:>8.2} s / {:<5} s  {}",
        if line.pass { "PASS" } else { "FAIL" },
        line.id,
        line.name,
        line.elapsed.as_secs_f64(),
        line.budget.as_secs_f64(),
        line.detail
    );
    line
}

fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

fn kernel_identities() -> Check {
    let (mut wr, mut cross, mut rho) = (0.0f64, 0.0f64, 0.0f64);
    for k in 1..=8 {
        for x in log_grid(0.05, 50.0, 40) {
            let w = 2.0 / (PI * x);
            let v = bessel_j(k, x) * bessel_y(k - 1, x).map_err(|e| e.to_string())?
                - bessel_y(k, x).map_err(|e| e.to_string())? * bessel_j(k - 1, x);
            wr = wr.max((v - w).abs() / w);
            for r0 in [1.0, 2.5] {
                let c = kernel_numerator(k, k - 1, x, r0, r0).map_err(|e| e.to_string())?;
                let expect = 2.0 / (PI * r0 * x);
                cross = cross.max((c - expect).abs() / expect);
                // The modulus-normalized kernel at the boundary is the forcing kernel.
                let r = kernel_r(k, k - 1, x, r0, r0).map_err(|e| e.to_string())?;
                let p = forcing_kernel_rho(k, x, r0).map_err(|e| e.to_string())?;
                rho = rho.max((r - p).abs() / p.abs());
            }
        }
    }
    let ok = wr <= 1e-10 && cross <= 1e-10 && rho <= 1e-10;
    Ok((ok, format!("wronskian {wr:.1e}, boundary cross product {cross:.1e}, R(r0) vs rho {rho:.1e} (tol 1e-10)")))
}

fn bessel_inequality() -> Check {
    let wo = common::transform(0.4);
    let mut worst = 0.0f64;
    for k in 1..=3 {
        let (a, b) = pair(k);
        for j in 0..20 {
            let c = 1.2 + 0.4 * j as f64;
            let s = 0.3 + 0.05 * j as f64;
            let f = RadialFunction::from_real(&wo.radial, |r| (-((r - c) / s).powi(2)).exp());
            let hat = wo.forward(a, b, &f).map_err(|e| e.to_string())?;
            worst = worst.max(hat.norm_l2() / f.norm_l2());
        }
    }
    Ok((worst <= 1.0 + 1e-6, format!("max ||W f|| / ||f|| = {worst:.8} (tol 1 + 1e-6), 60 bumps")))
}

fn transform_pair(dr: f64, dl: f64) -> WeberOrr {
    let mut rs = RadialSpec::new(1.0);
    rs.panel_width = dr;
    let mut ss = SpectralSpec::new(1.0, rs.r_max);
    ss.lambda_max = 30.0;
    ss.panel_width = dl;
    WeberOrr::new(RadialGrid::new(&rs).unwrap(), SpectralGrid::new(&ss).unwrap())
}

fn round_trip() -> Check {
    let (coarse, fine) = (transform_pair(1.0, 1.2), transform_pair(0.5, 0.6));
    let err = |wo: &WeberOrr, k: i32| -> Result<f64, String> {
        let f = wo.project_moment_free(k, &common::bump(&wo.radial, 1.0), Z).map_err(|e| e.to_string())?;
        let (a, b) = pair(k);
        let back = wo.forward(a, b, &f).and_then(|g| wo.inverse(a, b, &g)).map_err(|e| e.to_string())?;
        Ok(back.sub(&f).norm_l2() / f.norm_l2())
    };
    let (mut worst, mut min_ratio) = (0.0f64, f64::INFINITY);
    for k in 0..=3 {
        let (ec, ef) = (err(&coarse, k)?, err(&fine, k)?);
        worst = worst.max(ef);
        min_ratio = min_ratio.min(ec / ef);
    }
    Ok((
        worst <= 1e-6 && min_ratio >= 4.0,
        format!("fine error {worst:.1e} (tol 1e-6), min doubling gain {min_ratio:.1}x (need 4x)"),
    ))
}

fn stokes_oracle() -> Check {
    let wo = common::transform(0.4);
    let w0 = common::moment_free_state(&wo, 3, 3, 1.0);
    let res = evolve_stokes(&wo, &w0, 0.5).map_err(|e| e.to_string())?;
    let oracle = HeatOracle::new(20.0, 2000);
    let mut worst = 0.0f64;
    for k in 0..=3i32 {
        let (a, b) = pair(k);
        let o = oracle.run(k, &w0.modes[k as usize], 0.5, 200).map_err(|e| e.to_string())?;
        let ev = wo.inverse_at(a, b, &res.spectral[k as usize], &o.grid.nodes).map_err(|e| e.to_string())?;
        let e = RadialFunction { grid: o.grid.clone(), values: ev };
        worst = worst.max(e.sub(&o).norm_l2() / e.norm_l2());
    }
    Ok((worst <= 1e-3, format!("max per-mode relative L2 error {worst:.1e} at t = 0.5 (tol 1e-3)")))
}

fn semigroup_estimates() -> Check {
    let wo = common::transform(0.4);
    let w0 = common::moment_free_state(&wo, 3, 3, 1.0);
    let ratios = verify_semigroup_bounds(&wo, &w0, &[0.1, 0.5, 1.0]).map_err(|e| e.to_string())?;
    let worst = ratios.iter().map(|r| r.max()).fold(0.0, f64::max);
    let comp = composition_error(&wo, &w0, 0.3, 0.2).map_err(|e| e.to_string())?;
    Ok((
        worst <= 1.02 && comp <= 1e-6,
        format!("max ratio {worst:.4} (tol 1.02), composition error {comp:.1e} (tol 1e-6)"),
    ))
}

fn moment_invariance() -> Check {
    let wo = common::transform(0.4);
    let w0 = common::moment_free_state(&wo, 4, 4, 1.0);
    let n0 = w0.norm_l2();
    let mut worst = 0.0f64;
    for j in 1..=10 {
        let t = 0.1 * j as f64;
        let w = evolve_stokes(&wo, &w0, t).map_err(|e| e.to_string())?.state;
        for k in 0..=4 {
            worst = worst.max((moment(k, &w) - moment(k, &w0)).norm() / n0);
        }
    }
    Ok((worst <= 1e-6, format!("max |moment drift| / ||w0|| = {worst:.1e} over t in [0, 1] (tol 1e-6)")))
}

fn oseen_reduction() -> Check {
    let wo = common::transform(0.4);
    let n = 4;
    let dt = 0.05;
    let v = VelocityState::zeros(&wo.radial, n);
    let u = BoundaryControl::zeros(n, 10, dt);
    let mut w = common::moment_free_state(&wo, n, n, 1.0);
    let mut worst = 0.0f64;
    for j in 0..10 {
        let a = step_oseen(&wo, &w, &v, &u, j as f64 * dt, dt).map_err(|e| e.to_string())?;
        let b = evolve_stokes(&wo, &w, dt).map_err(|e| e.to_string())?.state;
        worst = worst.max(a.sub(&b).norm_l2() / b.norm_l2());
        w = a;
    }
    Ok((worst <= 1e-12, format!("max per-step relative difference {worst:.1e} over 10 steps (tol 1e-12)")))
}

fn scaled(wo: &WeberOrr, n: usize, filled: usize, h1: f64) -> VorticityState {
    let w = common::moment_free_state(wo, n, filled, 1.0);
    let s = h1 / w.norm_h1();
    w.scale(s)
}

fn helmholtz_picard() -> Check {
    let wo = common::transform(0.4);
    let n = 4;
    let (t, dt) = (0.5, 0.05);
    let u = BoundaryControl::zeros(n, 10, dt);
    let (mut contraction, mut iters) = (0.0f64, 0usize);
    let mut devs = Vec::new();
    for h1 in [0.1, 0.05, 0.025] {
        let w0 = scaled(&wo, n, 2, h1);
        let tr = solve_helmholtz(&wo, &w0, &FarField::ZERO, &u, t, dt, &SolverOptions::default()).map_err(|e| e.to_string())?;
        for r in &tr.records[1..] {
            if !r.picard.converged {
                return Ok((false, format!("Picard did not converge at t = {}", r.t)));
            }
            contraction = contraction.max(r.picard.contraction);
            iters = iters.max(r.picard.iterations);
        }
        let lin = evolve_stokes(&wo, &w0, t).map_err(|e| e.to_string())?.state;
        devs.push(tr.states.last().unwrap().sub(&lin).norm_l2());
    }
    let ratio = (devs[0] / devs[1]).min(devs[1] / devs[2]);
    Ok((
        contraction < 1.0 && iters <= 20 && ratio >= 3.5,
        format!("contraction {contraction:.1e} (< 1), iterations {iters} (<= 20), deviation ratio {ratio:.2} per halving (>= 3.5)"),
    ))
}

fn noslip_control() -> Check {
    let wo = common::transform(0.4);
    let (t, dt) = (0.5, 0.05);
    let opts = SolverOptions::default();
    let mut bvn: Vec<Vec<f64>> = Vec::new();
    let (mut worst_res, mut worst_sup, mut w0n) = (0.0f64, 0.0f64, 0.0);
    for n in [1usize, 2, 4, 8] {
        // Mode-1 data in a state carrying 2N modes.
        let w0 = scaled(&wo, 2 * n, 1, 0.1);
        let mut w0 = w0;
        w0.modes[0] = RadialFunction::zeros(&wo.radial);
        w0n = w0.norm_l2();
        let sol = solve_noslip_control(&wo, &w0, &FarField::ZERO, None, n, t, dt, &opts).map_err(|e| e.to_string())?;
        worst_sup = worst_sup.max(*sol.history.last().unwrap());
        for r in &sol.trajectory.records {
            for c in r.manifold_residual.iter().take(n + 1) {
                worst_res = worst_res.max(c[0].hypot(c[1]) / w0n);
            }
        }
        bvn.push(sol.trajectory.records.iter().map(|r| r.boundary_velocity_norm).collect());
    }
    // Absolute slack at the controlled-residual floor of the grid.
    let slack = 1e-8 * w0n;
    let mut worst_rise = f64::NEG_INFINITY;
    for pair in bvn.windows(2) {
        for (a, b) in pair[0].iter().zip(&pair[1]) {
            worst_rise = worst_rise.max(b - a);
        }
    }
    let last: Vec<String> = bvn.iter().map(|b| format!("{:.1e}", b.last().unwrap())).collect();
    Ok((
        worst_sup < 1e-8 && worst_res <= 1e-5 && worst_rise <= slack,
        format!(
            "outer sup diff {worst_sup:.1e} (< 1e-8), residual / ||w0|| {worst_res:.1e} (<= 1e-5), max rise in N {worst_rise:.1e} (slack {slack:.1e}), final norms N=1,2,4,8: {}",
            last.join(" ")
        ),
    ))
}

fn annulus(r: f64) -> f64 {
    if (2.0..4.0).contains(&r) {
        (1.0 - (r - 3.0).powi(2)).powi(4)
    } else {
        0.0
    }
}

fn single_mode_value(k: i32, f: f64, phi: f64) -> f64 {
    if k == 0 {
        f
    } else {
        2.0 * f * (k as f64 * phi).cos()
    }
}

fn max_diff(a: &[RadialFunction], b: &[RadialFunction]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.values.iter().zip(&y.values).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max)
}

fn conformal() -> Check {
    let g = RadialGrid::new(&RadialSpec::new(1.0)).map_err(|e| e.to_string())?;
    let n = 4;
    let mut w = VorticityState::zeros(&g, n);
    for k in 0..=n {
        let c = C64::from_polar(1.0 / (1.0 + k as f64), 0.3 * k as f64);
        w.modes[k] = RadialFunction::from_fn(&g, |r| c * (-(r - 3.0 - 0.2 * k as f64).powi(2)).exp());
    }
    w.enforce_symmetry();
    let far = FarField { vx: 0.7, vy: -0.2 };
    let id = ConformalMap::identity(1.0);
    let vd = reconstruct_velocity(&w, &far);
    let vm = mapped_reconstruct_velocity(&id, &w, &far);
    let s = transform_sources(&id, &w);
    let mut ident = max_diff(&s.q_modes, &w.modes).max(s.r_modes.iter().flat_map(|f| &f.values).map(|v| v.norm()).fold(0.0, f64::max));
    ident = ident.max(max_diff(&vd.vr, &vm.vr)).max(max_diff(&vd.vphi, &vm.vphi));
    let (rd, rm) = (manifold_residual(&w, &far), mapped_manifold_residual(&id, &w, &far));
    let (a, b) = (noslip_rhs(&w, &vd, &far, None), noslip_rhs(&w, &vd, &far, Some(&id)));
    for k in 0..=n {
        ident = ident.max((mapped_moment(&id, k, &w) - moment(k as i32, &w)).norm());
        ident = ident.max((rd[k] - rm[k]).norm()).max((a[k] - b[k]).norm());
    }
    ident = ident.max(max_diff(&advection_term(&w, &vd).modes, &mapped_advection_term(&id, &w, &vd, None).modes));

    let map = ConformalMap::joukowski(1.0, 0.25).map_err(|e| e.to_string())?;
    let ring = 512;
    let mut src = 0.0f64;
    for k0 in [0i32, 1, 2] {
        let mut w = VorticityState::zeros(&g, n);
        w.modes[k0 as usize] = RadialFunction::from_real(&g, annulus);
        let s = transform_sources(&map, &w);
        for (i, &r) in g.nodes.iter().enumerate().step_by(7) {
            for k in 0..=n {
                let (mut q, mut rr) = (Z, Z);
                for j in 0..ring {
                    let phi = 2.0 * PI * j as f64 / ring as f64;
                    let gz = eval_inverse_map_derivative(&map, C64::from_polar(r, phi)).unwrap().conj();
                    let wv = single_mode_value(k0, annulus(r), phi);
                    let e = C64::from_polar(1.0 / ring as f64, -(k as f64) * phi);
                    q += e * gz.re * wv;
                    rr += e * gz.im * wv;
                }
                src = src.max((q - s.q_modes[k].values[i]).norm()).max((rr - s.r_modes[k].values[i]).norm());
            }
        }
    }
    let (xs, ws) = common::gauss_legendre(200);
    let mut mom = 0.0f64;
    for k0 in [1i32, 2] {
        let mut w = VorticityState::zeros(&g, n);
        w.modes[k0 as usize] = RadialFunction::from_real(&g, annulus);
        for k in 0..=n as i32 {
            let mut acc = Z;
            for (x, wx) in xs.iter().zip(&ws) {
                let r = 3.0 + x;
                for j in 0..256 {
                    let phi = 2.0 * PI * j as f64 / 256.0;
                    let z = C64::from_polar(r, phi);
                    let gz = eval_inverse_map_derivative(&map, z).unwrap().conj();
                    acc += gz * single_mode_value(k0, annulus(r), phi) / z.powi(k) * (r * wx * 2.0 * PI / 256.0);
                }
            }
            mom = mom.max((mapped_moment(&map, k as usize, &w) - acc / (2.0 * PI)).norm());
        }
    }
    Ok((
        ident <= 1e-12 && src <= 1e-7 && mom <= 1e-7,
        format!("identity reduction {ident:.1e} (tol 1e-12), Joukowski sources {src:.1e}, moments {mom:.1e} (tol 1e-7)"),
    ))
}

fn main() {
    // `cargo test` passes harness flags; listing requests expect no tests.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let lines = [
        criterion(1, "kernel identities", 1.0, kernel_identities),
        criterion(2, "Bessel inequality", 10.0, bessel_inequality),
        criterion(3, "transform round trip", 30.0, round_trip),
        criterion(4, "Stokes vs Crank-Nicolson oracle", 30.0, stokes_oracle),
        criterion(5, "semigroup estimates", 30.0, semigroup_estimates),
        criterion(6, "moment invariance", 30.0, moment_invariance),
        criterion(7, "Oseen reduction", 5.0, oseen_reduction),
        criterion(8, "Helmholtz small-data Picard", 120.0, helmholtz_picard),
        criterion(9, "no-slip control", 600.0, noslip_control),
        criterion(10, "conformal reduction and oracle", 60.0, conformal),
    ];
    let failed: Vec<_> = lines.iter().filter(|l| !l.pass).map(|l| l.id.to_string()).collect();
    println!("acceptance: {}/{} passed", lines.len() - failed.len(), lines.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
