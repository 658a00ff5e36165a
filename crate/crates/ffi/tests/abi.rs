use std::ffi::{CStr, CString};
use std::ptr;
use vortexbc_ffi::*;

const SCENARIO: &str = r#"
[geometry]
r0 = 1.0

[discretization]
modes = 2
radial_panel_width = 0.4
lambda_max = 30.0

[[physics.initial]]
mode = 1
profile = "gaussian_bump"
amplitude = [0.01, 0.0]
center = 4.0
width = 0.7

[run]
t_final = 0.1
dt = 0.05
"#;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe {
        vbc_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn scenario(text: &str) -> *mut VbcScenario {
    let c = CString::new(text).unwrap();
    let mut sc = ptr::null_mut();
    assert_eq!(unsafe { vbc_scenario_parse(c.as_ptr(), &mut sc) }, VbcStatus::Ok, "{}", last_error());
    sc
}

#[test]
fn scalar_functions_match_the_library() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(vbc_bessel_j(3, 7.5, &mut v), VbcStatus::Ok);
        assert_eq!(v, vortexbc::bessel::bessel_j(3, 7.5));
        assert_eq!(vbc_kernel_r(2, 1, 4.0, 1.7, 1.0, &mut v), VbcStatus::Ok);
        assert_eq!(v, vortexbc::bessel::kernel_r(2, 1, 4.0, 1.7, 1.0).unwrap());
        assert_eq!(vbc_forcing_kernel_rho(1, 2.0, 1.0, &mut v), VbcStatus::Ok);
        assert_eq!(v, vortexbc::bessel::forcing_kernel_rho(1, 2.0, 1.0).unwrap());
        let ver = CStr::from_ptr(vbc_version()).to_str().unwrap();
        assert_eq!(ver, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(vbc_bessel_y(0, 0.0, &mut v), VbcStatus::Domain);
        assert!(last_error().contains("x > 0"));
        assert_eq!(vbc_bessel_j(0, 1.0, ptr::null_mut()), VbcStatus::NullPointer);
        assert_eq!(vbc_bessel_j(0, 1.0, &mut v), VbcStatus::Ok);
        assert_eq!(last_error(), "");
        // Truncated copy still reports the full length.
        vbc_bessel_y(0, -1.0, &mut v);
        let mut small = [0 as std::ffi::c_char; 8];
        let n = vbc_last_error(small.as_mut_ptr(), small.len());
        assert!(n > 7);
        assert_eq!(CStr::from_ptr(small.as_ptr()).to_bytes().len(), 7);

        let bad = CString::new(SCENARIO.replace("dt = 0.05", "dt = -0.05")).unwrap();
        let mut sc = ptr::null_mut();
        assert_eq!(vbc_scenario_parse(bad.as_ptr(), &mut sc), VbcStatus::Validation);
        assert!(sc.is_null());
        assert!(last_error().contains("run.dt"));
        let missing = CString::new("/nonexistent/scenario.toml").unwrap();
        assert_eq!(vbc_scenario_load(missing.as_ptr(), &mut sc), VbcStatus::Io);
        vbc_scenario_free(ptr::null_mut());
        assert_eq!(vbc_scenario_modes(ptr::null()), 0);
    }
}

#[test]
fn transform_round_trip_through_handles() {
    let sc = scenario(SCENARIO);
    unsafe {
        assert_eq!(vbc_scenario_modes(sc), 2);
        let mut tr = ptr::null_mut();
        assert_eq!(vbc_transform_new(sc, &mut tr), VbcStatus::Ok);
        let (n, m) = (vbc_transform_radial_len(tr), vbc_transform_spectral_len(tr));
        let mut r = vec![0.0; n];
        assert_eq!(vbc_transform_radial_nodes(tr, r.as_mut_ptr(), n), VbcStatus::Ok);
        assert_eq!(vbc_transform_radial_nodes(tr, r.as_mut_ptr(), n - 1), VbcStatus::InvalidArgument);
        let mut lam = vec![0.0; m];
        assert_eq!(vbc_transform_spectral_nodes(tr, lam.as_mut_ptr(), m), VbcStatus::Ok);
        assert!(lam.windows(2).all(|w| w[0] < w[1]));

        // Equal-mass bumps of opposite sign: zero k = 1 moment, so W_{1,0} inverts exactly.
        let mut f = vec![0.0; 2 * n];
        for (i, &x) in r.iter().enumerate() {
            f[2 * i] = (-(x - 4.0).powi(2) / 0.25).exp() - (-(x - 3.0).powi(2) / 0.25).exp();
        }
        let mut g = vec![0.0; 2 * m];
        assert_eq!(vbc_transform_forward(tr, 1, f.as_ptr(), n, g.as_mut_ptr(), m), VbcStatus::Ok);
        let mut back = vec![0.0; 2 * n];
        assert_eq!(vbc_transform_inverse(tr, 1, g.as_ptr(), m, back.as_mut_ptr(), n), VbcStatus::Ok);
        let err: f64 = f.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = f.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(err <= 1e-6 * norm, "{err:e}");
        assert_eq!(vbc_transform_forward(tr, 1, f.as_ptr(), n + 1, g.as_mut_ptr(), m), VbcStatus::InvalidArgument);
        vbc_transform_free(tr);
        vbc_scenario_free(sc);
    }
}

#[test]
fn runs_execute_and_write() {
    let sc = scenario(SCENARIO);
    let dir = tempfile::tempdir().unwrap();
    unsafe {
        let mut run = ptr::null_mut();
        assert_eq!(vbc_run_execute(sc, VbcSolver::Helmholtz, &mut run), VbcStatus::Ok, "{}", last_error());
        assert_eq!(vbc_run_record_count(run), 3);
        let mut rec = VbcRecord::default();
        assert_eq!(vbc_run_record(run, 2, &mut rec), VbcStatus::Ok);
        assert!((rec.t - 0.1).abs() < 1e-15);
        assert!(rec.max_manifold_residual.is_finite());
        assert_eq!(vbc_run_record(run, 3, &mut rec), VbcStatus::InvalidArgument);
        assert!(!vbc_run_verify_passed(run));
        let d = CString::new(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(vbc_run_write(run, d.as_ptr()), VbcStatus::Ok);
        assert!(dir.path().join("diagnostics.json").exists());
        vbc_run_free(run);

        let mut run = ptr::null_mut();
        assert_eq!(vbc_run_execute(sc, VbcSolver::Verify, &mut run), VbcStatus::Ok);
        assert!(vbc_run_verify_passed(run));
        vbc_run_free(run);
        vbc_scenario_free(sc);
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/vortexbc.h")).unwrap();
    for sym in [
        "vbc_bessel_j", "vbc_bessel_y", "vbc_kernel_r", "vbc_forcing_kernel_rho", "vbc_last_error",
        "vbc_scenario_load", "vbc_transform_forward", "vbc_run_execute", "vbc_run_free", "typedef struct VbcRun VbcRun",
        "VBC_STATUS_NON_CONVERGENCE",
    ] {
        assert!(h.contains(sym), "{sym}");
    }
}
