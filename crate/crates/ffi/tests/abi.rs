use std::ffi::{CStr, CString};
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::ptr;

use logdiff_ffi::*;

fn last_error() -> String {
    let p = ld_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn metric_matches_closed_form() {
    let mut v = 0.0;
    let s = unsafe { ld_metric_eval(LdMetric::Full, 0.0, 0.5, &mut v) };
    assert_eq!(s, LdStatus::Ok);
    let want = (2.0f64 / 0.75).powi(2);
    assert!((v / want - 1.0).abs() < 1e-14);

    let s = unsafe { ld_metric_eval(LdMetric::SubBall, 0.5, 0.25, &mut v) };
    assert_eq!(s, LdStatus::Ok);
    // ρ⁻² h(r/ρ)
    assert!((v / (4.0 * want) - 1.0).abs() < 1e-14);
}

#[test]
fn metric_outside_domain_sets_error() {
    let mut v = 0.0;
    let s = unsafe { ld_metric_eval(LdMetric::Full, 0.0, 1.5, &mut v) };
    assert_eq!(s, LdStatus::Domain);
    assert!(last_error().contains("domain"));
}

#[test]
fn null_out_pointer_is_reported() {
    let s = unsafe { ld_metric_eval(LdMetric::Full, 0.0, 0.1, ptr::null_mut()) };
    assert_eq!(s, LdStatus::NullPointer);
    assert!(last_error().contains("value"));
}

#[test]
fn mobius_sends_a_to_origin() {
    let (mut x, mut y, mut j) = (1.0, 1.0, 0.0);
    let s = unsafe { ld_mobius_apply(0.3, -0.2, 0.7, 0.3, -0.2, &mut x, &mut y, &mut j) };
    assert_eq!(s, LdStatus::Ok);
    assert!(x.abs() < 1e-15 && y.abs() < 1e-15);
    // |φ'(a)|² = (1 − |a|²)^{-2}
    let a2: f64 = 0.09 + 0.04;
    assert!((j * (1.0 - a2).powi(2) - 1.0).abs() < 1e-12);
}

#[test]
fn mobius_rejects_boundary_parameter() {
    let (mut x, mut y, mut j) = (0.0, 0.0, 0.0);
    let s = unsafe { ld_mobius_apply(1.0, 0.0, 0.0, 0.1, 0.1, &mut x, &mut y, &mut j) };
    assert_ne!(s, LdStatus::Ok);
}

#[test]
fn cigar_mass_is_four_pi_on_the_disk_at_zero() {
    let mut m = 0.0;
    assert_eq!(unsafe { ld_cigar_l1_mass(1e-4, 0.0, 1.0, &mut m) }, LdStatus::Ok);
    assert!((m / (4.0 * PI) - 1.0).abs() < 1e-12);
    let mut u = 0.0;
    assert_eq!(unsafe { ld_exact_cigar_scaled(0.1, 0.0, 0.0, &mut u) }, LdStatus::Ok);
    // 4/(μ ln(1 + 1/μ))
    let want = 4.0 / (0.1 * (11.0f64).ln());
    assert!((u / want - 1.0).abs() < 1e-13);
}

#[test]
fn field_roundtrip_and_norms() {
    let mut f: *mut LdField = ptr::null_mut();
    assert_eq!(unsafe { ld_field_hyperbolic(64, 0.05, 1.0, 0.0, &mut f) }, LdStatus::Ok);
    let mut len = 0;
    assert_eq!(unsafe { ld_field_len(f, &mut len) }, LdStatus::Ok);
    let mut buf = vec![0.0; len];
    assert_eq!(unsafe { ld_field_copy_values(f, buf.as_mut_ptr(), len) }, LdStatus::Ok);
    let mut r = 0.0;
    assert_eq!(unsafe { ld_field_node_radius(f, len - 1, &mut r) }, LdStatus::Ok);
    assert!((r - 0.95).abs() < 1e-14);
    assert!((buf[len - 1] / (2.0 / (1.0 - r * r)).powi(2) - 1.0).abs() < 1e-13);

    let mut g: *mut LdField = ptr::null_mut();
    let s = unsafe { ld_field_radial_from_values(64, 0.05, buf.as_ptr(), len, 0.0, &mut g) };
    assert_eq!(s, LdStatus::Ok);
    let (mut sup, mut l1) = (0.0, 0.0);
    assert_eq!(unsafe { ld_sup_region(g, 0.5, &mut sup) }, LdStatus::Ok);
    assert!(sup <= (2.0f64 / 0.75).powi(2) * (1.0 + 1e-12));
    assert_eq!(unsafe { ld_lp_norm(g, 1.0, 0.5, &mut l1) }, LdStatus::Ok);
    // ∫_{B_r} h dA = 4π r²/(1 − r²)
    let want = 4.0 * PI * 0.25 / 0.75;
    assert!((l1 / want - 1.0).abs() < 2e-2, "{l1} vs {want}");

    let short = unsafe { ld_field_copy_values(g, buf.as_mut_ptr(), len - 1) };
    assert_eq!(short, LdStatus::InvalidArgument);
    unsafe {
        ld_field_free(f);
        ld_field_free(g);
        ld_field_free(ptr::null_mut());
    }
}

#[test]
fn field_rejects_wrong_length() {
    let values = [1.0; 10];
    let mut g: *mut LdField = ptr::null_mut();
    let s = unsafe { ld_field_radial_from_values(64, 0.05, values.as_ptr(), values.len(), 0.0, &mut g) };
    assert_eq!(s, LdStatus::InvalidArgument);
    assert!(g.is_null());
}

#[test]
fn hyperbolic_flow_through_the_abi() {
    let mut f: *mut LdField = ptr::null_mut();
    assert_eq!(unsafe { ld_field_hyperbolic(64, 0.05, 1.0, 0.0, &mut f) }, LdStatus::Ok);
    let mut traj: *mut LdTrajectory = ptr::null_mut();
    let s = unsafe { ld_solve_radial(f, LdBoundary::Hyperbolic, 1.0, 0.1, 0.01, 5, &mut traj) };
    assert_eq!(s, LdStatus::Ok, "{}", last_error());
    let (mut n, mut aborted) = (0, -1);
    unsafe {
        assert_eq!(ld_trajectory_len(traj, &mut n), LdStatus::Ok);
        assert_eq!(ld_trajectory_aborted(traj, &mut aborted), LdStatus::Ok);
    }
    assert_eq!(aborted, 0);
    assert_eq!(n, 3);
    let mut t = 0.0;
    assert_eq!(unsafe { ld_trajectory_time(traj, n - 1, &mut t) }, LdStatus::Ok);
    assert!((t - 0.1).abs() < 1e-12);

    let mut len = 0;
    assert_eq!(unsafe { ld_field_len(f, &mut len) }, LdStatus::Ok);
    let mut init = vec![0.0; len];
    let mut last = vec![0.0; len];
    unsafe {
        assert_eq!(ld_field_copy_values(f, init.as_mut_ptr(), len), LdStatus::Ok);
        assert_eq!(ld_trajectory_copy_snapshot(traj, n - 1, last.as_mut_ptr(), len), LdStatus::Ok);
        assert_eq!(ld_trajectory_time(traj, n, &mut t), LdStatus::InvalidArgument);
    }
    // (2t + 1) h is reproduced exactly by the discrete flow
    for (a, b) in init.iter().zip(&last) {
        assert!((b / (1.2 * a) - 1.0).abs() < 1e-8);
    }
    unsafe {
        ld_trajectory_free(traj);
        ld_field_free(f);
    }
}

#[test]
fn verify_json_returns_reports() {
    let check = CString::new("metric").unwrap();
    let mut json = ptr::null_mut();
    let mut pass = -1;
    let s = unsafe { ld_verify_json(check.as_ptr(), ptr::null(), &mut json, &mut pass) };
    assert_eq!(s, LdStatus::Ok);
    assert_eq!(pass, 1);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { ld_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v.as_array().unwrap().iter().any(|r| r["name"] == "claim2_inequality"));
}

#[test]
fn verify_json_rejects_bad_config() {
    let check = CString::new("metric").unwrap();
    let cfg = CString::new(r#"{"bogus": 1}"#).unwrap();
    let mut json = ptr::null_mut();
    let mut pass = 0;
    let s = unsafe { ld_verify_json(check.as_ptr(), cfg.as_ptr(), &mut json, &mut pass) };
    assert_eq!(s, LdStatus::InvalidArgument);
    assert!(json.is_null());
    assert!(last_error().contains("bogus"));

    let unknown = CString::new("nope").unwrap();
    let s = unsafe { ld_verify_json(unknown.as_ptr(), ptr::null(), &mut json, &mut pass) };
    assert_eq!(s, LdStatus::InvalidArgument);
}

#[test]
fn header_is_generated_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/logdiff.h");
    let text = std::fs::read_to_string(&header).expect("build script writes the header");
    for sym in ["ld_solve_radial", "ld_verify_json", "LD_STATUS_SOLVER_FAILURE", "typedef struct LdField LdField"] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
    let dir = tempfile_dir();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        "#include \"logdiff.h\"\nint main(void) { double v; return ld_metric_eval(LD_METRIC_FULL, 0.0, 0.5, &v) == LD_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    match Command::new(&cc)
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
    {
        Ok(status) => assert!(status.success(), "C compiler rejected the header"),
        Err(_) => eprintln!("no C compiler found; skipped syntax check"),
    }
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("logdiff-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
