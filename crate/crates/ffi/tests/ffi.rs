use std::ffi::{CStr, CString};
use std::ptr;

use kinelab_ffi::*;

const QUADRANT: &str = r#"{"ambient_dim":2,"germs":{"X":{"cones":[{"generators":[[1,0],[0,1]]}]}}}"#;
const QUADRANT_LINE: &str = r#"{"ambient_dim":2,"germs":{
    "X":{"cones":[{"generators":[[1,0],[0,1]]}]},
    "Y":{"type":"flat","dim":1,"basis":[[1,0]]}}}"#;

fn last_error() -> String {
    unsafe { CStr::from_ptr(kl_last_error()) }.to_str().unwrap().to_string()
}

fn scene(json: &str) -> *mut KlScene {
    let text = CString::new(json).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { kl_scene_from_json(text.as_ptr(), &mut s) }, KlStatus::Ok);
    assert!(!s.is_null());
    s
}

#[test]
fn scene_lifecycle() {
    let s = scene(QUADRANT);
    let mut n = 0usize;
    assert_eq!(unsafe { kl_scene_ambient_dim(s, &mut n) }, KlStatus::Ok);
    assert_eq!(n, 2);
    assert_eq!(last_error(), "");
    unsafe { kl_scene_free(s) };
    unsafe { kl_scene_free(ptr::null_mut()) };
}

#[test]
fn invalid_scene_reports_location() {
    let text = CString::new(r#"{"ambient_dim":2,"germs":{"X":{"cones":[{"generators":[[1,0],[2,0]]}]}}}"#).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { kl_scene_from_json(text.as_ptr(), &mut s) }, KlStatus::InvalidInput);
    assert!(s.is_null());
    assert!(last_error().contains("germs.X.cones[0]"));
}

#[test]
fn null_pointers_are_rejected() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { kl_scene_from_json(ptr::null(), &mut s) }, KlStatus::NullPointer);
    assert!(last_error().contains("json"));
    let text = CString::new(QUADRANT).unwrap();
    assert_eq!(unsafe { kl_scene_from_json(text.as_ptr(), ptr::null_mut()) }, KlStatus::NullPointer);
    let mut n = 0usize;
    assert_eq!(unsafe { kl_scene_ambient_dim(ptr::null(), &mut n) }, KlStatus::NullPointer);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { kl_verify_all_json(ptr::null(), 100, 0, &mut out) }, KlStatus::NullPointer);
}

#[test]
fn quadrant_invariants() {
    let s = scene(QUADRANT);
    let germ = CString::new("X").unwrap();
    let zero = KlEstimate { mean: f64::NAN, std_error: f64::NAN };
    let (mut sigma, mut lim, mut loc, mut theta) = ([zero; 3], [zero; 3], [zero; 3], zero);
    let status = unsafe {
        kl_invariants(s, germ.as_ptr(), 8000, 42, sigma.as_mut_ptr(), lim.as_mut_ptr(), loc.as_mut_ptr(), 3, &mut theta)
    };
    assert_eq!(status, KlStatus::Ok, "{}", last_error());
    let close = |e: KlEstimate, want: f64| assert!((e.mean - want).abs() <= (3.0 * e.std_error).max(0.02), "{e:?} vs {want}");
    close(sigma[0], 1.0);
    close(sigma[1], 0.75);
    close(sigma[2], 0.25);
    close(lim[0], 0.25);
    close(lim[1], 0.5);
    close(lim[2], 0.25);
    close(theta, 0.25);
    assert!(loc[0].mean.is_finite() && loc[1].mean.is_finite());
    assert!(loc[2].mean.is_nan());

    let mut short = [zero; 2];
    let status = unsafe {
        kl_invariants(s, germ.as_ptr(), 100, 42, short.as_mut_ptr(), ptr::null_mut(), ptr::null_mut(), 2, ptr::null_mut())
    };
    assert_eq!(status, KlStatus::BufferTooSmall);
    let missing = CString::new("Z").unwrap();
    let status = unsafe {
        kl_invariants(s, missing.as_ptr(), 100, 42, ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), 3, ptr::null_mut())
    };
    assert_eq!(status, KlStatus::InvalidInput);
    assert!(last_error().contains("'Z'"));
    unsafe { kl_scene_free(s) };
}

#[test]
fn invariants_match_library_seeding() {
    let s = scene(QUADRANT);
    let germ = CString::new("X").unwrap();
    let mut sigma = [KlEstimate { mean: 0.0, std_error: 0.0 }; 3];
    unsafe {
        kl_invariants(s, germ.as_ptr(), 500, 7, sigma.as_mut_ptr(), ptr::null_mut(), ptr::null_mut(), 3, ptr::null_mut())
    };
    let lib = kinelab::parse_scene(QUADRANT).unwrap();
    let p = kinelab::invariants::invariant_profile(
        &lib.germs["X"],
        500,
        kinelab::sampling::sub_seed(7, "profile/X"),
        &kinelab::Config::default(),
    )
    .unwrap();
    assert_eq!(sigma[1].mean, p.sigma[1].mean);
    unsafe { kl_scene_free(s) };
}

#[test]
fn verify_all_report() {
    let s = scene(QUADRANT_LINE);
    let mut out = ptr::null_mut();
    let status = unsafe { kl_verify_all_json(s, 2000, 42, &mut out) };
    assert_eq!(status, KlStatus::Ok, "{}", last_error());
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
    unsafe { kl_string_free(out) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["entries"].as_array().unwrap().iter().any(|e| e["law"] == "thm8.15"));
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { kl_verify_all_json(s, 1, 42, &mut out) }, KlStatus::InvalidInput);
    assert!(out.is_null());
    unsafe { kl_scene_free(s) };
}

#[test]
fn sphere_constants() {
    assert!((kl_sphere_volume(1) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!((kl_sphere_volume(2) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!((kl_ball_volume(2) - std::f64::consts::PI).abs() < 1e-12);
    assert!((kl_ball_volume(0) - 1.0).abs() < 1e-12);
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/kinelab.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["kl_scene_from_json", "kl_scene_free", "kl_invariants", "kl_verify_all_json", "kl_last_error", "KL_STATUS_OK"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = std::env::temp_dir().join(format!("kinelab-header-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include <stdio.h>\n#include \"{header}\"\nint main(void) {{ KlScene *s = 0; KlEstimate e; e.std_error = 0; \
             KlStatus st = kl_scene_from_json(\"{{}}\", &s); kl_scene_free(s); return st == KL_STATUS_OK ? (int)e.std_error : 1; }}\n"
        ),
    )
    .unwrap();
    let o = std::process::Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).output().unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
