//! C ABI over kinelab: opaque scene handles, status codes and a
//! thread-local last-error message.
//!
//! Strings returned by the library are owned by the caller and released
//! with `kl_string_free`; scenes with `kl_scene_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use kinelab::invariants::{ball_volume, invariant_profile, sphere_volume};
use kinelab::sampling::{sub_seed, McEstimate};
use kinelab::scene_io::{emit_report, Format};
use kinelab::{parse_scene, verify_all, Config, Error};

/// Result of every fallible call; values 0–4 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KlStatus {
    Ok = 0,
    /// A verification law failed; the report is still produced.
    VerificationFailed = 1,
    InvalidInput = 2,
    Degenerate = 3,
    BudgetExceeded = 4,
    NullPointer = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Mean and standard error of one estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlEstimate {
    pub mean: f64,
    /// Standard error (named to avoid the C `stderr` macro).
    pub std_error: f64,
}

impl From<McEstimate> for KlEstimate {
    fn from(e: McEstimate) -> Self {
        KlEstimate { mean: e.mean, std_error: e.stderr }
    }
}

/// A parsed scene.
pub struct KlScene {
    scene: kinelab::Scene,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> KlStatus {
    match e.exit_code() {
        3 => KlStatus::Degenerate,
        4 => KlStatus::BudgetExceeded,
        _ => KlStatus::InvalidInput,
    }
}

enum Failure {
    Status(KlStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(KlStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting errors and panics into a status and the last-error message.
fn guard<F>(body: F) -> KlStatus
where
    F: FnOnce() -> Result<KlStatus, Failure>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(s)) => {
            set_error("");
            s
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal panic: {msg}"));
            KlStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(KlStatus::InvalidInput, format!("{what} is not valid UTF-8")))
}

unsafe fn scene_arg<'a>(p: *const KlScene) -> Result<&'a KlScene, Failure> {
    p.as_ref().ok_or_else(|| null("scene"))
}

/// Parses a scene document; on success `*out` owns a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kl_scene_from_json(json: *const c_char, out: *mut *mut KlScene) -> KlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = std::ptr::null_mut();
        let scene = parse_scene(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(KlScene { scene }));
        Ok(KlStatus::Ok)
    })
}

/// Releases a scene handle; null is ignored.
///
/// # Safety
/// `scene` must come from `kl_scene_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kl_scene_free(scene: *mut KlScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// # Safety
/// `scene` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kl_scene_ambient_dim(scene: *const KlScene, out: *mut usize) -> KlStatus {
    guard(|| {
        let s = scene_arg(scene)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.scene.ambient_dim;
        Ok(KlStatus::Ok)
    })
}

/// Invariant profile of one germ, seeded as the `invariants` command.
///
/// `sigma` and `lambda_lim` receive `n + 1` entries (index 0..=n),
/// `lambda_loc` receives `n` entries (Λ^loc_1..=Λ^loc_n), where `n` is the
/// ambient dimension; each buffer must hold at least `len` entries with
/// `len ≥ n + 1`. Any of the output pointers may be null to skip it.
///
/// # Safety
/// Non-null buffers must be valid for `len` writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn kl_invariants(
    scene: *const KlScene,
    germ: *const c_char,
    samples: u64,
    seed: u64,
    sigma: *mut KlEstimate,
    lambda_lim: *mut KlEstimate,
    lambda_loc: *mut KlEstimate,
    len: usize,
    density: *mut KlEstimate,
) -> KlStatus {
    guard(|| {
        let s = scene_arg(scene)?;
        let name = str_arg(germ, "germ")?;
        let x = s
            .scene
            .germs
            .get(name)
            .ok_or_else(|| Failure::Status(KlStatus::InvalidInput, format!("scene has no germ named '{name}'")))?;
        let n = x.ambient_dim();
        if len < n + 1 {
            return Err(Failure::Status(KlStatus::BufferTooSmall, format!("buffers need {} entries, got {len}", n + 1)));
        }
        if samples < 2 {
            return Err(Failure::Status(KlStatus::InvalidInput, "at least two samples are required".into()));
        }
        let p = invariant_profile(x, samples, sub_seed(seed, &format!("profile/{name}")), &Config::default())?;
        let write = |dst: *mut KlEstimate, values: Vec<KlEstimate>| {
            if !dst.is_null() {
                for (i, v) in values.into_iter().enumerate() {
                    *dst.add(i) = v;
                }
            }
        };
        write(sigma, p.sigma.iter().map(|&e| e.into()).collect());
        write(lambda_lim, (0..=n).map(|k| p.lambda_lim.component(k).into()).collect());
        write(lambda_loc, (0..n).map(|k| p.lambda_loc.component(k).into()).collect());
        if !density.is_null() {
            *density = p.density.into();
        }
        Ok(KlStatus::Ok)
    })
}

/// Runs every applicable law and returns the JSON report in `*out`
/// (release with `kl_string_free`). Returns `KL_STATUS_VERIFICATION_FAILED`
/// when any law fails; the report is written in that case too.
///
/// # Safety
/// `scene` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kl_verify_all_json(
    scene: *const KlScene,
    samples: u64,
    seed: u64,
    out: *mut *mut c_char,
) -> KlStatus {
    guard(|| {
        let s = scene_arg(scene)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = std::ptr::null_mut();
        if samples < 2 {
            return Err(Failure::Status(KlStatus::InvalidInput, "at least two samples are required".into()));
        }
        let report = verify_all(&s.scene, &Config::default(), samples, seed)?;
        let text = CString::new(emit_report(&report, Format::Json)).expect("JSON has no NUL");
        *out = text.into_raw();
        Ok(if report.any_fail() { KlStatus::VerificationFailed } else { KlStatus::Ok })
    })
}

/// Releases a string returned by the library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread (empty after a success).
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn kl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Volume of the unit sphere `S^k`.
#[no_mangle]
pub extern "C" fn kl_sphere_volume(k: usize) -> f64 {
    sphere_volume(k)
}

/// Volume of the unit ball `B^k`.
#[no_mangle]
pub extern "C" fn kl_ball_volume(k: usize) -> f64 {
    ball_volume(k)
}
