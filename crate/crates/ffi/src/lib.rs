//! C ABI over `logdiff-core`.
//!
//! Every entry point returns an [`LdStatus`]; results go through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`ld_last_error`]. Fields and trajectories are opaque handles owned by the
//! caller and released with their `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use logdiff_core::discretization::{lp_norm, sup_region};
use logdiff_core::exact::cigar_l1_mass;
use logdiff_core::harness::{run_check, ExperimentConfig};
use logdiff_core::report::reports_to_json;
use logdiff_core::solver;
use logdiff_core::{
    BoundaryStrategy, ConformalField, DiskPoint, Error, ExactSolution, FlowProblem, Grid, HyperbolicMetric,
    MobiusMap, RadialGrid, Region, Trajectory,
};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    SolverFailure = 4,
    Interpolation = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdMetric {
    /// `h`; the parameter is ignored.
    Full = 0,
    /// `h_ρ` with `ρ` = parameter.
    SubBall = 1,
    /// `h_a` with inner radius `a` = parameter.
    Annulus = 2,
    /// `h₀`; the parameter is ignored.
    Punctured = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdBoundary {
    /// `(2t + α) h`, α = parameter.
    Hyperbolic = 0,
    /// `(2t + 1) h_a`, a = parameter.
    Annulus = 1,
    /// Fixed value = parameter.
    Constant = 2,
    /// Trace of the scaled cigar, μ = parameter.
    CigarExact = 3,
}

/// Opaque sampled conformal factor on a radial grid.
pub struct LdField(ConformalField);

/// Opaque sequence of recorded snapshots.
pub struct LdTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LdStatus {
    match e {
        Error::Domain(_) => LdStatus::Domain,
        Error::InvalidInput(_) | Error::MissingBoundary { .. } | Error::Config(_) | Error::Json(_) => {
            LdStatus::InvalidArgument
        }
        Error::Interpolation { .. } => LdStatus::Interpolation,
        Error::NewtonFailure { .. } | Error::LinearSolve(_) => LdStatus::SolverFailure,
        Error::Internal(_) | Error::Io(_) => LdStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (LdStatus, String)>) -> LdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside logdiff".into());
            LdStatus::Internal
        }
    }
}

fn core<T>(r: logdiff_core::Result<T>) -> Result<T, (LdStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (LdStatus, String) {
    (LdStatus::NullPointer, format!("{name} is null"))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (LdStatus, String)> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, (LdStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

fn region(ball: f64) -> Region {
    if ball > 0.0 {
        Region::Ball(ball)
    } else {
        Region::Full
    }
}

fn radial(n: usize, eps: f64) -> Result<Arc<Grid>, (LdStatus, String)> {
    Ok(Arc::new(Grid::Radial(core(RadialGrid::new(n, eps))?)))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ld_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn ld_metric_eval(kind: LdMetric, param: f64, r: f64, value: *mut f64) -> LdStatus {
    guard(|| {
        let value = out(value, "value")?;
        let m = match kind {
            LdMetric::Full => HyperbolicMetric::FullDisk,
            LdMetric::SubBall => HyperbolicMetric::SubBall(param),
            LdMetric::Annulus => HyperbolicMetric::Annulus(param),
            LdMetric::Punctured => HyperbolicMetric::Punctured,
        };
        *value = core(m.eval_radius(r))?;
        Ok(())
    })
}

/// Applies `z ↦ e^{iθ}(z − a)/(1 − āz)` to `(x, y)` and reports `|φ′|²`.
#[no_mangle]
pub unsafe extern "C" fn ld_mobius_apply(
    a_re: f64,
    a_im: f64,
    theta: f64,
    x: f64,
    y: f64,
    out_x: *mut f64,
    out_y: *mut f64,
    out_jacobian: *mut f64,
) -> LdStatus {
    guard(|| {
        let (ox, oy, oj) = (out(out_x, "out_x")?, out(out_y, "out_y")?, out(out_jacobian, "out_jacobian")?);
        let m = core(MobiusMap::new(Complex64::new(a_re, a_im), theta))?;
        let (q, jac) = core(m.apply_xy(x, y))?;
        *ox = q.x;
        *oy = q.y;
        *oj = jac;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ld_exact_cigar_scaled(mu: f64, r: f64, t: f64, value: *mut f64) -> LdStatus {
    guard(|| {
        let value = out(value, "value")?;
        let sol = core(ExactSolution::cigar_scaled(mu))?;
        *value = core(sol.eval(core(DiskPoint::new(r, 0.0))?, t))?;
        Ok(())
    })
}

/// Mass of the scaled cigar in `B_r` at time `t`.
#[no_mangle]
pub unsafe extern "C" fn ld_cigar_l1_mass(mu: f64, t: f64, r: f64, value: *mut f64) -> LdStatus {
    guard(|| {
        *out(value, "value")? = core(cigar_l1_mass(mu, t, r))?;
        Ok(())
    })
}

/// Wraps `len` samples (interior nodes then the boundary node) on the radial
/// grid with `n` cells and rim offset `eps`.
#[no_mangle]
pub unsafe extern "C" fn ld_field_radial_from_values(
    n: usize,
    eps: f64,
    values: *const f64,
    len: usize,
    time: f64,
    field: *mut *mut LdField,
) -> LdStatus {
    guard(|| {
        let slot = out(field, "field")?;
        if values.is_null() {
            return Err(null("values"));
        }
        let grid = radial(n, eps)?;
        let v = slice::from_raw_parts(values, len).to_vec();
        let f = core(ConformalField::new(grid, v, time))?;
        *slot = Box::into_raw(Box::new(LdField(f)));
        Ok(())
    })
}

/// Samples `(2t + α) h` on a radial grid.
#[no_mangle]
pub unsafe extern "C" fn ld_field_hyperbolic(
    n: usize,
    eps: f64,
    alpha: f64,
    t: f64,
    field: *mut *mut LdField,
) -> LdStatus {
    guard(|| {
        let slot = out(field, "field")?;
        let sol = core(ExactSolution::hyperbolic(alpha, 1.0))?;
        let f = core(sol.sample(radial(n, eps)?, t))?;
        *slot = Box::into_raw(Box::new(LdField(f)));
        Ok(())
    })
}

/// Samples the scaled cigar on a radial grid.
#[no_mangle]
pub unsafe extern "C" fn ld_field_cigar(n: usize, eps: f64, mu: f64, t: f64, field: *mut *mut LdField) -> LdStatus {
    guard(|| {
        let slot = out(field, "field")?;
        let sol = core(ExactSolution::cigar_scaled(mu))?;
        let f = core(sol.sample(radial(n, eps)?, t))?;
        *slot = Box::into_raw(Box::new(LdField(f)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ld_field_len(field: *const LdField, len: *mut usize) -> LdStatus {
    guard(|| {
        *out(len, "len")? = handle(field, "field")?.0.len();
        Ok(())
    })
}

/// Copies the samples into `buf`, which must hold at least `ld_field_len`
/// values.
#[no_mangle]
pub unsafe extern "C" fn ld_field_copy_values(field: *const LdField, buf: *mut f64, cap: usize) -> LdStatus {
    guard(|| {
        let f = &handle(field, "field")?.0;
        copy_out(f.values(), buf, cap)
    })
}

/// Radius of node `i`.
#[no_mangle]
pub unsafe extern "C" fn ld_field_node_radius(field: *const LdField, i: usize, r: *mut f64) -> LdStatus {
    guard(|| {
        let f = &handle(field, "field")?.0;
        let r = out(r, "r")?;
        if i >= f.len() {
            return Err((LdStatus::InvalidArgument, format!("node {i} out of range 0..{}", f.len())));
        }
        *r = f.grid().radius(i);
        Ok(())
    })
}

/// `L^p` norm over `B_ball`, or over the whole grid when `ball <= 0`.
#[no_mangle]
pub unsafe extern "C" fn ld_lp_norm(field: *const LdField, p: f64, ball: f64, value: *mut f64) -> LdStatus {
    guard(|| {
        let f = &handle(field, "field")?.0;
        *out(value, "value")? = core(lp_norm(f.grid(), f.values(), p, region(ball)))?;
        Ok(())
    })
}

/// Largest sample in `B_ball`, or over the whole grid when `ball <= 0`.
#[no_mangle]
pub unsafe extern "C" fn ld_sup_region(field: *const LdField, ball: f64, value: *mut f64) -> LdStatus {
    guard(|| {
        let f = &handle(field, "field")?.0;
        *out(value, "value")? = core(sup_region(f.grid(), f.values(), region(ball)))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ld_field_free(field: *mut LdField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Runs the flow from `initial` to `t_end`. A run that stops early still
/// yields a trajectory; check it with [`ld_trajectory_aborted`].
#[no_mangle]
pub unsafe extern "C" fn ld_solve_radial(
    initial: *const LdField,
    boundary: LdBoundary,
    param: f64,
    t_end: f64,
    dt: f64,
    record_every: usize,
    trajectory: *mut *mut LdTrajectory,
) -> LdStatus {
    guard(|| {
        let u0 = handle(initial, "initial")?.0.clone();
        let slot = out(trajectory, "trajectory")?;
        let bc = match boundary {
            LdBoundary::Hyperbolic => BoundaryStrategy::HyperbolicTrace { alpha: param },
            LdBoundary::Annulus => BoundaryStrategy::AnnulusTrace { a: param },
            LdBoundary::Constant => BoundaryStrategy::Constant(param),
            LdBoundary::CigarExact => BoundaryStrategy::ExactTrace(core(ExactSolution::cigar_scaled(param))?),
        };
        let problem = FlowProblem::new(u0, bc, t_end, dt).with_record_every(record_every.max(1));
        let traj = core(solver::solve(&problem))?;
        *slot = Box::into_raw(Box::new(LdTrajectory(traj)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ld_trajectory_len(traj: *const LdTrajectory, len: *mut usize) -> LdStatus {
    guard(|| {
        *out(len, "len")? = handle(traj, "trajectory")?.0.snapshots.len();
        Ok(())
    })
}

/// 1 if the run stopped before `t_end`, else 0.
#[no_mangle]
pub unsafe extern "C" fn ld_trajectory_aborted(traj: *const LdTrajectory, aborted: *mut i32) -> LdStatus {
    guard(|| {
        *out(aborted, "aborted")? = i32::from(handle(traj, "trajectory")?.0.aborted.is_some());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ld_trajectory_time(traj: *const LdTrajectory, i: usize, t: *mut f64) -> LdStatus {
    guard(|| {
        let snap = snapshot(&handle(traj, "trajectory")?.0, i)?;
        *out(t, "t")? = snap.time();
        Ok(())
    })
}

/// Copies snapshot `i` into `buf` (at least as many values as the initial
/// field).
#[no_mangle]
pub unsafe extern "C" fn ld_trajectory_copy_snapshot(
    traj: *const LdTrajectory,
    i: usize,
    buf: *mut f64,
    cap: usize,
) -> LdStatus {
    guard(|| {
        let snap = snapshot(&handle(traj, "trajectory")?.0, i)?;
        copy_out(snap.values(), buf, cap)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ld_trajectory_free(traj: *mut LdTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Runs the named check with an optional JSON config (null for defaults)
/// and returns the JSON report array in `*json`, to be released with
/// [`ld_string_free`]. `*all_pass` is 1 when every report passed.
#[no_mangle]
pub unsafe extern "C" fn ld_verify_json(
    check: *const c_char,
    config_json: *const c_char,
    json: *mut *mut c_char,
    all_pass: *mut i32,
) -> LdStatus {
    guard(|| {
        let slot = out(json, "json")?;
        let pass = out(all_pass, "all_pass")?;
        let name = str_arg(check, "check")?;
        let cfg = if config_json.is_null() {
            ExperimentConfig::default()
        } else {
            let text = str_arg(config_json, "config_json")?;
            serde_json::from_str(text).map_err(|e| (LdStatus::InvalidArgument, format!("config: {e}")))?
        };
        let reports = core(run_check(name, &cfg))?;
        let text = reports_to_json(&reports).map_err(|e| (LdStatus::Internal, e.to_string()))?;
        *pass = i32::from(reports.iter().all(|r| r.pass));
        *slot = CString::new(text).map_err(|e| (LdStatus::Internal, e.to_string()))?.into_raw();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ld_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (LdStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (LdStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

fn snapshot(t: &Trajectory, i: usize) -> Result<&ConformalField, (LdStatus, String)> {
    t.snapshots.get(i).ok_or_else(|| {
        (
            LdStatus::InvalidArgument,
            format!("snapshot {i} out of range 0..{}", t.snapshots.len()),
        )
    })
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, cap: usize) -> Result<(), (LdStatus, String)> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if cap < src.len() {
        return Err((LdStatus::InvalidArgument, format!("buffer holds {cap}, need {}", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}
