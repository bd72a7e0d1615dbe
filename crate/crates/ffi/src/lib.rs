//! C interface to `pairdecay`.
//!
//! Every function returns a [`PdStatus`]; results go through out-pointers.
//! After a failure, [`pd_last_error`] returns a message for the calling
//! thread. Handles are opaque and must be released with their `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use pairdecay::cli::{parse_config, run_scenario};
use pairdecay::energyshell::{band_edges, bessel_j1, g_value, EnergyBand};
use pairdecay::imaging::thin_lens_conjugate;
use pairdecay::regime::{alignment_transition, RegimeInput};
use pairdecay::trajectories::{integrate_pair_strided, Trajectory};
use pairdecay::{reduced_mass, DecayParams, Error, PairState, PairWave, Vec3};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdStatus {
    Ok = 0,
    Domain = 1,
    Node = 2,
    UnsupportedVariant = 3,
    Resource = 4,
    EmptyImage = 5,
    Resolution = 6,
    Numeric = 7,
    Config = 8,
    Io = 9,
    NullPointer = 10,
    OutOfRange = 11,
    Panic = 12,
}

impl From<&Error> for PdStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => PdStatus::Domain,
            Error::Node { .. } => PdStatus::Node,
            Error::UnsupportedVariant(_) => PdStatus::UnsupportedVariant,
            Error::Resource(_) => PdStatus::Resource,
            Error::EmptyImage { .. } => PdStatus::EmptyImage,
            Error::Resolution(_) => PdStatus::Resolution,
            Error::Numeric(_) => PdStatus::Numeric,
            Error::Config(_) => PdStatus::Config,
            Error::Io(_) => PdStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Internal failure: a library error or an FFI-level problem.
enum Fail {
    Lib(Error),
    Status(PdStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn null() -> Fail {
    Fail::Status(PdStatus::NullPointer, "null pointer argument".into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            PdStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(format!("{}: {e}", e.name()));
            PdStatus::from(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            PdStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(null)
}

unsafe fn vec3_in(p: *const f64) -> Result<Vec3, Fail> {
    if p.is_null() {
        return Err(null());
    }
    let s = std::slice::from_raw_parts(p, 3);
    Ok(Vec3::new(s[0], s[1], s[2]))
}

unsafe fn vec3_out(p: *mut f64, v: &Vec3) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null());
    }
    std::slice::from_raw_parts_mut(p, 3).copy_from_slice(v.as_slice());
    Ok(())
}

/// Message describing the last failure on this thread, or an empty string.
/// The pointer stays valid until the next call into the library from the
/// same thread.
#[no_mangle]
pub extern "C" fn pd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out_mu` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pd_reduced_mass(m1: f64, m2: f64, out_mu: *mut f64) -> PdStatus {
    guard(|| {
        *out(out_mu)? = reduced_mass(m1, m2)?;
        Ok(())
    })
}

/// Alignment range `R` in meters and time `T` in seconds for a source of
/// width `l0` meters and wavelength `wavelength` meters.
///
/// # Safety
/// Both out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pd_alignment_transition(
    l0: f64,
    wavelength: f64,
    out_t_seconds: *mut f64,
    out_r_meters: *mut f64,
) -> PdStatus {
    guard(|| {
        let (t, r) = (out(out_t_seconds)?, out(out_r_meters)?);
        let tr = alignment_transition(&RegimeInput::new(l0, wavelength)?);
        *t = tr.t_seconds;
        *r = tr.r_meters;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn pd_bessel_j1(x: f64) -> f64 {
    bessel_j1(x)
}

/// # Safety
/// Both out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pd_band_edges(
    e_plus: f64,
    e_minus: f64,
    mu: f64,
    out_a_plus: *mut f64,
    out_a_minus: *mut f64,
) -> PdStatus {
    guard(|| {
        let (ap, am) = (out(out_a_plus)?, out(out_a_minus)?);
        let e = band_edges(&EnergyBand::new(e_plus, e_minus, mu)?)?;
        *ap = e.a_plus;
        *am = e.a_minus;
        Ok(())
    })
}

/// Evaluates the band profile `g` at `n` radii.
///
/// # Safety
/// `xs` must point to `n` readable values and `out` to `n` writable ones.
#[no_mangle]
pub unsafe extern "C" fn pd_g_profile(
    e_plus: f64,
    e_minus: f64,
    mu: f64,
    xs: *const f64,
    n: usize,
    out_values: *mut f64,
) -> PdStatus {
    guard(|| {
        if n > 0 && (xs.is_null() || out_values.is_null()) {
            return Err(null());
        }
        let e = band_edges(&EnergyBand::new(e_plus, e_minus, mu)?)?;
        if n == 0 {
            return Ok(());
        }
        let xs = std::slice::from_raw_parts(xs, n);
        let dst = std::slice::from_raw_parts_mut(out_values, n);
        if xs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Domain("radii must be finite and non-negative".into()).into());
        }
        for (d, x) in dst.iter_mut().zip(xs) {
            *d = g_value(&e, *x);
        }
        Ok(())
    })
}

/// # Safety
/// Both out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pd_thin_lens_conjugate(
    s: f64,
    f: f64,
    out_s_prime: *mut f64,
    out_virtual: *mut bool,
) -> PdStatus {
    guard(|| {
        let (sp, v) = (out(out_s_prime)?, out(out_virtual)?);
        let c = thin_lens_conjugate(s, f)?;
        *sp = c.s_prime;
        *v = c.virtual_image;
        Ok(())
    })
}

/// Pair wavefunction; `sigma = 0` selects the limit form.
pub struct PdPairWave(PairWave);

/// # Safety
/// `out_wave` must be valid for writes. The handle must be released with
/// [`pd_pair_wave_free`].
#[no_mangle]
pub unsafe extern "C" fn pd_pair_wave_new(
    m1: f64,
    m2: f64,
    alpha: f64,
    sigma: f64,
    out_wave: *mut *mut PdPairWave,
) -> PdStatus {
    guard(|| {
        let dst = out(out_wave)?;
        let wave = PairWave::new(DecayParams::new(m1, m2, alpha, sigma)?)?;
        *dst = Box::into_raw(Box::new(PdPairWave(wave)));
        Ok(())
    })
}

/// # Safety
/// `wave` must come from [`pd_pair_wave_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pd_pair_wave_free(wave: *mut PdPairWave) {
    if !wave.is_null() {
        drop(Box::from_raw(wave));
    }
}

/// # Safety
/// `r1`, `r2` point to 3 values each; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn pd_pair_wave_eval(
    wave: *const PdPairWave,
    r1: *const f64,
    r2: *const f64,
    t: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> PdStatus {
    guard(|| {
        let w = wave.as_ref().ok_or_else(null)?;
        let state = PairState::new(vec3_in(r1)?, vec3_in(r2)?, t);
        let (re, im) = (out(out_re)?, out(out_im)?);
        let psi = w.0.eval(&state);
        *re = psi.re;
        *im = psi.im;
        Ok(())
    })
}

/// Guidance velocities of both particles.
///
/// # Safety
/// `r1`, `r2`, `out_v1`, `out_v2` point to 3 values each.
#[no_mangle]
pub unsafe extern "C" fn pd_pair_wave_velocity(
    wave: *const PdPairWave,
    r1: *const f64,
    r2: *const f64,
    t: f64,
    out_v1: *mut f64,
    out_v2: *mut f64,
) -> PdStatus {
    guard(|| {
        let w = wave.as_ref().ok_or_else(null)?;
        let state = PairState::new(vec3_in(r1)?, vec3_in(r2)?, t);
        let (v1, v2) = w.0.velocity(&state)?;
        vec3_out(out_v1, &v1)?;
        vec3_out(out_v2, &v2)
    })
}

/// Integrated pair trajectory.
pub struct PdTrajectory(Trajectory);

/// RK4 trajectory from `(r1, r2)` at `t = 0` to `t_end`, keeping every
/// `stride`-th step.
///
/// # Safety
/// `r1`, `r2` point to 3 values each; `out_traj` must be writable. The
/// handle must be released with [`pd_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn pd_trajectory_integrate(
    wave: *const PdPairWave,
    r1: *const f64,
    r2: *const f64,
    t_end: f64,
    dt: f64,
    stride: usize,
    out_traj: *mut *mut PdTrajectory,
) -> PdStatus {
    guard(|| {
        let w = wave.as_ref().ok_or_else(null)?;
        let dst = out(out_traj)?;
        let start = PairState::new(vec3_in(r1)?, vec3_in(r2)?, 0.0);
        let traj = integrate_pair_strided(&w.0, &start, t_end, dt, stride)?;
        *dst = Box::into_raw(Box::new(PdTrajectory(traj)));
        Ok(())
    })
}

/// Number of stored samples, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pd_trajectory_len(traj: *const PdTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// # Safety
/// `traj` must be a live handle; `out_r1`, `out_r2` point to 3 writable
/// values each.
#[no_mangle]
pub unsafe extern "C" fn pd_trajectory_sample(
    traj: *const PdTrajectory,
    index: usize,
    out_t: *mut f64,
    out_r1: *mut f64,
    out_r2: *mut f64,
) -> PdStatus {
    guard(|| {
        let tr = traj.as_ref().ok_or_else(null)?;
        let s = tr.0.states.get(index).ok_or_else(|| {
            Fail::Status(
                PdStatus::OutOfRange,
                format!("index {index} out of range for {} samples", tr.0.len()),
            )
        })?;
        *out(out_t)? = s.t;
        vec3_out(out_r1, &s.r1)?;
        vec3_out(out_r2, &s.r2)
    })
}

/// # Safety
/// `traj` must come from [`pd_trajectory_integrate`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn pd_trajectory_free(traj: *mut PdTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Runs a scenario given as TOML text. `out_dir` may be null to use the
/// directory named in the text. On success `*out_files` (if not null)
/// receives the number of files written.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; `out_dir` null or one.
#[no_mangle]
pub unsafe extern "C" fn pd_run_scenario(
    config_toml: *const c_char,
    out_dir: *const c_char,
    out_files: *mut usize,
) -> PdStatus {
    guard(|| {
        if config_toml.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(config_toml)
            .to_str()
            .map_err(|_| Error::Config("config is not valid UTF-8".into()))?;
        let mut config = parse_config(text)?;
        if !out_dir.is_null() {
            let dir = CStr::from_ptr(out_dir)
                .to_str()
                .map_err(|_| Error::Config("out_dir is not valid UTF-8".into()))?;
            config.out_dir = PathBuf::from(dir);
        }
        let report = run_scenario(&config)?;
        if let Some(n) = out_files.as_mut() {
            *n = report.files_written.len();
        }
        Ok(())
    })
}
