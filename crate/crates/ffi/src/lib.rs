//! C ABI over `rmhd_sonic`.
//!
//! Every object crosses the boundary as an opaque handle created by a `*_new`-style
//! constructor and released by its `*_free`. Every fallible call returns an
//! [`RmhdStatus`]; on failure the message is kept per thread and read back with
//! [`rmhd_last_error`]. Panics never unwind into the caller: they are caught and
//! reported as [`RmhdStatus::Panic`].
//!
//! Array outputs follow one convention: the caller passes a buffer and its capacity
//! in elements, the callee stores the required count in `*written` and returns
//! [`RmhdStatus::BufferTooSmall`] without writing when the capacity is short. A null
//! buffer with zero capacity is the size query.

use rmhd_sonic::boundary::HodographBoundary;
use rmhd_sonic::cli::RunConfig;
use rmhd_sonic::hodograph_solver::{solve_auto, Solution, WzField};
use rmhd_sonic::physical_recovery::{physical_lattice, ForwardMap, OdeOptions};
use rmhd_sonic::thermo::ThermoTable;
use rmhd_sonic::verify::run_suite;
use rmhd_sonic::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmhdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    /// Configuration or boundary data rejected.
    Config = 4,
    /// Quadrature, root finding or table range failure.
    Numerical = 5,
    /// The hodograph iteration found no admissible step or did not converge.
    Solver = 6,
    Verify = 7,
    Io = 8,
    Panic = 9,
}

/// Run configuration.
pub struct RmhdConfig(RunConfig);

/// Thermodynamic table in the hodograph variable `t = cos(omega)`.
pub struct RmhdTable(ThermoTable);

/// Converged hodograph solution with its boundary data; the forward map used by
/// [`rmhd_solution_invert`] is built on first use.
pub struct RmhdSolution {
    cfg: RunConfig,
    hb: HodographBoundary,
    sol: Solution,
    field: WzField,
    forward: Option<ForwardMap>,
}

/// Flow state at one value of `t`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RmhdState {
    pub t: f64,
    pub varpi: f64,
    pub rho: f64,
    pub p: f64,
    pub n: f64,
    pub w: f64,
    pub q: f64,
    pub mach: f64,
    pub f_cap: f64,
}

/// Summary of a solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RmhdSolveInfo {
    pub delta: f64,
    pub n_v: usize,
    pub n_chi: usize,
    pub iterations: usize,
    pub ratio_fit: f64,
    pub m_hat: f64,
    /// `theta^` at the two ends of the sonic curve.
    pub r1: f64,
    pub r2: f64,
    pub t0: f64,
}

/// Physical-plane fields at one point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RmhdRecord {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub q: f64,
    pub mach: f64,
}

/// Graded acceptance criterion.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RmhdVerdict {
    pub criterion: u8,
    pub pass: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RmhdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Config(_) | Error::Condition { .. } | Error::Hypothesis(_) | Error::Corner(_) => RmhdStatus::Config,
            Error::Domain(_) | Error::NoConvergence { .. } | Error::Positivity(_) => RmhdStatus::Solver,
            Error::Verify(_) => RmhdStatus::Verify,
            Error::Io(_) => RmhdStatus::Io,
            _ => RmhdStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn null() -> Failure {
    Failure(RmhdStatus::NullPointer, "null pointer argument".into())
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, records its failure and converts a panic into a status.
fn guard(f: impl FnOnce() -> Outcome) -> RmhdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RmhdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            RmhdStatus::Panic
        }
    }
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn handle_mut<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

unsafe fn put<T>(out: *mut T, v: T) -> Outcome {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

/// Writes `items` to `(buf, cap)` under the array-output convention.
unsafe fn put_slice<T: Copy>(items: &[T], buf: *mut T, cap: usize, written: *mut usize) -> Outcome {
    put(written, items.len())?;
    if cap < items.len() {
        return Err(Failure(RmhdStatus::BufferTooSmall, format!("need {} elements, capacity {cap}", items.len())));
    }
    if items.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null());
    }
    std::ptr::copy_nonoverlapping(items.as_ptr(), buf, items.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rmhd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null when there was none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rmhd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Forgets the last error of this thread.
#[no_mangle]
pub extern "C" fn rmhd_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// The canonical configuration.
///
/// # Safety
/// `out` must be valid for one pointer write. Release the handle with
/// [`rmhd_config_free`].
#[no_mangle]
pub unsafe extern "C" fn rmhd_config_canonical(out: *mut *mut RmhdConfig) -> RmhdStatus {
    guard(|| put(out, Box::into_raw(Box::new(RmhdConfig(RunConfig::canonical())))))
}

/// Parses and checks a TOML configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn rmhd_config_from_toml(toml: *const c_char, out: *mut *mut RmhdConfig) -> RmhdStatus {
    guard(|| {
        if toml.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|e| Failure(RmhdStatus::InvalidArgument, format!("configuration is not UTF-8: {e}")))?;
        let cfg = RunConfig::from_toml(text)?;
        put(out, Box::into_raw(Box::new(RmhdConfig(cfg))))
    })
}

/// Overrides the solver grid.
///
/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn rmhd_config_set_grid(cfg: *mut RmhdConfig, n_v: usize, n_chi: usize) -> RmhdStatus {
    guard(|| {
        let c = &mut handle_mut(cfg)?.0;
        let old = (c.solver.n_v, c.solver.n_chi);
        (c.solver.n_v, c.solver.n_chi) = (n_v, n_chi);
        c.check().map_err(|e| {
            (c.solver.n_v, c.solver.n_chi) = old;
            Failure::from(e)
        })
    })
}

/// Overrides the field strength constant; zero is the unmagnetized gas.
///
/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn rmhd_config_set_kappa0(cfg: *mut RmhdConfig, kappa0: f64) -> RmhdStatus {
    guard(|| {
        let c = &mut handle_mut(cfg)?.0;
        let old = c.eos.kappa0;
        c.eos.kappa0 = kappa0;
        c.check().map_err(|e| {
            c.eos.kappa0 = old;
            Failure::from(e)
        })
    })
}

/// # Safety
/// `cfg` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rmhd_config_free(cfg: *mut RmhdConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Builds the thermodynamic table of a configuration.
///
/// # Safety
/// `cfg` must be a live configuration handle and `out` valid for one pointer write.
/// Release the table with [`rmhd_table_free`].
#[no_mangle]
pub unsafe extern "C" fn rmhd_table_build(cfg: *const RmhdConfig, out: *mut *mut RmhdTable) -> RmhdStatus {
    guard(|| {
        let table = handle(cfg)?.0.table()?;
        put(out, Box::into_raw(Box::new(RmhdTable(table))))
    })
}

/// State at `t` in `[0, t_max]`.
///
/// # Safety
/// `table` must be a live table handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rmhd_table_state(table: *const RmhdTable, t: f64, out: *mut RmhdState) -> RmhdStatus {
    guard(|| {
        let s = handle(table)?.0.state(t)?;
        put(out, RmhdState { t: s.t, varpi: s.varpi, rho: s.rho, p: s.p, n: s.n, w: s.w, q: s.q, mach: s.mach, f_cap: s.f_cap })
    })
}

/// Sonic density and Bernoulli constant.
///
/// # Safety
/// `table` must be a live table handle; `rho_star` and `bernoulli` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rmhd_table_sonic(table: *const RmhdTable, rho_star: *mut f64, bernoulli: *mut f64) -> RmhdStatus {
    guard(|| {
        let th = &handle(table)?.0.thermo;
        put(rho_star, th.rho_star)?;
        put(bernoulli, th.b)
    })
}

/// # Safety
/// `table` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rmhd_table_free(table: *mut RmhdTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Builds the boundary data and runs the hodograph solve, halving the strip width
/// when it is inadmissible.
///
/// # Safety
/// `cfg` must be a live configuration handle and `out` valid for one pointer write.
/// Release the solution with [`rmhd_solution_free`].
#[no_mangle]
pub unsafe extern "C" fn rmhd_solve(cfg: *const RmhdConfig, out: *mut *mut RmhdSolution) -> RmhdStatus {
    guard(|| {
        let cfg = handle(cfg)?.0.clone();
        let table = cfg.table()?;
        let hb = HodographBoundary::build(&cfg.boundary, &table)?;
        let s = &cfg.solver;
        let (sol, field, _) = solve_auto(&hb, s.delta, s.n_v, s.n_chi, &cfg.solve_options())?;
        put(out, Box::into_raw(Box::new(RmhdSolution { cfg, hb, sol, field, forward: None })))
    })
}

/// # Safety
/// `sol` must be a live solution handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rmhd_solution_info(sol: *const RmhdSolution, out: *mut RmhdSolveInfo) -> RmhdStatus {
    guard(|| {
        let s = handle(sol)?;
        let g = s.sol.grid;
        put(
            out,
            RmhdSolveInfo {
                delta: g.delta,
                n_v: g.n_v,
                n_chi: g.n_chi,
                iterations: s.sol.history.len(),
                ratio_fit: s.sol.ratio_fit,
                m_hat: s.sol.m_hat,
                r1: s.hb.r1,
                r2: s.hb.r2,
                t0: s.hb.t0,
            },
        )
    })
}

/// Riemann-type invariants `(W, Z)` at `(t, r)` inside the solved region.
///
/// # Safety
/// `sol` must be a live solution handle; `w` and `z` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn rmhd_solution_wz(sol: *const RmhdSolution, t: f64, r: f64, w: *mut f64, z: *mut f64) -> RmhdStatus {
    guard(|| {
        let (a, b) = handle(sol)?.field.wz(t, r)?;
        put(w, a)?;
        put(z, b)
    })
}

/// Node values as rows `(t, r, W, Z)`, flattened: `rows` receives `4 * count` doubles
/// and `cap` and `*written` count rows.
///
/// # Safety
/// `sol` must be a live solution handle, `rows` valid for `4 * cap` doubles (or null
/// with `cap = 0`) and `written` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rmhd_solution_field(sol: *const RmhdSolution, rows: *mut f64, cap: usize, written: *mut usize) -> RmhdStatus {
    guard(|| {
        let data = handle(sol)?.field.rows();
        put(written, data.len())?;
        if cap < data.len() {
            return Err(Failure(RmhdStatus::BufferTooSmall, format!("need {} rows, capacity {cap}", data.len())));
        }
        let flat: Vec<f64> = data.iter().flatten().copied().collect();
        let mut n = 0;
        put_slice(&flat, rows, 4 * cap, &mut n)
    })
}

/// Hodograph coordinates `(t, r)` of the physical point `(x, y)`.
///
/// # Safety
/// `sol` must be a live solution handle not used concurrently from another thread;
/// `t` and `r` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn rmhd_solution_invert(sol: *mut RmhdSolution, x: f64, y: f64, t: *mut f64, r: *mut f64) -> RmhdStatus {
    guard(|| {
        let s = handle_mut(sol)?;
        if s.forward.is_none() {
            let [n_t, n_chi] = s.cfg.recovery.forward;
            s.forward = Some(ForwardMap::build(&s.field, n_t, n_chi, ode_options(&s.cfg, &s.field))?);
        }
        let inv = s.forward.as_ref().expect("built above").invert(&s.field, x, y)?;
        put(t, inv.t)?;
        put(r, inv.r)
    })
}

fn ode_options(cfg: &RunConfig, field: &WzField) -> OdeOptions {
    let mut ode = OdeOptions::for_field(field);
    if let Some(h) = cfg.recovery.h_ode {
        ode.h_ode = h;
    }
    ode
}

/// Physical records on an `n_t` by `n_chi` lattice of the solved region.
///
/// # Safety
/// `sol` must be a live solution handle, `out` valid for `cap` records (or null with
/// `cap = 0`) and `written` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rmhd_solution_recover(
    sol: *const RmhdSolution,
    n_t: usize,
    n_chi: usize,
    out: *mut RmhdRecord,
    cap: usize,
    written: *mut usize,
) -> RmhdStatus {
    guard(|| {
        let s = handle(sol)?;
        if n_t < 2 || n_chi < 2 {
            return Err(Failure(RmhdStatus::InvalidArgument, format!("lattice {n_t}x{n_chi} needs at least 2x2")));
        }
        let recs: Vec<RmhdRecord> = physical_lattice(&s.field, n_t, n_chi, ode_options(&s.cfg, &s.field))?
            .iter()
            .map(|p| RmhdRecord { x: p.x, y: p.y, theta: p.theta, t: p.t, u: p.u, v: p.v, q: p.q, mach: p.mach })
            .collect();
        put_slice(&recs, out, cap, written)
    })
}

/// Runs the verification suite of the solution's configuration and reports the
/// graded criteria 1 to 7.
///
/// # Safety
/// `sol` must be a live solution handle, `out` valid for `cap` verdicts (or null with
/// `cap = 0`) and `written` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rmhd_solution_verify(sol: *const RmhdSolution, out: *mut RmhdVerdict, cap: usize, written: *mut usize) -> RmhdStatus {
    guard(|| {
        let s = handle(sol)?;
        if cap < 7 {
            return put_slice(&[RmhdVerdict::default(); 7], out, cap, written);
        }
        let suite = run_suite(&s.hb, &s.sol, &s.field, &s.cfg.solve_options(), &s.cfg.suite_options())?;
        let v: Vec<RmhdVerdict> = suite.verdicts().iter().map(|v| RmhdVerdict { criterion: v.criterion, pass: v.pass }).collect();
        put_slice(&v, out, cap, written)
    })
}

/// # Safety
/// `sol` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rmhd_solution_free(sol: *mut RmhdSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}
