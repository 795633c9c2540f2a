//! C ABI for `monopole-core`.
//!
//! Every entry point returns a [`MonopoleStatus`]; results go through out-pointers.
//! Objects are opaque handles created by `*_new` functions and released by the matching `*_free`.
//! After a failure, [`monopole_last_error`] copies a message for the calling thread.

use monopole_core::es_solver::{self, ESData};
use monopole_core::nahm_flow::{self, FlowConfig, NahmSample};
use monopole_core::riemann_theta::{PeriodMatrixTau, ThetaCharacteristic, ThetaEvaluator};
use monopole_core::scalar_special::{self, ToleranceConfig};
use monopole_core::trigonal_curve::{self, PeriodData, SymmetricCurve};
use monopole_core::{linalg, Error, C64};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonopoleStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Inadmissible = 3,
    /// Interior theta zeros: the curve is not a monopole curve.
    VerdictNegative = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MonopoleComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for MonopoleComplex {
    fn from(z: C64) -> Self {
        MonopoleComplex { re: z.re, im: z.im }
    }
}

impl From<MonopoleComplex> for C64 {
    fn from(z: MonopoleComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Plain copy of the solved winding data.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MonopoleEsSummary {
    pub n1: i64,
    pub m1: i64,
    pub t: f64,
    pub b: f64,
    pub alpha: f64,
    pub chi: f64,
    pub chi_cuberoot: f64,
    pub xi: f64,
    pub d: i64,
    pub n: [i64; 4],
    pub m: [i64; 4],
}

/// Solved winding data.
pub struct MonopoleEs(ESData);

/// Periods and period matrices of one curve.
pub struct MonopolePeriods(PeriodData);

/// Nahm triple sampled on a grid.
pub struct MonopoleNahm(NahmSample);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MonopoleStatus {
    match e {
        Error::Inadmissible { .. } => MonopoleStatus::Inadmissible,
        Error::Domain(_) | Error::Dimension(_) => MonopoleStatus::InvalidArgument,
        _ => MonopoleStatus::Numerical,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Core(Error),
    Verdict(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MonopoleStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MonopoleStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            MonopoleStatus::NullPointer
        }
        Ok(Err(Fail::Arg(m))) => {
            set_error(m);
            MonopoleStatus::InvalidArgument
        }
        Ok(Err(Fail::Verdict(m))) => {
            set_error(m);
            MonopoleStatus::VerdictNegative
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            MonopoleStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

/// Copy the calling thread's last error message into `buf` (NUL terminated, truncated to `len`).
/// Returns the full message length without the terminator, or 0 if there is none.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn monopole_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Static NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn monopole_status_name(status: MonopoleStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        MonopoleStatus::Ok => b"ok\0",
        MonopoleStatus::NullPointer => b"null pointer\0",
        MonopoleStatus::InvalidArgument => b"invalid argument\0",
        MonopoleStatus::Inadmissible => b"inadmissible winding data\0",
        MonopoleStatus::VerdictNegative => b"negative verdict\0",
        MonopoleStatus::Numerical => b"numerical failure\0",
        MonopoleStatus::Panic => b"panic\0",
    };
    s.as_ptr() as *const c_char
}

/// Gauss hypergeometric function `2F1(a, b; c; z)`.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn monopole_hyp2f1(
    a: MonopoleComplex,
    b: MonopoleComplex,
    c: MonopoleComplex,
    z: MonopoleComplex,
    result: *mut MonopoleComplex,
) -> MonopoleStatus {
    guard(|| {
        let r = out(result, "result")?;
        *r = scalar_special::hyp2f1(a.into(), b.into(), c.into(), z.into(), cfg())?.into();
        Ok(())
    })
}

/// Theta function with characteristic `[a/den, b/den]` for a genus-`g` period matrix
/// given row-major in `tau` (`g * g` entries).
///
/// # Safety
/// `tau` must hold `g * g` values, `z`, `a`, `b` must hold `g` values (`a`, `b` may be null for zero), `result` valid.
#[no_mangle]
pub unsafe extern "C" fn monopole_theta(
    g: usize,
    tau: *const MonopoleComplex,
    z: *const MonopoleComplex,
    a: *const i64,
    b: *const i64,
    den: i64,
    result: *mut MonopoleComplex,
) -> MonopoleStatus {
    guard(|| {
        if g == 0 || g > 4 {
            return Err(Fail::Arg(format!("genus {g} outside 1..4")));
        }
        let t = slice(tau, g * g, "tau")?;
        let zs = slice(z, g, "z")?;
        let r = out(result, "result")?;
        let rows: Vec<Vec<C64>> = (0..g).map(|i| (0..g).map(|j| t[i * g + j].into()).collect()).collect();
        let tau = PeriodMatrixTau::new(linalg::from_rows(&rows))?;
        let zero = vec![0i64; g];
        let av = if a.is_null() { &zero[..] } else { slice(a, g, "a")? };
        let bv = if b.is_null() { &zero[..] } else { slice(b, g, "b")? };
        let ch = ThetaCharacteristic::from_ints(av, bv, den.max(1))?;
        let zc: Vec<C64> = zs.iter().map(|&w| w.into()).collect();
        *r = ThetaEvaluator::new(&tau, &cfg())?.eval(&zc, &ch, &[])?.into();
        Ok(())
    })
}

/// Solve the Ercolani-Sinha constraints for `(n1, m1)`.
///
/// # Safety
/// `handle` must be a valid pointer; on success it receives a handle to free with [`monopole_es_free`].
#[no_mangle]
pub unsafe extern "C" fn monopole_es_new(n1: i64, m1: i64, handle: *mut *mut MonopoleEs) -> MonopoleStatus {
    guard(|| {
        let h = out(handle, "handle")?;
        *h = std::ptr::null_mut();
        let es = es_solver::solve(n1, m1, &cfg())?;
        *h = Box::into_raw(Box::new(MonopoleEs(es)));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`monopole_es_new`] (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn monopole_es_free(handle: *mut MonopoleEs) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` and `summary` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn monopole_es_summary(handle: *const MonopoleEs, summary: *mut MonopoleEsSummary) -> MonopoleStatus {
    guard(|| {
        let es = &deref(handle, "handle")?.0;
        let s = out(summary, "summary")?;
        *s = MonopoleEsSummary {
            n1: es.n1,
            m1: es.m1,
            t: es.t,
            b: es.b,
            alpha: es.alpha,
            chi: es.chi,
            chi_cuberoot: es.chi_cuberoot,
            xi: es.xi,
            d: es.d,
            n: es.n,
            m: es.m,
        };
        Ok(())
    })
}

/// Periods of `w^3 = z^6 + b z^3 - 1`.
///
/// # Safety
/// `handle` must be a valid pointer; free the result with [`monopole_periods_free`].
#[no_mangle]
pub unsafe extern "C" fn monopole_periods_new(b: f64, handle: *mut *mut MonopolePeriods) -> MonopoleStatus {
    guard(|| {
        let h = out(handle, "handle")?;
        *h = std::ptr::null_mut();
        if !b.is_finite() {
            return Err(Fail::Arg(format!("b = {b} is not finite")));
        }
        let p = trigonal_curve::periods_of(&SymmetricCurve::new(b)?, &cfg())?;
        *h = Box::into_raw(Box::new(MonopolePeriods(p)));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`monopole_periods_new`] (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn monopole_periods_free(handle: *mut MonopolePeriods) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Row-major 4x4 Riemann matrix `tau_b` into `tau` (16 entries).
///
/// # Safety
/// `handle` valid, `tau` valid for 16 values.
#[no_mangle]
pub unsafe extern "C" fn monopole_periods_tau(handle: *const MonopolePeriods, tau: *mut MonopoleComplex) -> MonopoleStatus {
    guard(|| {
        let p = &deref(handle, "handle")?.0;
        let dst = slice_mut(tau, 16, "tau")?;
        let m = p.tau_b.matrix();
        for i in 0..4 {
            for j in 0..4 {
                dst[i * 4 + j] = m[(i, j)].into();
            }
        }
        Ok(())
    })
}

/// Scalar `y . H x` of the period data.
///
/// # Safety
/// `handle` and `result` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn monopole_periods_legendre(handle: *const MonopolePeriods, result: *mut MonopoleComplex) -> MonopoleStatus {
    guard(|| {
        let p = &deref(handle, "handle")?.0;
        *out(result, "result")? = p.legendre_value().into();
        Ok(())
    })
}

/// Theta zero scan on `nodes` points of `s in [0, 2]`. Writes whether the interior is pole free
/// and the number of interior zeros.
///
/// # Safety
/// `es` valid; `pole_free` and `interior` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn monopole_zero_scan(es: *const MonopoleEs, nodes: usize, pole_free: *mut bool, interior: *mut usize) -> MonopoleStatus {
    guard(|| {
        let es = &deref(es, "es")?.0;
        let pf = out(pole_free, "pole_free")?;
        let ni = out(interior, "interior")?;
        if nodes < 3 {
            return Err(Fail::Arg(format!("{nodes} scan nodes, need at least 3")));
        }
        let p = trigonal_curve::periods_of(&es.curve(), &cfg())?;
        let grid: Vec<f64> = (0..nodes).map(|i| 2.0 * i as f64 / (nodes - 1) as f64).collect();
        let scan = nahm_flow::zero_scan(es, &p, &grid, &cfg())?;
        *pf = scan.pole_free;
        *ni = scan.interior.len();
        Ok(())
    })
}

fn flow_grid(zmax: f64, nodes: usize) -> Result<Vec<f64>, Fail> {
    if !(zmax > 0.0 && zmax < 1.0) || nodes < 2 {
        return Err(Fail::Arg(format!("grid zmax = {zmax}, nodes = {nodes}: need 0 < zmax < 1 and nodes >= 2")));
    }
    Ok(nahm_flow::symmetric_grid(zmax, nodes))
}

/// Charge-2 Nahm data for elliptic modulus `k` on a symmetric grid of `[-zmax, zmax]`.
///
/// # Safety
/// `handle` must be a valid pointer; free the result with [`monopole_nahm_free`].
#[no_mangle]
pub unsafe extern "C" fn monopole_nahm2_new(k: f64, zmax: f64, nodes: usize, handle: *mut *mut MonopoleNahm) -> MonopoleStatus {
    guard(|| {
        let h = out(handle, "handle")?;
        *h = std::ptr::null_mut();
        let grid = flow_grid(zmax, nodes)?;
        let r = nahm_flow::charge2_nahm(k, &grid, &cfg(), &FlowConfig::default())?;
        *h = Box::into_raw(Box::new(MonopoleNahm(r.flow)));
        Ok(())
    })
}

/// Charge-3 Nahm data for solved winding data. Returns `VerdictNegative` when `Q0` has interior poles.
/// `eps` holds the two gauge signs (null for `+1, +1`).
///
/// # Safety
/// `es` valid, `eps` null or valid for 2 values, `handle` valid; free the result with [`monopole_nahm_free`].
#[no_mangle]
pub unsafe extern "C" fn monopole_nahm3_new(
    es: *const MonopoleEs,
    eps: *const i64,
    zmax: f64,
    nodes: usize,
    handle: *mut *mut MonopoleNahm,
) -> MonopoleStatus {
    guard(|| {
        let es = &deref(es, "es")?.0;
        let h = out(handle, "handle")?;
        *h = std::ptr::null_mut();
        let eps = if eps.is_null() { vec![1, 1] } else { slice(eps, 2, "eps")?.to_vec() };
        let grid = flow_grid(zmax, nodes)?;
        let p = trigonal_curve::periods_of(&es.curve(), &cfg())?;
        let scan_grid: Vec<f64> = (0..601).map(|i| i as f64 / 300.0).collect();
        let scan = nahm_flow::zero_scan(es, &p, &scan_grid, &cfg())?;
        if !scan.pole_free {
            return Err(Fail::Verdict(format!("Q0 has {} interior poles for ({}, {})", scan.interior.len(), es.n1, es.m1)));
        }
        let s = nahm_flow::charge3_nahm(es, &p, &eps, &grid, &cfg(), &FlowConfig::default())?;
        *h = Box::into_raw(Box::new(MonopoleNahm(s)));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from a `monopole_nahm*_new` call (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn monopole_nahm_free(handle: *mut MonopoleNahm) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of grid nodes and matrix size.
///
/// # Safety
/// All pointers valid.
#[no_mangle]
pub unsafe extern "C" fn monopole_nahm_shape(handle: *const MonopoleNahm, nodes: *mut usize, size: *mut usize) -> MonopoleStatus {
    guard(|| {
        let s = &deref(handle, "handle")?.0;
        *out(nodes, "nodes")? = s.z_nodes.len();
        *out(size, "size")? = s.t1.first().map(|m| m.nrows()).unwrap_or(0);
        Ok(())
    })
}

/// Node `node` of the grid: `z`, the Nahm residual, and `T_which` (1, 2 or 3) row-major into `t` (`size * size` entries).
///
/// # Safety
/// All pointers valid; `t` holds `size * size` values.
#[no_mangle]
pub unsafe extern "C" fn monopole_nahm_node(
    handle: *const MonopoleNahm,
    node: usize,
    which: u32,
    z: *mut f64,
    residual: *mut f64,
    t: *mut MonopoleComplex,
) -> MonopoleStatus {
    guard(|| {
        let s = &deref(handle, "handle")?.0;
        if node >= s.z_nodes.len() {
            return Err(Fail::Arg(format!("node {node} out of range 0..{}", s.z_nodes.len())));
        }
        let mats = match which {
            1 => &s.t1,
            2 => &s.t2,
            3 => &s.t3,
            _ => return Err(Fail::Arg(format!("T index {which} outside 1..3"))),
        };
        let m = &mats[node];
        let n = m.nrows();
        let dst = slice_mut(t, n * n, "t")?;
        for i in 0..n {
            for j in 0..n {
                dst[i * n + j] = m[(i, j)].into();
            }
        }
        *out(z, "z")? = s.z_nodes[node];
        *out(residual, "residual")? = s.residual[node];
        Ok(())
    })
}

/// Largest Nahm residual over the grid.
///
/// # Safety
/// All pointers valid.
#[no_mangle]
pub unsafe extern "C" fn monopole_nahm_max_residual(handle: *const MonopoleNahm, result: *mut f64) -> MonopoleStatus {
    guard(|| {
        let s = &deref(handle, "handle")?.0;
        *out(result, "result")? = s.max_residual();
        Ok(())
    })
}
