//! C ABI over the `mdiqpq` core.
//!
//! Objects are opaque heap handles released with their matching `_free`
//! function. Every fallible call returns an [`MdiqpqStatus`]; on failure the
//! message is available from [`mdiqpq_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mdiqpq::analysis::{attack_rate_from_table, honest_rate_from_table, retention_probability};
use mdiqpq::protocol::{estimate_qber, run_sift, BobStrategy, SiftRun};
use mdiqpq::sift::{joint_table, normalize_columns, ProbabilityTable, Sifter};
use mdiqpq::{Error, ProtocolParams};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MdiqpqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Restart = 4,
    OutOfRange = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MdiqpqStrategy {
    Honest = 0,
    MiddleAttack = 1,
}

/// Protocol configuration.
pub struct MdiqpqParams(ProtocolParams);

/// Bell-outcome probability table, rows Alice, columns Bob.
pub struct MdiqpqTable(ProbabilityTable);

/// Result of one simulated key distribution.
pub struct MdiqpqRun(SiftRun);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MdiqpqStatus {
    match e {
        Error::Domain(_)
        | Error::UnsupportedDimension(_)
        | Error::NotNormalized(_)
        | Error::UnequalColumnSums(_)
        | Error::EmptyGrid => MdiqpqStatus::Domain,
        Error::Restart | Error::NoConclusive => MdiqpqStatus::Restart,
        Error::QueryIndex { .. } => MdiqpqStatus::OutOfRange,
        Error::InvalidParams(_) | Error::DimensionMismatch { .. } | Error::Database(_) => {
            MdiqpqStatus::InvalidArgument
        }
        Error::Io(_) | Error::Json(_) => MdiqpqStatus::Internal,
    }
}

/// Runs `f`, recording any error or panic, and clears the last error on
/// success.
fn guard(f: impl FnOnce() -> Result<(), (MdiqpqStatus, String)>) -> MdiqpqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MdiqpqStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MdiqpqStatus::Internal
        }
    }
}

fn core(e: Error) -> (MdiqpqStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (MdiqpqStatus, String) {
    (MdiqpqStatus::NullPointer, format!("{name} is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (MdiqpqStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn store<T>(out: *mut T, value: T) -> Result<(), (MdiqpqStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn mdiqpq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

fn new_params(
    out: *mut *mut MdiqpqParams,
    make: impl FnOnce() -> mdiqpq::Result<ProtocolParams>,
) -> MdiqpqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = make().map_err(core)?;
        unsafe { out.write(Box::into_raw(Box::new(MdiqpqParams(params)))) };
        Ok(())
    })
}

/// Qutrit rotated ensemble with angles in radians.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_params_qutrit(
    gamma1: f64,
    gamma2: f64,
    out: *mut *mut MdiqpqParams,
) -> MdiqpqStatus {
    new_params(out, || ProtocolParams::qutrit(gamma1, gamma2))
}

/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_params_qubit(
    theta: f64,
    out: *mut *mut MdiqpqParams,
) -> MdiqpqStatus {
    new_params(out, || ProtocolParams::qubit(theta))
}

/// Qutrit Fourier ensemble.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_params_fourier(out: *mut *mut MdiqpqParams) -> MdiqpqStatus {
    new_params(out, || Ok(ProtocolParams::fourier()))
}

/// # Safety
/// `params` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_params_free(params: *mut MdiqpqParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

fn rate(
    params: *const MdiqpqParams,
    out: *mut f64,
    f: fn(&ProtocolParams) -> mdiqpq::Result<f64>,
) -> MdiqpqStatus {
    guard(|| unsafe {
        let p = deref(params, "params")?;
        let value = f(&p.0).map_err(core)?;
        store(out, value)
    })
}

/// Honest conclusive rate given the target outcome.
///
/// # Safety
/// `params` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_honest_rate(
    params: *const MdiqpqParams,
    out: *mut f64,
) -> MdiqpqStatus {
    rate(params, out, honest_rate_from_table)
}

/// Conclusive rate when Bob sends middle states. Not defined for the
/// Fourier ensemble.
///
/// # Safety
/// `params` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_attack_rate(
    params: *const MdiqpqParams,
    out: *mut f64,
) -> MdiqpqStatus {
    rate(params, out, attack_rate_from_table)
}

/// Probability that an honest round yields the target outcome.
///
/// # Safety
/// `params` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_retention_probability(
    params: *const MdiqpqParams,
    out: *mut f64,
) -> MdiqpqStatus {
    rate(params, out, retention_probability)
}

/// Target-outcome table of Alice's states against Bob's honest states, or
/// against his middle states when `middle` is set.
///
/// # Safety
/// `params` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_table_new(
    params: *const MdiqpqParams,
    middle: bool,
    normalized: bool,
    out: *mut *mut MdiqpqTable,
) -> MdiqpqStatus {
    guard(|| {
        let p = deref(params, "params")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sifter = Sifter::new(&p.0).map_err(core)?;
        let alice = sifter.ensemble();
        let raw = if middle {
            let m = p.0.middle_states().map_err(core)?;
            joint_table(alice, &m, sifter.bell(), sifter.target())
        } else {
            joint_table(alice, alice, sifter.bell(), sifter.target())
        }
        .map_err(core)?;
        let table = if normalized {
            normalize_columns(&raw).map_err(core)?
        } else {
            raw
        };
        out.write(Box::into_raw(Box::new(MdiqpqTable(table))));
        Ok(())
    })
}

/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_table_rows(table: *const MdiqpqTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.rows())
}

/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_table_cols(table: *const MdiqpqTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.cols())
}

/// # Safety
/// `table` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_table_get(
    table: *const MdiqpqTable,
    row: usize,
    col: usize,
    out: *mut f64,
) -> MdiqpqStatus {
    guard(|| {
        let t = &deref(table, "table")?.0;
        if row >= t.rows() || col >= t.cols() {
            return Err((
                MdiqpqStatus::OutOfRange,
                format!("cell ({row}, {col}) outside {}x{}", t.rows(), t.cols()),
            ));
        }
        store(out, t.get(row, col))
    })
}

/// # Safety
/// `table` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_table_free(table: *mut MdiqpqTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Simulates `rounds` seeded rounds of key distribution.
///
/// # Safety
/// `params` must be null or a live handle; `out` null or writable;
/// `strategy` one of the declared enumerators.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_run_sift(
    params: *const MdiqpqParams,
    rounds: u64,
    strategy: MdiqpqStrategy,
    seed: u64,
    out: *mut *mut MdiqpqRun,
) -> MdiqpqStatus {
    guard(|| {
        let p = deref(params, "params")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let strategy = match strategy {
            MdiqpqStrategy::Honest => BobStrategy::Honest,
            MdiqpqStrategy::MiddleAttack => BobStrategy::MiddleAttack,
        };
        let run = run_sift(&p.0, rounds, strategy, seed).map_err(core)?;
        out.write(Box::into_raw(Box::new(MdiqpqRun(run))));
        Ok(())
    })
}

/// Rounds that produced the target outcome.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_run_retained(run: *const MdiqpqRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.retained())
}

/// Conclusive fraction of the retained rounds. Fails with `Restart` when
/// nothing was retained.
///
/// # Safety
/// `run` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_run_conclusive_rate(
    run: *const MdiqpqRun,
    out: *mut f64,
) -> MdiqpqStatus {
    guard(|| {
        let r = deref(run, "run")?;
        let rate =
            r.0.conclusive_rate()
                .ok_or_else(|| core(Error::NoConclusive))?;
        store(out, rate)
    })
}

/// Discloses a random fraction of the usable conclusive positions and
/// writes the observed error rate. The disclosed positions stay marked on
/// the run.
///
/// # Safety
/// `run` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_run_estimate_qber(
    run: *mut MdiqpqRun,
    test_fraction: f64,
    seed: u64,
    out: *mut f64,
) -> MdiqpqStatus {
    guard(|| {
        let r = run.as_mut().ok_or_else(|| null("run"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let est = estimate_qber(&mut r.0.record, test_fraction, seed).map_err(core)?;
        store(out, est.qber)
    })
}

/// # Safety
/// `run` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mdiqpq_run_free(run: *mut MdiqpqRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
