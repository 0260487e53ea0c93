//! C ABI over the dynamics engine: opaque handles, integer status codes, and
//! a thread-local last-error message. Strings cross the boundary as NUL
//! terminated UTF-8; everything this library hands out must come back through
//! the matching `_free` function.
//!
//! The generated header lands in `include/dissent.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use dissent::analysis::{period_spectrum, AnalysisError};
use dissent::engine::{run_to_cycle, CycleReport, EngineError, State};
use dissent::format::{parse_system, render_system, SystemDocument};
use dissent::presets::{demo_system, gk_system};

/// Result of every fallible call. Anything but `Ok` leaves a message for
/// [`dissent_last_error`] on the calling thread.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DissentStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The document text failed to parse; the message carries the line.
    ParseError = 3,
    /// Arguments were well-formed but describe nothing valid (bad state
    /// string, unknown preset, out-of-range parameter, no init line).
    InvalidInput = 4,
    /// The request tripped a size guard meant for interactive use.
    GuardExceeded = 5,
}

/// A parsed system: graph, rules, and any initial states from the document.
pub struct DissentSystem {
    doc: SystemDocument,
}

/// One finished trajectory: transient length plus the cycle it entered.
pub struct DissentCycle {
    n: usize,
    report: CycleReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: DissentStatus, message: impl std::fmt::Display) -> DissentStatus {
    let text = CString::new(message.to_string())
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
    status
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// The message from the most recent failed call on this thread, or NULL if
/// the last call succeeded. The pointer stays valid until the next failed
/// call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn dissent_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |msg| msg.as_ptr())
    })
}

/// Free a string returned by this library. NULL is tolerated.
///
/// # Safety
/// `s` must be a pointer previously returned by one of the `*_render`,
/// `*_state`, or `*_sequence` functions, and not freed before.
#[no_mangle]
pub unsafe extern "C" fn dissent_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn read_utf8<'a>(text: *const c_char) -> Result<&'a str, DissentStatus> {
    if text.is_null() {
        return Err(fail(DissentStatus::NullPointer, "text pointer is NULL"));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|e| fail(DissentStatus::InvalidUtf8, e))
}

fn give_string(s: String) -> *mut c_char {
    CString::new(s)
        .expect("rendered text never contains NUL")
        .into_raw()
}

fn deliver_system(doc: SystemDocument, out: *mut *mut DissentSystem) -> DissentStatus {
    let handle = Box::new(DissentSystem { doc });
    unsafe { *out = Box::into_raw(handle) };
    clear_error();
    DissentStatus::Ok
}

/// Parse a system document (the same text format the CLI reads) into a
/// handle. On success writes the handle to `out`; free it with
/// [`dissent_system_free`].
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must point to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn dissent_system_parse(
    text: *const c_char,
    out: *mut *mut DissentSystem,
) -> DissentStatus {
    if out.is_null() {
        return fail(DissentStatus::NullPointer, "out pointer is NULL");
    }
    let text = match read_utf8(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match parse_system(text) {
        Ok(doc) => deliver_system(doc, out),
        Err(e) => fail(DissentStatus::ParseError, e),
    }
}

/// Build one of the named demo systems: "single_edge", "k33", or "cube3".
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must point to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn dissent_generate_preset(
    name: *const c_char,
    out: *mut *mut DissentSystem,
) -> DissentStatus {
    if out.is_null() {
        return fail(DissentStatus::NullPointer, "out pointer is NULL");
    }
    let name = match read_utf8(name) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match demo_system(name) {
        Ok((config, init)) => {
            let doc = SystemDocument {
                config,
                inits: vec![init],
            };
            deliver_system(doc, out)
        }
        Err(e) => fail(DissentStatus::InvalidInput, e),
    }
}

/// Build the long-period gadget on 2k + 8 vertices (k >= 2), rules and
/// starting state included; its orbit has period 2k + 1.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn dissent_generate_gk(
    k: u32,
    out: *mut *mut DissentSystem,
) -> DissentStatus {
    if out.is_null() {
        return fail(DissentStatus::NullPointer, "out pointer is NULL");
    }
    match gk_system(k as usize) {
        Ok((config, init)) => {
            let doc = SystemDocument {
                config,
                inits: vec![init],
            };
            deliver_system(doc, out)
        }
        Err(e) => fail(DissentStatus::InvalidInput, e),
    }
}

/// Release a system handle. NULL is tolerated.
///
/// # Safety
/// `sys` must come from a successful `dissent_system_parse` /
/// `dissent_generate_*` call and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dissent_system_free(sys: *mut DissentSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of vertices, or 0 if `sys` is NULL.
///
/// # Safety
/// `sys` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn dissent_system_vertex_count(sys: *const DissentSystem) -> u32 {
    sys.as_ref().map_or(0, |s| s.doc.config.n() as u32)
}

/// Number of `init` lines the document carried, or 0 if `sys` is NULL.
///
/// # Safety
/// `sys` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn dissent_system_init_count(sys: *const DissentSystem) -> u32 {
    sys.as_ref().map_or(0, |s| s.doc.inits.len() as u32)
}

/// Render the system back to document text (rules and init lines included).
/// Returns NULL if `sys` is NULL; free the result with
/// [`dissent_string_free`].
///
/// # Safety
/// `sys` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn dissent_system_render(sys: *const DissentSystem) -> *mut c_char {
    match sys.as_ref() {
        Some(s) => give_string(render_system(&s.doc.config, &s.doc.inits)),
        None => ptr::null_mut(),
    }
}

/// Run one trajectory until it enters a cycle. `state` selects the start:
/// a ± string of length n, or NULL to use the document's first init line.
/// `cap` bounds the steps taken (0 means the full state-space bound). On
/// success writes a cycle handle to `out`; free it with
/// [`dissent_cycle_free`].
///
/// # Safety
/// `sys` must be a live handle; `state` NULL or NUL-terminated; `out` must
/// point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn dissent_run_to_cycle(
    sys: *const DissentSystem,
    state: *const c_char,
    cap: u64,
    out: *mut *mut DissentCycle,
) -> DissentStatus {
    if out.is_null() {
        return fail(DissentStatus::NullPointer, "out pointer is NULL");
    }
    let Some(sys) = sys.as_ref() else {
        return fail(DissentStatus::NullPointer, "system handle is NULL");
    };
    let n = sys.doc.config.n();
    let start = if state.is_null() {
        match sys.doc.inits.first() {
            Some(&s) => s,
            None => {
                return fail(
                    DissentStatus::InvalidInput,
                    "document has no init line and no state was given",
                )
            }
        }
    } else {
        let text = match read_utf8(state) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match State::parse(text, n) {
            Ok(s) => s,
            Err(e) => return fail(DissentStatus::InvalidInput, e),
        }
    };
    let cap = if cap == 0 { None } else { Some(cap) };
    match run_to_cycle(&sys.doc.config, start, cap) {
        Ok(report) => {
            let handle = Box::new(DissentCycle { n, report });
            *out = Box::into_raw(handle);
            clear_error();
            DissentStatus::Ok
        }
        Err(e @ EngineError::CapExhausted(_)) => fail(DissentStatus::GuardExceeded, e),
        Err(e) => fail(DissentStatus::InvalidInput, e),
    }
}

/// Release a cycle handle. NULL is tolerated.
///
/// # Safety
/// `cycle` must come from a successful `dissent_run_to_cycle` call and must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dissent_cycle_free(cycle: *mut DissentCycle) {
    if !cycle.is_null() {
        drop(Box::from_raw(cycle));
    }
}

/// The cycle's period, or 0 if `cycle` is NULL.
///
/// # Safety
/// `cycle` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn dissent_cycle_period(cycle: *const DissentCycle) -> u32 {
    cycle.as_ref().map_or(0, |c| c.report.period as u32)
}

/// Steps taken before the first recurrent state, or 0 if `cycle` is NULL.
///
/// # Safety
/// `cycle` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn dissent_cycle_transient(cycle: *const DissentCycle) -> u64 {
    cycle.as_ref().map_or(0, |c| c.report.transient as u64)
}

/// The cycle state at `index` (0 .. period) as a ± string, or NULL if the
/// handle is NULL or the index is out of range. Free the result with
/// [`dissent_string_free`].
///
/// # Safety
/// `cycle` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn dissent_cycle_state(
    cycle: *const DissentCycle,
    index: u32,
) -> *mut c_char {
    match cycle.as_ref().and_then(|c| {
        c.report
            .cycle
            .get(index as usize)
            .map(|state| state.render(c.n))
    }) {
        Some(text) => give_string(text),
        None => ptr::null_mut(),
    }
}

/// Vertex 1's opinions around the cycle as a ± string, or NULL if `cycle`
/// is NULL. Free the result with [`dissent_string_free`].
///
/// # Safety
/// `cycle` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn dissent_cycle_hub_sequence(cycle: *const DissentCycle) -> *mut c_char {
    match cycle.as_ref() {
        Some(c) => give_string(c.report.c_sequence.iter().map(|o| o.as_char()).collect()),
        None => ptr::null_mut(),
    }
}

/// Histogram of eventual periods over the whole state space. Writes up to
/// `capacity` (period, count) pairs into `periods_out` / `counts_out` in
/// ascending period order and stores the full entry count in `total_out`;
/// call with `capacity` 0 to size the buffers first.
///
/// # Safety
/// `sys` must be a live handle; `total_out` must point to writable storage;
/// the two arrays must hold at least `capacity` elements each when
/// `capacity` is nonzero.
#[no_mangle]
pub unsafe extern "C" fn dissent_period_counts(
    sys: *const DissentSystem,
    periods_out: *mut u32,
    counts_out: *mut u64,
    capacity: usize,
    total_out: *mut usize,
) -> DissentStatus {
    let Some(sys) = sys.as_ref() else {
        return fail(DissentStatus::NullPointer, "system handle is NULL");
    };
    if total_out.is_null() {
        return fail(DissentStatus::NullPointer, "total_out pointer is NULL");
    }
    if capacity > 0 && (periods_out.is_null() || counts_out.is_null()) {
        return fail(
            DissentStatus::NullPointer,
            "output arrays are NULL but capacity is nonzero",
        );
    }
    let spectrum = match period_spectrum(&sys.doc.config) {
        Ok(s) => s,
        Err(e @ AnalysisError::Engine(EngineError::TableTooLarge(_))) => {
            return fail(DissentStatus::GuardExceeded, e)
        }
        Err(e) => return fail(DissentStatus::InvalidInput, e),
    };
    *total_out = spectrum.counts.len();
    for (i, (&period, &count)) in spectrum.counts.iter().take(capacity).enumerate() {
        *periods_out.add(i) = period as u32;
        *counts_out.add(i) = count;
    }
    clear_error();
    DissentStatus::Ok
}
