//! C ABI for the flowcheck toolkit: opaque handles, integer error codes, and
//! a thread-local last-error message. The matching header is
//! `include/flowcheck.h` (hand-maintained; keep the two in sync).
//!
//! Conventions:
//! * every fallible function returns an `FcStatus` code and writes results
//!   through out-pointers;
//! * handles own their data and must be released with the matching `_free`;
//! * strings crossing the boundary are NUL-terminated UTF-8;
//! * passing NULL where a non-NULL pointer is required yields
//!   `FC_ERR_NULL_POINTER` and leaves the out-pointers untouched.

use flowcheck::assignment::Assignment;
use flowcheck::blp::BlpModel;
use flowcheck::checker::{check_bounds, check_parallel, CheckMode};
use flowcheck::config::{Dimension, ModelConfig, StartMode, ValleyBands, XSupport};
use flowcheck::error::Error;
use flowcheck::instance::Instance;
use flowcheck::lpio::read_assignment;
use flowcheck::model_x::build_x_model;
use flowcheck::oracle::{branch_and_bound, brute_force};
use flowcheck::rational::{format_rational, parse_rational, rat};
use flowcheck::valleys::{
    construct_x_flow, construct_y_flow, construct_z_flow, gen_table_instance,
    gen_valley_instance, TableInstance, ValleySpec,
};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::io::BufReader;

/// Status codes; 0 is success. Mirrors `FcStatus` in the header.
pub const FC_OK: i32 = 0;
pub const FC_ERR_NULL_POINTER: i32 = 1;
pub const FC_ERR_INVALID_ARGUMENT: i32 = 2;
pub const FC_ERR_PARSE: i32 = 3;
pub const FC_ERR_CONSTRUCTION: i32 = 4;
pub const FC_ERR_UNSUPPORTED: i32 = 5;
pub const FC_ERR_IO: i32 = 6;
pub const FC_ERR_UTF8: i32 = 7;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', "?")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::Validation(_) | Error::Index(_) => FC_ERR_INVALID_ARGUMENT,
        Error::Parse(_) => FC_ERR_PARSE,
        Error::Construction(_) => FC_ERR_CONSTRUCTION,
        Error::Unsupported(_) => FC_ERR_UNSUPPORTED,
        Error::Io(_) => FC_ERR_IO,
    }
}

fn fail(e: Error) -> i32 {
    set_error(&e.to_string());
    code_of(&e)
}

/// Opaque instance handle.
pub struct FcInstance(Instance);
/// Opaque assignment handle (carries its total-flow constant).
pub struct FcAssignment(Assignment);

unsafe fn cstr<'a>(p: *const c_char) -> Result<&'a str, i32> {
    if p.is_null() {
        set_error("null string argument");
        return Err(FC_ERR_NULL_POINTER);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        FC_ERR_UTF8
    })
}

macro_rules! out_ptr {
    ($p:expr) => {
        if $p.is_null() {
            set_error("null out-pointer");
            return FC_ERR_NULL_POINTER;
        }
    };
}

/// Copies the last error message for this thread into `buf` (NUL-terminated,
/// truncated to `cap`); returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be NULL (query length only).
#[no_mangle]
pub unsafe extern "C" fn fc_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Parses an instance from its plain-text form (header line `n`, then `n`
/// rows of integer costs).
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_instance_from_text(
    text: *const c_char,
    out: *mut *mut FcInstance,
) -> i32 {
    out_ptr!(out);
    let text = match cstr(text) {
        Ok(t) => t,
        Err(c) => return c,
    };
    match Instance::from_text(text) {
        Ok(i) => {
            *out = Box::into_raw(Box::new(FcInstance(i)));
            FC_OK
        }
        Err(e) => fail(e),
    }
}

/// Builds a named table instance: `"abcd"` or `"graph8"`.
///
/// # Safety
/// `name` must be a valid NUL-terminated string; `out` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_instance_table(name: *const c_char, out: *mut *mut FcInstance) -> i32 {
    out_ptr!(out);
    let name = match cstr(name) {
        Ok(t) => t,
        Err(c) => return c,
    };
    let inst = match name {
        "abcd" => gen_table_instance(TableInstance::Abcd),
        "graph8" => gen_table_instance(TableInstance::Graph8),
        other => {
            set_error(&format!("unknown table instance {other:?}"));
            return FC_ERR_INVALID_ARGUMENT;
        }
    };
    *out = Box::into_raw(Box::new(FcInstance(inst)));
    FC_OK
}

fn spec_from(
    lead_in: u16,
    lead_out: u16,
    valley_size: u16,
    paths: u16,
    pairs: u16,
    cross_cost: i64,
    in_cost: i64,
) -> Result<ValleySpec, Error> {
    let s = ValleySpec {
        lead_in,
        lead_out,
        valley_size,
        paths,
        pairs,
        cross_cost,
        in_cost,
    };
    s.validate()?;
    Ok(s)
}

/// Builds a valley-family instance from its geometry.
///
/// # Safety
/// `out` must be a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_instance_valleys(
    lead_in: u16,
    lead_out: u16,
    valley_size: u16,
    paths: u16,
    pairs: u16,
    cross_cost: i64,
    in_cost: i64,
    out: *mut *mut FcInstance,
) -> i32 {
    out_ptr!(out);
    let r = spec_from(lead_in, lead_out, valley_size, paths, pairs, cross_cost, in_cost)
        .and_then(|s| gen_valley_instance(&s));
    match r {
        Ok(i) => {
            *out = Box::into_raw(Box::new(FcInstance(i)));
            FC_OK
        }
        Err(e) => fail(e),
    }
}

/// Node count of an instance, or 0 when the handle is NULL.
///
/// # Safety
/// `inst` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fc_instance_node_count(inst: *const FcInstance) -> u32 {
    if inst.is_null() {
        return 0;
    }
    (*inst).0.n() as u32
}

/// Releases an instance handle (NULL is a no-op).
///
/// # Safety
/// `inst` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fc_instance_free(inst: *mut FcInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Exact solve. `use_branch_and_bound = 0` selects brute force (which refuses
/// instances beyond its node limit), nonzero the branch-and-bound search.
/// Writes the optimal cost and the number of optimal fixed-start directed
/// tours found.
///
/// # Safety
/// `inst` must be a live handle; `cost_out` / `count_out` valid out-pointers.
#[no_mangle]
pub unsafe extern "C" fn fc_solve(
    inst: *const FcInstance,
    use_branch_and_bound: i32,
    cost_out: *mut i64,
    count_out: *mut u64,
) -> i32 {
    out_ptr!(cost_out);
    out_ptr!(count_out);
    if inst.is_null() {
        set_error("null instance handle");
        return FC_ERR_NULL_POINTER;
    }
    let r = if use_branch_and_bound != 0 {
        branch_and_bound(&(*inst).0)
    } else {
        brute_force(&(*inst).0)
    };
    match r {
        Ok(res) => {
            *cost_out = res.optimal_cost;
            *count_out = res.optimal_count;
            FC_OK
        }
        Err(e) => fail(e),
    }
}

/// Reads an assignment file (`name<TAB>p/q` lines). `total_flow` is the flow
/// constant as a decimal or `p/q` string.
///
/// # Safety
/// String arguments must be valid NUL-terminated strings; `out` a valid
/// out-pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_assignment_read(
    path: *const c_char,
    total_flow: *const c_char,
    out: *mut *mut FcAssignment,
) -> i32 {
    out_ptr!(out);
    let path = match cstr(path) {
        Ok(t) => t,
        Err(c) => return c,
    };
    let tf = match cstr(total_flow) {
        Ok(t) => t,
        Err(c) => return c,
    };
    let tf = match parse_rational(tf) {
        Ok(v) => v,
        Err(m) => return fail(Error::Parse(m)),
    };
    let file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) => return fail(Error::Io(e)),
    };
    match read_assignment(BufReader::new(file), tf, None) {
        Ok(a) => {
            *out = Box::into_raw(Box::new(FcAssignment(a)));
            FC_OK
        }
        Err(e) => fail(e),
    }
}

/// Runs the full valley flow construction for a dimension (`'x'`, `'y'`, or
/// `'z'`) and returns the constructed assignment (for y/z: the merged
/// conditioned records with the arc flow on the diagonal).
///
/// # Safety
/// `out` must be a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_construct_valleys(
    lead_in: u16,
    lead_out: u16,
    valley_size: u16,
    paths: u16,
    pairs: u16,
    cross_cost: i64,
    in_cost: i64,
    dim: c_char,
    total_flow: u64,
    out: *mut *mut FcAssignment,
) -> i32 {
    out_ptr!(out);
    let dim = match dim as u8 {
        b'x' => Dimension::X,
        b'y' => Dimension::Y,
        b'z' => Dimension::Z,
        other => {
            set_error(&format!("dimension must be 'x', 'y', or 'z', got {other}"));
            return FC_ERR_INVALID_ARGUMENT;
        }
    };
    let r = spec_from(lead_in, lead_out, valley_size, paths, pairs, cross_cost, in_cost)
        .and_then(|spec| {
            let x = construct_x_flow(&spec, total_flow)?;
            let mut cfg = ModelConfig::new(dim)
                .with_start(StartMode::FreeStart)
                .with_total_flow(total_flow)
                .with_support(XSupport::from_assignment(&x));
            if let Some(b) = spec.bands() {
                cfg = cfg.with_bands(b);
            }
            match dim {
                Dimension::X => Ok(x),
                Dimension::Y => construct_y_flow(&x, &cfg),
                Dimension::Z => {
                    let y = construct_y_flow(&x, &cfg)?;
                    construct_z_flow(&x, &y, &cfg)
                }
            }
        });
    match r {
        Ok(a) => {
            *out = Box::into_raw(Box::new(FcAssignment(a)));
            FC_OK
        }
        Err(e) => fail(e),
    }
}

/// Number of nonzero records in an assignment, or 0 for NULL.
///
/// # Safety
/// `a` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fc_assignment_len(a: *const FcAssignment) -> u64 {
    if a.is_null() {
        return 0;
    }
    (*a).0.len() as u64
}

/// Exact objective value of an assignment over an instance, rendered as a
/// `p/q` (or integer) string into `buf`; returns the full length in bytes.
///
/// # Safety
/// `inst` and `a` must be live handles; `buf` must point to `cap` writable
/// bytes, or be NULL to query the length.
#[no_mangle]
pub unsafe extern "C" fn fc_objective(
    inst: *const FcInstance,
    a: *const FcAssignment,
    buf: *mut c_char,
    cap: usize,
) -> i32 {
    if inst.is_null() || a.is_null() {
        set_error("null handle");
        return FC_ERR_NULL_POINTER;
    }
    match (*a).0.objective(&(*inst).0) {
        Ok(v) => {
            let text = format_rational(&v);
            let bytes = text.as_bytes();
            if !buf.is_null() && cap > 0 {
                let n = bytes.len().min(cap - 1);
                std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            FC_OK
        }
        Err(e) => fail(e),
    }
}

/// Checks an assignment against the model of the given dimension built over
/// the instance. `free_start` toggles the extended stage ranges; for y/z the
/// constraint generation is restricted to the assignment's own arc support.
/// Writes the constraint-violation and bound-violation counts; returns FC_OK
/// even when violations exist (the counts carry the verdict).
///
/// # Safety
/// Handles must be live; count out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fc_check(
    inst: *const FcInstance,
    a: *const FcAssignment,
    dim: c_char,
    free_start: i32,
    total_flow: u64,
    violations_out: *mut u64,
    bound_violations_out: *mut u64,
) -> i32 {
    out_ptr!(violations_out);
    out_ptr!(bound_violations_out);
    if inst.is_null() || a.is_null() {
        set_error("null handle");
        return FC_ERR_NULL_POINTER;
    }
    let dim = match dim as u8 {
        b'x' => Dimension::X,
        b'y' => Dimension::Y,
        b'z' => Dimension::Z,
        other => {
            set_error(&format!("dimension must be 'x', 'y', or 'z', got {other}"));
            return FC_ERR_INVALID_ARGUMENT;
        }
    };
    let instance = &(*inst).0;
    let assignment = &(*a).0;
    let mut cfg = ModelConfig::new(dim).with_total_flow(total_flow.max(1));
    if free_start != 0 {
        cfg = cfg.with_start(StartMode::FreeStart);
    }
    let report = match dim {
        Dimension::X => {
            let xm = build_x_model(instance, &cfg);
            check_parallel(xm.constraints, assignment, CheckMode::Collect, 1)
        }
        _ => {
            let mut sup = XSupport::default();
            for (k, _) in assignment.iter() {
                if let Some(arc) = k.as_flow_arc() {
                    sup.insert(arc.from, arc.stage, arc.to);
                }
            }
            if let Some(b) = bands_of(instance, &sup) {
                cfg = cfg.with_bands(b);
            }
            cfg = cfg.with_support(sup);
            match BlpModel::new(instance, &cfg) {
                Ok(model) => {
                    let mut all = Vec::new();
                    // Instances reaching FFI checks are small enough to hold
                    // the stream; the CLI is the path for the huge models.
                    model.for_each_constraint(&mut |c| all.push(c));
                    check_parallel(all, assignment, CheckMode::Collect, 1)
                }
                Err(e) => Err(e),
            }
        }
    };
    match report {
        Ok(r) => {
            *violations_out = r.violation_count as u64;
            *bound_violations_out = check_bounds(assignment, &rat(total_flow.max(1) as i64)) as u64;
            FC_OK
        }
        Err(e) => fail(e),
    }
}

/// FFI checks don't carry a valley spec, so no band pruning is applied unless
/// a caller-provided support ever warrants reconstructing it; kept explicit
/// and conservative (always None) rather than guessing geometry.
fn bands_of(_instance: &Instance, _sup: &XSupport) -> Option<ValleyBands> {
    None
}

/// Releases an assignment handle (NULL is a no-op).
///
/// # Safety
/// `a` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fc_assignment_free(a: *mut FcAssignment) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}
