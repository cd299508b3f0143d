//! C ABI over the contragap library.
//!
//! Every function returns a [`CgStatus`]. On failure the message is kept per
//! thread and can be read with [`cg_last_error_message`]. Strings handed out
//! by the library must be released with [`cg_string_free`], instances with
//! [`cg_instance_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use contragap::certificate::CertifyConfig;
use contragap::clustering::ClusterParams;
use contragap::io::{load_graph, load_partition, save_graph};
use contragap::pipeline::{run_pipeline, Config};
use contragap::surgery::{build_instance, InstanceParams};
use contragap::{certify_gap, CapacitatedGraph, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidInput = 5,
    InvalidPartition = 6,
    Config = 7,
    Solver = 8,
    Invariant = 9,
    Panic = 10,
}

/// Opaque handle to a capacitated graph with terminals.
pub struct CgInstance {
    graph: CapacitatedGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CgStatus {
    match e {
        Error::Io { .. } => CgStatus::Io,
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => CgStatus::Parse,
        Error::InvalidPartition(..) | Error::PartitionSize { .. } => CgStatus::InvalidPartition,
        Error::Config { .. } => CgStatus::Config,
        Error::Lp(_) => CgStatus::Solver,
        Error::Invariant(_) | Error::DiameterViolation { .. } => CgStatus::Invariant,
        _ => CgStatus::InvalidInput,
    }
}

struct Fail(CgStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CgStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CgStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(Fail(CgStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Fail(CgStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn instance<'a>(inst: *const CgInstance) -> Result<&'a CgInstance, Fail> {
    inst.as_ref().ok_or_else(|| Fail(CgStatus::NullPointer, "instance is null".into()))
}

fn out_ptr<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        Err(Fail(CgStatus::NullPointer, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn give(inst: CgInstance, out: *mut *mut CgInstance) {
    // SAFETY: callers check `out` first.
    unsafe { *out = Box::into_raw(Box::new(inst)) };
}

/// Builds the hard instance for `(n, d, epsilon, seed)` with formula defaults for k and m.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cg_generate(n: usize, d: usize, epsilon: f64, seed: u64, out: *mut *mut CgInstance) -> CgStatus {
    guard(|| {
        out_ptr(out)?;
        let params = InstanceParams::new(n, d, epsilon, seed)?;
        let inst = build_instance(&params)?;
        give(CgInstance { graph: inst.graph }, out);
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cg_load(path: *const c_char, out: *mut *mut CgInstance) -> CgStatus {
    guard(|| {
        out_ptr(out)?;
        let graph = load_graph(path_arg(path, "path")?)?;
        give(CgInstance { graph }, out);
        Ok(())
    })
}

/// # Safety
/// `inst` must come from this library; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cg_save(inst: *const CgInstance, path: *const c_char) -> CgStatus {
    guard(|| {
        save_graph(&instance(inst)?.graph, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// Instance sizes. Any output pointer may be null.
///
/// # Safety
/// `inst` must come from this library; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cg_counts(inst: *const CgInstance, n: *mut usize, edges: *mut usize, terminals: *mut usize) -> CgStatus {
    guard(|| {
        let g = &instance(inst)?.graph;
        for (p, v) in [(n, g.n()), (edges, g.edge_count()), (terminals, g.terminals().len())] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Total edge capacity, saturating at `u64::MAX`.
///
/// # Safety
/// `inst` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cg_total_capacity(inst: *const CgInstance, out: *mut u64) -> CgStatus {
    guard(|| {
        out_ptr(out)?;
        *out = u64::try_from(instance(inst)?.graph.total_capacity()).unwrap_or(u64::MAX);
        Ok(())
    })
}

/// Certifies the partition in `partition_path` for `m` pairs with cluster
/// parameters from their formulas at `epsilon`. Writes the certificate JSON
/// to `*json_out`; `*full_out` is 1 for a full run and 0 for a partial one.
///
/// # Safety
/// `inst` must come from this library, `partition_path` a NUL-terminated
/// string, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cg_certify(
    inst: *const CgInstance,
    partition_path: *const c_char,
    m: usize,
    epsilon: f64,
    lp_oracle: bool,
    json_out: *mut *mut c_char,
    full_out: *mut i32,
) -> CgStatus {
    guard(|| {
        out_ptr(json_out)?;
        out_ptr(full_out)?;
        let g = &instance(inst)?.graph;
        let p = load_partition(path_arg(partition_path, "partition_path")?, g.n())?;
        let cluster = ClusterParams::from_formulas(g.n(), epsilon);
        let cert = certify_gap(
            g,
            &p,
            &CertifyConfig {
                cluster,
                m,
                lp_oracle,
                check_diameters: true,
            },
        )?;
        let json = CString::new(cert.to_json()?).map_err(|e| Fail(CgStatus::Invariant, e.to_string()))?;
        *json_out = json.into_raw();
        *full_out = i32::from(cert.is_full());
        Ok(())
    })
}

/// Runs the pipeline for a config file into `out_dir`. `*exit_out` gets the
/// CLI exit code: 0 full, 2 partial.
///
/// # Safety
/// Both paths must be NUL-terminated strings; `exit_out` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_run_pipeline(config_path: *const c_char, out_dir: *const c_char, exit_out: *mut i32) -> CgStatus {
    guard(|| {
        out_ptr(exit_out)?;
        let cfg = Config::load(path_arg(config_path, "config_path")?)?;
        let outcome = run_pipeline(&cfg, &path_arg(out_dir, "out_dir")?)?;
        *exit_out = outcome.exit_code();
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn cg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `inst` must be null or an instance returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cg_instance_free(inst: *mut CgInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}
