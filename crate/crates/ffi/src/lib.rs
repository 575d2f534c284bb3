//! C ABI over `ph-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_load`
//! functions and released with the matching `*_free`. Every fallible call
//! returns an `int32_t` status (`PH_OK` or one of the `PH_ERR_*` codes); the
//! message of the last failure on the calling thread is available through
//! [`ph_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ph_core::cli;
use ph_core::dynamics::{self, Scenario, TrajectoryRecord};
use ph_core::forms::HodgeSystem;
use ph_core::{io, meshgen, suites, PhError, SimplicialComplex};

pub const PH_OK: i32 = 0;
pub const PH_ERR_NULL: i32 = 1;
pub const PH_ERR_UTF8: i32 = 2;
pub const PH_ERR_PARSE: i32 = 3;
pub const PH_ERR_VALIDATION: i32 = 4;
pub const PH_ERR_DIMENSION: i32 = 5;
pub const PH_ERR_SOLVER: i32 = 6;
pub const PH_ERR_CONFIG: i32 = 7;
pub const PH_ERR_GEOMETRY: i32 = 8;
pub const PH_ERR_STEP_REJECTED: i32 = 9;
pub const PH_ERR_IO: i32 = 10;
pub const PH_ERR_TOPOLOGY: i32 = 11;
pub const PH_ERR_RANGE: i32 = 12;
pub const PH_ERR_PANIC: i32 = 13;

/// Number of columns in a trajectory row: t, H, H_kin, H_grav, H_surf,
/// port_flux, area, div_residual.
pub const PH_RECORD_COLUMNS: usize = 8;

/// A triangulated domain with boundary labels.
pub struct PhMesh {
    inner: SimplicialComplex,
}

/// A validated scenario ready to integrate.
pub struct PhScenario {
    inner: Scenario,
}

/// The output of one scenario run.
pub struct PhRecord {
    inner: TrajectoryRecord,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn code_of(e: &PhError) -> i32 {
    match e {
        PhError::Parse { .. } => PH_ERR_PARSE,
        PhError::Validation(_) => PH_ERR_VALIDATION,
        PhError::Degree(_) | PhError::Dimension(_) | PhError::MeshMismatch { .. } | PhError::Formulation(_) => {
            PH_ERR_DIMENSION
        }
        PhError::Solver(_) | PhError::NotSolenoidal { .. } | PhError::Incompatible { .. } => PH_ERR_SOLVER,
        PhError::Config(_) => PH_ERR_CONFIG,
        PhError::Geometry(_) => PH_ERR_GEOMETRY,
        PhError::StepRejected { .. } => PH_ERR_STEP_REJECTED,
        PhError::Io(_) => PH_ERR_IO,
        PhError::HarmonicUnsupported { .. } => PH_ERR_TOPOLOGY,
    }
}

struct Fail(i32, String);

impl From<PhError> for Fail {
    fn from(e: PhError) -> Self {
        Fail(code_of(&e), e.to_string())
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PH_OK,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            PH_ERR_PANIC
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(PH_ERR_NULL, format!("{what} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(PH_ERR_UTF8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(PH_ERR_NULL, format!("{what} is NULL")))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(PH_ERR_NULL, format!("{what} is NULL")));
    }
    out.write(v);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ph_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ph_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Reads a mesh file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_mesh_load(path: *const c_char, out: *mut *mut PhMesh) -> i32 {
    guard(|| {
        let p = str_arg(path, "path")?;
        let inner = ph_core::load_mesh(p)?;
        put(out, Box::into_raw(Box::new(PhMesh { inner })), "out")
    })
}

/// Parses mesh text in the `ph-mesh 1` format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_mesh_parse(text: *const c_char, out: *mut *mut PhMesh) -> i32 {
    guard(|| {
        let t = str_arg(text, "text")?;
        let inner = SimplicialComplex::parse(t)?;
        put(out, Box::into_raw(Box::new(PhMesh { inner })), "out")
    })
}

/// Rectangular tank [0, length] x [-depth, 0] with a free top and walled
/// sides and bottom, `nx` by `ny` cells split into triangles.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_mesh_tank(length: f64, depth: f64, nx: usize, ny: usize, out: *mut *mut PhMesh) -> i32 {
    guard(|| {
        let inner = meshgen::tank(length, depth, nx, ny)?;
        put(out, Box::into_raw(Box::new(PhMesh { inner })), "out")
    })
}

/// # Safety
/// `mesh` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ph_mesh_free(mesh: *mut PhMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Vertex, edge and triangle counts.
///
/// # Safety
/// `mesh` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_mesh_counts(
    mesh: *const PhMesh,
    n_vertices: *mut usize,
    n_edges: *mut usize,
    n_triangles: *mut usize,
) -> i32 {
    guard(|| {
        let c = &handle(mesh, "mesh")?.inner;
        put(n_vertices, c.n_vertices(), "n_vertices")?;
        put(n_edges, c.n_edges(), "n_edges")?;
        put(n_triangles, c.n_triangles(), "n_triangles")
    })
}

/// # Safety
/// `mesh` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_mesh_betti(mesh: *const PhMesh, b0: *mut usize, b1: *mut usize) -> i32 {
    guard(|| {
        let (a, b) = handle(mesh, "mesh")?.inner.betti_numbers();
        put(b0, a, "b0")?;
        put(b1, b, "b1")
    })
}

/// Copies vertex coordinates as x0, y0, x1, y1, ... into `xy`, which must
/// hold `2 * n_vertices` doubles (`len` counts doubles).
///
/// # Safety
/// `mesh` must be a live handle and `xy` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ph_mesh_vertices(mesh: *const PhMesh, xy: *mut f64, len: usize) -> i32 {
    guard(|| {
        let c = &handle(mesh, "mesh")?.inner;
        if xy.is_null() {
            return Err(Fail(PH_ERR_NULL, "xy is NULL".into()));
        }
        let need = 2 * c.n_vertices();
        if len < need {
            return Err(Fail(PH_ERR_RANGE, format!("buffer holds {len} doubles, need {need}")));
        }
        let out = std::slice::from_raw_parts_mut(xy, need);
        for (k, p) in c.vertices().iter().enumerate() {
            out[2 * k] = p[0];
            out[2 * k + 1] = p[1];
        }
        Ok(())
    })
}

/// Runs a property suite ("forms", "elliptic", "brackets", "dirac",
/// "energetics") and reports how many checks ran and how many failed.
///
/// # Safety
/// `mesh` must be a live handle, `suite` a NUL-terminated string, and the
/// out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn ph_check(
    mesh: *const PhMesh,
    suite: *const c_char,
    seed: u64,
    n_checks: *mut usize,
    n_failed: *mut usize,
) -> i32 {
    guard(|| {
        let c = &handle(mesh, "mesh")?.inner;
        let name = str_arg(suite, "suite")?;
        let h = HodgeSystem::new(c)?;
        let checks = suites::run_suite(name, &h, seed)?;
        put(n_checks, checks.len(), "n_checks")?;
        put(n_failed, checks.iter().filter(|c| !c.pass).count(), "n_failed")
    })
}

/// Reads an INI run config (the same format as `ph run`).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_scenario_load(path: *const c_char, out: *mut *mut PhScenario) -> i32 {
    guard(|| {
        let p = str_arg(path, "path")?;
        let cfg = cli::parse_config(Path::new(p))?;
        put(out, Box::into_raw(Box::new(PhScenario { inner: cfg.scenario })), "out")
    })
}

/// Overrides time step and end time.
///
/// # Safety
/// `sc` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ph_scenario_set_time(sc: *mut PhScenario, dt: f64, t_end: f64) -> i32 {
    guard(|| {
        let s = sc.as_mut().ok_or_else(|| Fail(PH_ERR_NULL, "scenario is NULL".into()))?;
        let mut next = s.inner.clone();
        next.dt = dt;
        next.t_end = t_end;
        next.validate()?;
        s.inner = next;
        Ok(())
    })
}

/// # Safety
/// `sc` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ph_scenario_free(sc: *mut PhScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Integrates the scenario to its end time.
///
/// # Safety
/// `sc` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_scenario_run(sc: *const PhScenario, out: *mut *mut PhRecord) -> i32 {
    guard(|| {
        let s = handle(sc, "scenario")?;
        let inner = dynamics::run_scenario(&s.inner)?;
        put(out, Box::into_raw(Box::new(PhRecord { inner })), "out")
    })
}

/// # Safety
/// `rec` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ph_record_free(rec: *mut PhRecord) {
    if !rec.is_null() {
        drop(Box::from_raw(rec));
    }
}

/// Number of recorded rows.
///
/// # Safety
/// `rec` must be a live handle; `n_rows` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_record_len(rec: *const PhRecord, n_rows: *mut usize) -> i32 {
    guard(|| put(n_rows, handle(rec, "record")?.inner.rows.len(), "n_rows"))
}

/// Copies row `i` into `row`, which must hold `PH_RECORD_COLUMNS` doubles.
///
/// # Safety
/// `rec` must be a live handle; `row` must point to `PH_RECORD_COLUMNS`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ph_record_row(rec: *const PhRecord, i: usize, row: *mut f64) -> i32 {
    guard(|| {
        let r = &handle(rec, "record")?.inner;
        let x = r.rows.get(i).ok_or_else(|| Fail(PH_ERR_RANGE, format!("row {i} of {}", r.rows.len())))?;
        if row.is_null() {
            return Err(Fail(PH_ERR_NULL, "row is NULL".into()));
        }
        let vals = [x.t, x.h, x.h_kin, x.h_grav, x.h_surf, x.port_flux, x.area, x.div_residual];
        ptr::copy_nonoverlapping(vals.as_ptr(), row, PH_RECORD_COLUMNS);
        Ok(())
    })
}

/// Energy drift, power-balance residual and area drift of a run.
///
/// # Safety
/// `rec` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_record_summary(
    rec: *const PhRecord,
    energy_drift: *mut f64,
    power_residual: *mut f64,
    area_drift: *mut f64,
) -> i32 {
    guard(|| {
        let r = &handle(rec, "record")?.inner;
        put(energy_drift, r.energy_drift(), "energy_drift")?;
        put(power_residual, r.power_residual(), "power_residual")?;
        put(area_drift, r.area_drift(), "area_drift")
    })
}

/// Writes `trajectory.csv` and the surface snapshots into `dir`.
///
/// # Safety
/// `rec` must be a live handle; `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ph_record_write(rec: *const PhRecord, dir: *const c_char) -> i32 {
    guard(|| {
        let r = &handle(rec, "record")?.inner;
        io::write_record(str_arg(dir, "dir")?, r)?;
        Ok(())
    })
}
