//! `ph` command-line front end: scenario runs, property suites, mesh summaries.
//!
//! Exit codes: 0 success, 1 runtime failure or a threshold miss, 2 bad
//! config, mesh or arguments.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use ini::Ini;

use crate::complex::{load_mesh, Label, SimplicialComplex};
use crate::dynamics::{
    self, Inflow, InflowTime, Integrator, Scenario, StepperKind, SurfaceInit, TrajectoryRecord, VelocityInit,
};
use crate::energetics::PhysParams;
use crate::error::{PhError, Result};
use crate::forms::HodgeSystem;
use crate::io;
use crate::suites;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ph", version, about = "Port-Hamiltonian free-surface flow on triangle meshes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate the scenario described by an INI config.
    Run { config: PathBuf },
    /// Run a property suite (forms, elliptic, brackets, dirac, energetics).
    Check {
        suite: String,
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// directory for the per-check CSV (and the Dirac audit report)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print counts, Betti numbers and boundary labels of a mesh file.
    MeshInfo { path: PathBuf },
}

/// Tolerances a run must meet; `None` disables the check.
#[derive(Clone, Debug, PartialEq)]
pub struct Thresholds {
    pub energy_drift: Option<f64>,
    pub power_residual: Option<f64>,
    pub area_drift: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub thresholds: Thresholds,
}

/// Error classes map onto exit codes: anything about the inputs is 2.
pub fn exit_code_for(e: &PhError) -> i32 {
    match e {
        PhError::Parse { .. } | PhError::Validation(_) | PhError::Config(_) | PhError::Io(_) => EXIT_USAGE,
        // the mesh cannot host the requested suite
        PhError::HarmonicUnsupported { .. } => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

const KEYS: &[(&str, &[&str])] = &[
    (
        "scenario",
        &[
            "mesh",
            "stepper",
            "integrator",
            "dt",
            "t_end",
            "surface",
            "amplitude",
            "mode",
            "velocity",
            "velocity_amplitude",
            "inflow",
            "inflow_amplitude",
            "inflow_t0",
            "inflow_width",
            "inflow_table",
            "inflow_x0",
            "inflow_x1",
        ],
    ),
    ("params", &["rho", "tau", "g0"]),
    ("output", &["dir", "every", "snapshot_every", "seed", "energy_drift_tol", "power_tol", "area_tol"]),
];

struct Section<'a> {
    name: &'a str,
    map: HashMap<String, String>,
}

impl Section<'_> {
    fn str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.str(key).ok_or_else(|| PhError::Config(format!("[{}] is missing '{key}'", self.name)))
    }

    fn num<T: std::str::FromStr>(&self, key: &str, default: Option<T>) -> Result<T> {
        match self.str(key) {
            Some(s) => s
                .parse()
                .map_err(|_| PhError::Config(format!("[{}] {key} = '{s}' is not a valid number", self.name))),
            None => default.ok_or_else(|| PhError::Config(format!("[{}] is missing '{key}'", self.name))),
        }
    }

    /// `off` disables a tolerance; a number must be positive.
    fn tol(&self, key: &str, default: Option<f64>) -> Result<Option<f64>> {
        match self.str(key) {
            Some("off") => Ok(None),
            Some(_) => {
                let v: f64 = self.num(key, None)?;
                if !(v > 0.0) || !v.is_finite() {
                    return Err(PhError::Config(format!("[{}] {key} must be positive", self.name)));
                }
                Ok(Some(v))
            }
            None => Ok(default),
        }
    }
}

fn sections(ini: &Ini) -> Result<HashMap<String, HashMap<String, String>>> {
    let mut out: HashMap<String, HashMap<String, String>> = HashMap::new();
    for (name, props) in ini.iter() {
        let Some(name) = name else {
            if props.iter().next().is_some() {
                return Err(PhError::Config("keys outside a section".into()));
            }
            continue;
        };
        let Some((_, allowed)) = KEYS.iter().find(|(s, _)| *s == name) else {
            return Err(PhError::Config(format!("unknown section [{name}]")));
        };
        let entry = out.entry(name.to_string()).or_default();
        for (k, v) in props.iter() {
            if !allowed.contains(&k) {
                return Err(PhError::Config(format!("unknown key '{k}' in [{name}]")));
            }
            entry.insert(k.to_string(), v.trim().to_string());
        }
    }
    Ok(out)
}

fn parse_table(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (t, a) = p
                .split_once(':')
                .ok_or_else(|| PhError::Config(format!("inflow_table entry '{p}' is not t:value")))?;
            let parse = |x: &str| {
                x.trim().parse::<f64>().map_err(|_| PhError::Config(format!("inflow_table entry '{p}' is not numeric")))
            };
            Ok((parse(t)?, parse(a)?))
        })
        .collect()
}

/// Reads an INI run config; relative paths resolve against its directory.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let ini = Ini::load_from_file(path).map_err(|e| match e {
        ini::Error::Io(e) => PhError::Io(e),
        ini::Error::Parse(e) => PhError::Config(format!("{}: {e}", path.display())),
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut secs = sections(&ini)?;
    let mut take = |name: &'static str| Section { name, map: secs.remove(name).unwrap_or_default() };
    let sc = take("scenario");
    let pr = take("params");
    let out = take("output");

    let mesh_path = base.join(sc.required("mesh")?);
    let mesh = load_mesh(&mesh_path).map_err(|e| match e {
        PhError::Io(io) => PhError::Config(format!("cannot read mesh {}: {io}", mesh_path.display())),
        other => other,
    })?;

    let stepper = match sc.str("stepper").unwrap_or("potential") {
        "potential" => StepperKind::Potential,
        "rotational" => StepperKind::Rotational,
        s => return Err(PhError::Config(format!("unknown stepper '{s}'"))),
    };
    let integrator = match sc.str("integrator").unwrap_or("implicit-midpoint") {
        "implicit-midpoint" | "midpoint" => Integrator::ImplicitMidpoint,
        "rk4" => Integrator::Rk4,
        s => return Err(PhError::Config(format!("unknown integrator '{s}'"))),
    };
    let surface = match sc.str("surface").unwrap_or("flat") {
        "flat" => SurfaceInit::Flat,
        "cosine" => SurfaceInit::Cosine { amplitude: sc.num("amplitude", None)?, mode: sc.num("mode", Some(1))? },
        s => return Err(PhError::Config(format!("unknown surface profile '{s}'"))),
    };
    let velocity = match sc.str("velocity").unwrap_or("rest") {
        "rest" => VelocityInit::Rest,
        "taylor-green" => VelocityInit::TaylorGreen { amplitude: sc.num("velocity_amplitude", None)? },
        "rigid-rotation" => VelocityInit::RigidRotation { omega: sc.num("velocity_amplitude", None)? },
        s => return Err(PhError::Config(format!("unknown velocity profile '{s}'"))),
    };
    let inflow = match sc.str("inflow").unwrap_or("none") {
        "none" => None,
        kind => {
            let time = match kind {
                "pulse" => InflowTime::Pulse {
                    amp: sc.num("inflow_amplitude", None)?,
                    t0: sc.num("inflow_t0", None)?,
                    width: sc.num("inflow_width", None)?,
                },
                "table" => InflowTime::Table(parse_table(sc.required("inflow_table")?)?),
                s => return Err(PhError::Config(format!("unknown inflow kind '{s}'"))),
            };
            Some(Inflow { time, x0: sc.num("inflow_x0", None)?, x1: sc.num("inflow_x1", None)? })
        }
    };
    let params = PhysParams::new(pr.num("rho", Some(1.0))?, pr.num("tau", Some(0.0))?, pr.num("g0", Some(9.81))?)
        .map_err(|e| PhError::Config(e.to_string()))?;

    let scenario = Scenario {
        mesh,
        stepper,
        params,
        surface,
        velocity,
        inflow,
        dt: sc.num("dt", None)?,
        t_end: sc.num("t_end", None)?,
        integrator,
        output_every: out.num("every", Some(1))?,
        snapshot_every: out.num("snapshot_every", Some(0))?,
    };
    scenario.validate()?;

    // drift and area audits only make sense for a closed system
    let closed = scenario.inflow.is_none();
    let thresholds = Thresholds {
        energy_drift: out.tol("energy_drift_tol", closed.then_some(1e-4))?,
        power_residual: out.tol("power_tol", (!closed).then_some(1e-3))?,
        area_drift: out.tol("area_tol", (closed && stepper == StepperKind::Potential).then_some(1e-5))?,
    };
    Ok(RunConfig {
        scenario,
        out_dir: base.join(out.str("dir").unwrap_or("out")),
        seed: out.num("seed", Some(0))?,
        thresholds,
    })
}

/// (label, value, threshold) for every active tolerance.
pub fn evaluate(rec: &TrajectoryRecord, th: &Thresholds) -> Vec<(&'static str, f64, f64)> {
    let mut out = Vec::new();
    if let Some(t) = th.energy_drift {
        out.push(("energy_drift", rec.energy_drift(), t));
    }
    if let Some(t) = th.power_residual {
        out.push(("power_residual", rec.power_residual(), t));
    }
    if let Some(t) = th.area_drift {
        out.push(("area_drift", rec.area_drift(), t));
    }
    out
}

pub fn cmd_run(config: &Path) -> i32 {
    let cfg = match parse_config(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let rec = match dynamics::run_scenario(&cfg.scenario) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAIL;
        }
    };
    if let Err(e) = io::write_record(&cfg.out_dir, &rec) {
        eprintln!("error: writing output: {e}");
        return EXIT_FAIL;
    }
    println!("steps = {}", cfg.scenario.n_steps());
    println!("t_end = {:.17e}", rec.rows.last().map_or(0.0, |r| r.t));
    println!("energy_drift = {:.17e}", rec.energy_drift());
    println!("max_power_residual = {:.17e}", rec.power_residual());
    println!("area_drift = {:.17e}", rec.area_drift());
    let mut ok = true;
    for (name, v, t) in evaluate(&rec, &cfg.thresholds) {
        let pass = v <= t;
        ok &= pass;
        println!("{name}: {v:.3e} <= {t:.1e} {}", if pass { "PASS" } else { "FAIL" });
    }
    println!("output = {}", cfg.out_dir.join("trajectory.csv").display());
    if ok {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn load_system(path: &Path) -> std::result::Result<HodgeSystem, i32> {
    let c = load_mesh(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_USAGE
    })?;
    HodgeSystem::new(&c).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_USAGE
    })
}

pub fn cmd_check(suite: &str, mesh: &Path, seed: u64, out: Option<&Path>) -> i32 {
    if !suites::SUITES.contains(&suite) {
        eprintln!("error: unknown suite '{suite}' (expected one of {})", suites::SUITES.join(", "));
        return EXIT_USAGE;
    }
    let h = match load_system(mesh) {
        Ok(h) => h,
        Err(code) => return code,
    };
    let res = if suite == "dirac" {
        h.complex().require_simply_connected().and_then(|_| suites::dirac_suite(&h, seed, 5)).map(|(c, a)| (c, Some(a)))
    } else {
        suites::run_suite(suite, &h, seed).map(|c| (c, None))
    };
    let (checks, audits) = match res {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let csv = suites::checks_to_csv(suite, &checks);
    print!("{csv}");
    if let Some(dir) = out {
        let mut files = vec![(dir.join(format!("check_{suite}.csv")), csv)];
        if let Some(a) = audits {
            files.push((dir.join("dirac_audit.csv"), suites::audit_csv(&a, 1e-9)));
        }
        let written = std::fs::create_dir_all(dir)
            .map_err(PhError::from)
            .and_then(|_| files.iter().try_for_each(|(p, body)| io::write_atomic(p, body)));
        if let Err(e) = written {
            eprintln!("error: writing output: {e}");
            return EXIT_FAIL;
        }
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!("# seed={seed} checks={} failed={failed}", checks.len());
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

pub fn mesh_info(c: &SimplicialComplex) -> String {
    let (b0, b1) = c.betti_numbers();
    let mut s = String::new();
    s.push_str(&format!("vertices = {}\n", c.n_vertices()));
    s.push_str(&format!("edges = {}\n", c.n_edges()));
    s.push_str(&format!("triangles = {}\n", c.n_triangles()));
    s.push_str(&format!("betti = {b0} {b1}\n"));
    s.push_str(&format!("boundary_edges = {}\n", c.boundary_edges().len()));
    s.push_str(&format!("sigma_edges = {}\n", c.count_label(Label::Sigma)));
    s.push_str(&format!("gamma_edges = {}\n", c.count_label(Label::Gamma)));
    s.push_str(&format!("sigma_interior_vertices = {}\n", c.sigma_vertices().len()));
    s.push_str(&format!("area = {:.17e}\n", c.total_area()));
    s.push_str(&format!("mesh_size = {:.17e}\n", c.mesh_size()));
    s
}

pub fn cmd_mesh_info(path: &Path) -> i32 {
    match load_mesh(path) {
        Ok(c) => {
            print!("{}", mesh_info(&c));
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            EXIT_USAGE
        }
    }
}

/// Caps the rayon pool from `PH_THREADS`.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("PH_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| PhError::Config(format!("PH_THREADS must be a positive integer, got '{v}'")))?;
    // a pool built earlier in the process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::Check { suite, mesh, seed, out } => cmd_check(&suite, &mesh, seed, out.as_deref()),
        Command::MeshInfo { path } => cmd_mesh_info(&path),
    }
}
