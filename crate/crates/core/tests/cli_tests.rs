use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ph_core::cli;
use ph_core::meshgen;

fn ph(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ph"));
    cmd.args(args).env_remove("PH_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../meshes").join(name)
}

/// Config in a fresh directory next to a copy of the 16x8 tank.
fn setup(body: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tank.mesh"), meshgen::tank(1.0, 0.5, 16, 8).unwrap().to_text()).unwrap();
    let cfg = dir.path().join("run.ini");
    std::fs::write(&cfg, body).unwrap();
    (dir, cfg)
}

const STANDING: &str = "[scenario]
mesh = tank.mesh
dt = 0.004
t_end = 0.4
surface = cosine
amplitude = 0.005
mode = 2
[params]
g0 = 9.81
[output]
dir = out
snapshot_every = 50
";

#[test]
fn standing_wave_run_writes_trajectory() {
    let (dir, cfg) = setup(STANDING);
    let o = ph(&["run", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,H,H_kin,H_grav,H_surf,port_flux,area,div_residual");
    assert_eq!(lines.count(), 101);
    for step in [0, 50, 100] {
        let s = std::fs::read_to_string(dir.path().join(format!("out/sigma_{step}.csv"))).unwrap();
        assert!(s.starts_with("x,y\n"));
        // 17 surface vertices including both corners
        assert_eq!(s.lines().count(), 1 + 17);
    }
    assert!(stdout(&o).contains("energy_drift"));
    // nothing staged is left behind
    let stray = std::fs::read_dir(dir.path().join("out")).unwrap().filter(|e| {
        e.as_ref().unwrap().file_name().to_string_lossy().starts_with('.')
    });
    assert_eq!(stray.count(), 0);
}

#[test]
fn runs_are_bitwise_deterministic() {
    let (dir, cfg) = setup(STANDING);
    assert_eq!(code(&ph(&["run", cfg.to_str().unwrap()], &[])), 0);
    let a = std::fs::read(dir.path().join("out/trajectory.csv")).unwrap();
    assert_eq!(code(&ph(&["run", cfg.to_str().unwrap()], &[("PH_THREADS", "1")])), 0);
    let b = std::fs::read(dir.path().join("out/trajectory.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bad_configs_exit_2() {
    let cases = [
        STANDING.replace("dt = 0.004", "dt = -0.004"),
        STANDING.replace("tank.mesh", "missing.mesh"),
        STANDING.replace("mode = 2", "mode = 2\nmodes = 3"),
        STANDING.replace("dt = 0.004", "dt = fast"),
        STANDING.replace("surface = cosine", "surface = wiggly"),
        STANDING.replace("[params]", "[params]\nrho = -1"),
        STANDING.replace("mesh = tank.mesh\n", ""),
    ];
    for body in cases {
        let (dir, cfg) = setup(&body);
        let o = ph(&["run", cfg.to_str().unwrap()], &[]);
        assert_eq!(code(&o), 2, "{body}\n{}", String::from_utf8_lossy(&o.stderr));
        assert!(!dir.path().join("out").exists());
    }
    assert_eq!(code(&ph(&["run", "/nonexistent/run.ini"], &[])), 2);
}

#[test]
fn failed_run_leaves_no_output() {
    // a huge time step cannot converge, the run aborts mid-way
    let body = STANDING.replace("dt = 0.004", "dt = 0.2").replace("amplitude = 0.005", "amplitude = 0.2");
    let (dir, cfg) = setup(&body);
    let o = ph(&["run", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(!dir.path().join("out/trajectory.csv").exists());
}

#[test]
fn missed_threshold_exits_1() {
    let body = STANDING.replace("snapshot_every = 50", "energy_drift_tol = 1e-30");
    let (dir, cfg) = setup(&body);
    let o = ph(&["run", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL"));
    // the trajectory is still written
    assert!(dir.path().join("out/trajectory.csv").exists());
}

#[test]
fn check_forms_and_dirac_pass() {
    for (suite, mesh) in [("forms", "tank_16x8.mesh"), ("dirac", "unit_square_4.mesh"), ("elliptic", "annulus_3x16.mesh")] {
        let o = ph(&["check", suite, "--mesh", shipped(mesh).to_str().unwrap()], &[]);
        assert_eq!(code(&o), 0, "{suite}\n{}", stdout(&o));
        let out = stdout(&o);
        assert!(out.starts_with("suite,check,value,threshold,pass\n"));
        assert!(!out.contains(",false"));
    }
}

#[test]
fn check_writes_reports_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = shipped("unit_square_4.mesh");
    let run = |sub: &str, threads: &str| {
        let out = dir.path().join(sub);
        let o = ph(
            &["check", "dirac", "--mesh", mesh.to_str().unwrap(), "--seed", "7", "--out", out.to_str().unwrap()],
            &[("PH_THREADS", threads)],
        );
        assert_eq!(code(&o), 0);
        (std::fs::read(out.join("check_dirac.csv")).unwrap(), std::fs::read_to_string(out.join("dirac_audit.csv")).unwrap())
    };
    let (a, audit) = run("a", "1");
    let (b, audit_b) = run("b", "4");
    assert_eq!(a, b);
    assert_eq!(audit, audit_b);
    assert!(audit.starts_with("formulation,state_id,pair_id,normalized_residual\n"));
    // 3 formulations x 5 states x 210 pairs, plus header and summary
    assert_eq!(audit.lines().count(), 3 * 5 * 210 + 2);
    assert!(audit.lines().last().unwrap().contains("pass=true"));
}

#[test]
fn check_usage_errors_exit_2() {
    let mesh = shipped("unit_square_4.mesh");
    let m = mesh.to_str().unwrap();
    assert_eq!(code(&ph(&["check", "nonsense", "--mesh", m], &[])), 2);
    assert_eq!(code(&ph(&["check", "forms", "--mesh", "/nonexistent.mesh"], &[])), 2);
    assert_eq!(code(&ph(&["check", "forms"], &[])), 2);
    assert_eq!(code(&ph(&["check", "forms", "--mesh", m], &[("PH_THREADS", "zero")])), 2);
    let annulus = shipped("annulus_3x16.mesh");
    assert_eq!(code(&ph(&["check", "dirac", "--mesh", annulus.to_str().unwrap()], &[])), 2);
    assert_eq!(code(&ph(&["frobnicate"], &[])), 2);
}

#[test]
fn mesh_info_reports_counts() {
    let o = ph(&["mesh-info", shipped("unit_square_4.mesh").to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("triangles = 32\n"));
    assert!(s.contains("vertices = 25\n"));
    assert!(s.contains("betti = 1 0\n"));
    let o = ph(&["mesh-info", shipped("annulus_3x16.mesh").to_str().unwrap()], &[]);
    assert!(stdout(&o).contains("betti = 1 1\n"));
    assert_eq!(code(&ph(&["mesh-info", "/nonexistent.mesh"], &[])), 2);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in std::fs::read_dir(&dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "ini") {
            let cfg = cli::parse_config(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            assert!(cfg.scenario.n_steps() > 0);
            n += 1;
        }
    }
    assert_eq!(n, 4);
}

#[test]
fn config_defaults_and_tolerances() {
    let (_dir, cfg) = setup(STANDING);
    let c = cli::parse_config(&cfg).unwrap();
    assert_eq!(c.thresholds, cli::Thresholds { energy_drift: Some(1e-4), power_residual: None, area_drift: Some(1e-5) });
    assert_eq!(c.seed, 0);
    let (_dir, cfg) = setup(&STANDING.replace("dir = out", "dir = out\narea_tol = off\npower_tol = 0.5"));
    let c = cli::parse_config(&cfg).unwrap();
    assert_eq!(c.thresholds.area_drift, None);
    assert_eq!(c.thresholds.power_residual, Some(0.5));
    let (_dir, cfg) = setup(&STANDING.replace("dir = out", "dir = out\npower_tol = -1"));
    assert!(cli::parse_config(&cfg).is_err());
}
