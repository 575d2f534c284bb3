use ph_core::dynamics::{self, Integrator, Scenario, StepperKind, SurfaceInit, VelocityInit};
use ph_core::energetics::PhysParams;
use ph_core::forms::HodgeSystem;
use ph_core::{io, meshgen, suites, PhError};

fn sys(c: ph_core::SimplicialComplex) -> HodgeSystem {
    HodgeSystem::new(&c).unwrap()
}

#[test]
fn forms_elliptic_energetics_pass_on_tank() {
    let h = sys(meshgen::tank(1.0, 0.5, 8, 4).unwrap());
    for name in ["forms", "elliptic", "energetics"] {
        let checks = suites::run_suite(name, &h, 3).unwrap();
        assert!(!checks.is_empty());
        for c in &checks {
            assert!(c.pass, "{name}: {c:?}");
        }
    }
}

#[test]
fn suites_are_seed_deterministic() {
    let h = sys(meshgen::unit_square(4).unwrap());
    for name in suites::SUITES {
        let a = suites::run_suite(name, &h, 11).unwrap();
        let b = suites::run_suite(name, &h, 11).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let a = suites::run_suite("forms", &h, 1).unwrap();
    let b = suites::run_suite("forms", &h, 2).unwrap();
    assert_ne!(a, b);
}

#[test]
fn unknown_suite_and_annulus() {
    let h = sys(meshgen::annulus(0.5, 1.0, 2, 12).unwrap());
    assert!(matches!(suites::run_suite("nope", &h, 0), Err(PhError::Config(_))));
    assert!(matches!(suites::run_suite("dirac", &h, 0), Err(PhError::HarmonicUnsupported { .. })));
    let e = suites::run_suite("elliptic", &h, 0).unwrap();
    assert!(e.iter().any(|c| c.name == "hodge_betti_rejection" && c.pass));
}

#[test]
fn brackets_suite_reports_jacobi_only_on_small_meshes() {
    let small = suites::run_suite("brackets", &sys(meshgen::tank(1.0, 0.5, 4, 2).unwrap()), 0).unwrap();
    let large = suites::run_suite("brackets", &sys(meshgen::tank(1.0, 0.5, 8, 4).unwrap()), 0).unwrap();
    assert!(small.iter().any(|c| c.name == "jacobi_canonical" && c.pass));
    assert!(!large.iter().any(|c| c.name.starts_with("jacobi")));
    for c in small.iter().chain(&large).filter(|c| !c.name.starts_with("jacobi")) {
        assert!(c.pass, "{c:?}");
    }
}

#[test]
fn check_csv_format() {
    let c = vec![suites::CheckResult::at_most("a", 0.5, 1.0), suites::CheckResult::at_most("b", 2.0, 1.0)];
    assert!(c[0].pass && !c[1].pass);
    let s = suites::checks_to_csv("forms", &c);
    assert_eq!(
        s,
        "suite,check,value,threshold,pass\n\
         forms,a,5.00000000000000000e-1,1.00000000000000000e0,true\n\
         forms,b,2.00000000000000000e0,1.00000000000000000e0,false\n"
    );
}

#[test]
fn atomic_write_replaces_and_cleans_up() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.csv");
    io::write_atomic(&p, "one\n").unwrap();
    io::write_atomic(&p, "two\n").unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap(), "two\n");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    assert!(io::write_atomic(dir.path().join("missing/f.csv"), "x").is_err());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn record_files() {
    let sc = Scenario {
        mesh: meshgen::tank(1.0, 0.5, 4, 2).unwrap(),
        stepper: StepperKind::Potential,
        params: PhysParams::new(1.0, 0.0, 9.81).unwrap(),
        surface: SurfaceInit::Cosine { amplitude: 0.01, mode: 1 },
        velocity: VelocityInit::Rest,
        inflow: None,
        dt: 0.01,
        t_end: 0.04,
        integrator: Integrator::Rk4,
        output_every: 2,
        snapshot_every: 2,
    };
    let rec = dynamics::run_scenario(&sc).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = io::write_record(dir.path().join("o"), &rec).unwrap();
    let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["trajectory.csv", "sigma_0.csv", "sigma_2.csv", "sigma_4.csv"]);
    assert_eq!(std::fs::read_to_string(&files[0]).unwrap(), rec.to_csv());
    assert_eq!(io::snapshot_csv(&[[1.0, -0.5]]), "x,y\n1.00000000000000000e0,-5.00000000000000000e-1\n");
}
