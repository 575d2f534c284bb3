use ph_core::brackets::{self, BracketKernel};
use ph_core::elliptic;
use ph_core::energetics::{Formulation, FunctionalDerivs, State};
use ph_core::forms::{self, HodgeSystem};
use ph_core::linalg;
use ph_core::meshgen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tank() -> HodgeSystem {
    HodgeSystem::new(&meshgen::tank(1.0, 0.5, 4, 2).unwrap()).unwrap()
}

fn scale_of(a: f64, b: f64) -> f64 {
    a.abs().max(b.abs()).max(1.0)
}

#[test]
fn skew_and_bilinear_all_formulations() {
    let h = tank();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for form in [Formulation::V, Formulation::Eta, Formulation::Omega] {
        let st = brackets::random_state(form, &h, &mut rng).unwrap();
        let kern = BracketKernel::new(&st, &h).unwrap();
        for port in [false, true] {
            for _ in 0..5 {
                let f1 = brackets::random_tuple(form, &h, &mut rng, true).unwrap();
                let f2 = brackets::random_tuple(form, &h, &mut rng, true).unwrap();
                let g = brackets::random_tuple(form, &h, &mut rng, true).unwrap();
                let fg = kern.eval(&f1, &g, port).unwrap();
                let gf = kern.eval(&g, &f1, port).unwrap();
                assert!((fg + gf).abs() < 1e-11 * scale_of(fg, gf), "{form:?} {fg} {gf}");
                assert!(kern.eval(&f1, &f1, port).unwrap().abs() < 1e-12 * scale_of(fg, 1.0));
                let (a, b) = (0.7, -1.3);
                let comb = f1.combine(a, &f2, b);
                let lhs = kern.eval(&comb, &g, port).unwrap();
                let rhs = a * fg + b * kern.eval(&f2, &g, port).unwrap();
                assert!((lhs - rhs).abs() < 1e-11 * scale_of(lhs, rhs), "{form:?} {lhs} {rhs}");
            }
        }
    }
}

#[test]
fn potential_flow_with_zero_surface_slots_vanishes() {
    let h = tank();
    let c = h.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mu: Vec<f64> = (0..c.boundary_vertices().len()).map(|k| (k as f64).sin()).collect();
    let v = forms::d(&elliptic::harmonic_lift(&mu, &h).unwrap(), &h).unwrap();
    let ns = c.sigma_vertices().len();
    let f = FunctionalDerivs::v(elliptic::random_solenoidal(&h, &mut rng, true).unwrap().into_values(), vec![0.0; ns]);
    let g = FunctionalDerivs::v(elliptic::random_solenoidal(&h, &mut rng, true).unwrap().into_values(), vec![0.0; ns]);
    let b = brackets::bracket_vs(v.values(), &f, &g, &h).unwrap();
    assert!(b.abs() < 1e-12, "{b:e}");
}

#[test]
fn v_and_eta_brackets_agree_under_change_of_variables() {
    let h = tank();
    let c = h.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..10 {
        let eta = elliptic::random_tangent(&h, &mut rng).unwrap().into_values();
        let mu: Vec<f64> = brackets::random_flux(c.boundary_vertices().len(), &mut rng);
        let v = linalg::add(&eta, &h.d0().mul_vec(elliptic::harmonic_lift(&mu, &h).unwrap().values()));
        let f = brackets::random_tuple(Formulation::V, &h, &mut rng, false).unwrap();
        let g = brackets::random_tuple(Formulation::V, &h, &mut rng, false).unwrap();
        let bv = brackets::bracket_vs(&v, &f, &g, &h).unwrap();
        let fe = brackets::v_to_eta(&f, &eta, &h).unwrap();
        let ge = brackets::v_to_eta(&g, &eta, &h).unwrap();
        let be = brackets::bracket_eta(&eta, &fe, &ge, &h).unwrap();
        assert!((bv - be).abs() < 1e-8 * scale_of(bv, be), "{bv} {be}");
        // and back
        let fv = brackets::eta_to_v(&fe, &eta, &h).unwrap();
        assert!(linalg::max_abs(&linalg::sub(fv.dv.as_ref().unwrap(), f.dv.as_ref().unwrap())) < 1e-9);
        assert!(linalg::max_abs(&linalg::sub(&fv.d_sigma, &f.d_sigma)) < 1e-9);
    }
}

#[test]
fn eta_and_omega_brackets_agree() {
    let h = tank();
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..10 {
        let eta = elliptic::random_tangent(&h, &mut rng).unwrap();
        let omega = forms::d(&eta, &h).unwrap();
        let f = brackets::random_tuple(Formulation::Eta, &h, &mut rng, true).unwrap();
        let g = brackets::random_tuple(Formulation::Eta, &h, &mut rng, true).unwrap();
        let be = brackets::bracket_eta_port(eta.values(), &f, &g, &h).unwrap();
        let fo = brackets::eta_to_omega(&f, &h).unwrap();
        let go = brackets::eta_to_omega(&g, &h).unwrap();
        let bo = brackets::bracket_omega_port(omega.values(), &fo, &go, &h).unwrap();
        assert!((be - bo).abs() < 1e-8 * scale_of(be, bo), "{be} {bo}");
        let back = brackets::omega_to_eta(&fo, &h).unwrap();
        assert!(linalg::max_abs(&linalg::sub(back.d_eta.as_ref().unwrap(), f.d_eta.as_ref().unwrap())) < 1e-9);
    }
}

#[test]
fn zero_eta_gives_canonical_bracket() {
    let h = tank();
    let c = h.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let f = brackets::random_tuple(Formulation::Eta, &h, &mut rng, false).unwrap();
    let g = brackets::random_tuple(Formulation::Eta, &h, &mut rng, false).unwrap();
    let b = brackets::bracket_eta(&vec![0.0; c.n_edges()], &f, &g, &h).unwrap();
    let sig = |x: &[f64]| elliptic::restrict_sigma(x, c);
    let canon = linalg::dot(&f.d_sigma, &sig(g.d_phi.as_ref().unwrap())) - linalg::dot(&g.d_sigma, &sig(f.d_phi.as_ref().unwrap()));
    assert!((b - canon).abs() < 1e-12 * scale_of(b, canon), "{b} {canon}");

    let fo = brackets::random_tuple(Formulation::Omega, &h, &mut rng, false).unwrap();
    let go = brackets::random_tuple(Formulation::Omega, &h, &mut rng, false).unwrap();
    let b = brackets::bracket_omega(&vec![0.0; c.n_triangles()], &fo, &go, &h).unwrap();
    let canon = linalg::dot(&fo.d_sigma, &sig(go.d_phi.as_ref().unwrap())) - linalg::dot(&go.d_sigma, &sig(fo.d_phi.as_ref().unwrap()));
    assert!((b - canon).abs() < 1e-12 * scale_of(b, canon));
}

#[test]
fn zero_potential_slots_reduce_to_velocity_bracket() {
    let h = tank();
    let c = h.complex();
    let (nb, ns) = (c.boundary_vertices().len(), c.sigma_vertices().len());
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let eta = elliptic::random_tangent(&h, &mut rng).unwrap().into_values();
    let uf = elliptic::random_tangent(&h, &mut rng).unwrap().into_values();
    let ug = elliptic::random_tangent(&h, &mut rng).unwrap().into_values();
    let be = brackets::bracket_eta(
        &eta,
        &FunctionalDerivs::eta(uf.clone(), vec![0.0; nb], vec![0.0; ns]),
        &FunctionalDerivs::eta(ug.clone(), vec![0.0; nb], vec![0.0; ns]),
        &h,
    )
    .unwrap();
    let bv = brackets::bracket_vs(&eta, &FunctionalDerivs::v(uf, vec![0.0; ns]), &FunctionalDerivs::v(ug, vec![0.0; ns]), &h).unwrap();
    assert!((be - bv).abs() < 1e-9 * scale_of(be, bv));
}

#[test]
fn port_variants_reduce_without_gamma_efforts() {
    let h = tank();
    let c = h.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for form in [Formulation::V, Formulation::Eta, Formulation::Omega] {
        let st = brackets::random_state(form, &h, &mut rng).unwrap();
        let kern = BracketKernel::new(&st, &h).unwrap();
        let f = brackets::random_tuple(form, &h, &mut rng, false).unwrap().with_port(vec![0.0; c.gamma_vertices().len()]);
        let g = brackets::random_tuple(form, &h, &mut rng, false).unwrap();
        assert_eq!(kern.eval(&f, &g, true).unwrap(), kern.eval(&f, &g, false).unwrap());
    }
}

#[test]
fn mismatched_tuples_rejected() {
    let h = tank();
    let mut rng = ChaCha8Rng::seed_from_u64(38);
    let st = brackets::random_state(Formulation::V, &h, &mut rng).unwrap();
    let f = brackets::random_tuple(Formulation::Eta, &h, &mut rng, false).unwrap();
    let kern = BracketKernel::new(&st, &h).unwrap();
    assert!(kern.eval(&f, &f, false).is_err());
}

#[test]
fn canonical_jacobi_is_exact() {
    let h = tank();
    let c = h.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(39);
    let st = State::Omega { omega: vec![0.0; c.n_triangles()], phi_b: vec![0.0; c.boundary_vertices().len()] };
    let t: Vec<_> = (0..3).map(|_| brackets::random_tuple(Formulation::Omega, &h, &mut rng, false).unwrap()).collect();
    let r = brackets::jacobi_fd_test(&st, &t[0], &t[1], &t[2], &h, 1e-4).unwrap();
    assert!(r.residual <= 1e-12, "{r:?}");
}

#[test]
fn jacobi_driver_reports_finite_values() {
    let h = tank();
    let c = h.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let st = brackets::random_state(Formulation::V, &h, &mut rng).unwrap();
    let t: Vec<_> = (0..3).map(|_| brackets::random_tuple(Formulation::V, &h, &mut rng, false).unwrap()).collect();
    let r = brackets::jacobi_fd_test(&st, &t[0], &t[1], &t[2], &h, 1e-4).unwrap();
    println!("v jacobi {r:?}");
    assert!(r.residual.is_finite() && r.terms.iter().all(|x| x.is_finite()));
    let st = State::Omega {
        omega: (0..c.n_triangles()).map(|k| (k as f64 * 0.37).sin()).collect(),
        phi_b: vec![0.0; c.boundary_vertices().len()],
    };
    let t: Vec<_> = (0..3).map(|_| brackets::random_tuple(Formulation::Omega, &h, &mut rng, false).unwrap()).collect();
    let r = brackets::jacobi_fd_test(&st, &t[0], &t[1], &t[2], &h, 1e-4).unwrap();
    println!("omega jacobi {r:?}");
    assert!(r.residual.is_finite());
    assert!(brackets::jacobi_fd_test(&st, &t[0], &t[1], &t[2], &h, 0.0).is_err());
}

#[test]
fn jacobi_defect_shrinks_for_smooth_tuples() {
    // tangent fields from stream functions vanishing on the walls of [0,1]×[-1,0]
    let mut defects = Vec::new();
    for n in [4usize, 8, 16] {
        let h = HodgeSystem::new(&meshgen::tank(1.0, 1.0, n, n).unwrap()).unwrap();
        let ns = h.complex().sigma_vertices().len();
        let mk = |a: f64, b: f64| {
            let s = forms::interpolate_2form(&h, move |p| {
                16.0 * p[0] * (1.0 - p[0]) * (p[1] + 1.0) * (-p[1]) * (1.0 + a * p[0] + b * p[1] * p[1] + (a * b * 3.0 * p[0] * p[1]).sin())
            });
            elliptic::codiff2(s.values(), &h).unwrap()
        };
        let st = State::V { v: mk(1.0, 2.0) };
        let t = [mk(2.0, 1.0), mk(1.0, 1.0), mk(3.0, 1.0)].map(|u| FunctionalDerivs::v(u, vec![0.0; ns]));
        defects.push(brackets::jacobi_fd_test(&st, &t[0], &t[1], &t[2], &h, 1e-4).unwrap().normalized);
    }
    assert!(defects[2] < defects[1] && defects[1] < defects[0], "{defects:?}");
}
