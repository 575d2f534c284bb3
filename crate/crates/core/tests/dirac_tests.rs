use ph_core::brackets::{self, BracketKernel};
use ph_core::dirac::{self, DiracMap, DiracTuple, EffortTuple, FlowTuple, Lift};
use ph_core::elliptic;
use ph_core::energetics::{Formulation, PhysParams, State};
use ph_core::forms::{self, HodgeSystem};
use ph_core::linalg;
use ph_core::meshgen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FORMS: [Formulation; 3] = [Formulation::V, Formulation::Eta, Formulation::Omega];

fn square() -> HodgeSystem {
    // 32 triangles
    HodgeSystem::new(&meshgen::unit_square(4).unwrap()).unwrap()
}

#[test]
fn zero_efforts_give_zero_flows() {
    let h = square();
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for form in FORMS {
        let st = brackets::random_state(form, &h, &mut rng).unwrap();
        let t = DiracMap::new(&st, &h).unwrap().apply(&EffortTuple::zeros(form, &h)).unwrap();
        assert!(t.flow.vol.iter().all(|&x| x == 0.0));
        assert!(t.flow.f_sigma.iter().chain(&t.flow.f_b).all(|&x| x == 0.0));
        assert_eq!(dirac::power_balance(&t, &h), (0.0, 0.0));
    }
}

#[test]
fn bilinear_form_symmetric_and_positive_on_diagonal_identification() {
    let h = square();
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for form in FORMS {
        let st = brackets::random_state(form, &h, &mut rng).unwrap();
        let map = DiracMap::new(&st, &h).unwrap();
        let a = map.apply(&dirac::random_effort(form, &h, &mut rng).unwrap()).unwrap();
        let b = map.apply(&dirac::random_effort(form, &h, &mut rng).unwrap()).unwrap();
        let ab = dirac::bilinear_form(&a, &b, &h).unwrap();
        let ba = dirac::bilinear_form(&b, &a, &h).unwrap();
        assert_eq!(ab, ba);
        let zero = map.apply(&EffortTuple::zeros(form, &h)).unwrap();
        assert_eq!(dirac::bilinear_form(&a, &zero, &h).unwrap(), 0.0);
        // flow equal to effort: the pairing is twice a squared norm
        let e = a.effort.clone();
        let f = FlowTuple {
            formulation: form,
            vol: e.vol.clone(),
            f_phi: e.e_phi.clone(),
            f_sigma: e.e_sigma.clone(),
            f_b: e.e_b.clone(),
        };
        let t = DiracTuple { flow: f, effort: e, recovery_residual: 0.0 };
        assert!(dirac::bilinear_form(&t, &t, &h).unwrap() > 0.0);
    }
}

#[test]
fn self_orthogonality_and_rank() {
    let h = square();
    assert_eq!(h.complex().n_triangles(), 32);
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for form in FORMS {
        let st = brackets::random_state(form, &h, &mut rng).unwrap();
        let rep = dirac::self_orthogonality_audit(&st, &h, 20, &mut rng).unwrap();
        assert!(rep.max_residual <= 1e-9, "{form:?} {:e}", rep.max_residual);
        assert!(rep.rank_ok(), "{form:?} rank {} vs {}", rep.rank, rep.dim_flow);
        assert_eq!(rep.pairs.len(), 210);
    }
}

#[test]
fn d3_with_zero_vorticity_is_canonical() {
    let h = square();
    let c = h.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    let st = State::Omega { omega: vec![0.0; c.n_triangles()], phi_b: vec![0.0; c.boundary_vertices().len()] };
    let rep = dirac::self_orthogonality_audit(&st, &h, 20, &mut rng).unwrap();
    assert!(rep.max_residual <= 1e-11, "{:e}", rep.max_residual);
    let e = dirac::random_effort(Formulation::Omega, &h, &mut rng).unwrap();
    let t = dirac::d3_map(&e, &vec![0.0; c.n_triangles()], &h).unwrap();
    assert!(linalg::max_abs(&t.flow.vol) < 1e-12);
}

#[test]
fn d2_with_zero_eta_has_no_eta_flow() {
    let h = square();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let e = dirac::random_effort(Formulation::Eta, &h, &mut rng).unwrap();
    let t = dirac::d2_map(&e, &vec![0.0; h.complex().n_edges()], &h).unwrap();
    assert!(linalg::max_abs(&t.flow.vol) < 1e-10);
    assert!(t.recovery_residual < 1e-10);
    // Σ flow is minus the potential effort on Σ
    let es = elliptic::restrict_sigma(e.e_phi.as_ref().unwrap(), h.complex());
    assert!(linalg::max_abs(&linalg::add(&t.flow.f_sigma, &es)) < 1e-10);
}

#[test]
fn d1_lifting_independence() {
    let h = square();
    let mut rng = ChaCha8Rng::seed_from_u64(56);
    let st = brackets::random_state(Formulation::V, &h, &mut rng).unwrap();
    let map = DiracMap::new(&st, &h).unwrap();
    let e = dirac::random_effort(Formulation::V, &h, &mut rng).unwrap();
    let a = map.apply_with_lift(&e, Lift::Harmonic).unwrap();
    let b = map.apply_with_lift(&e, Lift::Zero).unwrap();
    assert_eq!(a.flow.f_sigma, b.flow.f_sigma);
    // the flows differ by an interior gradient, invisible to solenoidal efforts
    let diff = linalg::sub(&a.flow.vol, &b.flow.vol);
    assert!(linalg::max_abs(&diff) > 1e-6);
    for _ in 0..5 {
        let u = elliptic::random_solenoidal(&h, &mut rng, true).unwrap();
        let p = linalg::dot(u.values(), &h.mass(1).mul_vec(&diff));
        assert!(p.abs() < 1e-9, "{p:e}");
    }
}

#[test]
fn interior_product_kernel_antisymmetric() {
    let h = square();
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    let v = elliptic::random_solenoidal(&h, &mut rng, true).unwrap();
    let zeta = forms::vorticity_density(v.values(), &h);
    let u1 = elliptic::random_solenoidal(&h, &mut rng, true).unwrap().into_values();
    let u2 = elliptic::random_solenoidal(&h, &mut rng, true).unwrap().into_values();
    let a = linalg::dot(&u2, &forms::interior_product_rhs(&u1, &zeta, &h));
    let b = linalg::dot(&u1, &forms::interior_product_rhs(&u2, &zeta, &h));
    assert!((a + b).abs() < 1e-11 * a.abs().max(1.0));
}

#[test]
fn closed_efforts_conserve_power() {
    let h = square();
    let c = h.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(58);
    for form in FORMS {
        let st = brackets::random_state(form, &h, &mut rng).unwrap();
        let mut e = dirac::random_effort(form, &h, &mut rng).unwrap();
        e.e_b = vec![0.0; c.gamma_vertices().len()];
        let t = DiracMap::new(&st, &h).unwrap().apply(&e).unwrap();
        let (inner, port) = dirac::power_balance(&t, &h);
        assert_eq!(port, 0.0);
        let (ne, nf) = (linalg::norm(&e.vol).max(1.0), linalg::norm(&t.flow.vol).max(1.0));
        assert!(inner.abs() <= 1e-9 * ne * nf, "{form:?} {inner:e}");
        // with a port effort the balance closes through Γ
        let e = dirac::random_effort(form, &h, &mut rng).unwrap();
        let t = DiracMap::new(&st, &h).unwrap().apply(&e).unwrap();
        let (inner, port) = dirac::power_balance(&t, &h);
        assert!((inner + port).abs() <= 1e-9 * ne * nf);
    }
}

#[test]
fn dirac_bracket_matches_port_bracket() {
    let h = square();
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    for form in FORMS {
        let st = brackets::random_state(form, &h, &mut rng).unwrap();
        let kern = BracketKernel::new(&st, &h).unwrap();
        for _ in 0..3 {
            let f = brackets::random_tuple(form, &h, &mut rng, true).unwrap();
            let g = brackets::random_tuple(form, &h, &mut rng, true).unwrap();
            let a = dirac::dirac_bracket(&st, &f, &g, &h).unwrap();
            let b = kern.eval(&f, &g, true).unwrap();
            assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "{form:?} {a} {b}");
        }
    }
}

#[test]
fn hamiltonian_efforts_give_kinematic_surface_flow() {
    let h = HodgeSystem::new(&meshgen::tank(1.0, 0.5, 6, 3).unwrap()).unwrap();
    let c = h.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let v = elliptic::random_solenoidal(&h, &mut rng, true).unwrap();
    let p = PhysParams::new(1.0, 0.07, 9.81).unwrap();
    let t = dirac::hamiltonian_flow(&State::V { v: v.values().to_vec() }, &p, &h).unwrap();
    let wnt = forms::weak_normal_trace(&v, &h).unwrap();
    let sig = elliptic::restrict_sigma(&wnt, c);
    assert!(linalg::max_abs(&linalg::add(&t.flow.f_sigma, &sig)) < 1e-14);
}

#[test]
fn annulus_rejected() {
    let h = HodgeSystem::new(&meshgen::annulus(0.5, 1.0, 2, 10).unwrap()).unwrap();
    let st = State::V { v: vec![0.0; h.complex().n_edges()] };
    assert!(DiracMap::new(&st, &h).is_err());
}
