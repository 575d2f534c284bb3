use ph_core::complex::Label;
use ph_core::elliptic::{self, NeumannData};
use ph_core::energetics::{self, FunctionalDerivs, PhysParams, State, SurfaceState};
use ph_core::forms::{self, HodgeSystem};
use ph_core::linalg;
use ph_core::meshgen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square(n: usize) -> HodgeSystem {
    HodgeSystem::new(&meshgen::unit_square(n).unwrap()).unwrap()
}

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn params_validated() {
    assert!(PhysParams::new(0.0, 1.0, 1.0).is_err());
    assert!(PhysParams::new(1.0, -1.0, 1.0).is_err());
    assert!(PhysParams::new(1.0, 0.0, -9.8).is_err());
    assert_eq!(PhysParams::new(2.0, 1.0, 9.8).unwrap().p_bar, 0.0);
}

#[test]
fn hamiltonian_v_examples() {
    let h = square(4);
    let ne = h.complex().n_edges();
    let p = PhysParams::new(2.0, 0.6, 0.0).unwrap();
    // flat top at y = 1, unit length
    let e = energetics::hamiltonian_v(&vec![0.0; ne], &p, &h).unwrap();
    assert!((e.total - 0.3).abs() < 1e-14);
    let p = PhysParams::new(1.0, 0.0, 0.0).unwrap();
    let v = forms::interpolate_1form(&h, |_| [1.0, 0.0]);
    let e = energetics::hamiltonian_v(v.values(), &p, &h).unwrap();
    assert!((e.total - 0.5).abs() < 1e-10);
    assert!((e.kinetic - 0.5).abs() < 1e-10);
}

#[test]
fn gravity_term_after_raising_surface() {
    let (len, depth, dz, g0) = (1.0, 0.5, 0.03, 9.81);
    let c = meshgen::tank(len, depth, 8, 4).unwrap();
    // stretch vertically so the top moves from 0 to dz
    let pos = c.vertices().iter().map(|p| [p[0], p[1] + dz * (p[1] + depth) / depth]).collect();
    let raised = c.with_positions(pos).unwrap();
    let p = PhysParams::new(1.0, 0.0, g0).unwrap();
    let e0 = energetics::hamiltonian_v(&vec![0.0; c.n_edges()], &p, &HodgeSystem::new(&c).unwrap()).unwrap();
    let e1 = energetics::hamiltonian_v(&vec![0.0; c.n_edges()], &p, &HodgeSystem::new(&raised).unwrap()).unwrap();
    // ∫ y over [0,L]×[-d, top]
    let oracle = |top: f64| g0 * len * (top * top - depth * depth) / 2.0;
    assert!((e0.gravity - oracle(0.0)).abs() < 1e-12);
    assert!(((e1.gravity - e0.gravity) - (oracle(dz) - oracle(0.0))).abs() < 1e-12);
}

#[test]
fn hamiltonian_eta_boundary_term_is_dirichlet_energy() {
    let h = square(5);
    let c = h.complex();
    let mu: Vec<f64> = c.boundary_vertices().iter().map(|&v| c.vertices()[v][0]).collect();
    let p = PhysParams::new(1.0, 0.0, 0.0).unwrap();
    let e = energetics::hamiltonian_eta(&vec![0.0; c.n_edges()], &mu, &p, &h).unwrap();
    let phi = elliptic::harmonic_lift(&mu, &h).unwrap();
    let dphi = forms::d(&phi, &h).unwrap();
    let direct = 0.5 * forms::inner(&dphi, &dphi, &h).unwrap();
    assert!((e.kinetic - direct).abs() < 1e-9);
    assert!((e.kinetic - 0.5).abs() < 1e-9);
}

#[test]
fn formulations_agree_on_random_states() {
    let h = square(5);
    let c = h.complex();
    let p = PhysParams::new(1.3, 0.2, 9.81).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let eta = elliptic::random_tangent(&h, &mut rng).unwrap();
        let mu = rand_vec(&mut rng, c.boundary_vertices().len());
        let phi = elliptic::harmonic_lift(&mu, &h).unwrap();
        let v = forms::d(&phi, &h).unwrap().add(&eta).unwrap();
        let hv = energetics::hamiltonian_v(v.values(), &p, &h).unwrap().total;
        let he = energetics::hamiltonian_eta(eta.values(), &mu, &p, &h).unwrap().total;
        let omega = forms::d(&eta, &h).unwrap();
        let ho = energetics::hamiltonian_omega(omega.values(), &mu, &p, &h).unwrap().total;
        assert!((hv - he).abs() <= 1e-9 * hv.abs(), "{hv} {he}");
        assert!((ho - he).abs() <= 1e-9 * hv.abs(), "{ho} {he}");
    }
}

#[test]
fn omega_energy_examples() {
    let h = square(4);
    let c = h.complex();
    let p = PhysParams::new(1.0, 0.0, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mu = rand_vec(&mut rng, c.boundary_vertices().len());
    let w = rand_vec(&mut rng, c.n_triangles());
    let zero = energetics::hamiltonian_omega(&vec![0.0; c.n_triangles()], &mu, &p, &h).unwrap();
    let eta0 = energetics::hamiltonian_eta(&vec![0.0; c.n_edges()], &mu, &p, &h).unwrap();
    assert!((zero.kinetic - eta0.kinetic).abs() < 1e-12);
    let e1 = energetics::hamiltonian_omega(&w, &mu, &p, &h).unwrap().kinetic - zero.kinetic;
    let w2: Vec<f64> = w.iter().map(|x| 2.0 * x).collect();
    let e2 = energetics::hamiltonian_omega(&w2, &mu, &p, &h).unwrap().kinetic - zero.kinetic;
    assert!((e2 - 4.0 * e1).abs() < 1e-9 * e2.abs());
}

#[test]
fn eta_energy_rejects_normal_flow() {
    let h = square(4);
    let c = h.complex();
    let v = forms::interpolate_1form(&h, |_| [0.0, 1.0]);
    let p = PhysParams::new(1.0, 0.0, 0.0).unwrap();
    assert!(energetics::hamiltonian_eta(v.values(), &vec![0.0; c.boundary_vertices().len()], &p, &h).is_err());
}

#[test]
fn curvature_straight_and_circle() {
    let s = SurfaceState::new(&meshgen::tank(1.0, 0.5, 8, 4).unwrap()).unwrap();
    assert!(energetics::curvature(&s).iter().all(|k| k.abs() < 1e-14));
    for n in &s.normals {
        assert!((n[1] - 1.0).abs() < 1e-14);
    }
    let r = 0.7;
    let mut errs = Vec::new();
    for rings in [4, 8, 16] {
        let c = meshgen::disc(r, rings, Label::Sigma).unwrap();
        let s = SurfaceState::new(&c).unwrap();
        let worst = s.curvature.iter().map(|k| (k - 1.0 / r).abs()).fold(0.0, f64::max);
        errs.push(worst);
        // regular N-gon: turning angle 2π/N over edge 2R sin(π/N)
        let nn = (6 * rings) as f64;
        let oracle = (2.0 * std::f64::consts::PI / nn) / (2.0 * r * (std::f64::consts::PI / nn).sin());
        assert!(s.curvature.iter().all(|k| (k - oracle).abs() < 1e-10));
    }
    for k in 1..errs.len() {
        let rate = (errs[k - 1] / errs[k]).log2();
        assert!((rate - 2.0).abs() < 0.2, "{errs:?}");
    }
}

#[test]
fn curvature_sign_follows_bulge() {
    let c = meshgen::tank(1.0, 0.5, 8, 4).unwrap();
    let bump = |sign: f64| {
        let pos = c
            .vertices()
            .iter()
            .map(|p| [p[0], p[1] + sign * 0.05 * (std::f64::consts::PI * p[0]).sin() * (p[1] + 0.5) / 0.5])
            .collect();
        SurfaceState::new(&c.with_positions(pos).unwrap()).unwrap()
    };
    let up = bump(1.0);
    let down = bump(-1.0);
    let mid = up.vertices.iter().position(|&v| (c.vertices()[v][0] - 0.5).abs() < 1e-12).unwrap();
    assert!(up.curvature[mid] > 0.0);
    assert!((down.curvature[mid] + up.curvature[mid]).abs() < 1e-12);
}

#[test]
fn func_derivs_examples() {
    let h = HodgeSystem::new(&meshgen::tank(1.0, 0.5, 6, 3).unwrap()).unwrap();
    let c = h.complex();
    let p = PhysParams::new(1.0, 0.1, 9.81).unwrap();
    let st = State::V { v: vec![0.0; c.n_edges()] };
    let fd = energetics::func_derivs_h(&st, &p, &h).unwrap();
    let s = SurfaceState::new(c).unwrap();
    for k in 0..s.vertices.len() {
        let expect = p.g0 * s.positions[k][1] + p.surface_coeff() * s.curvature[k];
        assert!((fd.d_sigma[k] - expect).abs() < 1e-14);
    }

    // δH̃/δφ∂ reproduces the Neumann data that built φ
    let g = NeumannData::from_density(c, |x, n| x[0] * n[0] - x[1] * n[1]);
    let phi = elliptic::solve_nphi(&g, &h).unwrap();
    let mu = forms::trace(&phi, &h).unwrap().values;
    let st = State::Eta { eta: vec![0.0; c.n_edges()], phi_b: mu };
    let fd = energetics::func_derivs_h(&st, &p, &h).unwrap();
    let dphi = fd.d_phi.unwrap();
    assert!(linalg::max_abs(&linalg::sub(&dphi, &g.values)) < 1e-10);

    // δH̄/δω = ∗β: its codifferential is η
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let w = rand_vec(&mut rng, c.n_triangles());
    let st = State::Omega { omega: w.clone(), phi_b: vec![0.0; c.boundary_vertices().len()] };
    let fd = energetics::func_derivs_h(&st, &p, &h).unwrap();
    let s_om = h.cochain(2, fd.d_omega.unwrap()).unwrap();
    let u = forms::codifferential(&s_om, &h).unwrap();
    let (_, eta) = elliptic::solve_nbeta_full(&h.cochain(2, w).unwrap(), &h).unwrap();
    assert!(linalg::max_abs(&linalg::sub(u.values(), eta.values())) < 1e-10);
}

#[test]
fn func_derivs_shape_checks() {
    let h = square(3);
    let c = h.complex();
    let st = State::V { v: vec![0.0; c.n_edges()] };
    let p = PhysParams::new(1.0, 0.0, 0.0).unwrap();
    let fd = energetics::func_derivs_h(&st, &p, &h).unwrap();
    assert!(fd.check(energetics::Formulation::V, c).is_ok());
    assert!(fd.check(energetics::Formulation::Eta, c).is_err());
    let bad = FunctionalDerivs::v(vec![0.0; 3], fd.d_sigma.clone());
    assert!(bad.check(energetics::Formulation::V, c).is_err());
}

#[test]
fn velocity_derivative_matches_finite_differences() {
    let h = square(4);
    let p = PhysParams::new(1.0, 0.0, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let v = elliptic::random_solenoidal(&h, &mut rng, true).unwrap();
    let dv = elliptic::random_solenoidal(&h, &mut rng, true).unwrap();
    let fd = energetics::func_derivs_h(&State::V { v: v.values().to_vec() }, &p, &h).unwrap();
    let hf = 1e-4;
    let plus = energetics::hamiltonian_v(v.add(&dv.scale(hf)).unwrap().values(), &p, &h).unwrap().total;
    let minus = energetics::hamiltonian_v(v.sub(&dv.scale(hf)).unwrap().values(), &p, &h).unwrap().total;
    let u = h.cochain(1, fd.dv.unwrap()).unwrap();
    let an = forms::inner(&u, &dv, &h).unwrap();
    assert!(((plus - minus) / (2.0 * hf) - an).abs() < 1e-8);
}

#[test]
fn shape_audit_area() {
    let h = HodgeSystem::new(&meshgen::tank(1.0, 0.5, 8, 4).unwrap()).unwrap();
    let ns = h.complex().sigma_vertices().len();
    let dir = vec![1.0; ns];
    let r = energetics::shape_derivative_audit(|h| Ok(h.complex().total_area()), &h, &dir, &vec![1.0; ns], 1e-5).unwrap();
    assert!(r < 1e-6, "{r:e}");
    // interior Σ vertices only: width minus half an edge at each end
    let s = SurfaceState::new(h.complex()).unwrap();
    assert!((s.measure.iter().sum::<f64>() - (1.0 - 1.0 / 8.0)).abs() < 1e-14);
}

#[test]
fn shape_audit_length_on_circle_converges() {
    let mut res = Vec::new();
    for rings in [3, 6, 12] {
        let h = HodgeSystem::new(&meshgen::disc(1.0, rings, Label::Sigma).unwrap()).unwrap();
        let s = SurfaceState::new(h.complex()).unwrap();
        let p = PhysParams::new(1.0, 0.5, 0.0).unwrap();
        let dens: Vec<f64> = s.curvature.iter().map(|k| p.surface_coeff() * k).collect();
        let dir = vec![1.0; dens.len()];
        let f = |h: &HodgeSystem| Ok(energetics::hamiltonian_v(&vec![0.0; h.complex().n_edges()], &p, h)?.surface);
        res.push(energetics::shape_derivative_audit(f, &h, &dir, &dens, 1e-5).unwrap());
    }
    assert!(res[2] < res[1] && res[1] < res[0], "{res:?}");
    assert!(res[1] / res[2] > 3.0, "{res:?}");
}

#[test]
fn shape_audit_gravity_converges() {
    let mut res = Vec::new();
    for n in [4, 8, 16] {
        let c = meshgen::tank(1.0, 0.5, n, n / 2).unwrap();
        let pos = c
            .vertices()
            .iter()
            .map(|p| [p[0], p[1] + 0.1 * (2.0 * p[0]).cos() * (p[1] + 0.5) / 0.5])
            .collect();
        let h = HodgeSystem::new(&c.with_positions(pos).unwrap()).unwrap();
        let p = PhysParams::new(1.0, 0.0, 9.81).unwrap();
        let fd = energetics::func_derivs_h(&State::V { v: vec![0.0; h.complex().n_edges()] }, &p, &h).unwrap();
        let s = SurfaceState::new(h.complex()).unwrap();
        let dir: Vec<f64> = s.positions.iter().map(|x| 1.0 + x[0]).collect();
        let f = |h: &HodgeSystem| Ok(energetics::hamiltonian_v(&vec![0.0; h.complex().n_edges()], &p, h)?.gravity);
        let r = energetics::shape_derivative_audit(f, &h, &dir, &fd.d_sigma, 1e-5).unwrap();
        res.push(r);
    }
    assert!(res[2] < res[1] && res[1] < res[0], "{res:?}");
}
