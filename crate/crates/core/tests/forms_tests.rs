use ph_core::complex::Label;
use ph_core::forms::{self, Cochain, HodgeSystem, VectorProxy};
use ph_core::linalg;
use ph_core::meshgen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square(n: usize) -> HodgeSystem {
    HodgeSystem::new(&meshgen::unit_square(n).unwrap()).unwrap()
}

fn random(h: &HodgeSystem, k: usize, rng: &mut ChaCha8Rng) -> Cochain {
    let n = h.complex().n_simplices(k);
    h.cochain(k, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

#[test]
fn d_on_single_triangle_by_hand() {
    let h = HodgeSystem::new(&meshgen::unit_triangle().unwrap()).unwrap();
    // edges are created in slot order 01, 12, 20 -> stored as (0,1), (1,2), (0,2)
    assert_eq!(h.complex().edges(), &[[0, 1], [1, 2], [0, 2]]);
    let c = h.cochain(0, vec![0.0, 1.0, 2.0]).unwrap();
    assert_eq!(forms::d(&c, &h).unwrap().values(), &[1.0, 1.0, 2.0]);
    let dd = forms::d(&forms::d(&c, &h).unwrap(), &h).unwrap();
    assert_eq!(dd.values(), &[0.0]);
    assert!(forms::d(&dd, &h).is_err());
}

#[test]
fn d_of_constant_and_dd_zero() {
    let h = square(4);
    let one = h.cochain(0, vec![1.0; h.complex().n_vertices()]).unwrap();
    assert!(forms::d(&one, &h).unwrap().values().iter().all(|&x| x == 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let c = random(&h, 0, &mut rng);
    let dd = forms::d(&forms::d(&c, &h).unwrap(), &h).unwrap();
    assert!(linalg::max_abs(dd.values()) < 1e-15);
}

#[test]
fn mass_matrices_symmetric_and_area() {
    let h = square(4);
    for k in 0..3 {
        let m = h.mass(k);
        let scale = linalg::max_abs(&m.data);
        assert!(m.max_asymmetry() <= 1e-13 * scale);
    }
    let one = h.cochain(0, vec![1.0; h.complex().n_vertices()]).unwrap();
    assert!((forms::inner(&one, &one, &h).unwrap() - 1.0).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (a, b) = (random(&h, 1, &mut rng), random(&h, 1, &mut rng));
    let ab = forms::inner(&a, &b, &h).unwrap();
    let ba = forms::inner(&b, &a, &h).unwrap();
    assert!((ab - ba).abs() < 1e-13 * ab.abs().max(1.0));
    assert!(forms::inner(&a, &a, &h).unwrap() > 0.0);
}

#[test]
fn whitney_mass_of_uniform_field() {
    // constant field (1,0) has L2 norm² = area; independent of the mass assembly
    let h = square(3);
    let v = forms::interpolate_1form(&h, |_| [1.0, 0.0]);
    assert!((forms::inner(&v, &v, &h).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn mismatched_cochains_rejected() {
    let h = square(2);
    let h2 = square(2);
    let a = Cochain::zeros(h.complex(), 1);
    let b = Cochain::zeros(h2.complex(), 1);
    assert!(forms::inner(&a, &b, &h).is_err());
    let c0 = Cochain::zeros(h.complex(), 0);
    assert!(forms::inner(&a, &c0, &h).is_err());
    assert!(forms::wedge_pair(&a, &c0, &h).is_err());
}

#[test]
fn discrete_stokes() {
    let h = square(5);
    let c = h.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random(&h, 1, &mut rng);
    let lhs: f64 = forms::d(&a, &h).unwrap().values().iter().sum();
    let rhs: f64 = forms::trace(&a, &h).unwrap().values.iter().sum();
    let scale: f64 = a.values().iter().map(|x| x.abs()).sum();
    assert!((lhs - rhs).abs() <= 1e-13 * scale);
    let _ = c;
}

#[test]
fn codifferential_properties() {
    let h = square(4);
    let c = h.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let beta = random(&h, 2, &mut rng);
    let dd = forms::codifferential(&forms::codifferential(&beta, &h).unwrap(), &h).unwrap();
    let s = forms::codifferential(&beta, &h).unwrap();
    assert!(linalg::max_abs(dd.values()) <= 1e-11 * linalg::max_abs(s.values()).max(1.0));
    // adjointness against interior-supported λ
    let mut lam = vec![0.0; c.n_vertices()];
    for &i in c.interior_vertices() {
        lam[i] = rng.random_range(-1.0..1.0);
    }
    let lam = h.cochain(0, lam).unwrap();
    let mu = random(&h, 1, &mut rng);
    let lhs = forms::inner(&forms::d(&lam, &h).unwrap(), &mu, &h).unwrap();
    let rhs = forms::inner(&lam, &forms::codifferential(&mu, &h).unwrap(), &h).unwrap();
    assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs().max(1.0));
    // δ of the volume form: direct assembly Dᵀ·1 differs from zero only on boundary edges
    let vol = h.cochain(2, h.areas().to_vec()).unwrap();
    let dv = forms::codifferential(&vol, &h).unwrap();
    let direct = h.d1().tr_mul_vec(&vec![1.0; c.n_triangles()]);
    let mdv = h.mass(1).mul_vec(dv.values());
    assert!(linalg::max_abs(&linalg::sub(&mdv, &direct)) < 1e-12);
    for (e, x) in direct.iter().enumerate() {
        if c.edge_triangles(e).len() == 2 {
            assert_eq!(*x, 0.0);
        }
    }
    assert!(forms::codifferential(&Cochain::zeros(c, 0), &h).is_err());
}

#[test]
fn wedge_pair_identities() {
    let h = square(4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (a, b) = (random(&h, 1, &mut rng), random(&h, 1, &mut rng));
    let ab = forms::wedge_pair(&a, &b, &h).unwrap();
    let ba = forms::wedge_pair(&b, &a, &h).unwrap();
    assert!((ab + ba).abs() < 1e-12);
    let z = random(&h, 0, &mut rng);
    let t = random(&h, 2, &mut rng);
    let zt = forms::wedge_pair(&z, &t, &h).unwrap();
    let tz = forms::wedge_pair(&t, &z, &h).unwrap();
    assert!((zt - tz).abs() < 1e-12);
    let one = h.cochain(0, vec![1.0; h.complex().n_vertices()]).unwrap();
    let vol = h.cochain(2, h.areas().to_vec()).unwrap();
    assert!((forms::wedge_pair(&one, &vol, &h).unwrap() - 1.0).abs() < 1e-12);
    // dx ∧ dy = area form: analytic ∫ 1 = 1
    let dx = forms::interpolate_1form(&h, |_| [1.0, 0.0]);
    let dy = forms::interpolate_1form(&h, |_| [0.0, 1.0]);
    assert!((forms::wedge_pair(&dx, &dy, &h).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn star_rep_examples() {
    let h = square(4);
    let one = h.cochain(0, vec![1.0; h.complex().n_vertices()]).unwrap();
    let s = forms::star_rep(&one, &h).unwrap();
    for (x, a) in s.values().iter().zip(h.areas()) {
        assert!((x - a).abs() < 1e-15);
    }
    // star of dx is dy: uniform fields lie in the Whitney space, so the projection is exact
    let dx = forms::interpolate_1form(&h, |_| [1.0, 0.0]);
    let dy = forms::interpolate_1form(&h, |_| [0.0, 1.0]);
    let sx = forms::star_rep(&dx, &h).unwrap();
    assert!(linalg::max_abs(&linalg::sub(sx.values(), dy.values())) < 1e-12);
    // the wedge identity holds exactly on fields the projection preserves
    let w = forms::wedge_pair(&dx, &sx, &h).unwrap();
    assert!((w - forms::inner(&dx, &dx, &h).unwrap()).abs() < 1e-12);
}

fn smooth_star_star_error(n: usize, k: usize) -> f64 {
    let h = square(n);
    let c = match k {
        0 => forms::interpolate_0form(&h, |p| (p[0] * 2.0).sin() * (1.0 + p[1] * p[1])),
        1 => forms::interpolate_1form(&h, |p| [(p[1] * 2.0).cos(), p[0] * p[1]]),
        _ => forms::interpolate_2form(&h, |p| (p[0] + 2.0 * p[1]).cos()),
    };
    let ss = forms::star_rep(&forms::star_rep(&c, &h).unwrap(), &h).unwrap();
    let sign = if k == 1 { -1.0 } else { 1.0 };
    let diff = ss.sub(&c.scale(sign)).unwrap();
    (forms::inner(&diff, &diff, &h).unwrap() / forms::inner(&c, &c, &h).unwrap()).sqrt()
}

#[test]
fn star_star_converges() {
    for k in 0..3 {
        let e1 = smooth_star_star_error(4, k);
        let e2 = smooth_star_star_error(8, k);
        let e3 = smooth_star_star_error(16, k);
        assert!(e2 < e1 && e3 < e2, "k={k}: {e1:e} {e2:e} {e3:e}");
        assert!(e3 < 0.7 * e2);
    }
}

#[test]
fn star_wedge_identity_converges() {
    let mut errs = Vec::new();
    for n in [4, 8, 16] {
        let h = square(n);
        let a = forms::interpolate_1form(&h, |p| [(3.0 * p[1]).sin(), p[0] * p[0]]);
        let s = forms::star_rep(&a, &h).unwrap();
        let w = forms::wedge_pair(&a, &s, &h).unwrap();
        let i = forms::inner(&a, &a, &h).unwrap();
        errs.push((w - i).abs() / i);
    }
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
}

#[test]
fn trace_commutes_with_d() {
    let h = square(4);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let phi = random(&h, 0, &mut rng);
    let lhs = forms::trace(&forms::d(&phi, &h).unwrap(), &h).unwrap();
    let rhs = forms::boundary_d(&forms::trace(&phi, &h).unwrap(), h.complex()).unwrap();
    assert_eq!(lhs.values, rhs.values);
    assert!(forms::trace(&Cochain::zeros(h.complex(), 2), &h).is_err());
}

#[test]
fn normal_trace_examples() {
    let h = square(4);
    let c = h.complex();
    let v = forms::interpolate_1form(&h, |_| [0.0, 1.0]);
    let nt = forms::normal_trace(&v, &h).unwrap();
    let mut top = 0.0;
    for (k, &e) in c.boundary_edges().iter().enumerate() {
        let [a, b] = c.edges()[e];
        if c.vertices()[a][1] == 1.0 && c.vertices()[b][1] == 1.0 {
            assert!((nt[k] - c.edge_length(e)).abs() < 1e-14);
            top += nt[k];
        }
    }
    assert!((top - 1.0).abs() < 1e-13);
    // a harmonic φ has zero total flux
    let phi = forms::interpolate_0form(&h, |p| p[0] * p[0] - p[1] * p[1]);
    let flux: f64 = forms::normal_trace(&forms::d(&phi, &h).unwrap(), &h).unwrap().iter().sum();
    assert!(flux.abs() < 1e-13);
}

#[test]
fn integration_by_parts_first_order() {
    // |⟨dλ,μ⟩ - ⟨λ,δμ⟩ - ∫_∂ λ μ·N| for smooth λ, μ with the exact δμ = -div μ = -x
    let mut errs = Vec::new();
    for n in [4, 8, 16] {
        let h = square(n);
        let c = h.complex();
        let lam = forms::interpolate_0form(&h, |p| (p[0] + 0.5 * p[1]).sin());
        let mu = forms::interpolate_1form(&h, |p| [p[1].cos(), p[0] * p[1]]);
        let lhs = forms::inner(&forms::d(&lam, &h).unwrap(), &mu, &h).unwrap();
        let vol = forms::inner(&lam, &forms::interpolate_0form(&h, |p| -p[0]), &h).unwrap();
        let flux = forms::normal_trace(&mu, &h).unwrap();
        let cov = forms::edge_flux_to_covector(&flux, c);
        let bd: f64 = c.boundary_vertices().iter().zip(&cov).map(|(&v, g)| lam.values()[v] * g).sum();
        errs.push((lhs - vol - bd).abs());
    }
    assert!(errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
}

#[test]
fn flat_sharp_roundtrip() {
    let h = square(4);
    let v = forms::interpolate_1form(&h, |_| [0.3, -1.2]);
    let back = forms::flat(&forms::sharp(&v, &h).unwrap(), &h).unwrap();
    assert!(linalg::max_abs(&linalg::sub(back.values(), v.values())) < 1e-12);
}

#[test]
fn interior_product_examples() {
    let h = square(4);
    let nt = h.complex().n_triangles();
    let vol = h.cochain(2, h.areas().to_vec()).unwrap();
    let zero = VectorProxy { values: vec![[0.0, 0.0]; nt] };
    let r = forms::interior_product(&zero, &vol, &h).unwrap();
    assert!(linalg::max_abs(r.values()) == 0.0);
    // i_{∂x}(dx∧dy) = dy
    let ex = VectorProxy { values: vec![[1.0, 0.0]; nt] };
    let r = forms::interior_product(&ex, &vol, &h).unwrap();
    let dy = forms::interpolate_1form(&h, |_| [0.0, 1.0]);
    assert!(linalg::max_abs(&linalg::sub(r.values(), dy.values())) < 1e-12);
    let r2 = forms::interior_product_via_star(&ex, &vol, &h).unwrap();
    assert!(linalg::max_abs(&linalg::sub(r2.values(), dy.values())) < 1e-12);
    // gradient velocity has no vorticity
    let phi = forms::interpolate_0form(&h, |p| p[0] * p[1]);
    let v = forms::d(&phi, &h).unwrap();
    let x = forms::sharp(&v, &h).unwrap();
    let r = forms::interior_product(&x, &forms::d(&v, &h).unwrap(), &h).unwrap();
    assert!(linalg::max_abs(r.values()) < 1e-10);
}

#[test]
fn interior_product_routes_agree_under_refinement() {
    let mut errs = Vec::new();
    for n in [4, 8, 16] {
        let h = square(n);
        let v = forms::interpolate_1form(&h, |p| [p[1].sin(), p[0]]);
        let x = forms::sharp(&v, &h).unwrap();
        let c = forms::interpolate_2form(&h, |p| 1.0 + p[0] * p[1]);
        let a = forms::interior_product(&x, &c, &h).unwrap();
        let b = forms::interior_product_via_star(&x, &c, &h).unwrap();
        let d = a.sub(&b).unwrap();
        errs.push((forms::inner(&d, &d, &h).unwrap() / forms::inner(&a, &a, &h).unwrap()).sqrt());
    }
    assert!(errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
}

#[test]
fn lie_bracket_properties() {
    let h = square(4);
    let c = h.complex();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = ph_core::elliptic::random_solenoidal(&h, &mut rng, true).unwrap();
    let b = ph_core::elliptic::random_solenoidal(&h, &mut rng, true).unwrap();
    let aa = forms::lie_bracket_1(&a, &a, &h).unwrap();
    assert!(linalg::max_abs(aa.values()) < 1e-11);
    let ab = forms::lie_bracket_1(&a, &b, &h).unwrap();
    let ba = forms::lie_bracket_1(&b, &a, &h).unwrap();
    assert!(linalg::max_abs(ab.add(&ba).unwrap().values()) < 1e-11 * linalg::max_abs(ab.values()).max(1.0));
    // uniform fields: bracket vanishes weakly against interior test forms
    let ex = forms::interpolate_1form(&h, |_| [1.0, 0.0]);
    let ey = forms::interpolate_1form(&h, |_| [0.0, 1.0]);
    let br = forms::lie_bracket_1(&ex, &ey, &h).unwrap();
    let mb = h.mass(1).mul_vec(br.values());
    for e in 0..c.n_edges() {
        if c.edge_triangles(e).len() == 2 {
            assert!(mb[e].abs() < 1e-12);
        }
    }
    // non-solenoidal input is rejected with the measured residual
    let mut bad = vec![0.0; c.n_edges()];
    bad[0] = 1.0;
    let bad = h.cochain(1, bad).unwrap();
    let err = forms::lie_bracket_1(&bad, &a, &h).unwrap_err();
    assert!(err.to_string().contains("not solenoidal"));
}

#[test]
fn cochain_csv() {
    let h = HodgeSystem::new(&meshgen::unit_triangle().unwrap()).unwrap();
    let c = h.cochain(2, vec![0.5]).unwrap();
    assert_eq!(c.to_csv(), "simplex_id,value\n0,5.00000000000000000e-1\n");
    let _ = Label::Sigma;
}
