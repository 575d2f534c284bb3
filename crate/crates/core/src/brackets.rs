//! Poisson brackets in the (v,Σ), (η,φ∂,Σ) and (ω,φ∂,Σ) variables, their
//! boundary-port variants, the changes of variables between derivative
//! tuples, and a finite-difference Jacobi audit.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::elliptic::{self, NeumannData};
use crate::energetics::{self, Formulation, FunctionalDerivs, State, SurfaceState};
use crate::error::{PhError, Result};
use crate::forms::{self, HodgeSystem};
use crate::linalg;

/// State-dependent data shared by every bracket evaluation at one state.
pub struct BracketKernel<'a> {
    h: &'a HodgeSystem,
    formulation: Formulation,
    zeta: Vec<f64>,
    /// vertex-averaged η at Σ-interior vertices (η and ω forms)
    eta_at_sigma: Vec<[f64; 2]>,
}

impl<'a> BracketKernel<'a> {
    pub fn new(state: &State, h: &'a HodgeSystem) -> Result<Self> {
        let c = h.complex();
        let (zeta, eta) = match state {
            State::V { v } => {
                check_len(v.len(), c.n_edges(), "velocity")?;
                (forms::vorticity_density(v, h), None)
            }
            State::Eta { eta, .. } => {
                check_len(eta.len(), c.n_edges(), "η")?;
                (forms::vorticity_density(eta, h), Some(eta.clone()))
            }
            State::Omega { omega, .. } => {
                check_len(omega.len(), c.n_triangles(), "ω")?;
                let (_, eta) = elliptic::solve_nbeta_full(&h.cochain(2, omega.clone())?, h)?;
                (forms::vorticity_density(eta.values(), h), Some(eta.into_values()))
            }
        };
        let eta_at_sigma = match &eta {
            Some(e) => c.sigma_vertices().iter().map(|&i| h.vertex_field(e, i)).collect(),
            None => Vec::new(),
        };
        Ok(BracketKernel { h, formulation: state.formulation(), zeta, eta_at_sigma })
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    /// -Σ_T ζ_T ∫_T a_G × a_F
    fn volume(&self, a_f: &[f64], a_g: &[f64]) -> f64 {
        let h = self.h;
        let mut s = 0.0;
        for t in 0..h.complex().n_triangles() {
            if self.zeta[t] != 0.0 {
                s -= self.zeta[t] * h.areas()[t] * forms::tri_cross_integral(a_g, a_f, t, h);
            }
        }
        s
    }

    /// ⟨dN_φ(e), η⟩ at Σ-interior vertices.
    fn correction(&self, grad: &[f64]) -> Vec<f64> {
        let c = self.h.complex();
        c.sigma_vertices()
            .iter()
            .zip(&self.eta_at_sigma)
            .map(|(&i, w)| forms::dot2(self.h.vertex_field(grad, i), *w))
            .collect()
    }

    /// Bracket value; `port` adds the Γ pairing of the port efforts.
    pub fn eval(&self, f: &FunctionalDerivs, g: &FunctionalDerivs, port: bool) -> Result<f64> {
        let c = self.h.complex();
        f.check(self.formulation, c)?;
        g.check(self.formulation, c)?;
        match self.formulation {
            Formulation::V => {
                let (uf, ug) = (f.dv.as_ref().unwrap(), g.dv.as_ref().unwrap());
                let nf = forms::weak_normal_trace_raw(uf, self.h);
                let ng = forms::weak_normal_trace_raw(ug, self.h);
                let mut s = self.volume(uf, ug);
                s += pair_sigma(&f.d_sigma, &ng, c) - pair_sigma(&g.d_sigma, &nf, c);
                if port {
                    s += pair_port(f, &ng, c) - pair_port(g, &nf, c);
                }
                Ok(s)
            }
            Formulation::Eta | Formulation::Omega => {
                let (uf, ug) = if self.formulation == Formulation::Eta {
                    (f.d_eta.clone().unwrap(), g.d_eta.clone().unwrap())
                } else {
                    (elliptic::codiff2(f.d_omega.as_ref().unwrap(), self.h)?, elliptic::codiff2(g.d_omega.as_ref().unwrap(), self.h)?)
                };
                let (ef, eg) = (f.d_phi.as_ref().unwrap(), g.d_phi.as_ref().unwrap());
                let gf = grad_n(ef, self.h)?;
                let gg = grad_n(eg, self.h)?;
                let af = linalg::add(&uf, &gf);
                let ag = linalg::add(&ug, &gg);
                let mut s = self.volume(&af, &ag);
                let cf = self.correction(&gf);
                let cg = self.correction(&gg);
                let sf: Vec<f64> = f.d_sigma.iter().zip(&cf).map(|(a, b)| a + b).collect();
                let sg: Vec<f64> = g.d_sigma.iter().zip(&cg).map(|(a, b)| a + b).collect();
                s += pair_sigma(&sf, eg, c) - pair_sigma(&sg, ef, c);
                if port {
                    s += pair_port(f, eg, c) - pair_port(g, ef, c);
                }
                Ok(s)
            }
        }
    }
}

fn check_len(got: usize, want: usize, what: &str) -> Result<()> {
    if got != want {
        return Err(PhError::Dimension(format!("{what} has {got} entries, expected {want}")));
    }
    Ok(())
}

/// Σ_i s_i b_i over Σ-interior vertices, b a boundary covector.
fn pair_sigma(s: &[f64], b: &[f64], c: &crate::SimplicialComplex) -> f64 {
    c.sigma_vertices().iter().zip(s).map(|(&v, s)| s * b[c.boundary_index(v).unwrap()]).sum()
}

fn pair_port(f: &FunctionalDerivs, b: &[f64], c: &crate::SimplicialComplex) -> f64 {
    match &f.d_port {
        Some(p) => c.gamma_vertices().iter().zip(p).map(|(&v, e)| e * b[c.boundary_index(v).unwrap()]).sum(),
        None => 0.0,
    }
}

/// d N_φ(e) for a boundary flux covector e.
pub fn grad_n(e: &[f64], h: &HodgeSystem) -> Result<Vec<f64>> {
    if e.iter().all(|&x| x == 0.0) {
        return Ok(vec![0.0; h.complex().n_edges()]);
    }
    let phi = elliptic::solve_nphi(&NeumannData::new(h.complex(), e.to_vec())?, h)?;
    Ok(h.d0().mul_vec(phi.values()))
}

pub fn bracket_vs(v: &[f64], f: &FunctionalDerivs, g: &FunctionalDerivs, h: &HodgeSystem) -> Result<f64> {
    BracketKernel::new(&State::V { v: v.to_vec() }, h)?.eval(f, g, false)
}

pub fn bracket_vs_port(v: &[f64], f: &FunctionalDerivs, g: &FunctionalDerivs, h: &HodgeSystem) -> Result<f64> {
    BracketKernel::new(&State::V { v: v.to_vec() }, h)?.eval(f, g, true)
}

pub fn bracket_eta(eta: &[f64], f: &FunctionalDerivs, g: &FunctionalDerivs, h: &HodgeSystem) -> Result<f64> {
    let st = State::Eta { eta: eta.to_vec(), phi_b: Vec::new() };
    BracketKernel::new(&st, h)?.eval(f, g, false)
}

pub fn bracket_eta_port(eta: &[f64], f: &FunctionalDerivs, g: &FunctionalDerivs, h: &HodgeSystem) -> Result<f64> {
    let st = State::Eta { eta: eta.to_vec(), phi_b: Vec::new() };
    BracketKernel::new(&st, h)?.eval(f, g, true)
}

pub fn bracket_omega(omega: &[f64], f: &FunctionalDerivs, g: &FunctionalDerivs, h: &HodgeSystem) -> Result<f64> {
    let st = State::Omega { omega: omega.to_vec(), phi_b: Vec::new() };
    BracketKernel::new(&st, h)?.eval(f, g, false)
}

pub fn bracket_omega_port(omega: &[f64], f: &FunctionalDerivs, g: &FunctionalDerivs, h: &HodgeSystem) -> Result<f64> {
    let st = State::Omega { omega: omega.to_vec(), phi_b: Vec::new() };
    BracketKernel::new(&st, h)?.eval(f, g, true)
}

/// Velocity of the state: v itself, or η / δN_β(ω) plus dφ from φ∂ when given.
fn eta_of(state: &State, h: &HodgeSystem) -> Result<Vec<f64>> {
    match state {
        State::V { .. } => Err(PhError::Formulation("no η in a (v,Σ) state".into())),
        State::Eta { eta, .. } => Ok(eta.clone()),
        State::Omega { omega, .. } => Ok(elliptic::solve_nbeta_full(&h.cochain(2, omega.clone())?, h)?.1.into_values()),
    }
}

/// (v,Σ) tuple to (η,φ∂,Σ) tuple at the state with tangent part `eta`.
pub fn v_to_eta(f: &FunctionalDerivs, eta: &[f64], h: &HodgeSystem) -> Result<FunctionalDerivs> {
    f.check(Formulation::V, h.complex())?;
    let u = f.dv.as_ref().unwrap();
    let e_phi = forms::weak_normal_trace_raw(u, h);
    let gn = grad_n(&e_phi, h)?;
    let u_eta = linalg::sub(u, &gn);
    let corr = energetics::sigma_vertex_inner(&gn, eta, h);
    let s: Vec<f64> = f.d_sigma.iter().zip(&corr).map(|(a, b)| a - b).collect();
    let mut out = FunctionalDerivs::eta(u_eta, e_phi, s);
    out.d_port = f.d_port.clone();
    Ok(out)
}

/// (η,φ∂,Σ) tuple back to a (v,Σ) tuple.
pub fn eta_to_v(f: &FunctionalDerivs, eta: &[f64], h: &HodgeSystem) -> Result<FunctionalDerivs> {
    f.check(Formulation::Eta, h.complex())?;
    let gn = grad_n(f.d_phi.as_ref().unwrap(), h)?;
    let u = linalg::add(f.d_eta.as_ref().unwrap(), &gn);
    let corr = energetics::sigma_vertex_inner(&gn, eta, h);
    let s: Vec<f64> = f.d_sigma.iter().zip(&corr).map(|(a, b)| a + b).collect();
    let mut out = FunctionalDerivs::v(u, s);
    out.d_port = f.d_port.clone();
    Ok(out)
}

/// (η,φ∂,Σ) tuple to (ω,φ∂,Σ): the 2-cochain s with δs = δF/δη.
pub fn eta_to_omega(f: &FunctionalDerivs, h: &HodgeSystem) -> Result<FunctionalDerivs> {
    f.check(Formulation::Eta, h.complex())?;
    let s = elliptic::stream_of(f.d_eta.as_ref().unwrap(), h)?;
    let mut out = FunctionalDerivs::omega(s, f.d_phi.clone().unwrap(), f.d_sigma.clone());
    out.d_port = f.d_port.clone();
    Ok(out)
}

pub fn omega_to_eta(f: &FunctionalDerivs, h: &HodgeSystem) -> Result<FunctionalDerivs> {
    f.check(Formulation::Omega, h.complex())?;
    let u = elliptic::codiff2(f.d_omega.as_ref().unwrap(), h)?;
    let mut out = FunctionalDerivs::eta(u, f.d_phi.clone().unwrap(), f.d_sigma.clone());
    out.d_port = f.d_port.clone();
    Ok(out)
}

pub fn random_state(form: Formulation, h: &HodgeSystem, rng: &mut impl Rng) -> Result<State> {
    let c = h.complex();
    let nb = c.boundary_vertices().len();
    Ok(match form {
        Formulation::V => State::V { v: elliptic::random_solenoidal(h, rng, true)?.into_values() },
        Formulation::Eta => State::Eta {
            eta: elliptic::random_tangent(h, rng)?.into_values(),
            phi_b: (0..nb).map(|_| rng.random_range(-1.0..1.0)).collect(),
        },
        Formulation::Omega => State::Omega {
            omega: (0..c.n_triangles()).map(|_| rng.random_range(-1.0..1.0)).collect(),
            phi_b: (0..nb).map(|_| rng.random_range(-1.0..1.0)).collect(),
        },
    })
}

/// Zero-sum random boundary covector.
pub fn random_flux(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut e: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let m = e.iter().sum::<f64>() / n as f64;
    for x in &mut e {
        *x -= m;
    }
    e
}

pub fn random_tuple(form: Formulation, h: &HodgeSystem, rng: &mut impl Rng, with_port: bool) -> Result<FunctionalDerivs> {
    let c = h.complex();
    let nb = c.boundary_vertices().len();
    let mut r = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let s = r(c.sigma_vertices().len());
    let port = with_port.then(|| r(c.gamma_vertices().len()));
    let mut f = match form {
        Formulation::V => FunctionalDerivs::v(elliptic::random_solenoidal(h, rng, true)?.into_values(), s),
        Formulation::Eta => {
            let u = elliptic::random_tangent(h, rng)?.into_values();
            FunctionalDerivs::eta(u, random_flux(nb, rng), s)
        }
        Formulation::Omega => {
            let w = (0..c.n_triangles()).map(|_| rng.random_range(-1.0..1.0)).collect();
            FunctionalDerivs::omega(w, random_flux(nb, rng), s)
        }
    };
    f.d_port = port;
    Ok(f)
}

#[derive(Clone, Debug)]
pub struct JacobiReport {
    /// {F,{G,K}}, {G,{K,F}}, {K,{F,G}}
    pub terms: [f64; 3],
    pub residual: f64,
    /// residual over Σ|terms|
    pub normalized: f64,
}

/// Derivative tuple of the state functional S ↦ {G,K}(S) by central differences.
///
/// v and η states are differentiated along a basis of their admissible
/// (solenoidal) space with Σ frozen; ω states along every ω entry and every
/// Σ-interior normal displacement. The brackets do not depend on φ∂, so that
/// slot of the derivative is zero.
pub fn bracket_state_derivative(
    state: &State,
    g: &FunctionalDerivs,
    k: &FunctionalDerivs,
    h: &HodgeSystem,
    h_fd: f64,
) -> Result<FunctionalDerivs> {
    if !(h_fd > 1e-12) {
        return Err(PhError::Config(format!("finite-difference step {h_fd:e} too small")));
    }
    let c = h.complex();
    let eval = |st: &State, hs: &HodgeSystem| BracketKernel::new(st, hs)?.eval(g, k, false);
    let ns = c.sigma_vertices().len();
    match state {
        State::V { v } | State::Eta { eta: v, .. } => {
            let basis = if matches!(state, State::V { .. }) { elliptic::solenoidal_basis(h)? } else { elliptic::tangent_basis(h)? };
            let rebuild = |x: Vec<f64>| match state {
                State::V { .. } => State::V { v: x },
                State::Eta { phi_b, .. } => State::Eta { eta: x, phi_b: phi_b.clone() },
                State::Omega { .. } => unreachable!(),
            };
            let mut cvec = Vec::with_capacity(basis.len());
            for b in &basis {
                let mut xp = v.clone();
                linalg::axpy(h_fd, b, &mut xp);
                let mut xm = v.clone();
                linalg::axpy(-h_fd, b, &mut xm);
                cvec.push((eval(&rebuild(xp), h)? - eval(&rebuild(xm), h)?) / (2.0 * h_fd));
            }
            let u = riesz(&basis, &cvec, h)?;
            Ok(if matches!(state, State::V { .. }) {
                FunctionalDerivs::v(u, vec![0.0; ns])
            } else {
                FunctionalDerivs::eta(u, vec![0.0; c.boundary_vertices().len()], vec![0.0; ns])
            })
        }
        State::Omega { omega, phi_b } => {
            let mut s_om = vec![0.0; c.n_triangles()];
            for t in 0..c.n_triangles() {
                let mut wp = omega.clone();
                wp[t] += h_fd;
                let mut wm = omega.clone();
                wm[t] -= h_fd;
                let d = (eval(&State::Omega { omega: wp, phi_b: phi_b.clone() }, h)?
                    - eval(&State::Omega { omega: wm, phi_b: phi_b.clone() }, h)?)
                    / (2.0 * h_fd);
                s_om[t] = d * h.areas()[t];
            }
            let surf = SurfaceState::new(c)?;
            let mut s_sig = vec![0.0; ns];
            for i in 0..ns {
                let mut dir = vec![0.0; ns];
                dir[i] = h_fd;
                let hp = HodgeSystem::new(&energetics::perturb_sigma(h, &dir)?)?;
                dir[i] = -h_fd;
                let hm = HodgeSystem::new(&energetics::perturb_sigma(h, &dir)?)?;
                let d = (eval(state, &hp)? - eval(state, &hm)?) / (2.0 * h_fd);
                s_sig[i] = d / surf.measure[i];
            }
            Ok(FunctionalDerivs::omega(s_om, vec![0.0; c.boundary_vertices().len()], s_sig))
        }
    }
}

/// u in span(basis) with ⟨u, b_j⟩ = c_j for every basis vector.
fn riesz(basis: &[Vec<f64>], cvec: &[f64], h: &HodgeSystem) -> Result<Vec<f64>> {
    let n = basis.len();
    let mb: Vec<Vec<f64>> = basis.iter().map(|b| h.mass(1).mul_vec(b)).collect();
    let gram = DMatrix::from_fn(n, n, |i, j| linalg::dot(&basis[i], &mb[j]));
    let coef = gram
        .cholesky()
        .ok_or_else(|| PhError::Solver("Gram matrix of the admissible basis is singular".into()))?
        .solve(&DVector::from_column_slice(cvec));
    let mut u = vec![0.0; h.complex().n_edges()];
    for (b, a) in basis.iter().zip(coef.iter()) {
        linalg::axpy(*a, b, &mut u);
    }
    Ok(u)
}

/// Cyclic sum {F,{G,K}} + {G,{K,F}} + {K,{F,G}} for state-independent tuples.
pub fn jacobi_fd_test(
    state: &State,
    f: &FunctionalDerivs,
    g: &FunctionalDerivs,
    k: &FunctionalDerivs,
    h: &HodgeSystem,
    h_fd: f64,
) -> Result<JacobiReport> {
    let kern = BracketKernel::new(state, h)?;
    let gk = bracket_state_derivative(state, g, k, h, h_fd)?;
    let kf = bracket_state_derivative(state, k, f, h, h_fd)?;
    let fg = bracket_state_derivative(state, f, g, h, h_fd)?;
    let terms = [kern.eval(f, &gk, false)?, kern.eval(g, &kf, false)?, kern.eval(k, &fg, false)?];
    let residual = (terms[0] + terms[1] + terms[2]).abs();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    let normalized = if scale > 0.0 { residual / scale } else { 0.0 };
    Ok(JacobiReport { terms, residual, normalized })
}

/// η of an (η,φ∂,Σ) or (ω,φ∂,Σ) state.
pub fn state_eta(state: &State, h: &HodgeSystem) -> Result<Vec<f64>> {
    eta_of(state, h)
}
