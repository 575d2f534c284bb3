//! Hamiltonians for the three variable sets, boundary curvature, and the
//! functional derivatives that feed the brackets and Dirac maps.

use crate::complex::SimplicialComplex;
use crate::elliptic;
use crate::error::{PhError, Result};
use crate::forms::{self, dot2, HodgeSystem};
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysParams {
    pub rho: f64,
    pub tau: f64,
    pub g0: f64,
    /// atmospheric pressure; only p - p̄ enters, so this stays 0
    pub p_bar: f64,
}

impl PhysParams {
    pub fn new(rho: f64, tau: f64, g0: f64) -> Result<Self> {
        if !(rho > 0.0) || !(tau >= 0.0) || !(g0 >= 0.0) {
            return Err(PhError::Config(format!("need rho > 0, tau >= 0, g0 >= 0; got {rho}, {tau}, {g0}")));
        }
        Ok(PhysParams { rho, tau, g0, p_bar: 0.0 })
    }

    pub fn surface_coeff(&self) -> f64 {
        self.tau / self.rho
    }
}

/// Discrete free surface: Σ-interior vertices with their chain neighbours.
#[derive(Clone, Debug)]
pub struct SurfaceState {
    /// Σ-interior vertex ids, in `sigma_vertices` order
    pub vertices: Vec<usize>,
    pub positions: Vec<[f64; 2]>,
    /// (previous, next) neighbour along the traversal
    pub neighbours: Vec<(usize, usize)>,
    /// unit outward chord normals
    pub normals: Vec<[f64; 2]>,
    /// lumped measure ½|x_next - x_prev|
    pub measure: Vec<f64>,
    pub curvature: Vec<f64>,
    /// total length of all Σ edges
    pub length: f64,
}

impl SurfaceState {
    pub fn new(c: &SimplicialComplex) -> Result<Self> {
        let mut nb = std::collections::HashMap::new();
        for ch in c.sigma_chains() {
            let n = ch.vertices.len();
            if ch.closed {
                for k in 0..n {
                    nb.insert(ch.vertices[k], (ch.vertices[(k + n - 1) % n], ch.vertices[(k + 1) % n]));
                }
            } else {
                for k in 1..n - 1 {
                    nb.insert(ch.vertices[k], (ch.vertices[k - 1], ch.vertices[k + 1]));
                }
            }
        }
        let x = c.vertices();
        let mut s = SurfaceState {
            vertices: c.sigma_vertices().to_vec(),
            positions: Vec::new(),
            neighbours: Vec::new(),
            normals: Vec::new(),
            measure: Vec::new(),
            curvature: Vec::new(),
            length: 0.0,
        };
        for &v in c.sigma_vertices() {
            let (p, q) = nb[&v];
            let e1 = sub2(x[v], x[p]);
            let e2 = sub2(x[q], x[v]);
            let (l1, l2) = (norm2(e1), norm2(e2));
            if l1 == 0.0 || l2 == 0.0 {
                return Err(PhError::Geometry(format!("zero-length surface edge at vertex {v}")));
            }
            let chord = sub2(x[q], x[p]);
            let m = 0.5 * norm2(chord);
            let theta = forms::cross2(e1, e2).atan2(dot2(e1, e2));
            s.positions.push(x[v]);
            s.neighbours.push((p, q));
            s.normals.push([chord[1] / (2.0 * m), -chord[0] / (2.0 * m)]);
            s.measure.push(m);
            s.curvature.push(theta / (0.5 * (l1 + l2)));
        }
        s.length = sigma_length(c);
        Ok(s)
    }
}

pub fn curvature(s: &SurfaceState) -> &[f64] {
    &s.curvature
}

pub fn sigma_length(c: &SimplicialComplex) -> f64 {
    c.boundary_edges()
        .iter()
        .filter(|&&e| c.edge_label(e) == Some(crate::complex::Label::Sigma))
        .map(|&e| c.edge_length(e))
        .sum()
}

/// ∫_Ω y dA.
pub fn height_moment(c: &SimplicialComplex) -> f64 {
    let x = c.vertices();
    (0..c.n_triangles())
        .map(|t| {
            let tri = c.triangles()[t];
            c.triangle_area(t) * (x[tri[0]][1] + x[tri[1]][1] + x[tri[2]][1]) / 3.0
        })
        .sum()
}

pub(crate) fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn norm2(a: [f64; 2]) -> f64 {
    (a[0] * a[0] + a[1] * a[1]).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Energy {
    pub total: f64,
    pub kinetic: f64,
    pub gravity: f64,
    pub surface: f64,
}

fn potential_parts(p: &PhysParams, h: &HodgeSystem) -> (f64, f64) {
    let c = h.complex();
    (p.g0 * height_moment(c), p.surface_coeff() * sigma_length(c))
}

/// ½⟨v,v⟩ + ∫Φ + (τ/ρ)|Σ|.
pub fn hamiltonian_v(v: &[f64], p: &PhysParams, h: &HodgeSystem) -> Result<Energy> {
    if v.len() != h.complex().n_edges() {
        return Err(PhError::Dimension("velocity length differs from edge count".into()));
    }
    let kinetic = 0.5 * linalg::dot(v, &h.mass(1).mul_vec(v));
    let (gravity, surface) = potential_parts(p, h);
    Ok(Energy { total: kinetic + gravity + surface, kinetic, gravity, surface })
}

/// ½⟨η,η⟩ + ½∫ tr(φ) ∗n(dφ) + ∫Φ + (τ/ρ)|Σ| with φ the harmonic lift of φ∂.
pub fn hamiltonian_eta(eta: &[f64], phi_b: &[f64], p: &PhysParams, h: &HodgeSystem) -> Result<Energy> {
    let r = linalg::max_abs(&forms::weak_normal_trace_raw(eta, h));
    let scale = linalg::norm(&h.mass(1).mul_vec(eta)).max(1e-300);
    if r > 1e-9 * scale.max(1.0) || forms::divergence_residual(eta, h) > 1e-9 {
        return Err(PhError::NotSolenoidal { residual: r / scale });
    }
    let phi = elliptic::harmonic_lift(phi_b, h)?;
    let flux = boundary_flux(phi.values(), h);
    let kinetic = 0.5 * linalg::dot(eta, &h.mass(1).mul_vec(eta)) + 0.5 * linalg::dot(phi_b, &flux);
    let (gravity, surface) = potential_parts(p, h);
    Ok(Energy { total: kinetic + gravity + surface, kinetic, gravity, surface })
}

/// ½∫β∧∗ω + potential-flow energy of φ∂ + ∫Φ + (τ/ρ)|Σ|, β = N_β(ω).
pub fn hamiltonian_omega(omega: &[f64], phi_b: &[f64], p: &PhysParams, h: &HodgeSystem) -> Result<Energy> {
    let om = h.cochain(2, omega.to_vec())?;
    let beta = elliptic::solve_nbeta(&om, h)?;
    let rot = 0.5 * beta.values().iter().zip(omega).zip(h.areas()).map(|((b, w), a)| b * w / a).sum::<f64>();
    let phi = elliptic::harmonic_lift(phi_b, h)?;
    let pot = 0.5 * linalg::dot(phi_b, &boundary_flux(phi.values(), h));
    let (gravity, surface) = potential_parts(p, h);
    let kinetic = rot + pot;
    Ok(Energy { total: kinetic + gravity + surface, kinetic, gravity, surface })
}

/// (K φ) on boundary vertices: the weak normal flux ∗n(dφ).
pub fn boundary_flux(phi: &[f64], h: &HodgeSystem) -> Vec<f64> {
    let kp = h.stiffness().mul_vec(phi);
    h.complex().boundary_vertices().iter().map(|&v| kp[v]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    /// (v, Σ)
    V,
    /// (η, φ∂, Σ)
    Eta,
    /// (ω, φ∂, Σ)
    Omega,
}

/// Functional-derivative tuple.
///
/// `dv`/`d_eta` are 1-cochain star representatives u with ∗δF/δ· = u;
/// `d_omega` is the 2-cochain s with δF/δω = ∗s, so δF/δη = δs;
/// `d_phi` is a covector on all boundary vertices; `d_sigma` lives on
/// Σ-interior vertices; `d_port` optionally carries a Γ effort.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalDerivs {
    pub formulation: Formulation,
    pub dv: Option<Vec<f64>>,
    pub d_eta: Option<Vec<f64>>,
    pub d_omega: Option<Vec<f64>>,
    pub d_phi: Option<Vec<f64>>,
    pub d_sigma: Vec<f64>,
    pub d_port: Option<Vec<f64>>,
}

impl FunctionalDerivs {
    pub fn v(u: Vec<f64>, s: Vec<f64>) -> Self {
        FunctionalDerivs { formulation: Formulation::V, dv: Some(u), d_eta: None, d_omega: None, d_phi: None, d_sigma: s, d_port: None }
    }
    pub fn eta(u: Vec<f64>, e_phi: Vec<f64>, s: Vec<f64>) -> Self {
        FunctionalDerivs {
            formulation: Formulation::Eta,
            dv: None,
            d_eta: Some(u),
            d_omega: None,
            d_phi: Some(e_phi),
            d_sigma: s,
            d_port: None,
        }
    }
    pub fn omega(s_omega: Vec<f64>, e_phi: Vec<f64>, s: Vec<f64>) -> Self {
        FunctionalDerivs {
            formulation: Formulation::Omega,
            dv: None,
            d_eta: None,
            d_omega: Some(s_omega),
            d_phi: Some(e_phi),
            d_sigma: s,
            d_port: None,
        }
    }

    pub fn with_port(mut self, e_b: Vec<f64>) -> Self {
        self.d_port = Some(e_b);
        self
    }

    pub fn check(&self, f: Formulation, c: &SimplicialComplex) -> Result<()> {
        if self.formulation != f {
            return Err(PhError::Formulation(format!("tuple is {:?}, expected {:?}", self.formulation, f)));
        }
        let ok = match f {
            Formulation::V => self.dv.as_ref().is_some_and(|u| u.len() == c.n_edges()),
            Formulation::Eta => {
                self.d_eta.as_ref().is_some_and(|u| u.len() == c.n_edges())
                    && self.d_phi.as_ref().is_some_and(|e| e.len() == c.boundary_vertices().len())
            }
            Formulation::Omega => {
                self.d_omega.as_ref().is_some_and(|u| u.len() == c.n_triangles())
                    && self.d_phi.as_ref().is_some_and(|e| e.len() == c.boundary_vertices().len())
            }
        };
        if !ok || self.d_sigma.len() != c.sigma_vertices().len() {
            return Err(PhError::Formulation(format!("slots of a {f:?} tuple missing or misshapen")));
        }
        if let Some(p) = &self.d_port {
            if p.len() != c.gamma_vertices().len() {
                return Err(PhError::Formulation("port slot length differs from Γ vertex count".into()));
            }
        }
        Ok(())
    }

    /// a·self + b·other, slot by slot.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let lin = |x: &Option<Vec<f64>>, y: &Option<Vec<f64>>| match (x, y) {
            (Some(x), Some(y)) => Some(x.iter().zip(y).map(|(x, y)| a * x + b * y).collect()),
            (Some(x), None) => Some(x.iter().map(|x| a * x).collect()),
            (None, Some(y)) => Some(y.iter().map(|y| b * y).collect()),
            _ => None,
        };
        FunctionalDerivs {
            formulation: self.formulation,
            dv: lin(&self.dv, &other.dv),
            d_eta: lin(&self.d_eta, &other.d_eta),
            d_omega: lin(&self.d_omega, &other.d_omega),
            d_phi: lin(&self.d_phi, &other.d_phi),
            d_sigma: self.d_sigma.iter().zip(&other.d_sigma).map(|(x, y)| a * x + b * y).collect(),
            d_port: lin(&self.d_port, &other.d_port),
        }
    }
}

/// State in one of the three variable sets; Σ geometry lives in the mesh.
#[derive(Clone, Debug)]
pub enum State {
    V { v: Vec<f64> },
    Eta { eta: Vec<f64>, phi_b: Vec<f64> },
    Omega { omega: Vec<f64>, phi_b: Vec<f64> },
}

impl State {
    pub fn formulation(&self) -> Formulation {
        match self {
            State::V { .. } => Formulation::V,
            State::Eta { .. } => Formulation::Eta,
            State::Omega { .. } => Formulation::Omega,
        }
    }
}

/// ⟨a(x_i), b(x_i)⟩ at Σ-interior vertices from vertex-averaged Whitney fields.
pub fn sigma_vertex_inner(a: &[f64], b: &[f64], h: &HodgeSystem) -> Vec<f64> {
    h.complex()
        .sigma_vertices()
        .iter()
        .map(|&i| dot2(h.vertex_field(a, i), h.vertex_field(b, i)))
        .collect()
}

/// tr(½|v|² + Φ) + τk/ρ on Σ-interior vertices.
pub fn bernoulli_sigma(v: &[f64], p: &PhysParams, h: &HodgeSystem) -> Result<Vec<f64>> {
    let s = SurfaceState::new(h.complex())?;
    let vv = sigma_vertex_inner(v, v, h);
    Ok((0..s.vertices.len())
        .map(|k| 0.5 * vv[k] + p.g0 * s.positions[k][1] + p.surface_coeff() * s.curvature[k])
        .collect())
}

pub fn func_derivs_h(state: &State, p: &PhysParams, h: &HodgeSystem) -> Result<FunctionalDerivs> {
    match state {
        State::V { v } => Ok(FunctionalDerivs::v(v.clone(), bernoulli_sigma(v, p, h)?)),
        State::Eta { eta, phi_b } => {
            let (e_phi, s) = potential_derivs(eta, phi_b, p, h)?;
            Ok(FunctionalDerivs::eta(eta.clone(), e_phi, s))
        }
        State::Omega { omega, phi_b } => {
            let (beta, eta) = elliptic::solve_nbeta_full(&h.cochain(2, omega.clone())?, h)?;
            let (e_phi, s) = potential_derivs(eta.values(), phi_b, p, h)?;
            Ok(FunctionalDerivs::omega(beta.into_values(), e_phi, s))
        }
    }
}

fn potential_derivs(eta: &[f64], phi_b: &[f64], p: &PhysParams, h: &HodgeSystem) -> Result<(Vec<f64>, Vec<f64>)> {
    let phi = elliptic::harmonic_lift(phi_b, h)?;
    let e_phi = boundary_flux(phi.values(), h);
    let dphi = h.d0().mul_vec(phi.values());
    let v = linalg::add(&dphi, eta);
    let mut s = bernoulli_sigma(&v, p, h)?;
    let corr = sigma_vertex_inner(&dphi, eta, h);
    for (x, c) in s.iter_mut().zip(corr) {
        *x -= c;
    }
    Ok((e_phi, s))
}

/// Move Σ-interior vertices along their unit normals by `disp` and carry the
/// interior along by harmonic extension.
pub fn perturb_sigma(h: &HodgeSystem, disp: &[f64]) -> Result<SimplicialComplex> {
    let c = h.complex();
    let s = SurfaceState::new(c)?;
    let mut bd = vec![[0.0; 2]; c.boundary_vertices().len()];
    for (k, &v) in s.vertices.iter().enumerate() {
        bd[c.boundary_index(v).unwrap()] = [disp[k] * s.normals[k][0], disp[k] * s.normals[k][1]];
    }
    crate::ale::deform(h, &bd)
}

/// |(F(Σ + h·∂Σ) - F(Σ - h·∂Σ))/2h - Σ_i δF/δΣ_i ∂Σ_i ℓ_i|, with ∂Σ a normal speed per vertex.
pub fn shape_derivative_audit(
    f: impl Fn(&HodgeSystem) -> Result<f64>,
    h: &HodgeSystem,
    dir: &[f64],
    density: &[f64],
    h_fd: f64,
) -> Result<f64> {
    let s = SurfaceState::new(h.complex())?;
    let plus = HodgeSystem::new(&perturb_sigma(h, &linalg::scale(h_fd, dir))?)?;
    let minus = HodgeSystem::new(&perturb_sigma(h, &linalg::scale(-h_fd, dir))?)?;
    let fd = (f(&plus)? - f(&minus)?) / (2.0 * h_fd);
    let an: f64 = (0..dir.len()).map(|k| density[k] * dir[k] * s.measure[k]).sum();
    Ok((fd - an).abs())
}
