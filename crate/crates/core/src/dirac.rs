//! Dirac structures D₁, D₂, D₃ with boundary ports, their symmetric
//! pairing, and the self-orthogonality / rank audit.

use nalgebra::DMatrix;
use rand::Rng;

use crate::brackets::{self, grad_n};
use crate::elliptic;
use crate::energetics::{self, Formulation, FunctionalDerivs, State};
use crate::error::{PhError, Result};
use crate::forms::{self, HodgeSystem};
use crate::linalg;

/// Efforts. `vol` is the star representative u (v and η forms) or the
/// 2-cochain s (ω form); `e_phi` is a zero-sum covector on ∂Ω.
#[derive(Clone, Debug, PartialEq)]
pub struct EffortTuple {
    pub formulation: Formulation,
    pub vol: Vec<f64>,
    pub e_phi: Option<Vec<f64>>,
    pub e_sigma: Vec<f64>,
    pub e_b: Vec<f64>,
}

/// Flows. `vol` is a 1-cochain (v, η) or a 2-cochain (ω); `f_phi` is
/// defined up to a constant; `f_sigma`, `f_b` are boundary covectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowTuple {
    pub formulation: Formulation,
    pub vol: Vec<f64>,
    pub f_phi: Option<Vec<f64>>,
    pub f_sigma: Vec<f64>,
    pub f_b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiracTuple {
    pub flow: FlowTuple,
    pub effort: EffortTuple,
    /// residual of the potential-flow recovery (zero for D₁)
    pub recovery_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lift {
    Harmonic,
    Zero,
}

impl EffortTuple {
    pub fn zeros(form: Formulation, h: &HodgeSystem) -> Self {
        let c = h.complex();
        let nvol = if form == Formulation::Omega { c.n_triangles() } else { c.n_edges() };
        EffortTuple {
            formulation: form,
            vol: vec![0.0; nvol],
            e_phi: (form != Formulation::V).then(|| vec![0.0; c.boundary_vertices().len()]),
            e_sigma: vec![0.0; c.sigma_vertices().len()],
            e_b: vec![0.0; c.gamma_vertices().len()],
        }
    }

    /// Efforts of a functional-derivative tuple; a missing port slot is zero.
    pub fn from_derivs(f: &FunctionalDerivs, h: &HodgeSystem) -> Result<Self> {
        let c = h.complex();
        f.check(f.formulation, c)?;
        let vol = match f.formulation {
            Formulation::V => f.dv.clone(),
            Formulation::Eta => f.d_eta.clone(),
            Formulation::Omega => f.d_omega.clone(),
        }
        .unwrap();
        Ok(EffortTuple {
            formulation: f.formulation,
            vol,
            e_phi: f.d_phi.clone(),
            e_sigma: f.d_sigma.clone(),
            e_b: f.d_port.clone().unwrap_or_else(|| vec![0.0; c.gamma_vertices().len()]),
        })
    }

    fn check(&self, form: Formulation, h: &HodgeSystem) -> Result<()> {
        let c = h.complex();
        let nvol = if form == Formulation::Omega { c.n_triangles() } else { c.n_edges() };
        let ok = self.formulation == form
            && self.vol.len() == nvol
            && self.e_sigma.len() == c.sigma_vertices().len()
            && self.e_b.len() == c.gamma_vertices().len()
            && match (&self.e_phi, form) {
                (None, Formulation::V) => true,
                (Some(e), Formulation::Eta | Formulation::Omega) => e.len() == c.boundary_vertices().len(),
                _ => false,
            };
        if !ok {
            return Err(PhError::Formulation(format!("effort tuple does not fit a {form:?} structure on this mesh")));
        }
        Ok(())
    }
}

/// A D-map evaluated at one state.
pub struct DiracMap<'a> {
    h: &'a HodgeSystem,
    formulation: Formulation,
    zeta: Vec<f64>,
    eta_at_sigma: Vec<[f64; 2]>,
}

impl<'a> DiracMap<'a> {
    pub fn new(state: &State, h: &'a HodgeSystem) -> Result<Self> {
        let c = h.complex();
        c.require_simply_connected()?;
        let (zeta, eta_at_sigma) = match state {
            State::V { v } => (forms::vorticity_density(v, h), Vec::new()),
            _ => {
                let eta = brackets::state_eta(state, h)?;
                let w = c.sigma_vertices().iter().map(|&i| h.vertex_field(&eta, i)).collect();
                (forms::vorticity_density(&eta, h), w)
            }
        };
        Ok(DiracMap { h, formulation: state.formulation(), zeta, eta_at_sigma })
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn apply(&self, e: &EffortTuple) -> Result<DiracTuple> {
        self.apply_with_lift(e, Lift::Harmonic)
    }

    pub fn apply_with_lift(&self, e: &EffortTuple, lift: Lift) -> Result<DiracTuple> {
        e.check(self.formulation, self.h)?;
        match self.formulation {
            Formulation::V => {
                let flow = self.d1(&e.vol, &e.e_sigma, &e.e_b, lift)?;
                Ok(DiracTuple { flow, effort: e.clone(), recovery_residual: 0.0 })
            }
            Formulation::Eta => {
                let (flow, r) = self.d2(&e.vol, e.e_phi.as_ref().unwrap(), &e.e_sigma, &e.e_b, lift)?;
                Ok(DiracTuple { flow, effort: e.clone(), recovery_residual: r })
            }
            Formulation::Omega => {
                let u = elliptic::codiff2(&e.vol, self.h)?;
                let (mut flow, r) = self.d2(&u, e.e_phi.as_ref().unwrap(), &e.e_sigma, &e.e_b, lift)?;
                flow.vol = self.h.d1().mul_vec(&flow.vol);
                flow.formulation = Formulation::Omega;
                Ok(DiracTuple { flow, effort: e.clone(), recovery_residual: r })
            }
        }
    }

    fn d1(&self, u: &[f64], e_sigma: &[f64], e_b: &[f64], lift: Lift) -> Result<FlowTuple> {
        let h = self.h;
        let c = h.complex();
        let ext = elliptic::merge_boundary(e_sigma, e_b, c);
        let li = match lift {
            Lift::Harmonic => elliptic::harmonic_lift(&ext, h)?,
            Lift::Zero => elliptic::zero_lift(&ext, h)?,
        };
        let ip = h.solve_mass(1, &forms::interior_product_rhs(u, &self.zeta, h))?;
        let f_v = linalg::add(&h.d0().mul_vec(li.values()), &ip);
        let n = forms::weak_normal_trace_raw(u, h);
        let neg = |x: Vec<f64>| x.into_iter().map(|y| -y).collect::<Vec<_>>();
        Ok(FlowTuple {
            formulation: Formulation::V,
            vol: f_v,
            f_phi: None,
            f_sigma: neg(elliptic::restrict_sigma(&n, c)),
            f_b: neg(elliptic::restrict_gamma(&n, c)),
        })
    }

    /// D₁ pulled back through u = u_η + dN_φ(e_φ), e_Σ ↦ e_Σ + ⟨dN_φ(e_φ), η⟩.
    fn d2(&self, u_eta: &[f64], e_phi: &[f64], e_sigma: &[f64], e_b: &[f64], lift: Lift) -> Result<(FlowTuple, f64)> {
        let h = self.h;
        let c = h.complex();
        let gn = grad_n(e_phi, h)?;
        let u = linalg::add(u_eta, &gn);
        let es: Vec<f64> = c
            .sigma_vertices()
            .iter()
            .enumerate()
            .map(|(k, &i)| e_sigma[k] + forms::dot2(h.vertex_field(&gn, i), self.eta_at_sigma[k]))
            .collect();
        let f1 = self.d1(&u, &es, e_b, lift)?;
        let mf = h.mass(1).mul_vec(&f1.vol);
        // tangent part of f_v: remove every gradient
        let psi = elliptic::solve_neumann_full(&h.d0().tr_mul_vec(&mf), h)?;
        let f_eta = linalg::sub(&f1.vol, &h.d0().mul_vec(&psi));
        // f_φ: boundary values of χ with Kχ = D0ᵀ(M1 f_v + q)
        let mut q = mf;
        for (k, &i) in c.sigma_vertices().iter().enumerate() {
            for (e, w) in h.vertex_field_covector(i, self.eta_at_sigma[k]) {
                q[e] += f1.f_sigma[k] * w;
            }
        }
        let load = h.d0().tr_mul_vec(&q);
        let chi = elliptic::solve_neumann_full(&load, h)?;
        let r = linalg::norm(&linalg::sub(&h.stiffness().mul_vec(&chi), &load)) / linalg::norm(&load).max(1e-300);
        if r > 1e-7 {
            return Err(PhError::Solver(format!("potential-flow recovery residual {r:e}")));
        }
        let f_phi = c.boundary_vertices().iter().map(|&v| chi[v]).collect();
        Ok((
            FlowTuple { formulation: Formulation::Eta, vol: f_eta, f_phi: Some(f_phi), f_sigma: f1.f_sigma, f_b: f1.f_b },
            r,
        ))
    }
}

pub fn d1_map(e: &EffortTuple, v: &[f64], h: &HodgeSystem) -> Result<DiracTuple> {
    DiracMap::new(&State::V { v: v.to_vec() }, h)?.apply(e)
}

pub fn d2_map(e: &EffortTuple, eta: &[f64], h: &HodgeSystem) -> Result<DiracTuple> {
    DiracMap::new(&State::Eta { eta: eta.to_vec(), phi_b: Vec::new() }, h)?.apply(e)
}

pub fn d3_map(e: &EffortTuple, omega: &[f64], h: &HodgeSystem) -> Result<DiracTuple> {
    DiracMap::new(&State::Omega { omega: omega.to_vec(), phi_b: Vec::new() }, h)?.apply(e)
}

fn vol_pair(form: Formulation, a: &[f64], b: &[f64], h: &HodgeSystem) -> f64 {
    match form {
        Formulation::Omega => a.iter().zip(b).zip(h.areas()).map(|((x, y), ar)| x * y / ar).sum(),
        _ => linalg::dot(a, &h.mass(1).mul_vec(b)),
    }
}

/// ⟨e, f⟩ summed over all slots, split into (interior, port).
fn pairing(e: &EffortTuple, f: &FlowTuple, h: &HodgeSystem) -> (f64, f64) {
    let mut inner = vol_pair(e.formulation, &e.vol, &f.vol, h) + linalg::dot(&e.e_sigma, &f.f_sigma);
    if let (Some(a), Some(b)) = (&e.e_phi, &f.f_phi) {
        inner += linalg::dot(a, b);
    }
    (inner, linalg::dot(&e.e_b, &f.f_b))
}

fn tuple_norms(t: &DiracTuple, h: &HodgeSystem) -> (f64, f64) {
    let form = t.effort.formulation;
    let sq = |x: &[f64]| linalg::dot(x, x);
    let mut ne = vol_pair(form, &t.effort.vol, &t.effort.vol, h) + sq(&t.effort.e_sigma) + sq(&t.effort.e_b);
    let mut nf = vol_pair(form, &t.flow.vol, &t.flow.vol, h) + sq(&t.flow.f_sigma) + sq(&t.flow.f_b);
    if let Some(x) = &t.effort.e_phi {
        ne += sq(x);
    }
    if let Some(x) = &t.flow.f_phi {
        nf += sq(x);
    }
    (ne.sqrt(), nf.sqrt())
}

/// ⟨⟨t1, t2⟩⟩ = ⟨e¹, f²⟩ + ⟨e², f¹⟩ over volume, ∂Ω, Σ and Γ slots.
pub fn bilinear_form(t1: &DiracTuple, t2: &DiracTuple, h: &HodgeSystem) -> Result<f64> {
    if t1.effort.formulation != t2.effort.formulation {
        return Err(PhError::Formulation("pairing tuples of different structures".into()));
    }
    let (a, b) = pairing(&t1.effort, &t2.flow, h);
    let (c, d) = pairing(&t2.effort, &t1.flow, h);
    Ok((a + b) + (c + d))
}

/// |⟨⟨t1,t2⟩⟩| / (‖e¹‖‖f²‖ + ‖e²‖‖f¹‖).
pub fn normalized_pairing(t1: &DiracTuple, t2: &DiracTuple, h: &HodgeSystem) -> Result<f64> {
    let b = bilinear_form(t1, t2, h)?;
    let (e1, f1) = tuple_norms(t1, h);
    let (e2, f2) = tuple_norms(t2, h);
    let s = e1 * f2 + e2 * f1;
    Ok(if s > 0.0 { b.abs() / s } else { b.abs() })
}

/// (Σ interior slots ⟨e,f⟩, ⟨e_b,f_b⟩).
pub fn power_balance(t: &DiracTuple, h: &HodgeSystem) -> (f64, f64) {
    pairing(&t.effort, &t.flow, h)
}

pub fn random_effort(form: Formulation, h: &HodgeSystem, rng: &mut impl Rng) -> Result<EffortTuple> {
    let f = brackets::random_tuple(form, h, rng, true)?;
    EffortTuple::from_derivs(&f, h)
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub formulation: Formulation,
    /// (pair index, normalized residual)
    pub pairs: Vec<(usize, f64)>,
    pub max_residual: f64,
    pub rank: usize,
    pub dim_flow: usize,
}

impl AuditReport {
    pub fn rank_ok(&self) -> bool {
        self.rank == self.dim_flow
    }
}

/// Flow-space dimension from mesh counts.
pub fn flow_dimension(form: Formulation, h: &HodgeSystem) -> usize {
    let c = h.complex();
    let bd = c.sigma_vertices().len() + c.gamma_vertices().len();
    match form {
        Formulation::V => c.n_edges() - c.interior_vertices().len() + bd,
        _ => c.n_triangles() + c.boundary_vertices().len() - 1 + bd,
    }
}

/// Basis of effort parameters for the structure.
fn effort_basis(form: Formulation, h: &HodgeSystem) -> Result<Vec<EffortTuple>> {
    let c = h.complex();
    let nb = c.boundary_vertices().len();
    let zero = EffortTuple::zeros(form, h);
    let mut out = Vec::new();
    let vols: Vec<Vec<f64>> = match form {
        Formulation::V => elliptic::solenoidal_basis(h)?,
        Formulation::Eta => elliptic::tangent_basis(h)?,
        Formulation::Omega => (0..c.n_triangles())
            .map(|t| {
                let mut s = vec![0.0; c.n_triangles()];
                s[t] = 1.0;
                s
            })
            .collect(),
    };
    for v in vols {
        out.push(EffortTuple { vol: v, ..zero.clone() });
    }
    if form != Formulation::V {
        for k in 1..nb {
            let mut e = vec![0.0; nb];
            e[0] = -1.0;
            e[k] = 1.0;
            out.push(EffortTuple { e_phi: Some(e), ..zero.clone() });
        }
    }
    for k in 0..zero.e_sigma.len() {
        let mut t = zero.clone();
        t.e_sigma[k] = 1.0;
        out.push(t);
    }
    for k in 0..zero.e_b.len() {
        let mut t = zero.clone();
        t.e_b[k] = 1.0;
        out.push(t);
    }
    Ok(out)
}

/// Rank of the graph map efforts ↦ (flow, effort), with flows in
/// coordinates dual to the effort basis.
pub fn graph_rank(map: &DiracMap, h: &HodgeSystem) -> Result<usize> {
    let basis = effort_basis(map.formulation, h)?;
    let tuples: Vec<DiracTuple> = basis.iter().map(|e| map.apply(e)).collect::<Result<_>>()?;
    let n = basis.len();
    // flow coordinates: pairing of each flow with every basis effort
    let mut m = DMatrix::zeros(2 * n, n);
    for (j, t) in tuples.iter().enumerate() {
        for (i, e) in basis.iter().enumerate() {
            let (a, b) = pairing(e, &t.flow, h);
            m[(i, j)] = a + b;
        }
        m[(n + j, j)] = 1.0;
    }
    Ok(linalg::numerical_rank(&m, 1e-10))
}

/// Pairwise bilinear-form residuals over `samples` random effort tuples plus
/// the rank identity.
pub fn self_orthogonality_audit(state: &State, h: &HodgeSystem, samples: usize, rng: &mut impl Rng) -> Result<AuditReport> {
    let form = state.formulation();
    let map = DiracMap::new(state, h)?;
    let tuples: Vec<DiracTuple> = (0..samples)
        .map(|_| random_effort(form, h, rng).and_then(|e| map.apply(&e)))
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    let mut id = 0;
    for i in 0..samples {
        for j in i..samples {
            pairs.push((id, normalized_pairing(&tuples[i], &tuples[j], h)?));
            id += 1;
        }
    }
    let max_residual = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(AuditReport { formulation: form, pairs, max_residual, rank: graph_rank(&map, h)?, dim_flow: flow_dimension(form, h) })
}

/// -⟨e_F, D(e_G)⟩: the Dirac-associated bracket including the Γ port.
pub fn dirac_bracket(state: &State, f: &FunctionalDerivs, g: &FunctionalDerivs, h: &HodgeSystem) -> Result<f64> {
    let map = DiracMap::new(state, h)?;
    let tg = map.apply(&EffortTuple::from_derivs(g, h)?)?;
    let ef = EffortTuple::from_derivs(f, h)?;
    let (a, b) = pairing(&ef, &tg.flow, h);
    Ok(-(a + b))
}

/// Flows −(state rate) from the Hamiltonian efforts at `state`.
pub fn hamiltonian_flow(state: &State, p: &energetics::PhysParams, h: &HodgeSystem) -> Result<DiracTuple> {
    let fd = energetics::func_derivs_h(state, p, h)?;
    DiracMap::new(state, h)?.apply(&EffortTuple::from_derivs(&fd, h)?)
}
