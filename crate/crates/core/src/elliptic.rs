//! Solution operators: Neumann potential N_φ, stream-form N_β, harmonic
//! lifting, extension by zero and the Hodge decomposition of a velocity.

use rand::Rng;

use crate::complex::SimplicialComplex;
use crate::error::{PhError, Result};
use crate::forms::{self, Cochain, HodgeSystem};
use crate::linalg;
use crate::quadrature::GAUSS2;

/// Neumann data as a covector on boundary vertices (traversal order):
/// entry i is ∫_∂Ω λ_i g ds.
#[derive(Clone, Debug, PartialEq)]
pub struct NeumannData {
    pub values: Vec<f64>,
}

impl NeumannData {
    pub fn new(c: &SimplicialComplex, values: Vec<f64>) -> Result<Self> {
        if values.len() != c.boundary_vertices().len() {
            return Err(PhError::Dimension(format!(
                "Neumann data needs {} boundary values, got {}",
                c.boundary_vertices().len(),
                values.len()
            )));
        }
        Ok(NeumannData { values })
    }

    pub fn zeros(c: &SimplicialComplex) -> Self {
        NeumannData { values: vec![0.0; c.boundary_vertices().len()] }
    }

    pub fn from_edge_fluxes(c: &SimplicialComplex, flux: &[f64]) -> Self {
        NeumannData { values: forms::edge_flux_to_covector(flux, c) }
    }

    /// Consistent load of a boundary flux density `g(x, n)`.
    pub fn from_density(c: &SimplicialComplex, g: impl Fn([f64; 2], [f64; 2]) -> f64) -> Self {
        let mut out = vec![0.0; c.boundary_vertices().len()];
        for (k, &e) in c.boundary_edges().iter().enumerate() {
            let [a, b] = c.edges()[e];
            let (p, q) = (c.vertices()[a], c.vertices()[b]);
            let n = c.boundary_edge_normal(k);
            let len = c.edge_length(e);
            for (s, w) in GAUSS2 {
                let x = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
                let gv = w * len * g(x, n);
                out[c.boundary_index(a).unwrap()] += (1.0 - s) * gv;
                out[c.boundary_index(b).unwrap()] += s * gv;
            }
        }
        NeumannData { values: out }
    }

    pub fn net_flux(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Entries on Σ-interior vertices (order of `sigma_vertices`).
    pub fn sigma_part(&self, c: &SimplicialComplex) -> Vec<f64> {
        c.sigma_vertices().iter().map(|&v| self.values[c.boundary_index(v).unwrap()]).collect()
    }

    /// Entries on Γ vertices (order of `gamma_vertices`).
    pub fn gamma_part(&self, c: &SimplicialComplex) -> Vec<f64> {
        c.gamma_vertices().iter().map(|&v| self.values[c.boundary_index(v).unwrap()]).collect()
    }
}

/// Potential φ with ⟨dφ, dψ⟩ = Σ g_i ψ_i and zero mean.
pub fn solve_nphi(g: &NeumannData, h: &HodgeSystem) -> Result<Cochain> {
    let c = h.complex();
    if g.values.len() != c.boundary_vertices().len() {
        return Err(PhError::Dimension("Neumann data length differs from boundary vertex count".into()));
    }
    let scale: f64 = g.values.iter().map(|x| x.abs()).sum();
    let net = g.net_flux();
    if net.abs() > 1e-10 * scale && net.abs() > 1e-13 {
        return Err(PhError::Incompatible { net });
    }
    let mut b = vec![0.0; c.n_vertices()];
    for (k, &v) in c.boundary_vertices().iter().enumerate() {
        b[v] = g.values[k];
    }
    // remove the roundoff-level net flux so the pinned row stays consistent
    let nb = c.boundary_vertices().len() as f64;
    for &v in c.boundary_vertices() {
        b[v] -= net / nb;
    }
    let phi = solve_neumann_full(&b, h)?;
    let r = linalg::sub(&h.stiffness().mul_vec(&phi), &b);
    let bn = linalg::norm(&b);
    if bn > 0.0 && linalg::norm(&r) > 1e-11 * bn {
        return Err(PhError::Solver(format!("Neumann residual {:e}", linalg::norm(&r) / bn)));
    }
    h.cochain(0, phi)
}

/// Zero-mean solution of `K φ = b` for a compatible load vector on all vertices.
pub fn solve_neumann_full(b: &[f64], h: &HodgeSystem) -> Result<Vec<f64>> {
    let mut phi = h.solve_pinned(b)?;
    let m = h.mass(0).mul_vec(&vec![1.0; phi.len()]);
    let mean = linalg::dot(&m, &phi) / m.iter().sum::<f64>();
    for x in &mut phi {
        *x -= mean;
    }
    Ok(phi)
}

/// Breadth-first dual spanning forest rooted outside the domain: each
/// triangle is linked through one edge to its parent (or to the exterior).
struct DualTree {
    order: Vec<usize>,
    link: Vec<(usize, Option<usize>)>,
}

fn dual_tree(c: &SimplicialComplex) -> Result<DualTree> {
    let nt = c.n_triangles();
    let mut link = vec![(usize::MAX, None); nt];
    let mut seen = vec![false; nt];
    let mut order = Vec::with_capacity(nt);
    let mut queue = std::collections::VecDeque::new();
    for t in 0..nt {
        for s in c.tri_edges()[t] {
            if !seen[t] && c.edge_triangles(s.edge).len() == 1 {
                seen[t] = true;
                link[t] = (s.edge, None);
                queue.push_back(t);
            }
        }
    }
    while let Some(t) = queue.pop_front() {
        order.push(t);
        for s in c.tri_edges()[t] {
            for &u in c.edge_triangles(s.edge) {
                if !seen[u] {
                    seen[u] = true;
                    link[u] = (s.edge, Some(t));
                    queue.push_back(u);
                }
            }
        }
    }
    if order.len() != nt {
        return Err(PhError::Solver("a mesh component has no boundary; stream solve undefined".into()));
    }
    Ok(DualTree { order, link })
}

fn slot_sign(c: &SimplicialComplex, t: usize, e: usize) -> f64 {
    c.tri_edges()[t].iter().find(|s| s.edge == e).map(|s| s.sign as f64).unwrap()
}

/// Some 1-cochain η with D1 η = ω (supported on dual-tree edges).
pub fn particular_curl_preimage(omega: &[f64], c: &SimplicialComplex) -> Result<Vec<f64>> {
    let tree = dual_tree(c)?;
    let mut eta = vec![0.0; c.n_edges()];
    for &t in tree.order.iter().rev() {
        let (e, _) = tree.link[t];
        let mut rest = 0.0;
        for s in c.tri_edges()[t] {
            if s.edge != e {
                rest += s.sign as f64 * eta[s.edge];
            }
        }
        eta[e] = (omega[t] - rest) / slot_sign(c, t, e);
    }
    Ok(eta)
}

/// Solve `D1ᵀ y = r` on the dual tree; error if r is not in the range.
fn solve_d1t(r: &[f64], c: &SimplicialComplex) -> Result<Vec<f64>> {
    let tree = dual_tree(c)?;
    let mut y = vec![0.0; c.n_triangles()];
    for &t in &tree.order {
        let (e, parent) = tree.link[t];
        let mut rhs = r[e];
        if let Some(p) = parent {
            rhs -= slot_sign(c, p, e) * y[p];
        }
        y[t] = rhs / slot_sign(c, t, e);
    }
    let d1t = c.d1().tr_mul_vec(&y);
    let res = linalg::norm(&linalg::sub(&d1t, r));
    let rn = linalg::norm(r);
    if res > 1e-8 * rn.max(1e-300) {
        return Err(PhError::Solver(format!(
            "co-exact recovery residual {:e}: field has a harmonic component",
            res / rn
        )));
    }
    Ok(y)
}

/// Stream-form solve. Returns (β, η = δβ) with D1 η = ω and η ⟂ all gradients.
pub fn solve_nbeta_full(omega: &Cochain, h: &HodgeSystem) -> Result<(Cochain, Cochain)> {
    h.check(omega, 2)?;
    let c = h.complex();
    let eta_p = particular_curl_preimage(omega.values(), c)?;
    let load = h.weak_divergence(&eta_p);
    let psi = solve_neumann_full(&load, h)?;
    let eta = linalg::sub(&eta_p, &h.d0().mul_vec(&psi));
    let y = solve_d1t(&h.mass(1).mul_vec(&eta), c)?;
    let beta: Vec<f64> = y.iter().zip(h.areas()).map(|(y, a)| y * a).collect();
    Ok((h.cochain(2, beta)?, h.cochain(1, eta)?))
}

/// The 2-cochain s with `M1⁻¹ D1ᵀ M2 s = u` for a tangent-solenoidal u.
pub fn stream_of(u: &[f64], h: &HodgeSystem) -> Result<Vec<f64>> {
    let y = solve_d1t(&h.mass(1).mul_vec(u), h.complex())?;
    Ok(y.iter().zip(h.areas()).map(|(y, a)| y * a).collect())
}

/// `δ s = M1⁻¹ D1ᵀ M2 s` for a 2-cochain s.
pub fn codiff2(s: &[f64], h: &HodgeSystem) -> Result<Vec<f64>> {
    let m2s: Vec<f64> = s.iter().zip(h.areas()).map(|(s, a)| s / a).collect();
    h.solve_mass(1, &h.d1().tr_mul_vec(&m2s))
}

pub fn solve_nbeta(omega: &Cochain, h: &HodgeSystem) -> Result<Cochain> {
    Ok(solve_nbeta_full(omega, h)?.0)
}

#[derive(Clone, Debug)]
pub struct HodgeSplit {
    pub exact: Cochain,
    pub coexact: Cochain,
    pub harmonic: Cochain,
    pub original: Cochain,
    pub phi: Cochain,
    pub beta: Cochain,
}

impl HodgeSplit {
    /// (reconstruction, orthogonality) residuals normalized by ‖v‖².
    pub fn residuals(&self, h: &HodgeSystem) -> Result<(f64, f64)> {
        let vv = forms::inner(&self.original, &self.original, h)?.max(1e-300);
        let sum = self.exact.add(&self.coexact)?.add(&self.harmonic)?;
        let diff = sum.sub(&self.original)?;
        let rec = (forms::inner(&diff, &diff, h)? / vv).sqrt();
        let orth = forms::inner(&self.exact, &self.coexact, h)?.abs() / vv;
        Ok((rec, orth))
    }
}

pub fn hodge_decompose(v: &Cochain, h: &HodgeSystem) -> Result<HodgeSplit> {
    h.check(v, 1)?;
    h.complex().require_simply_connected()?;
    let r = forms::divergence_residual(v.values(), h);
    if r > 1e-9 {
        return Err(PhError::NotSolenoidal { residual: r });
    }
    let g = NeumannData { values: forms::weak_normal_trace(v, h)? };
    let phi = solve_nphi(&g, h)?;
    let exact = forms::d(&phi, h)?;
    let (beta, coexact) = solve_nbeta_full(&forms::d(v, h)?, h)?;
    let harmonic = v.sub(&exact)?.sub(&coexact)?;
    Ok(HodgeSplit { exact, coexact, harmonic, original: v.clone(), phi, beta })
}

/// Discrete harmonic extension of boundary values (traversal order).
pub fn harmonic_lift(mu: &[f64], h: &HodgeSystem) -> Result<Cochain> {
    let c = h.complex();
    if mu.len() != c.boundary_vertices().len() {
        return Err(PhError::Dimension("lift data length differs from boundary vertex count".into()));
    }
    let mut x = vec![0.0; c.n_vertices()];
    for (k, &v) in c.boundary_vertices().iter().enumerate() {
        x[v] = mu[k];
    }
    let kx = h.stiffness().mul_vec(&x);
    let rhs: Vec<f64> = c.interior_vertices().iter().map(|&i| -kx[i]).collect();
    let xi = h.solve_dirichlet(&rhs)?;
    for (k, &i) in c.interior_vertices().iter().enumerate() {
        x[i] = xi[k];
    }
    h.cochain(0, x)
}

/// Zero extension of the interior lift: boundary values, zero inside.
pub fn zero_lift(mu: &[f64], h: &HodgeSystem) -> Result<Cochain> {
    let c = h.complex();
    let mut x = vec![0.0; c.n_vertices()];
    for (k, &v) in c.boundary_vertices().iter().enumerate() {
        x[v] = mu[k];
    }
    h.cochain(0, x)
}

/// Σ-interior values to all boundary vertices, zero on Γ.
pub fn extend_by_zero(e_sigma: &[f64], c: &SimplicialComplex) -> Vec<f64> {
    let mut out = vec![0.0; c.boundary_vertices().len()];
    for (k, &v) in c.sigma_vertices().iter().enumerate() {
        out[c.boundary_index(v).unwrap()] = e_sigma[k];
    }
    out
}

pub fn restrict_sigma(b: &[f64], c: &SimplicialComplex) -> Vec<f64> {
    c.sigma_vertices().iter().map(|&v| b[c.boundary_index(v).unwrap()]).collect()
}

pub fn restrict_gamma(b: &[f64], c: &SimplicialComplex) -> Vec<f64> {
    c.gamma_vertices().iter().map(|&v| b[c.boundary_index(v).unwrap()]).collect()
}

/// Σ values and Γ values merged into one boundary vector.
pub fn merge_boundary(sigma: &[f64], gamma: &[f64], c: &SimplicialComplex) -> Vec<f64> {
    let mut out = vec![0.0; c.boundary_vertices().len()];
    for (k, &v) in c.sigma_vertices().iter().enumerate() {
        out[c.boundary_index(v).unwrap()] = sigma[k];
    }
    for (k, &v) in c.gamma_vertices().iter().enumerate() {
        out[c.boundary_index(v).unwrap()] = gamma[k];
    }
    out
}

/// Random solenoidal 1-cochain: harmonic gradient plus co-exact part.
pub fn random_solenoidal(h: &HodgeSystem, rng: &mut impl Rng, with_flux: bool) -> Result<Cochain> {
    let c = h.complex();
    let mut v = vec![0.0; c.n_edges()];
    if with_flux {
        let mu: Vec<f64> = (0..c.boundary_vertices().len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        v = h.d0().mul_vec(harmonic_lift(&mu, h)?.values());
    }
    let q: Vec<f64> = (0..c.n_triangles()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let co = h.solve_mass(1, &h.d1().tr_mul_vec(&q))?;
    linalg::axpy(1.0, &co, &mut v);
    h.cochain(1, v)
}

/// Random tangent-solenoidal 1-cochain (zero weak normal trace).
pub fn random_tangent(h: &HodgeSystem, rng: &mut impl Rng) -> Result<Cochain> {
    random_solenoidal(h, rng, false)
}

/// Basis of tangent-solenoidal 1-cochains: `M1⁻¹ D1ᵀ e_T` for every triangle.
pub fn tangent_basis(h: &HodgeSystem) -> Result<Vec<Vec<f64>>> {
    let nt = h.complex().n_triangles();
    (0..nt)
        .map(|t| {
            let mut q = vec![0.0; nt];
            q[t] = 1.0;
            h.solve_mass(1, &h.d1().tr_mul_vec(&q))
        })
        .collect()
}

/// Basis of weakly solenoidal 1-cochains (normal flux allowed): harmonic
/// gradients of all but one boundary hat function, then the tangent basis.
pub fn solenoidal_basis(h: &HodgeSystem) -> Result<Vec<Vec<f64>>> {
    let nb = h.complex().boundary_vertices().len();
    let mut out = Vec::new();
    for k in 1..nb {
        let mut mu = vec![0.0; nb];
        mu[k] = 1.0;
        out.push(h.d0().mul_vec(harmonic_lift(&mu, h)?.values()));
    }
    out.extend(tangent_basis(h)?);
    Ok(out)
}
