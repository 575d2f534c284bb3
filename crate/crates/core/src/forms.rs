//! Whitney-form algebra on a `SimplicialComplex`: cochains, the exterior
//! derivative, Galerkin mass pairings, star representatives, traces,
//! wedge pairings, interior products and the Lie bracket of 1-forms.

use std::sync::OnceLock;

use crate::complex::SimplicialComplex;
use crate::error::{PhError, Result};
use crate::linalg::{self, CsrMatrix, SpdSolver};
use crate::quadrature::{GAUSS2, TRI4};

/// Degree-k real cochain tied to one mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    degree: usize,
    values: Vec<f64>,
    mesh: u64,
}

impl Cochain {
    pub fn new(c: &SimplicialComplex, degree: usize, values: Vec<f64>) -> Result<Self> {
        if degree > 2 {
            return Err(PhError::Degree(format!("degree {degree} exceeds 2")));
        }
        if values.len() != c.n_simplices(degree) {
            return Err(PhError::Dimension(format!(
                "{}-cochain needs {} values, got {}",
                degree,
                c.n_simplices(degree),
                values.len()
            )));
        }
        Ok(Cochain { degree, values, mesh: c.id() })
    }

    pub fn zeros(c: &SimplicialComplex, degree: usize) -> Self {
        Cochain { degree, values: vec![0.0; c.n_simplices(degree)], mesh: c.id() }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn mesh_id(&self) -> u64 {
        self.mesh
    }

    fn same_kind(&self, o: &Cochain) -> Result<()> {
        if self.mesh != o.mesh {
            return Err(PhError::MeshMismatch { expected: self.mesh, got: o.mesh });
        }
        if self.degree != o.degree {
            return Err(PhError::Degree(format!("degrees {} and {} differ", self.degree, o.degree)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Cochain) -> Result<Cochain> {
        self.same_kind(o)?;
        Ok(Cochain { degree: self.degree, values: linalg::add(&self.values, &o.values), mesh: self.mesh })
    }

    pub fn sub(&self, o: &Cochain) -> Result<Cochain> {
        self.same_kind(o)?;
        Ok(Cochain { degree: self.degree, values: linalg::sub(&self.values, &o.values), mesh: self.mesh })
    }

    pub fn scale(&self, s: f64) -> Cochain {
        Cochain { degree: self.degree, values: linalg::scale(s, &self.values), mesh: self.mesh }
    }

    /// `simplex_id,value` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("simplex_id,value\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{i},{v:.17e}\n"));
        }
        s
    }
}

/// Values on boundary simplices in traversal order.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCochain {
    pub degree: usize,
    pub values: Vec<f64>,
}

/// Piecewise-constant vector field, one value per triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorProxy {
    pub values: Vec<[f64; 2]>,
}

/// Assembled Galerkin operators for one mesh configuration.
pub struct HodgeSystem {
    complex: SimplicialComplex,
    areas: Vec<f64>,
    grads: Vec<[[f64; 2]; 3]>,
    d0: CsrMatrix,
    d1: CsrMatrix,
    mass: [CsrMatrix; 3],
    stiffness: CsrMatrix,
    mass_solvers: [OnceLock<SpdSolver>; 3],
    pinned: OnceLock<SpdSolver>,
    dirichlet: OnceLock<SpdSolver>,
}

impl std::fmt::Debug for HodgeSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HodgeSystem")
            .field("mesh", &self.complex.id())
            .field("vertices", &self.complex.n_vertices())
            .field("triangles", &self.complex.n_triangles())
            .finish()
    }
}

pub const QUADRATURE_ORDER: usize = 4;

impl HodgeSystem {
    pub fn new(c: &SimplicialComplex) -> Result<Self> {
        let nt = c.n_triangles();
        let mut areas = Vec::with_capacity(nt);
        let mut grads = Vec::with_capacity(nt);
        for t in 0..nt {
            let a = c.triangle_area(t);
            if !(a > 0.0) {
                return Err(PhError::Geometry(format!("triangle {t} has nonpositive area {a:e}")));
            }
            let p = tri_points(c, t);
            let mut g = [[0.0; 2]; 3];
            for i in 0..3 {
                let (q1, q2) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                // ∇λ_i = J(p_{i+2} - p_{i+1}) / 2A with J(x,y) = (-y,x)
                g[i] = [-(q2[1] - q1[1]) / (2.0 * a), (q2[0] - q1[0]) / (2.0 * a)];
            }
            areas.push(a);
            grads.push(g);
        }
        let mut m0 = Vec::new();
        let mut m1 = Vec::new();
        for t in 0..nt {
            let tri = c.triangles()[t];
            for i in 0..3 {
                for j in 0..3 {
                    let v = if i == j { areas[t] / 6.0 } else { areas[t] / 12.0 };
                    m0.push((tri[i], tri[j], v));
                }
            }
            let slots = c.tri_edges()[t];
            for qp in TRI4 {
                let w = whitney_basis(&grads[t], &slots, qp.0);
                for i in 0..3 {
                    for j in 0..3 {
                        m1.push((slots[i].edge, slots[j].edge, qp.1 * areas[t] * dot2(w[i], w[j])));
                    }
                }
            }
        }
        let m0 = CsrMatrix::from_triplets(c.n_vertices(), c.n_vertices(), &m0);
        let m1 = CsrMatrix::from_triplets(c.n_edges(), c.n_edges(), &m1);
        let m2 = CsrMatrix::diagonal(&areas.iter().map(|a| 1.0 / a).collect::<Vec<_>>());
        let d0 = c.d0();
        let d1 = c.d1();
        let stiffness = d0.transpose().matmul(&m1).matmul(&d0);
        Ok(HodgeSystem {
            complex: c.clone(),
            areas,
            grads,
            d0,
            d1,
            mass: [m0, m1, m2],
            stiffness,
            mass_solvers: [OnceLock::new(), OnceLock::new(), OnceLock::new()],
            pinned: OnceLock::new(),
            dirichlet: OnceLock::new(),
        })
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }
    pub fn mesh_id(&self) -> u64 {
        self.complex.id()
    }
    pub fn areas(&self) -> &[f64] {
        &self.areas
    }
    pub fn grads(&self, t: usize) -> &[[f64; 2]; 3] {
        &self.grads[t]
    }
    pub fn mass(&self, k: usize) -> &CsrMatrix {
        &self.mass[k]
    }
    pub fn d0(&self) -> &CsrMatrix {
        &self.d0
    }
    pub fn d1(&self) -> &CsrMatrix {
        &self.d1
    }
    /// P1 stiffness `D0ᵀ M1 D0`.
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    fn solver<'a>(&'a self, cell: &'a OnceLock<SpdSolver>, build: impl FnOnce() -> Result<CsrMatrix>) -> Result<&'a SpdSolver> {
        if let Some(s) = cell.get() {
            return Ok(s);
        }
        let s = SpdSolver::new(&build()?)?;
        Ok(cell.get_or_init(|| s))
    }

    pub fn solve_mass(&self, k: usize, rhs: &[f64]) -> Result<Vec<f64>> {
        if k == 2 {
            return Ok(rhs.iter().zip(&self.areas).map(|(r, a)| r * a).collect());
        }
        self.solver(&self.mass_solvers[k], || Ok(self.mass[k].clone()))?.solve(rhs)
    }

    /// Solve `K x = b` with x pinned to 0 at vertex 0; requires b compatible.
    pub fn solve_pinned(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.complex.n_vertices();
        let idx: Vec<usize> = (1..n).collect();
        let s = self.solver(&self.pinned, || Ok(self.stiffness.submatrix(&idx, &idx)))?;
        let xr = s.solve(&b[1..])?;
        let mut x = vec![0.0; n];
        x[1..].copy_from_slice(&xr);
        Ok(x)
    }

    /// Solve `K_II x_I = b_I` on interior vertices.
    pub fn solve_dirichlet(&self, b_int: &[f64]) -> Result<Vec<f64>> {
        let idx = self.complex.interior_vertices();
        if idx.is_empty() {
            return Ok(Vec::new());
        }
        let s = self.solver(&self.dirichlet, || Ok(self.stiffness.submatrix(idx, idx)))?;
        s.solve(b_int)
    }

    pub fn check(&self, c: &Cochain, degree: usize) -> Result<()> {
        if c.mesh != self.complex.id() {
            return Err(PhError::MeshMismatch { expected: self.complex.id(), got: c.mesh });
        }
        if c.degree != degree {
            return Err(PhError::Degree(format!("expected a {degree}-cochain, got degree {}", c.degree)));
        }
        Ok(())
    }

    pub fn cochain(&self, degree: usize, values: Vec<f64>) -> Result<Cochain> {
        Cochain::new(&self.complex, degree, values)
    }

    /// Whitney field of 1-cochain `v` on triangle `t` at barycentric `lam`.
    pub fn field_at(&self, v: &[f64], t: usize, lam: [f64; 3]) -> [f64; 2] {
        let slots = self.complex.tri_edges()[t];
        let w = whitney_basis(&self.grads[t], &slots, lam);
        let mut f = [0.0; 2];
        for i in 0..3 {
            let c = v[slots[i].edge];
            f[0] += c * w[i][0];
            f[1] += c * w[i][1];
        }
        f
    }

    /// Whitney basis fields of the three edges of `t` at `lam`, in slot order.
    pub fn basis_at(&self, t: usize, lam: [f64; 3]) -> [[f64; 2]; 3] {
        whitney_basis(&self.grads[t], &self.complex.tri_edges()[t], lam)
    }

    /// Area-weighted average over incident triangles of the Whitney field at vertex `i`.
    pub fn vertex_field(&self, v: &[f64], i: usize) -> [f64; 2] {
        let mut acc = [0.0; 2];
        let mut wsum = 0.0;
        for &t in self.complex.vertex_triangles(i) {
            let tri = self.complex.triangles()[t];
            let li = tri.iter().position(|&x| x == i).unwrap();
            let mut lam = [0.0; 3];
            lam[li] = 1.0;
            let f = self.field_at(v, t, lam);
            acc[0] += self.areas[t] * f[0];
            acc[1] += self.areas[t] * f[1];
            wsum += self.areas[t];
        }
        [acc[0] / wsum, acc[1] / wsum]
    }

    /// Covector of the linear map `v ↦ vertex_field(v, i)·w`.
    pub fn vertex_field_covector(&self, i: usize, w: [f64; 2]) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        let mut wsum = 0.0;
        for &t in self.complex.vertex_triangles(i) {
            wsum += self.areas[t];
        }
        for &t in self.complex.vertex_triangles(i) {
            let tri = self.complex.triangles()[t];
            let li = tri.iter().position(|&x| x == i).unwrap();
            let mut lam = [0.0; 3];
            lam[li] = 1.0;
            let b = self.basis_at(t, lam);
            let slots = self.complex.tri_edges()[t];
            for s in 0..3 {
                out.push((slots[s].edge, self.areas[t] / wsum * dot2(b[s], w)));
            }
        }
        out
    }

    /// `(D0ᵀ M1 v)` at every vertex.
    pub fn weak_divergence(&self, v: &[f64]) -> Vec<f64> {
        self.d0.tr_mul_vec(&self.mass[1].mul_vec(v))
    }
}

fn tri_points(c: &SimplicialComplex, t: usize) -> [[f64; 2]; 3] {
    let tri = c.triangles()[t];
    let v = c.vertices();
    [v[tri[0]], v[tri[1]], v[tri[2]]]
}

pub(crate) fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Rotation by +90°: the Hodge star of a covector field in 2D.
pub(crate) fn rot90(a: [f64; 2]) -> [f64; 2] {
    [-a[1], a[0]]
}

fn whitney_basis(g: &[[f64; 2]; 3], slots: &[crate::complex::TriEdge; 3], lam: [f64; 3]) -> [[f64; 2]; 3] {
    let mut out = [[0.0; 2]; 3];
    for s in 0..3 {
        let (i, j) = if slots[s].sign > 0 { (s, (s + 1) % 3) } else { ((s + 1) % 3, s) };
        out[s] = [lam[i] * g[j][0] - lam[j] * g[i][0], lam[i] * g[j][1] - lam[j] * g[i][1]];
    }
    out
}

pub fn d(c: &Cochain, h: &HodgeSystem) -> Result<Cochain> {
    h.check(c, c.degree)?;
    let values = match c.degree {
        0 => h.d0.mul_vec(&c.values),
        1 => h.d1.mul_vec(&c.values),
        _ => return Err(PhError::Degree("d of a 2-cochain is undefined in 2D".into())),
    };
    Ok(Cochain { degree: c.degree + 1, values, mesh: c.mesh })
}

pub fn inner(a: &Cochain, b: &Cochain, h: &HodgeSystem) -> Result<f64> {
    a.same_kind(b)?;
    h.check(a, a.degree)?;
    Ok(linalg::dot(&a.values, &h.mass[a.degree].mul_vec(&b.values)))
}

/// `M_{k-1}⁻¹ D_{k-1}ᵀ M_k c`.
pub fn codifferential(c: &Cochain, h: &HodgeSystem) -> Result<Cochain> {
    h.check(c, c.degree)?;
    let mc = h.mass[c.degree].mul_vec(&c.values);
    let rhs = match c.degree {
        1 => h.d0.tr_mul_vec(&mc),
        2 => h.d1.tr_mul_vec(&mc),
        _ => return Err(PhError::Degree("codifferential of a 0-cochain is undefined".into())),
    };
    let values = h.solve_mass(c.degree - 1, &rhs)?;
    Ok(Cochain { degree: c.degree - 1, values, mesh: c.mesh })
}

/// ∫_Ω a∧b for complementary degrees.
pub fn wedge_pair(a: &Cochain, b: &Cochain, h: &HodgeSystem) -> Result<f64> {
    h.check(a, a.degree)?;
    h.check(b, b.degree)?;
    if a.degree + b.degree != 2 {
        return Err(PhError::Degree(format!("wedge pairing needs degrees summing to 2, got {} and {}", a.degree, b.degree)));
    }
    let c = &h.complex;
    match (a.degree, b.degree) {
        (0, 2) | (2, 0) => {
            let (z, t2) = if a.degree == 0 { (a, b) } else { (b, a) };
            Ok(c.triangles()
                .iter()
                .enumerate()
                .map(|(t, tri)| t2.values[t] * (z.values[tri[0]] + z.values[tri[1]] + z.values[tri[2]]) / 3.0)
                .sum())
        }
        _ => Ok(wedge11(&a.values, &b.values, h)),
    }
}

/// ∫ a×b of two Whitney 1-cochains.
pub fn wedge11(a: &[f64], b: &[f64], h: &HodgeSystem) -> f64 {
    let mut s = 0.0;
    for t in 0..h.complex.n_triangles() {
        s += h.areas[t] * tri_cross_integral(a, b, t, h);
    }
    s
}

/// (1/|T|) ∫_T a×b.
pub(crate) fn tri_cross_integral(a: &[f64], b: &[f64], t: usize, h: &HodgeSystem) -> f64 {
    let mut s = 0.0;
    for (lam, w) in TRI4 {
        s += w * cross2(h.field_at(a, t, lam), h.field_at(b, t, lam));
    }
    s
}

/// Galerkin Hodge representative: `M_{2-k} s = ⟨φ_i, ∗c⟩`.
pub fn star_rep(c: &Cochain, h: &HodgeSystem) -> Result<Cochain> {
    h.check(c, c.degree)?;
    let cx = &h.complex;
    let values = match c.degree {
        0 => cx
            .triangles()
            .iter()
            .enumerate()
            .map(|(t, tri)| h.areas[t] * (c.values[tri[0]] + c.values[tri[1]] + c.values[tri[2]]) / 3.0)
            .collect(),
        1 => {
            let mut b = vec![0.0; cx.n_edges()];
            for t in 0..cx.n_triangles() {
                let slots = cx.tri_edges()[t];
                for (lam, w) in TRI4 {
                    let sc = rot90(h.field_at(&c.values, t, lam));
                    let basis = h.basis_at(t, lam);
                    for s in 0..3 {
                        b[slots[s].edge] += w * h.areas[t] * dot2(basis[s], sc);
                    }
                }
            }
            h.solve_mass(1, &b)?
        }
        _ => {
            let mut b = vec![0.0; cx.n_vertices()];
            for (t, tri) in cx.triangles().iter().enumerate() {
                for &i in tri {
                    b[i] += c.values[t] / 3.0;
                }
            }
            h.solve_mass(0, &b)?
        }
    };
    Ok(Cochain { degree: 2 - c.degree, values, mesh: c.mesh })
}

/// Restriction to boundary simplices; 1-cochains are signed along traversal.
pub fn trace(c: &Cochain, h: &HodgeSystem) -> Result<BoundaryCochain> {
    h.check(c, c.degree)?;
    let cx = &h.complex;
    match c.degree {
        0 => Ok(BoundaryCochain { degree: 0, values: cx.boundary_vertices().iter().map(|&v| c.values[v]).collect() }),
        1 => Ok(BoundaryCochain {
            degree: 1,
            values: cx
                .boundary_edges()
                .iter()
                .zip(cx.boundary_edge_dirs())
                .map(|(&e, &s)| s as f64 * c.values[e])
                .collect(),
        }),
        _ => Err(PhError::Degree("trace defined for degrees 0 and 1".into())),
    }
}

/// Boundary exterior derivative of a boundary 0-cochain (per traversal edge).
pub fn boundary_d(b: &BoundaryCochain, c: &SimplicialComplex) -> Result<BoundaryCochain> {
    if b.degree != 0 {
        return Err(PhError::Degree("boundary d needs a 0-cochain".into()));
    }
    let mut out = Vec::with_capacity(c.boundary_edges().len());
    let mut off = 0;
    for lp in c.boundary_loops() {
        let n = lp.len();
        for k in 0..n {
            out.push(b.values[off + (k + 1) % n] - b.values[off + k]);
        }
        off += n;
    }
    Ok(BoundaryCochain { degree: 1, values: out })
}

/// Per-boundary-edge flux ∫_e W(v)·N ds, in traversal order.
pub fn normal_trace(v: &Cochain, h: &HodgeSystem) -> Result<Vec<f64>> {
    h.check(v, 1)?;
    let cx = &h.complex;
    let mut out = Vec::with_capacity(cx.boundary_edges().len());
    for (k, &e) in cx.boundary_edges().iter().enumerate() {
        let t = cx.edge_triangles(e)[0];
        let tri = cx.triangles()[t];
        let [a, b] = cx.edges()[e];
        let la = tri.iter().position(|&x| x == a).unwrap();
        let lb = tri.iter().position(|&x| x == b).unwrap();
        let n = cx.boundary_edge_normal(k);
        let len = cx.edge_length(e);
        let mut s = 0.0;
        for (x, w) in GAUSS2 {
            let mut lam = [0.0; 3];
            lam[la] = 1.0 - x;
            lam[lb] = x;
            s += w * dot2(h.field_at(&v.values, t, lam), n);
        }
        out.push(s * len);
    }
    Ok(out)
}

/// Weak normal trace: `(D0ᵀ M1 v)` on boundary vertices (traversal order).
pub fn weak_normal_trace(v: &Cochain, h: &HodgeSystem) -> Result<Vec<f64>> {
    h.check(v, 1)?;
    Ok(weak_normal_trace_raw(&v.values, h))
}

pub(crate) fn weak_normal_trace_raw(v: &[f64], h: &HodgeSystem) -> Vec<f64> {
    let r = h.weak_divergence(v);
    h.complex.boundary_vertices().iter().map(|&b| r[b]).collect()
}

/// Per-edge fluxes lumped to boundary-vertex covectors (half to each end).
pub fn edge_flux_to_covector(flux: &[f64], c: &SimplicialComplex) -> Vec<f64> {
    let mut out = vec![0.0; c.boundary_vertices().len()];
    for (k, &e) in c.boundary_edges().iter().enumerate() {
        for &v in &c.edges()[e] {
            out[c.boundary_index(v).unwrap()] += 0.5 * flux[k];
        }
    }
    out
}

/// Interior weak divergence normalized by ‖M1 v‖.
pub fn divergence_residual(v: &[f64], h: &HodgeSystem) -> f64 {
    let mv = h.mass[1].mul_vec(v);
    let scale = linalg::norm(&mv);
    if scale == 0.0 {
        return 0.0;
    }
    let r = h.d0.tr_mul_vec(&mv);
    let s: f64 = h.complex.interior_vertices().iter().map(|&i| r[i] * r[i]).sum();
    s.sqrt() / scale
}

pub fn sharp(v: &Cochain, h: &HodgeSystem) -> Result<VectorProxy> {
    h.check(v, 1)?;
    let third = 1.0 / 3.0;
    Ok(VectorProxy {
        values: (0..h.complex.n_triangles()).map(|t| h.field_at(&v.values, t, [third; 3])).collect(),
    })
}

pub fn flat(x: &VectorProxy, h: &HodgeSystem) -> Result<Cochain> {
    let cx = &h.complex;
    let mut b = vec![0.0; cx.n_edges()];
    for t in 0..cx.n_triangles() {
        let slots = cx.tri_edges()[t];
        for (lam, w) in TRI4 {
            let basis = h.basis_at(t, lam);
            for s in 0..3 {
                b[slots[s].edge] += w * h.areas[t] * dot2(basis[s], x.values[t]);
            }
        }
    }
    h.cochain(1, h.solve_mass(1, &b)?)
}

/// Whitney 1-cochain interpolating a smooth covector field (edge integrals).
pub fn interpolate_1form(h: &HodgeSystem, f: impl Fn([f64; 2]) -> [f64; 2]) -> Cochain {
    let cx = &h.complex;
    let vals = cx
        .edges()
        .iter()
        .map(|&[a, b]| {
            let (p, q) = (cx.vertices()[a], cx.vertices()[b]);
            let t = [q[0] - p[0], q[1] - p[1]];
            GAUSS2
                .iter()
                .map(|&(s, w)| w * dot2(f([p[0] + s * t[0], p[1] + s * t[1]]), t))
                .sum()
        })
        .collect();
    Cochain { degree: 1, values: vals, mesh: cx.id() }
}

pub fn interpolate_0form(h: &HodgeSystem, f: impl Fn([f64; 2]) -> f64) -> Cochain {
    let cx = &h.complex;
    Cochain { degree: 0, values: cx.vertices().iter().map(|&p| f(p)).collect(), mesh: cx.id() }
}

/// 2-cochain of triangle integrals of a density.
pub fn interpolate_2form(h: &HodgeSystem, f: impl Fn([f64; 2]) -> f64) -> Cochain {
    let cx = &h.complex;
    let vals = (0..cx.n_triangles())
        .map(|t| crate::quadrature::integrate_triangle(tri_points(cx, t), &f))
        .collect();
    Cochain { degree: 2, values: vals, mesh: cx.id() }
}

/// Right-hand side `b_j = Σ_T ζ_T ∫_T a×W_j` of the Galerkin interior product
/// of the Whitney field `a` with the piecewise-constant density `zeta`.
pub fn interior_product_rhs(a: &[f64], zeta: &[f64], h: &HodgeSystem) -> Vec<f64> {
    let cx = &h.complex;
    let mut b = vec![0.0; cx.n_edges()];
    for t in 0..cx.n_triangles() {
        if zeta[t] == 0.0 {
            continue;
        }
        let slots = cx.tri_edges()[t];
        for (lam, w) in TRI4 {
            let f = h.field_at(a, t, lam);
            let basis = h.basis_at(t, lam);
            for s in 0..3 {
                b[slots[s].edge] += zeta[t] * w * h.areas[t] * cross2(f, basis[s]);
            }
        }
    }
    b
}

/// Vorticity density ζ_T = (dv)_T / |T|.
pub fn vorticity_density(v: &[f64], h: &HodgeSystem) -> Vec<f64> {
    h.d1.mul_vec(v).iter().zip(&h.areas).map(|(w, a)| w / a).collect()
}

/// Galerkin projection of the contraction i_X c for piecewise-constant X.
pub fn interior_product(x: &VectorProxy, c: &Cochain, h: &HodgeSystem) -> Result<Cochain> {
    h.check(c, 2)?;
    let cx = &h.complex;
    let mut b = vec![0.0; cx.n_edges()];
    for t in 0..cx.n_triangles() {
        let zeta = c.values[t] / h.areas[t];
        let slots = cx.tri_edges()[t];
        let jx = rot90(x.values[t]);
        for (lam, w) in TRI4 {
            let basis = h.basis_at(t, lam);
            for s in 0..3 {
                b[slots[s].edge] += zeta * w * h.areas[t] * dot2(basis[s], jx);
            }
        }
    }
    h.cochain(1, h.solve_mass(1, &b)?)
}

/// The ∗(X♭ ∧ ∗c) route: ζ X♭ projected to Whitney, then star_rep.
pub fn interior_product_via_star(x: &VectorProxy, c: &Cochain, h: &HodgeSystem) -> Result<Cochain> {
    h.check(c, 2)?;
    let scaled = VectorProxy {
        values: x
            .values
            .iter()
            .enumerate()
            .map(|(t, v)| {
                let z = c.values[t] / h.areas[t];
                [z * v[0], z * v[1]]
            })
            .collect(),
    };
    star_rep(&flat(&scaled, h)?, h)
}

/// `(-1)^{n-1} δ P(a∧b)` for solenoidal a, b.
pub fn lie_bracket_1(a: &Cochain, b: &Cochain, h: &HodgeSystem) -> Result<Cochain> {
    h.check(a, 1)?;
    h.check(b, 1)?;
    for v in [a, b] {
        let r = divergence_residual(&v.values, h);
        if r > 1e-9 {
            return Err(PhError::NotSolenoidal { residual: r });
        }
    }
    let w: Vec<f64> = (0..h.complex.n_triangles())
        .map(|t| h.areas[t] * tri_cross_integral(&a.values, &b.values, t, h))
        .collect();
    let delta = codifferential(&h.cochain(2, w)?, h)?;
    Ok(delta.scale(-1.0))
}
