//! Time integration: the canonical potential-flow free-surface system, the
//! rotational stepper with pressure projection, surface advance with
//! harmonic mesh motion, and trajectory diagnostics.

use std::f64::consts::PI;

use crate::complex::{signed_area, Label, SimplicialComplex};
use crate::elliptic;
use crate::energetics::{self, Energy, PhysParams, SurfaceState};
use crate::error::{PhError, Result};
use crate::forms::{self, dot2, HodgeSystem};
use crate::linalg::{self, CsrMatrix, SparseCholesky};

pub const MIDPOINT_TOL: f64 = 1e-11;
pub const MIDPOINT_MAX_ITER: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    Rk4,
    ImplicitMidpoint,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InflowTime {
    /// a(t) = amp·exp(-((t - t0)/width)²)
    Pulse { amp: f64, t0: f64, width: f64 },
    /// piecewise-linear (t, a) table, held constant outside its range
    Table(Vec<(f64, f64)>),
}

impl InflowTime {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            InflowTime::Pulse { amp, t0, width } => amp * (-((t - t0) / width).powi(2)).exp(),
            InflowTime::Table(tab) => {
                let Some(first) = tab.first() else { return 0.0 };
                if t <= first.0 {
                    return first.1;
                }
                for w in tab.windows(2) {
                    let ((t0, a0), (t1, a1)) = (w[0], w[1]);
                    if t <= t1 {
                        return a0 + (a1 - a0) * (t - t0) / (t1 - t0);
                    }
                }
                tab[tab.len() - 1].1
            }
        }
    }

    pub fn rate(&self, t: f64) -> f64 {
        match self {
            InflowTime::Pulse { t0, width, .. } => -2.0 * (t - t0) / (width * width) * self.value(t),
            InflowTime::Table(tab) => {
                for w in tab.windows(2) {
                    let ((t0, a0), (t1, a1)) = (w[0], w[1]);
                    if t >= t0 && t < t1 {
                        return (a1 - a0) / (t1 - t0);
                    }
                }
                0.0
            }
        }
    }
}

/// Volume inflow a(t)·sin²(π(x - x0)/(x1 - x0)) through the bottom of Γ
/// between x0 and x1 (a > 0 pushes fluid in).
#[derive(Clone, Debug, PartialEq)]
pub struct Inflow {
    pub time: InflowTime,
    pub x0: f64,
    pub x1: f64,
}

impl Inflow {
    pub fn validate(&self) -> Result<()> {
        if !(self.x1 > self.x0) {
            return Err(PhError::Config(format!("inflow segment [{}, {}] is empty", self.x0, self.x1)));
        }
        match &self.time {
            InflowTime::Pulse { amp, t0, width } => {
                if !(*width > 0.0) || !amp.is_finite() || !t0.is_finite() {
                    return Err(PhError::Config("inflow pulse needs finite amp, t0 and width > 0".into()));
                }
            }
            InflowTime::Table(tab) => {
                if tab.windows(2).any(|w| !(w[1].0 > w[0].0)) || tab.iter().any(|p| !p.1.is_finite()) {
                    return Err(PhError::Config("inflow table times must increase strictly".into()));
                }
            }
        }
        Ok(())
    }

    fn shape(&self, x: f64) -> f64 {
        if x < self.x0 || x > self.x1 {
            return 0.0;
        }
        (PI * (x - self.x0) / (self.x1 - self.x0)).sin().powi(2)
    }

    /// ∫_Γ g λ_i ds for a(t) = 1, with g the outward normal velocity.
    pub fn unit_load(&self, c: &SimplicialComplex) -> Result<Vec<f64>> {
        let x = c.vertices();
        let ymin = x.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
        let tol = 1e-12 * c.mesh_size().max(1.0);
        let gauss = [((1.0 - (0.6f64).sqrt()) / 2.0, 5.0 / 18.0), (0.5, 8.0 / 18.0), ((1.0 + (0.6f64).sqrt()) / 2.0, 5.0 / 18.0)];
        let mut load = vec![0.0; c.n_vertices()];
        for &e in c.boundary_edges() {
            if c.edge_label(e) != Some(Label::Gamma) {
                continue;
            }
            let [a, b] = c.edges()[e];
            let (pa, pb) = (x[a], x[b]);
            if (pa[1] - ymin).abs() > tol || (pb[1] - ymin).abs() > tol {
                continue;
            }
            let len = (pb[0] - pa[0]).abs();
            for (s, w) in gauss {
                let f = self.shape(pa[0] + s * (pb[0] - pa[0]));
                load[a] -= w * f * (1.0 - s) * len;
                load[b] -= w * f * s * len;
            }
        }
        if load.iter().all(|&l| l == 0.0) {
            return Err(PhError::Config("inflow segment meets no bottom edge of Γ".into()));
        }
        Ok(load)
    }
}

/// Σ motion with one coordinate per Σ-interior vertex: vertex k moves by
/// s_k along its reference normal, Σ/Γ corners slide along their wall so
/// they keep their neighbour's displacement component, and interior
/// vertices follow by harmonic extension on the reference mesh.
#[derive(Clone, Debug)]
pub struct SurfaceMap {
    reference: SimplicialComplex,
    sigma: Vec<usize>,
    dirs: Vec<[f64; 2]>,
    /// (corner, neighbour slot, displacement per unit s of the neighbour)
    corners: Vec<(usize, usize, [f64; 2])>,
    interior: Vec<usize>,
    k_ref: CsrMatrix,
    k_ii: Option<SparseCholesky>,
    weights: Vec<f64>,
}

impl SurfaceMap {
    pub fn new(c: &SimplicialComplex) -> Result<Self> {
        let s = SurfaceState::new(c)?;
        let x = c.vertices();
        let mut corners = Vec::new();
        for ch in c.sigma_chains() {
            let n = ch.vertices.len();
            if ch.closed || n < 3 {
                continue;
            }
            for (corner, nb) in [(ch.vertices[0], ch.vertices[1]), (ch.vertices[n - 1], ch.vertices[n - 2])] {
                let j = s.vertices.iter().position(|&v| v == nb).unwrap();
                let lp = c.boundary_loops().iter().find(|l| l.contains(&corner)).unwrap();
                let k = lp.iter().position(|&v| v == corner).unwrap();
                let (prev, next) = (lp[(k + lp.len() - 1) % lp.len()], lp[(k + 1) % lp.len()]);
                let wall = if prev == nb { next } else { prev };
                let d = energetics::sub2(x[wall], x[corner]);
                let l = energetics::norm2(d);
                let w = [d[0] / l, d[1] / l];
                let wd = dot2(w, s.normals[j]);
                if wd.abs() > 0.1 {
                    corners.push((corner, j, [w[0] / wd, w[1] / wd]));
                }
            }
        }
        let k_ref = p1_stiffness(c, x);
        let interior = c.interior_vertices().to_vec();
        let k_ii = if interior.is_empty() { None } else { Some(SparseCholesky::factor(&k_ref.submatrix(&interior, &interior))?) };
        let mut map = SurfaceMap { reference: c.clone(), sigma: s.vertices, dirs: s.normals, corners, interior, k_ref, k_ii, weights: Vec::new() };
        let bf = boundary_functionals(c, x);
        map.weights = map.pull_back(&bf.d_area);
        if map.weights.iter().any(|&w| !(w > 0.0)) {
            return Err(PhError::Geometry("surface vertex with non-positive area weight".into()));
        }
        Ok(map)
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn reference(&self) -> &SimplicialComplex {
        &self.reference
    }

    pub fn sigma_vertices(&self) -> &[usize] {
        &self.sigma
    }

    pub fn directions(&self) -> &[[f64; 2]] {
        &self.dirs
    }

    /// ∂(area)/∂s_k at the reference configuration.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Vertex displacements for coordinates `s` (linear in `s`).
    pub fn displacement(&self, s: &[f64]) -> Vec<[f64; 2]> {
        let nv = self.reference.n_vertices();
        let mut u = vec![[0.0; 2]; nv];
        for (k, &v) in self.sigma.iter().enumerate() {
            u[v] = [s[k] * self.dirs[k][0], s[k] * self.dirs[k][1]];
        }
        for &(cv, j, w) in &self.corners {
            u[cv] = [s[j] * w[0], s[j] * w[1]];
        }
        if let Some(f) = &self.k_ii {
            for comp in 0..2 {
                let ub: Vec<f64> = u.iter().map(|d| d[comp]).collect();
                let r = self.k_ref.mul_vec(&ub);
                let rhs: Vec<f64> = self.interior.iter().map(|&i| -r[i]).collect();
                let xi = f.solve(&rhs);
                for (k, &i) in self.interior.iter().enumerate() {
                    u[i][comp] = xi[k];
                }
            }
        }
        u
    }

    pub fn positions(&self, s: &[f64]) -> Vec<[f64; 2]> {
        let u = self.displacement(s);
        self.reference.vertices().iter().zip(&u).map(|(p, d)| [p[0] + d[0], p[1] + d[1]]).collect()
    }

    pub fn complex(&self, s: &[f64]) -> Result<SimplicialComplex> {
        self.reference.with_positions(self.positions(s))
    }

    /// ∂F/∂s from the gradient of F with respect to all vertex positions.
    pub fn pull_back(&self, grad: &[[f64; 2]]) -> Vec<f64> {
        let mut g = grad.to_vec();
        if let Some(f) = &self.k_ii {
            let nv = g.len();
            for comp in 0..2 {
                let gi: Vec<f64> = self.interior.iter().map(|&i| g[i][comp]).collect();
                let z = f.solve(&gi);
                let mut zf = vec![0.0; nv];
                for (k, &i) in self.interior.iter().enumerate() {
                    zf[i] = z[k];
                }
                let kz = self.k_ref.mul_vec(&zf);
                for v in 0..nv {
                    g[v][comp] -= kz[v];
                }
            }
        }
        let mut out: Vec<f64> = self.sigma.iter().zip(&self.dirs).map(|(&v, &d)| dot2(g[v], d)).collect();
        for &(cv, j, w) in &self.corners {
            out[j] += dot2(g[cv], w);
        }
        out
    }
}

fn tri_edge_vectors(x: &[[f64; 2]], t: &[usize; 3]) -> ([[f64; 2]; 3], f64) {
    let e = |k: usize| energetics::sub2(x[t[(k + 2) % 3]], x[t[(k + 1) % 3]]);
    ([e(0), e(1), e(2)], signed_area(x, t))
}

/// P1 stiffness on the given positions.
pub fn p1_stiffness(c: &SimplicialComplex, x: &[[f64; 2]]) -> CsrMatrix {
    let mut trip = Vec::with_capacity(9 * c.n_triangles());
    for t in c.triangles() {
        let (e, a) = tri_edge_vectors(x, t);
        for i in 0..3 {
            for j in 0..3 {
                trip.push((t[i], t[j], dot2(e[i], e[j]) / (4.0 * a)));
            }
        }
    }
    CsrMatrix::from_triplets(c.n_vertices(), c.n_vertices(), &trip)
}

/// Area, ∫y dA and Σ length of the domain bounded by the boundary loops of
/// `c` at positions `x`, with gradients with respect to the positions.
#[derive(Clone, Debug)]
pub struct BoundaryFunctionals {
    pub area: f64,
    pub moment: f64,
    pub length: f64,
    pub d_area: Vec<[f64; 2]>,
    pub d_moment: Vec<[f64; 2]>,
    pub d_length: Vec<[f64; 2]>,
}

pub fn boundary_functionals(c: &SimplicialComplex, x: &[[f64; 2]]) -> BoundaryFunctionals {
    let nv = c.n_vertices();
    let mut f = BoundaryFunctionals {
        area: 0.0,
        moment: 0.0,
        length: 0.0,
        d_area: vec![[0.0; 2]; nv],
        d_moment: vec![[0.0; 2]; nv],
        d_length: vec![[0.0; 2]; nv],
    };
    for (k, &e) in c.boundary_edges().iter().enumerate() {
        let [a, b] = c.edges()[e];
        let (p, q) = if c.boundary_edge_dirs()[k] > 0 { (a, b) } else { (b, a) };
        let ([xp, yp], [xq, yq]) = (x[p], x[q]);
        f.area += 0.5 * (xp * yq - xq * yp);
        f.d_area[p][0] += 0.5 * yq;
        f.d_area[p][1] -= 0.5 * xq;
        f.d_area[q][0] -= 0.5 * yp;
        f.d_area[q][1] += 0.5 * xp;
        // ∫y dA = -∮ y²/2 dx
        let sq = yp * yp + yp * yq + yq * yq;
        f.moment -= (xq - xp) * sq / 6.0;
        f.d_moment[p][0] += sq / 6.0;
        f.d_moment[q][0] -= sq / 6.0;
        f.d_moment[p][1] -= (xq - xp) * (2.0 * yp + yq) / 6.0;
        f.d_moment[q][1] -= (xq - xp) * (yp + 2.0 * yq) / 6.0;
        if c.edge_label(e) == Some(Label::Sigma) {
            let d = [xq - xp, yq - yp];
            let l = energetics::norm2(d);
            f.length += l;
            f.d_length[q][0] += d[0] / l;
            f.d_length[q][1] += d[1] / l;
            f.d_length[p][0] -= d[0] / l;
            f.d_length[p][1] -= d[1] / l;
        }
    }
    f
}

fn check_orientation(c: &SimplicialComplex, x: &[[f64; 2]]) -> Result<()> {
    for (t, tri) in c.triangles().iter().enumerate() {
        let a = signed_area(x, tri);
        if !(a > 0.0) {
            return Err(PhError::Geometry(format!("triangle {t} inverted (signed area {a:e})")));
        }
    }
    Ok(())
}

/// Potential flow with a free surface as a canonical system in the surface
/// coordinates s and the surface potential p = φ|Σ:
/// w_k ṡ_k = ∂H/∂p_k = (Kφ)_k and w_k ṗ_k = -∂H/∂s_k, with w the area
/// weights. With inflow the generating function is min over the free
/// potential values of ½φᵀKφ - Gᵀφ plus the potential energy.
#[derive(Clone, Debug)]
pub struct PotentialSystem {
    map: SurfaceMap,
    params: PhysParams,
    inflow: Option<(Inflow, Vec<f64>)>,
    free: Vec<usize>,
    slot: Vec<usize>,
    on_sigma: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct PotentialEval {
    pub rate: Vec<f64>,
    /// potential on every vertex
    pub phi: Vec<f64>,
    pub energy: Energy,
    pub area: f64,
}

impl PotentialSystem {
    pub fn new(c: &SimplicialComplex, params: PhysParams, inflow: Option<Inflow>) -> Result<Self> {
        if c.sigma_vertices().is_empty() {
            return Err(PhError::Config("potential stepper needs a free surface".into()));
        }
        let map = SurfaceMap::new(c)?;
        let nv = c.n_vertices();
        let mut on_sigma = vec![false; nv];
        let mut slot = vec![0; nv];
        for (k, &v) in map.sigma.iter().enumerate() {
            on_sigma[v] = true;
            slot[v] = k;
        }
        let free: Vec<usize> = (0..nv).filter(|&v| !on_sigma[v]).collect();
        for (k, &v) in free.iter().enumerate() {
            slot[v] = k;
        }
        let inflow = match inflow {
            Some(i) => {
                i.validate()?;
                let load = i.unit_load(c)?;
                let moving = map.sigma.iter().chain(map.corners.iter().map(|c| &c.0));
                if moving.into_iter().any(|&v| load[v] != 0.0) {
                    return Err(PhError::Config("inflow segment touches a moving vertex".into()));
                }
                Some((i, load))
            }
            None => None,
        };
        Ok(PotentialSystem { map, params, inflow, free, slot, on_sigma })
    }

    pub fn map(&self) -> &SurfaceMap {
        &self.map
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        2 * self.map.n()
    }

    /// G(t) per vertex, zero without inflow.
    pub fn load(&self, t: f64) -> Vec<f64> {
        match &self.inflow {
            Some((i, l)) => linalg::scale(i.time.value(t), l),
            None => vec![0.0; self.map.reference.n_vertices()],
        }
    }

    pub fn eval(&self, t: f64, z: &[f64]) -> Result<PotentialEval> {
        let n = self.map.n();
        if z.len() != 2 * n {
            return Err(PhError::Dimension(format!("potential state has length {}, expected {}", z.len(), 2 * n)));
        }
        let (s, p) = z.split_at(n);
        let c = &self.map.reference;
        let x = self.map.positions(s);
        check_orientation(c, &x)?;
        let nf = self.free.len();
        let g = self.load(t);
        let mut rhs: Vec<f64> = self.free.iter().map(|&v| g[v]).collect();
        let mut trip = Vec::with_capacity(9 * c.n_triangles());
        let mut geo = Vec::with_capacity(c.n_triangles());
        for tri in c.triangles() {
            let (e, a) = tri_edge_vectors(&x, tri);
            for i in 0..3 {
                let vi = tri[i];
                if self.on_sigma[vi] {
                    continue;
                }
                for j in 0..3 {
                    let vj = tri[j];
                    let kij = dot2(e[i], e[j]) / (4.0 * a);
                    if self.on_sigma[vj] {
                        rhs[self.slot[vi]] -= kij * p[self.slot[vj]];
                    } else {
                        trip.push((self.slot[vi], self.slot[vj], kij));
                    }
                }
            }
            geo.push((e, a));
        }
        let kff = CsrMatrix::from_triplets(nf, nf, &trip);
        let pf = SparseCholesky::factor(&kff)?.solve(&rhs);
        let mut phi = vec![0.0; c.n_vertices()];
        for (k, &v) in self.free.iter().enumerate() {
            phi[v] = pf[k];
        }
        for (k, &v) in self.map.sigma.iter().enumerate() {
            phi[v] = p[k];
        }
        let mut kphi = vec![0.0; c.n_vertices()];
        let mut grad = vec![[0.0; 2]; c.n_vertices()];
        let mut kinetic = 0.0;
        for (tri, (e, a)) in c.triangles().iter().zip(&geo) {
            let ph = [phi[tri[0]], phi[tri[1]], phi[tri[2]]];
            let gv = [
                ph[0] * e[0][0] + ph[1] * e[1][0] + ph[2] * e[2][0],
                ph[0] * e[0][1] + ph[1] * e[1][1] + ph[2] * e[2][1],
            ];
            let gg = dot2(gv, gv);
            kinetic += gg / (8.0 * a);
            for k in 0..3 {
                kphi[tri[k]] += dot2(e[k], gv) / (4.0 * a);
                let ck = ph[(k + 1) % 3] - ph[(k + 2) % 3];
                let da = [-0.5 * e[k][1], 0.5 * e[k][0]];
                let f = gg / (8.0 * a * a);
                grad[tri[k]][0] += ck * gv[0] / (4.0 * a) - f * da[0];
                grad[tri[k]][1] += ck * gv[1] / (4.0 * a) - f * da[1];
            }
        }
        let bf = boundary_functionals(c, &x);
        let (g0, st) = (self.params.g0, self.params.surface_coeff());
        for v in 0..c.n_vertices() {
            for comp in 0..2 {
                grad[v][comp] += g0 * bf.d_moment[v][comp] + st * bf.d_length[v][comp];
            }
        }
        let dh = self.map.pull_back(&grad);
        let w = &self.map.weights;
        let mut rate = Vec::with_capacity(2 * n);
        rate.extend(self.map.sigma.iter().enumerate().map(|(k, &v)| kphi[v] / w[k]));
        rate.extend((0..n).map(|k| -dh[k] / w[k]));
        let (gravity, surface) = (g0 * bf.moment, st * bf.length);
        Ok(PotentialEval {
            rate,
            phi,
            energy: Energy { total: kinetic + gravity + surface, kinetic, gravity, surface },
            area: bf.area,
        })
    }

    pub fn rate(&self, t: f64, z: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval(t, z)?.rate)
    }

    /// Potential energy of the reference configuration.
    pub fn rest_energy(&self) -> f64 {
        let c = &self.map.reference;
        let bf = boundary_functionals(c, c.vertices());
        self.params.g0 * bf.moment + self.params.surface_coeff() * bf.length
    }
}

pub fn rk4_step(f: impl Fn(f64, &[f64]) -> Result<Vec<f64>>, t: f64, z: &[f64], dt: f64) -> Result<Vec<f64>> {
    let k1 = f(t, z)?;
    let k2 = f(t + 0.5 * dt, &axpy_new(0.5 * dt, &k1, z))?;
    let k3 = f(t + 0.5 * dt, &axpy_new(0.5 * dt, &k2, z))?;
    let k4 = f(t + dt, &axpy_new(dt, &k3, z))?;
    Ok((0..z.len()).map(|i| z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// Implicit midpoint by fixed-point iteration; returns the new state and the
/// iteration count.
pub fn midpoint_step(f: impl Fn(f64, &[f64]) -> Result<Vec<f64>>, t: f64, z: &[f64], dt: f64) -> Result<(Vec<f64>, usize)> {
    let tm = t + 0.5 * dt;
    let mut znew = axpy_new(dt, &f(t, z)?, z);
    for it in 1..=MIDPOINT_MAX_ITER {
        let zm: Vec<f64> = z.iter().zip(&znew).map(|(a, b)| 0.5 * (a + b)).collect();
        let next = axpy_new(dt, &f(tm, &zm)?, z);
        let diff = linalg::max_abs(&linalg::sub(&next, &znew));
        znew = next;
        if diff <= MIDPOINT_TOL * linalg::max_abs(&znew).max(1.0) {
            return Ok((znew, it));
        }
    }
    Err(PhError::StepRejected {
        t,
        msg: format!("implicit midpoint did not converge in {MIDPOINT_MAX_ITER} iterations; retry with dt <= {:e}", 0.5 * dt),
    })
}

fn axpy_new(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(yi, xi)| yi + a * xi).collect()
}

fn integrate(f: impl Fn(f64, &[f64]) -> Result<Vec<f64>>, t: f64, z: &[f64], dt: f64, integ: Integrator) -> Result<Vec<f64>> {
    let r = match integ {
        Integrator::Rk4 => rk4_step(f, t, z, dt),
        Integrator::ImplicitMidpoint => midpoint_step(f, t, z, dt).map(|r| r.0),
    };
    r.map_err(|e| match e {
        PhError::Geometry(m) => PhError::StepRejected { t, msg: format!("{m}; retry with dt <= {:e}", 0.5 * dt) },
        e => e,
    })
}

pub fn step_potential(sys: &PotentialSystem, t: f64, z: &[f64], dt: f64, integ: Integrator) -> Result<Vec<f64>> {
    integrate(|t, z| sys.rate(t, z), t, z, dt, integ)
}

/// Solve K x = b on the vertices off `fixed`, with x = `values` on `fixed`.
/// With no fixed vertices the Neumann problem is solved (b must sum to 0).
fn mixed_solve(h: &HodgeSystem, fixed: &[usize], values: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let c = h.complex();
    if fixed.is_empty() {
        let net: f64 = b.iter().sum();
        let scale = b.iter().map(|x| x.abs()).sum::<f64>().max(1e-300);
        if net.abs() > 1e-10 * scale.max(1.0) {
            return Err(PhError::Incompatible { net });
        }
        return elliptic::solve_neumann_full(b, h);
    }
    let nv = c.n_vertices();
    let mut is_fixed = vec![false; nv];
    let mut x = vec![0.0; nv];
    for (&v, &val) in fixed.iter().zip(values) {
        is_fixed[v] = true;
        x[v] = val;
    }
    let free: Vec<usize> = (0..nv).filter(|&v| !is_fixed[v]).collect();
    let kx = h.stiffness().mul_vec(&x);
    let rhs: Vec<f64> = free.iter().map(|&v| b[v] - kx[v]).collect();
    let xf = SparseCholesky::factor(&h.stiffness().submatrix(&free, &free))?.solve(&rhs);
    for (k, &v) in free.iter().enumerate() {
        x[v] = xf[k];
    }
    Ok(x)
}

fn galerkin_residual(h: &HodgeSystem, fixed: &[usize], b: &[f64], x: &[f64]) -> f64 {
    let kx = h.stiffness().mul_vec(x);
    let mut is_fixed = vec![false; x.len()];
    for &v in fixed {
        is_fixed[v] = true;
    }
    let r = (0..x.len()).filter(|&v| !is_fixed[v]).map(|v| (kx[v] - b[v]).abs()).fold(0.0, f64::max);
    let kmax = h.stiffness().data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = linalg::max_abs(b).max(linalg::max_abs(&kx)).max(kmax * linalg::max_abs(x));
    if scale > 0.0 {
        r / scale
    } else {
        r
    }
}

/// p̃/ρ from the drive covector D0ᵀM1 w: Dirichlet τk/ρ on Σ, and on the
/// other vertices K q = D0ᵀM1 w - Ġ so that v̇ = w - dq keeps the divergence
/// and the Γ flux rate.
fn pressure_from_drive(drive: &[f64], h: &HodgeSystem, p: &PhysParams, g_rate: Option<&[f64]>) -> Result<Vec<f64>> {
    let c = h.complex();
    let mut b = drive.to_vec();
    if let Some(gr) = g_rate {
        for (bi, gi) in b.iter_mut().zip(gr) {
            *bi -= gi;
        }
    }
    let fixed = c.sigma_vertices();
    let vals: Vec<f64> = if fixed.is_empty() {
        Vec::new()
    } else {
        SurfaceState::new(c)?.curvature.iter().map(|k| p.surface_coeff() * k).collect()
    };
    let q = mixed_solve(h, fixed, &vals, &b)?;
    let r = galerkin_residual(h, fixed, &b, &q);
    if r > 1e-10 {
        return Err(PhError::Solver(format!("pressure Galerkin residual {r:e}")));
    }
    Ok(q)
}

fn bernoulli_vertex(v: &[f64], h: &HodgeSystem, p: &PhysParams) -> Vec<f64> {
    let c = h.complex();
    (0..c.n_vertices())
        .map(|i| {
            let u = h.vertex_field(v, i);
            0.5 * dot2(u, u) + p.g0 * c.vertices()[i][1]
        })
        .collect()
}

/// p̃/ρ for velocity `v` on a fixed mesh; `g_rate` is the weak load of ∂g/∂t
/// per vertex.
pub fn pressure_solve(v: &[f64], h: &HodgeSystem, p: &PhysParams, g_rate: Option<&[f64]>) -> Result<Vec<f64>> {
    let c = h.complex();
    let div = forms::divergence_residual(v, h);
    if div > 1e-8 {
        return Err(PhError::NotSolenoidal { residual: div });
    }
    let zeta = forms::vorticity_density(v, h);
    let ip = forms::interior_product_rhs(v, &zeta, h);
    let b = bernoulli_vertex(v, h, p);
    // D0ᵀM1 w with w = -M1⁻¹ ip - D0 b
    let kb = h.stiffness().mul_vec(&b);
    let drive: Vec<f64> = h.d0().tr_mul_vec(&ip).iter().zip(&kb).map(|(a, k)| -a - k).collect();
    debug_assert_eq!(drive.len(), c.n_vertices());
    pressure_from_drive(&drive, h, p, g_rate)
}

/// Velocity formulation with pressure projection. The state is the edge
/// circulation v on the current mesh followed by the surface coordinates.
#[derive(Clone, Debug)]
pub struct RotationalSystem {
    reference: SimplicialComplex,
    map: Option<SurfaceMap>,
    params: PhysParams,
    inflow: Option<(Inflow, Vec<f64>)>,
}

#[derive(Clone, Debug)]
pub struct RotationalEval {
    pub rate: Vec<f64>,
    /// p̃/ρ per vertex
    pub pressure: Vec<f64>,
    /// ½|v|² + Φ + p̃/ρ per vertex
    pub head: Vec<f64>,
    pub energy: Energy,
    pub area: f64,
    pub div_residual: f64,
}

impl RotationalSystem {
    pub fn new(c: &SimplicialComplex, params: PhysParams, inflow: Option<Inflow>) -> Result<Self> {
        c.require_simply_connected()?;
        let map = if c.sigma_vertices().is_empty() { None } else { Some(SurfaceMap::new(c)?) };
        let inflow = match inflow {
            Some(i) => {
                i.validate()?;
                let load = i.unit_load(c)?;
                if map.is_none() {
                    return Err(PhError::Config("inflow into a closed domain without a free surface".into()));
                }
                Some((i, load))
            }
            None => None,
        };
        Ok(RotationalSystem { reference: c.clone(), map, params, inflow })
    }

    pub fn map(&self) -> Option<&SurfaceMap> {
        self.map.as_ref()
    }

    pub fn n_surface(&self) -> usize {
        self.map.as_ref().map_or(0, |m| m.n())
    }

    pub fn dim(&self) -> usize {
        self.reference.n_edges() + self.n_surface()
    }

    pub fn load(&self, t: f64) -> Vec<f64> {
        match &self.inflow {
            Some((i, l)) => linalg::scale(i.time.value(t), l),
            None => vec![0.0; self.reference.n_vertices()],
        }
    }

    fn load_rate(&self, t: f64) -> Option<Vec<f64>> {
        self.inflow.as_ref().map(|(i, l)| linalg::scale(i.time.rate(t), l))
    }

    pub fn mesh(&self, s: &[f64]) -> Result<HodgeSystem> {
        match &self.map {
            Some(m) => HodgeSystem::new(&m.complex(s)?),
            None => HodgeSystem::new(&self.reference),
        }
    }

    pub fn eval(&self, t: f64, z: &[f64]) -> Result<RotationalEval> {
        let ne = self.reference.n_edges();
        if z.len() != self.dim() {
            return Err(PhError::Dimension(format!("rotational state has length {}, expected {}", z.len(), self.dim())));
        }
        let (v, s) = z.split_at(ne);
        let h = self.mesh(s)?;
        let c = h.complex();
        let p = &self.params;
        let zeta = forms::vorticity_density(v, &h);
        let mut b = bernoulli_vertex(v, &h, p);
        let mut adv = v.to_vec();
        let mut sdot = Vec::new();
        if let Some(m) = &self.map {
            let mv = h.mass(1).mul_vec(v);
            let wnt = h.d0().tr_mul_vec(&mv);
            sdot = m.sigma.iter().zip(&m.weights).map(|(&i, w)| wnt[i] / w).collect();
            // transport along the mesh velocity: add i_w dv + d(i_w v)
            let wv = m.displacement(&sdot);
            let x = c.vertices();
            for (e, &[a, bb]) in c.edges().iter().enumerate() {
                let wm = [0.5 * (wv[a][0] + wv[bb][0]), 0.5 * (wv[a][1] + wv[bb][1])];
                adv[e] -= dot2(wm, energetics::sub2(x[bb], x[a]));
            }
            for (i, bi) in b.iter_mut().enumerate() {
                *bi -= dot2(wv[i], h.vertex_field(v, i));
            }
        }
        let ip = forms::interior_product_rhs(&adv, &zeta, &h);
        let kb = h.stiffness().mul_vec(&b);
        let drive: Vec<f64> = h.d0().tr_mul_vec(&ip).iter().zip(&kb).map(|(a, k)| -a - k).collect();
        let g_rate = self.load_rate(t);
        let q = pressure_from_drive(&drive, &h, p, g_rate.as_deref())?;
        let bq = linalg::add(&b, &q);
        let mut rate = linalg::sub(&linalg::scale(-1.0, &h.solve_mass(1, &ip)?), &h.d0().mul_vec(&bq));
        rate.extend(sdot);
        let head = linalg::add(&bernoulli_vertex(v, &h, p), &q);
        let energy = energetics::hamiltonian_v(v, p, &h)?;
        let area = c.total_area();
        Ok(RotationalEval { rate, pressure: q, head, energy, area, div_residual: forms::divergence_residual(v, &h) })
    }

    pub fn rate(&self, t: f64, z: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval(t, z)?.rate)
    }

    /// Remove the gradient part violating δv = 0 and ∗n v = g on Γ.
    pub fn project(&self, t: f64, z: &[f64]) -> Result<Vec<f64>> {
        let ne = self.reference.n_edges();
        let (v, s) = z.split_at(ne);
        let h = self.mesh(s)?;
        let c = h.complex();
        let mv = h.mass(1).mul_vec(v);
        let mut b = h.d0().tr_mul_vec(&mv);
        let g = self.load(t);
        for (bi, gi) in b.iter_mut().zip(&g) {
            *bi -= gi;
        }
        let fixed = c.sigma_vertices();
        let psi = mixed_solve(&h, fixed, &vec![0.0; fixed.len()], &b)?;
        let mut out = linalg::sub(v, &h.d0().mul_vec(&psi));
        out.extend_from_slice(s);
        Ok(out)
    }

    pub fn rest_energy(&self) -> f64 {
        let bf = boundary_functionals(&self.reference, self.reference.vertices());
        self.params.g0 * bf.moment + self.params.surface_coeff() * bf.length
    }
}

pub fn step_rotational(sys: &RotationalSystem, t: f64, z: &[f64], dt: f64, integ: Integrator) -> Result<Vec<f64>> {
    let z1 = integrate(|t, z| sys.rate(t, z), t, z, dt, integ)?;
    sys.project(t + dt, &z1)
}

/// Move Σ-interior vertices along their current unit normals by dt·speed,
/// slide Σ/Γ corners along their walls, and extend harmonically.
pub fn advance_surface(c: &SimplicialComplex, speeds: &[f64], dt: f64) -> Result<SimplicialComplex> {
    let map = SurfaceMap::new(c)?;
    if speeds.len() != map.n() {
        return Err(PhError::Dimension("one speed per Σ-interior vertex expected".into()));
    }
    if speeds.iter().any(|x| !x.is_finite()) {
        return Err(PhError::Config("non-finite surface speed".into()));
    }
    let s = linalg::scale(dt, speeds);
    let u = map.displacement(&s);
    let bd: Vec<[f64; 2]> = c.boundary_vertices().iter().map(|&v| u[v]).collect();
    deform_mesh(c, &bd).map_err(|e| match e {
        PhError::Geometry(m) => PhError::Geometry(format!("{m}; retry with dt <= {:e}", 0.5 * dt)),
        e => e,
    })
}

/// Displace boundary vertices by `bd` (traversal order) and carry the
/// interior along harmonically. Each displacement must stay below 0.4 of the
/// shortest incident edge.
pub fn deform_mesh(c: &SimplicialComplex, bd: &[[f64; 2]]) -> Result<SimplicialComplex> {
    if bd.len() != c.boundary_vertices().len() {
        return Err(PhError::Dimension("displacement length differs from boundary vertex count".into()));
    }
    let mut shortest = vec![f64::INFINITY; c.n_vertices()];
    for e in 0..c.n_edges() {
        let l = c.edge_length(e);
        for &v in &c.edges()[e] {
            shortest[v] = shortest[v].min(l);
        }
    }
    for (k, &v) in c.boundary_vertices().iter().enumerate() {
        let d = energetics::norm2(bd[k]);
        if d >= 0.4 * shortest[v] {
            return Err(PhError::Geometry(format!("displacement {d:e} at vertex {v} exceeds 0.4 of the local edge length")));
        }
    }
    crate::ale::deform(&HodgeSystem::new(c)?, bd)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepperKind {
    Potential,
    Rotational,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SurfaceInit {
    Flat,
    /// s = amplitude·cos(mode·π·(x - x_min)/width) along the reference normals
    Cosine { amplitude: f64, mode: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VelocityInit {
    Rest,
    /// stream function amplitude·sin(πξ)sin(πη) on the bounding box
    TaylorGreen { amplitude: f64 },
    /// ω × (x - centre) about the bounding-box centre
    RigidRotation { omega: f64 },
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub mesh: SimplicialComplex,
    pub stepper: StepperKind,
    pub params: PhysParams,
    pub surface: SurfaceInit,
    pub velocity: VelocityInit,
    pub inflow: Option<Inflow>,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    /// record every n-th step
    pub output_every: usize,
    /// Σ snapshot every n-th step, 0 for none
    pub snapshot_every: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(PhError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(PhError::Config(format!("end time must be non-negative, got {}", self.t_end)));
        }
        if self.output_every == 0 {
            return Err(PhError::Config("output cadence must be at least 1".into()));
        }
        if self.stepper == StepperKind::Potential && self.velocity != VelocityInit::Rest {
            return Err(PhError::Config("the potential stepper starts from φ∂ = 0 and carries no vorticity".into()));
        }
        if let SurfaceInit::Cosine { amplitude, .. } = self.surface {
            if !amplitude.is_finite() {
                return Err(PhError::Config("surface amplitude must be finite".into()));
            }
            if self.mesh.sigma_vertices().is_empty() {
                return Err(PhError::Config("a surface profile needs a free surface".into()));
            }
        }
        if let Some(i) = &self.inflow {
            i.validate()?;
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

fn initial_surface(map: &SurfaceMap, init: SurfaceInit) -> Vec<f64> {
    match init {
        SurfaceInit::Flat => vec![0.0; map.n()],
        SurfaceInit::Cosine { amplitude, mode } => {
            let (x0, x1) = sigma_extent(map);
            let x = map.reference.vertices();
            map.sigma.iter().map(|&v| amplitude * (mode as f64 * PI * (x[v][0] - x0) / (x1 - x0)).cos()).collect()
        }
    }
}

fn sigma_extent(map: &SurfaceMap) -> (f64, f64) {
    let x = map.reference.vertices();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for ch in map.reference.sigma_chains() {
        for &v in &ch.vertices {
            lo = lo.min(x[v][0]);
            hi = hi.max(x[v][0]);
        }
    }
    (lo, hi)
}

fn bbox(c: &SimplicialComplex) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in c.vertices() {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

pub fn initial_velocity(h: &HodgeSystem, init: VelocityInit) -> Vec<f64> {
    let (lo, hi) = bbox(h.complex());
    let (lx, ly) = (hi[0] - lo[0], hi[1] - lo[1]);
    match init {
        VelocityInit::Rest => vec![0.0; h.complex().n_edges()],
        VelocityInit::TaylorGreen { amplitude } => forms::interpolate_1form(h, |p| {
            let (xi, et) = (PI * (p[0] - lo[0]) / lx, PI * (p[1] - lo[1]) / ly);
            [amplitude * PI / ly * xi.sin() * et.cos(), -amplitude * PI / lx * xi.cos() * et.sin()]
        })
        .into_values(),
        VelocityInit::RigidRotation { omega } => {
            let cx = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
            forms::interpolate_1form(h, |p| [-omega * (p[1] - cx[1]), omega * (p[0] - cx[0])]).into_values()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub h: f64,
    pub h_kin: f64,
    pub h_grav: f64,
    pub h_surf: f64,
    /// ∫_Γ tr(h) g over the step ending at t
    pub port_flux: f64,
    pub area: f64,
    pub div_residual: f64,
}

/// Per-step power audit: (H_{n+1} - H_n)/dt against the port term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerSample {
    pub t_mid: f64,
    pub dh_dt: f64,
    pub port_flux: f64,
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub rows: Vec<TrajectoryRow>,
    pub power: Vec<PowerSample>,
    /// surface coordinates at every recorded row
    pub surface: Vec<Vec<f64>>,
    /// (step, Σ vertex positions including corners)
    pub snapshots: Vec<(usize, Vec<[f64; 2]>)>,
    /// potential energy of the undisturbed reference configuration
    pub rest_energy: f64,
    /// reference positions of the surface coordinates
    pub sigma_ref: Vec<[f64; 2]>,
    pub sigma_weights: Vec<f64>,
    /// x extent of Σ including corners
    pub x_span: (f64, f64),
}

impl TrajectoryRecord {
    pub const HEADER: &'static str = "t,H,H_kin,H_grav,H_surf,port_flux,area,div_residual";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                r.t, r.h, r.h_kin, r.h_grav, r.h_surf, r.port_flux, r.area, r.div_residual
            ));
        }
        s
    }

    /// max |H(t) - H(0)| / |H(0) - rest energy|, or relative to |H(0)| when
    /// the initial state is at rest.
    pub fn energy_drift(&self) -> f64 {
        let h0 = self.rows[0].h;
        let scale = (h0 - self.rest_energy).abs();
        let scale = if scale > 1e-14 * h0.abs().max(1e-300) { scale } else { h0.abs().max(1e-300) };
        self.rows.iter().map(|r| (r.h - h0).abs()).fold(0.0, f64::max) / scale
    }

    pub fn area_drift(&self) -> f64 {
        let a0 = self.rows[0].area;
        self.rows.iter().map(|r| (r.area - a0).abs()).fold(0.0, f64::max) / a0.abs()
    }

    /// max_n |ΔH/Δt + port| normalized by the peak port power.
    pub fn power_residual(&self) -> f64 {
        let scale = self.power.iter().map(|p| p.port_flux.abs()).fold(0.0, f64::max);
        let r = self.power.iter().map(|p| (p.dh_dt + p.port_flux).abs()).fold(0.0, f64::max);
        if scale > 0.0 {
            r / scale
        } else {
            r
        }
    }

    /// Weighted projection of the surface coordinates on cos(mode·π·ξ).
    pub fn mode_series(&self, mode: usize) -> Vec<f64> {
        let (x0, x1) = self.x_span;
        let basis: Vec<f64> = self.sigma_ref.iter().map(|p| (mode as f64 * PI * (p[0] - x0) / (x1 - x0)).cos()).collect();
        let norm: f64 = basis.iter().zip(&self.sigma_weights).map(|(b, w)| w * b * b).sum();
        self.surface
            .iter()
            .map(|s| s.iter().zip(&basis).zip(&self.sigma_weights).map(|((x, b), w)| w * x * b).sum::<f64>() / norm)
            .collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }
}

/// Angular frequency from the zero crossings of an oscillating signal.
pub fn zero_crossing_frequency(t: &[f64], a: &[f64]) -> Option<f64> {
    let mut cross = Vec::new();
    for i in 1..t.len().min(a.len()) {
        if (a[i - 1] < 0.0) != (a[i] < 0.0) && a[i] != a[i - 1] {
            cross.push(t[i - 1] + (t[i] - t[i - 1]) * a[i - 1] / (a[i - 1] - a[i]));
        }
    }
    if cross.len() < 3 {
        return None;
    }
    let half = (cross[cross.len() - 1] - cross[0]) / (cross.len() - 1) as f64;
    Some(PI / half)
}

pub fn run_scenario(sc: &Scenario) -> Result<TrajectoryRecord> {
    sc.validate()?;
    match sc.stepper {
        StepperKind::Potential => run_potential(sc),
        StepperKind::Rotational => run_rotational(sc),
    }
}

fn sigma_positions(map: &SurfaceMap, s: &[f64]) -> Vec<[f64; 2]> {
    let x = map.positions(s);
    let mut out = Vec::new();
    for ch in map.reference.sigma_chains() {
        out.extend(ch.vertices.iter().map(|&v| x[v]));
    }
    out
}

fn new_record(map: Option<&SurfaceMap>, rest_energy: f64) -> TrajectoryRecord {
    let (sigma_ref, sigma_weights, x_span) = match map {
        Some(m) => {
            let x = m.reference.vertices();
            (m.sigma.iter().map(|&v| x[v]).collect(), m.weights.clone(), sigma_extent(m))
        }
        None => (Vec::new(), Vec::new(), (0.0, 1.0)),
    };
    TrajectoryRecord { rows: Vec::new(), power: Vec::new(), surface: Vec::new(), snapshots: Vec::new(), rest_energy, sigma_ref, sigma_weights, x_span }
}

fn run_potential(sc: &Scenario) -> Result<TrajectoryRecord> {
    let sys = PotentialSystem::new(&sc.mesh, sc.params, sc.inflow.clone())?;
    let n = sys.map.n();
    let mut z = initial_surface(&sys.map, sc.surface);
    z.extend(vec![0.0; n]);
    let mut rec = new_record(Some(&sys.map), sys.rest_energy());
    let mut t = 0.0;
    let mut ev = sys.eval(t, &z).map_err(|e| at_time(e, 0.0))?;
    push_row(&mut rec, t, &ev.energy, 0.0, ev.area, 0.0, &z[..n]);
    if sc.snapshot_every > 0 {
        rec.snapshots.push((0, sigma_positions(&sys.map, &z[..n])));
    }
    for step in 1..=sc.n_steps() {
        let z1 = step_potential(&sys, t, &z, sc.dt, sc.integrator)?;
        let t1 = step as f64 * sc.dt;
        let ev1 = sys.eval(t1, &z1).map_err(|e| at_time(e, t1))?;
        let g = sys.load(t + 0.5 * sc.dt);
        // tr(h) = -φ_t by Bernoulli
        let port = -g.iter().zip(ev1.phi.iter().zip(&ev.phi)).map(|(gi, (a, b))| gi * (a - b)).sum::<f64>() / sc.dt;
        rec.power.push(PowerSample { t_mid: t + 0.5 * sc.dt, dh_dt: (ev1.energy.total - ev.energy.total) / sc.dt, port_flux: port });
        z = z1;
        ev = ev1;
        t = t1;
        if step % sc.output_every == 0 {
            push_row(&mut rec, t, &ev.energy, port, ev.area, 0.0, &z[..n]);
        }
        if sc.snapshot_every > 0 && step % sc.snapshot_every == 0 {
            rec.snapshots.push((step, sigma_positions(&sys.map, &z[..n])));
        }
    }
    Ok(rec)
}

fn run_rotational(sc: &Scenario) -> Result<TrajectoryRecord> {
    let sys = RotationalSystem::new(&sc.mesh, sc.params, sc.inflow.clone())?;
    let ne = sc.mesh.n_edges();
    let s0 = match &sys.map {
        Some(m) => initial_surface(m, sc.surface),
        None => Vec::new(),
    };
    let h0 = sys.mesh(&s0)?;
    let mut z = initial_velocity(&h0, sc.velocity);
    z.extend_from_slice(&s0);
    z = sys.project(0.0, &z)?;
    let mut rec = new_record(sys.map.as_ref(), sys.rest_energy());
    let mut t = 0.0;
    let mut ev = sys.eval(t, &z).map_err(|e| at_time(e, 0.0))?;
    push_row(&mut rec, t, &ev.energy, 0.0, ev.area, ev.div_residual, &z[ne..]);
    if sc.snapshot_every > 0 {
        if let Some(m) = &sys.map {
            rec.snapshots.push((0, sigma_positions(m, &z[ne..])));
        }
    }
    for step in 1..=sc.n_steps() {
        let z1 = step_rotational(&sys, t, &z, sc.dt, sc.integrator)?;
        let t1 = step as f64 * sc.dt;
        let ev1 = sys.eval(t1, &z1).map_err(|e| at_time(e, t1))?;
        let port = if sys.inflow.is_some() {
            let zm: Vec<f64> = z.iter().zip(&z1).map(|(a, b)| 0.5 * (a + b)).collect();
            let em = sys.eval(t + 0.5 * sc.dt, &zm).map_err(|e| at_time(e, t))?;
            linalg::dot(&sys.load(t + 0.5 * sc.dt), &em.head)
        } else {
            0.0
        };
        rec.power.push(PowerSample { t_mid: t + 0.5 * sc.dt, dh_dt: (ev1.energy.total - ev.energy.total) / sc.dt, port_flux: port });
        z = z1;
        ev = ev1;
        t = t1;
        if step % sc.output_every == 0 {
            push_row(&mut rec, t, &ev.energy, port, ev.area, ev.div_residual, &z[ne..]);
        }
        if sc.snapshot_every > 0 && step % sc.snapshot_every == 0 {
            if let Some(m) = &sys.map {
                rec.snapshots.push((step, sigma_positions(m, &z[ne..])));
            }
        }
    }
    Ok(rec)
}

fn at_time(e: PhError, t: f64) -> PhError {
    match e {
        PhError::Geometry(msg) | PhError::Solver(msg) => PhError::StepRejected { t, msg },
        e => e,
    }
}

fn push_row(rec: &mut TrajectoryRecord, t: f64, e: &Energy, port: f64, area: f64, div: f64, s: &[f64]) {
    rec.rows.push(TrajectoryRow {
        t,
        h: e.total,
        h_kin: e.kinetic,
        h_grav: e.gravity,
        h_surf: e.surface,
        port_flux: port,
        area,
        div_residual: div,
    });
    rec.surface.push(s.to_vec());
}
