//! Oriented 2D triangulations with integer incidence operators and a
//! labeled Σ/Γ boundary partition.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{PhError, Result};
use crate::linalg::CsrMatrix;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Sigma,
    Gamma,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Sigma => "SIGMA",
            Label::Gamma => "GAMMA",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexRole {
    Interior,
    /// on Σ and not touching Γ
    Sigma,
    /// on Γ, including Σ/Γ corners
    Gamma,
}

/// One edge slot of a triangle: local slot `s` joins local vertices
/// `s` and `(s+1)%3`. `sign` is +1 when the global edge points the same way.
#[derive(Clone, Copy, Debug)]
pub struct TriEdge {
    pub edge: usize,
    pub sign: i8,
}

/// A Σ polyline in boundary traversal order. Open chains start and end at
/// Γ corners; closed chains repeat no vertex.
#[derive(Clone, Debug)]
pub struct SigmaChain {
    pub vertices: Vec<usize>,
    pub closed: bool,
}

#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    id: u64,
    vertices: Vec<[f64; 2]>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    tri_edges: Vec<[TriEdge; 3]>,
    edge_tris: Vec<Vec<usize>>,
    vertex_tris: Vec<Vec<usize>>,
    edge_label: Vec<Option<Label>>,
    roles: Vec<VertexRole>,
    loops: Vec<Vec<usize>>,
    boundary_vertices: Vec<usize>,
    bpos: Vec<usize>,
    boundary_edges: Vec<usize>,
    boundary_edge_dir: Vec<i8>,
    sigma_vertices: Vec<usize>,
    gamma_vertices: Vec<usize>,
    interior_vertices: Vec<usize>,
    sigma_chains: Vec<SigmaChain>,
}

impl SimplicialComplex {
    /// Build and validate from raw arrays. `labels` lists boundary edges by
    /// endpoint pair in either order.
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        labels: &[(usize, usize, Label)],
    ) -> Result<Self> {
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i >= nv {
                    return Err(PhError::Validation(format!(
                        "triangle {t} references vertex {i} but only {nv} vertices exist"
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(PhError::Validation(format!("triangle {t} repeats a vertex: {tri:?}")));
            }
            let a = signed_area(&vertices, tri);
            if !(a > 0.0) {
                return Err(PhError::Validation(format!(
                    "orientation error: triangle {t} {tri:?} is clockwise or degenerate (signed area {a:e})"
                )));
            }
        }

        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_tris: Vec<Vec<usize>> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut slots = [TriEdge { edge: 0, sign: 1 }; 3];
            for s in 0..3 {
                let (i, j) = (tri[s], tri[(s + 1) % 3]);
                if let Some(&other) = directed.get(&(i, j)) {
                    return Err(PhError::Validation(format!(
                        "inconsistent orientation: directed edge {i}->{j} used by triangles {other} and {t}"
                    )));
                }
                directed.insert((i, j), t);
                let key = (i.min(j), i.max(j));
                let e = *edge_map.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_tris.push(Vec::new());
                    edges.len() - 1
                });
                edge_tris[e].push(t);
                if edge_tris[e].len() > 2 {
                    return Err(PhError::Validation(format!(
                        "non-manifold edge {}-{} shared by {} triangles",
                        key.0,
                        key.1,
                        edge_tris[e].len()
                    )));
                }
                slots[s] = TriEdge { edge: e, sign: if i < j { 1 } else { -1 } };
            }
            tri_edges.push(slots);
        }

        let mut edge_label: Vec<Option<Label>> = vec![None; edges.len()];
        for &(i, j, lab) in labels {
            let key = (i.min(j), i.max(j));
            let e = match edge_map.get(&key) {
                Some(&e) => e,
                None => {
                    return Err(PhError::Validation(format!("labeled edge {i}-{j} is not an edge of the mesh")))
                }
            };
            if edge_tris[e].len() != 1 {
                return Err(PhError::Validation(format!("labeled edge {i}-{j} is not a boundary edge")));
            }
            if edge_label[e].is_some() {
                return Err(PhError::Validation(format!("boundary edge {i}-{j} labeled twice")));
            }
            edge_label[e] = Some(lab);
        }
        for (e, ts) in edge_tris.iter().enumerate() {
            if ts.len() == 1 && edge_label[e].is_none() {
                return Err(PhError::Validation(format!(
                    "unlabeled boundary edge {}-{}",
                    edges[e][0], edges[e][1]
                )));
            }
        }

        // boundary successor map along the induced (counterclockwise) orientation
        let mut next: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut bdeg = vec![0usize; nv];
        for (t, tri) in triangles.iter().enumerate() {
            for s in 0..3 {
                let e = tri_edges[t][s].edge;
                if edge_tris[e].len() == 1 {
                    let (i, j) = (tri[s], tri[(s + 1) % 3]);
                    bdeg[i] += 1;
                    bdeg[j] += 1;
                    if next.insert(i, (j, e)).is_some() {
                        return Err(PhError::Validation(format!(
                            "boundary vertex {i} has more than two incident boundary edges"
                        )));
                    }
                }
            }
        }
        for (v, &d) in bdeg.iter().enumerate() {
            if d != 0 && d != 2 {
                return Err(PhError::Validation(format!(
                    "boundary vertex {v} has {d} incident boundary edges (expected 2)"
                )));
            }
        }
        let mut start_keys: Vec<usize> = next.keys().copied().collect();
        start_keys.sort_unstable();
        let mut seen = vec![false; nv];
        let mut loops = Vec::new();
        let mut boundary_edges = Vec::new();
        let mut boundary_edge_dir = Vec::new();
        for &s in &start_keys {
            if seen[s] {
                continue;
            }
            let mut lp = Vec::new();
            let mut cur = s;
            loop {
                seen[cur] = true;
                lp.push(cur);
                let (nx, e) = next[&cur];
                boundary_edges.push(e);
                boundary_edge_dir.push(if edges[e][0] == cur { 1 } else { -1 });
                cur = nx;
                if cur == s {
                    break;
                }
                if seen[cur] {
                    return Err(PhError::Validation(format!("boundary vertex {cur} revisited; boundary not a set of simple loops")));
                }
            }
            loops.push(lp);
        }

        let mut roles = vec![VertexRole::Interior; nv];
        for (k, &e) in boundary_edges.iter().enumerate() {
            let _ = k;
            for &v in &edges[e] {
                let lab = edge_label[e].unwrap();
                roles[v] = match (roles[v], lab) {
                    (VertexRole::Gamma, _) | (_, Label::Gamma) => VertexRole::Gamma,
                    _ => VertexRole::Sigma,
                };
            }
        }
        let boundary_vertices: Vec<usize> = loops.iter().flatten().copied().collect();
        let mut bpos = vec![usize::MAX; nv];
        for (k, &v) in boundary_vertices.iter().enumerate() {
            bpos[v] = k;
        }
        let sigma_vertices: Vec<usize> =
            boundary_vertices.iter().copied().filter(|&v| roles[v] == VertexRole::Sigma).collect();
        let gamma_vertices: Vec<usize> =
            boundary_vertices.iter().copied().filter(|&v| roles[v] == VertexRole::Gamma).collect();
        let interior_vertices: Vec<usize> = (0..nv).filter(|&v| roles[v] == VertexRole::Interior).collect();

        let mut vertex_tris = vec![Vec::new(); nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                vertex_tris[v].push(t);
            }
        }

        let mut c = SimplicialComplex {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            vertices,
            edges,
            triangles,
            tri_edges,
            edge_tris,
            vertex_tris,
            edge_label,
            roles,
            loops,
            boundary_vertices,
            bpos,
            boundary_edges,
            boundary_edge_dir,
            sigma_vertices,
            gamma_vertices,
            interior_vertices,
            sigma_chains: Vec::new(),
        };
        c.sigma_chains = c.build_sigma_chains();
        Ok(c)
    }

    fn build_sigma_chains(&self) -> Vec<SigmaChain> {
        let mut chains = Vec::new();
        let mut offset = 0;
        for lp in &self.loops {
            let n = lp.len();
            let labs: Vec<Label> =
                (0..n).map(|k| self.edge_label[self.boundary_edges[offset + k]].unwrap()).collect();
            offset += n;
            if labs.iter().all(|&l| l == Label::Sigma) {
                chains.push(SigmaChain { vertices: lp.clone(), closed: true });
                continue;
            }
            if labs.iter().all(|&l| l == Label::Gamma) {
                continue;
            }
            // rotate so that we start right after a Γ edge
            let start = (0..n).find(|&k| labs[(k + n - 1) % n] == Label::Gamma && labs[k] == Label::Sigma);
            let mut k = match start {
                Some(k) => k,
                None => continue,
            };
            let mut visited = 0;
            while visited < n {
                if labs[k] == Label::Sigma && labs[(k + n - 1) % n] == Label::Gamma {
                    let mut vs = vec![lp[k]];
                    let mut j = k;
                    while labs[j] == Label::Sigma {
                        j = (j + 1) % n;
                        vs.push(lp[j]);
                        visited += 1;
                    }
                    chains.push(SigmaChain { vertices: vs, closed: false });
                    k = j;
                } else {
                    k = (k + 1) % n;
                    visited += 1;
                }
            }
        }
        chains
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, header) = lines.next().ok_or(PhError::Parse { line: 1, msg: "empty mesh file".into() })?;
        if header.split_whitespace().collect::<Vec<_>>() != ["ph-mesh", "1"] {
            return Err(PhError::Parse { line: ln, msg: format!("expected header `ph-mesh 1`, found `{header}`") });
        }
        let mut section = |name: &str| -> Result<(usize, Vec<(usize, Vec<String>)>)> {
            let (ln, l) = lines.next().ok_or(PhError::Parse { line: 0, msg: format!("missing section `{name}`") })?;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != 2 || toks[0] != name {
                return Err(PhError::Parse { line: ln, msg: format!("expected `{name} <count>`, found `{l}`") });
            }
            let n: usize = toks[1]
                .parse()
                .map_err(|_| PhError::Parse { line: ln, msg: format!("bad count `{}`", toks[1]) })?;
            let mut rows = Vec::with_capacity(n);
            for _ in 0..n {
                let (rl, row) = lines
                    .next()
                    .ok_or(PhError::Parse { line: ln, msg: format!("section `{name}` ends early") })?;
                rows.push((rl, row.split_whitespace().map(String::from).collect()));
            }
            Ok((ln, rows))
        };
        let (_, vrows) = section("vertices")?;
        let mut vertices = Vec::with_capacity(vrows.len());
        for (ln, r) in &vrows {
            if r.len() != 2 {
                return Err(PhError::Parse { line: *ln, msg: "vertex line needs `x y`".into() });
            }
            let x: f64 = r[0].parse().map_err(|_| PhError::Parse { line: *ln, msg: format!("bad number `{}`", r[0]) })?;
            let y: f64 = r[1].parse().map_err(|_| PhError::Parse { line: *ln, msg: format!("bad number `{}`", r[1]) })?;
            vertices.push([x, y]);
        }
        let (_, trows) = section("triangles")?;
        let mut triangles = Vec::with_capacity(trows.len());
        for (ln, r) in &trows {
            if r.len() != 3 {
                return Err(PhError::Parse { line: *ln, msg: "triangle line needs `i j k`".into() });
            }
            let mut t = [0usize; 3];
            for k in 0..3 {
                t[k] = r[k].parse().map_err(|_| PhError::Parse { line: *ln, msg: format!("bad index `{}`", r[k]) })?;
            }
            triangles.push(t);
        }
        let (_, brows) = section("boundary")?;
        let mut labels = Vec::with_capacity(brows.len());
        for (ln, r) in &brows {
            if r.len() != 3 {
                return Err(PhError::Parse { line: *ln, msg: "boundary line needs `i j LABEL`".into() });
            }
            let i: usize = r[0].parse().map_err(|_| PhError::Parse { line: *ln, msg: format!("bad index `{}`", r[0]) })?;
            let j: usize = r[1].parse().map_err(|_| PhError::Parse { line: *ln, msg: format!("bad index `{}`", r[1]) })?;
            let lab = match r[2].as_str() {
                "SIGMA" => Label::Sigma,
                "GAMMA" => Label::Gamma,
                other => return Err(PhError::Parse { line: *ln, msg: format!("unknown label `{other}`") }),
            };
            labels.push((i, j, lab));
        }
        if let Some((ln, l)) = lines.next() {
            return Err(PhError::Parse { line: ln, msg: format!("unexpected trailing content `{l}`") });
        }
        Self::from_parts(vertices, triangles, &labels)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("ph-mesh 1\n");
        s.push_str(&format!("vertices {}\n", self.vertices.len()));
        for p in &self.vertices {
            s.push_str(&format!("{:.17e} {:.17e}\n", p[0], p[1]));
        }
        s.push_str(&format!("triangles {}\n", self.triangles.len()));
        for t in &self.triangles {
            s.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
        }
        s.push_str(&format!("boundary {}\n", self.boundary_edges.len()));
        for &e in &self.boundary_edges {
            let [a, b] = self.edges[e];
            s.push_str(&format!("{} {} {}\n", a, b, self.edge_label[e].unwrap().as_str()));
        }
        s
    }

    pub fn labels(&self) -> Vec<(usize, usize, Label)> {
        self.boundary_edges
            .iter()
            .map(|&e| (self.edges[e][0], self.edges[e][1], self.edge_label[e].unwrap()))
            .collect()
    }

    /// Same topology and mesh id, new vertex positions.
    pub fn with_positions(&self, pos: Vec<[f64; 2]>) -> Result<Self> {
        if pos.len() != self.vertices.len() {
            return Err(PhError::Dimension("position count differs from vertex count".into()));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            let a = signed_area(&pos, tri);
            if !(a > 0.0) {
                return Err(PhError::Geometry(format!("triangle {t} inverted (signed area {a:e})")));
            }
        }
        let mut c = self.clone();
        c.vertices = pos;
        Ok(c)
    }

    pub fn id(&self) -> u64 {
        self.id
    }
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }
    pub fn n_simplices(&self, k: usize) -> usize {
        match k {
            0 => self.n_vertices(),
            1 => self.n_edges(),
            _ => self.n_triangles(),
        }
    }
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }
    pub fn tri_edges(&self) -> &[[TriEdge; 3]] {
        &self.tri_edges
    }
    pub fn edge_triangles(&self, e: usize) -> &[usize] {
        &self.edge_tris[e]
    }
    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vertex_tris[v]
    }
    pub fn edge_label(&self, e: usize) -> Option<Label> {
        self.edge_label[e]
    }
    pub fn role(&self, v: usize) -> VertexRole {
        self.roles[v]
    }
    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.loops
    }
    /// All boundary vertices, loop by loop in traversal order.
    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }
    /// Position of vertex `v` in `boundary_vertices`, if on the boundary.
    pub fn boundary_index(&self, v: usize) -> Option<usize> {
        let k = self.bpos[v];
        (k != usize::MAX).then_some(k)
    }
    /// Boundary edges in traversal order.
    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }
    /// +1 when traversal runs along the stored edge orientation.
    pub fn boundary_edge_dirs(&self) -> &[i8] {
        &self.boundary_edge_dir
    }
    pub fn sigma_vertices(&self) -> &[usize] {
        &self.sigma_vertices
    }
    pub fn gamma_vertices(&self) -> &[usize] {
        &self.gamma_vertices
    }
    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }
    pub fn sigma_chains(&self) -> &[SigmaChain] {
        &self.sigma_chains
    }
    pub fn count_label(&self, l: Label) -> usize {
        self.boundary_edges.iter().filter(|&&e| self.edge_label[e] == Some(l)).count()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        let (p, q) = (self.vertices[a], self.vertices[b]);
        ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
    }

    /// Longest edge length.
    pub fn mesh_size(&self) -> f64 {
        (0..self.n_edges()).map(|e| self.edge_length(e)).fold(0.0, f64::max)
    }

    /// Signed incidence rows of D0: edge e = (a,b) maps to -1 at a, +1 at b.
    pub fn d0_rows(&self) -> Vec<[(usize, i64); 2]> {
        self.edges.iter().map(|&[a, b]| [(a, -1), (b, 1)]).collect()
    }

    /// Signed incidence rows of D1 (triangle boundary cycles).
    pub fn d1_rows(&self) -> Vec<[(usize, i64); 3]> {
        self.tri_edges
            .iter()
            .map(|s| [(s[0].edge, s[0].sign as i64), (s[1].edge, s[1].sign as i64), (s[2].edge, s[2].sign as i64)])
            .collect()
    }

    pub fn d0(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(2 * self.n_edges());
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            t.push((e, a, -1.0));
            t.push((e, b, 1.0));
        }
        CsrMatrix::from_triplets(self.n_edges(), self.n_vertices(), &t)
    }

    pub fn d1(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(3 * self.n_triangles());
        for (tr, s) in self.tri_edges.iter().enumerate() {
            for k in 0..3 {
                t.push((tr, s[k].edge, s[k].sign as f64));
            }
        }
        CsrMatrix::from_triplets(self.n_triangles(), self.n_edges(), &t)
    }

    /// Max absolute entry of D1·D0 in integer arithmetic.
    pub fn d1d0_max(&self) -> i64 {
        let d0 = self.d0_rows();
        let mut worst = 0;
        for row in self.d1_rows() {
            let mut acc: HashMap<usize, i64> = HashMap::new();
            for (e, s) in row {
                for (v, r) in d0[e] {
                    *acc.entry(v).or_insert(0) += s * r;
                }
            }
            worst = acc.values().fold(worst, |m, x| m.max(x.abs()));
        }
        worst
    }

    /// Split every triangle into four by edge midpoints.
    pub fn refine_uniform(&self) -> Result<Self> {
        let nv = self.n_vertices();
        let mut verts = self.vertices.clone();
        for &[a, b] in &self.edges {
            let (p, q) = (self.vertices[a], self.vertices[b]);
            verts.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
        }
        let mut tris = Vec::with_capacity(4 * self.n_triangles());
        for (t, tri) in self.triangles.iter().enumerate() {
            let m = |s: usize| nv + self.tri_edges[t][s].edge;
            let (a, b, c) = (tri[0], tri[1], tri[2]);
            let (m01, m12, m20) = (m(0), m(1), m(2));
            tris.push([a, m01, m20]);
            tris.push([m01, b, m12]);
            tris.push([m20, m12, c]);
            tris.push([m01, m12, m20]);
        }
        let mut labels = Vec::with_capacity(2 * self.boundary_edges.len());
        for &e in &self.boundary_edges {
            let [a, b] = self.edges[e];
            let l = self.edge_label[e].unwrap();
            labels.push((a, nv + e, l));
            labels.push((nv + e, b, l));
        }
        Self::from_parts(verts, tris, &labels)
    }

    /// (b0, b1) from the ranks of D0 and D1.
    pub fn betti_numbers(&self) -> (usize, usize) {
        let nv = self.n_vertices();
        let mut uf = UnionFind::new(nv);
        for &[a, b] in &self.edges {
            uf.union(a, b);
        }
        let b0 = (0..nv).filter(|&v| uf.find(v) == v).count();
        let rank_d0 = nv - b0;
        // D1 loses one rank per closed (boundary-free) component of the dual graph.
        let nt = self.n_triangles();
        let mut tf = UnionFind::new(nt);
        for ts in &self.edge_tris {
            if ts.len() == 2 {
                tf.union(ts[0], ts[1]);
            }
        }
        let mut has_bd = vec![false; nt];
        for (e, ts) in self.edge_tris.iter().enumerate() {
            if ts.len() == 1 {
                let _ = e;
                let r = tf.find(ts[0]);
                has_bd[r] = true;
            }
        }
        let closed = (0..nt).filter(|&t| tf.find(t) == t && !has_bd[t]).count();
        let rank_d1 = nt - closed;
        let b1 = self.n_edges() - rank_d1 - rank_d0;
        (b0, b1)
    }

    pub fn require_simply_connected(&self) -> Result<()> {
        let (b0, b1) = self.betti_numbers();
        if b0 != 1 || b1 != 0 {
            return Err(PhError::HarmonicUnsupported { b0, b1 });
        }
        Ok(())
    }

    /// Outward unit normal of boundary edge `e` (right of traversal).
    pub fn boundary_edge_normal(&self, k: usize) -> [f64; 2] {
        let e = self.boundary_edges[k];
        let [a, b] = self.edges[e];
        let s = self.boundary_edge_dir[k] as f64;
        let (p, q) = (self.vertices[a], self.vertices[b]);
        let (tx, ty) = (s * (q[0] - p[0]), s * (q[1] - p[1]));
        let l = (tx * tx + ty * ty).sqrt();
        [ty / l, -tx / l]
    }
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<SimplicialComplex> {
    let text = std::fs::read_to_string(path)?;
    SimplicialComplex::parse(&text)
}

pub fn signed_area(v: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}
