//! Sparse storage and the symmetric positive definite solvers used by every
//! elliptic problem in the crate.

use crate::error::{PhError, Result};

/// Compressed sparse row matrix with sorted, duplicate-free columns.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl CsrMatrix {
    /// Assemble from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, trip: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, _, _) in trip {
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; trip.len()];
        let mut vals = vec![0.0; trip.len()];
        let mut next = counts.clone();
        for &(r, c, v) in trip {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut data = Vec::with_capacity(trip.len());
        let mut row: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            row.clear();
            for k in counts[r]..counts[r + 1] {
                row.push((cols[k], vals[k]));
            }
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut s = 0.0;
                while k < row.len() && row[k].0 == c {
                    s += row[k].1;
                    k += 1;
                }
                indices.push(c);
                data.push(s);
            }
            indptr[r + 1] = indices.len();
        }
        CsrMatrix { nrows, ncols, indptr, indices, data }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: d.to_vec(),
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.data[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let s = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        match s.binary_search(&c) {
            Ok(k) => self.data[self.indptr[r] + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "dimension mismatch in mat-vec");
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "dimension mismatch in transposed mat-vec");
        let mut y = vec![0.0; self.ncols];
        for r in 0..self.nrows {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            for (c, v) in self.row(r) {
                y[c] += v * xr;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let mut t = Vec::with_capacity(self.data.len());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                t.push((c, r, v));
            }
        }
        CsrMatrix::from_triplets(self.ncols, self.nrows, &t)
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &CsrMatrix) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut trip = Vec::new();
        let mut acc = vec![0.0; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut touched = Vec::new();
        for r in 0..self.nrows {
            touched.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = 0.0;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                trip.push((r, c, acc[c]));
            }
        }
        CsrMatrix::from_triplets(self.nrows, other.ncols, &trip)
    }

    /// Principal submatrix on the given index set (in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut cmap = vec![usize::MAX; self.ncols];
        for (j, &c) in cols.iter().enumerate() {
            cmap[c] = j;
        }
        let mut trip = Vec::new();
        for (i, &r) in rows.iter().enumerate() {
            for (c, v) in self.row(r) {
                if cmap[c] != usize::MAX {
                    trip.push((i, cmap[c], v));
                }
            }
        }
        CsrMatrix::from_triplets(rows.len(), cols.len(), &trip)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric sparsity pattern.
pub fn rcm_order(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows;
    let deg: Vec<usize> = (0..n).map(|r| a.indptr[r + 1] - a.indptr[r]).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&i| (deg[i], i));
    for &s in &starts {
        if visited[s] {
            continue;
        }
        // pseudo-peripheral start: walk to the last BFS level twice
        let mut root = s;
        for _ in 0..2 {
            let lvl = bfs_last(a, root, &visited);
            root = *lvl.iter().min_by_key(|&&i| (deg[i], i)).unwrap_or(&root);
        }
        let mut queue = std::collections::VecDeque::new();
        visited[root] = true;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nb: Vec<usize> = a.row(u).map(|(c, _)| c).filter(|&c| !visited[c]).collect();
            nb.sort_by_key(|&i| (deg[i], i));
            for c in nb {
                visited[c] = true;
                queue.push_back(c);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_last(a: &CsrMatrix, root: usize, blocked: &[bool]) -> Vec<usize> {
    let mut seen = std::collections::HashSet::new();
    seen.insert(root);
    let mut level = vec![root];
    loop {
        let mut next = Vec::new();
        for &u in &level {
            for (c, _) in a.row(u) {
                if !blocked[c] && seen.insert(c) {
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            return level;
        }
        level = next;
    }
}

/// Envelope (profile) Cholesky factorization `P A Pᵀ = L Lᵀ` under RCM ordering.
#[derive(Clone, Debug)]
pub struct SparseCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    rowptr: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(PhError::Solver("Cholesky needs a square matrix".into()));
        }
        let n = a.nrows;
        let perm = rcm_order(a);
        let mut inv = vec![0usize; n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for r in 0..n {
            let pr = inv[r];
            for (c, _) in a.row(r) {
                let pc = inv[c];
                if pc < pr && pc < first[pr] {
                    first[pr] = pc;
                }
            }
        }
        let mut rowptr = vec![0usize; n + 1];
        for i in 0..n {
            rowptr[i + 1] = rowptr[i] + (i - first[i] + 1);
        }
        let mut vals = vec![0.0; rowptr[n]];
        for r in 0..n {
            let pr = inv[r];
            for (c, v) in a.row(r) {
                let pc = inv[c];
                if pc <= pr {
                    vals[rowptr[pr] + (pc - first[pr])] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = vals[rowptr[i] + (j - fi)];
                for k in k0..j {
                    s -= vals[rowptr[i] + (k - fi)] * vals[rowptr[j] + (k - fj)];
                }
                let ljj = vals[rowptr[j] + (j - fj)];
                vals[rowptr[i] + (j - fi)] = s / ljj;
            }
            let mut d = vals[rowptr[i] + (i - fi)];
            for k in fi..i {
                let l = vals[rowptr[i] + (k - fi)];
                d -= l * l;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(PhError::Solver(format!(
                    "matrix not positive definite (pivot {d:e} at row {})",
                    perm[i]
                )));
            }
            vals[rowptr[i] + (i - fi)] = d.sqrt();
        }
        Ok(SparseCholesky { n, perm, first, rowptr, vals })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let mut s = y[i];
            for k in fi..i {
                s -= self.vals[self.rowptr[i] + (k - fi)] * y[k];
            }
            y[i] = s / self.vals[self.rowptr[i] + (i - fi)];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            y[i] /= self.vals[self.rowptr[i] + (i - fi)];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.vals[self.rowptr[i] + (k - fi)] * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}

/// Jacobi-preconditioned conjugate gradient; deterministic, used when a
/// factorization is unavailable.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], rtol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        let ap = a.mul_vec(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= rtol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(PhError::Solver(format!("conjugate gradient did not reach {rtol:e} in {max_iter} iterations")))
}

/// SPD solver: envelope Cholesky, falling back to CG when factorization fails.
#[derive(Clone, Debug)]
pub enum SpdSolver {
    Direct(SparseCholesky),
    Iterative(CsrMatrix),
}

impl SpdSolver {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        match SparseCholesky::factor(a) {
            Ok(f) => Ok(SpdSolver::Direct(f)),
            Err(e) => {
                if a.nrows == 0 {
                    return Err(e);
                }
                Ok(SpdSolver::Iterative(a.clone()))
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            SpdSolver::Direct(f) => Ok(f.solve(b)),
            SpdSolver::Iterative(a) => conjugate_gradient(a, b, 1e-12, 20 * a.nrows.max(10)),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(s: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

/// Numerical rank by singular values with relative threshold.
pub fn numerical_rank(m: &nalgebra::DMatrix<f64>, rtol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rtol * smax).count()
}
