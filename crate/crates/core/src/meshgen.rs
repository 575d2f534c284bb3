//! Structured mesh generators for the shipped meshes and tests.

use crate::complex::{signed_area, Label, SimplicialComplex};
use crate::error::Result;

pub fn unit_triangle() -> Result<SimplicialComplex> {
    SimplicialComplex::from_parts(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![[0, 1, 2]],
        &[(0, 1, Label::Gamma), (1, 2, Label::Gamma), (2, 0, Label::Gamma)],
    )
}

/// Rectangle [x0, x0+w] × [y0, y0+h] on an nx × ny grid, two triangles per
/// cell. Edges on the top side get `top`, the rest `sides`.
pub fn rectangle(x0: f64, y0: f64, w: f64, h: f64, nx: usize, ny: usize, top: Label, sides: Label) -> Result<SimplicialComplex> {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut v = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            v.push([x0 + w * i as f64 / nx as f64, y0 + h * j as f64 / ny as f64]);
        }
    }
    let mut t = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            // alternate the diagonal so the mesh has no preferred direction
            if (i + j) % 2 == 0 {
                t.push([a, b, c]);
                t.push([a, c, d]);
            } else {
                t.push([a, b, d]);
                t.push([b, c, d]);
            }
        }
    }
    let mut lab = Vec::new();
    for i in 0..nx {
        lab.push((id(i, 0), id(i + 1, 0), sides));
        lab.push((id(i, ny), id(i + 1, ny), top));
    }
    for j in 0..ny {
        lab.push((id(0, j), id(0, j + 1), sides));
        lab.push((id(nx, j), id(nx, j + 1), sides));
    }
    SimplicialComplex::from_parts(v, t, &lab)
}

/// Unit square, top Σ, rest Γ.
pub fn unit_square(n: usize) -> Result<SimplicialComplex> {
    rectangle(0.0, 0.0, 1.0, 1.0, n, n, Label::Sigma, Label::Gamma)
}

/// Wave tank [0, length] × [-depth, 0] with a free top surface.
pub fn tank(length: f64, depth: f64, nx: usize, ny: usize) -> Result<SimplicialComplex> {
    rectangle(0.0, -depth, length, depth, nx, ny, Label::Sigma, Label::Gamma)
}

/// Closed box with all walls fixed.
pub fn closed_box(n: usize) -> Result<SimplicialComplex> {
    rectangle(0.0, 0.0, 1.0, 1.0, n, n, Label::Gamma, Label::Gamma)
}

/// Disc of radius `r` with `rings` rings of 6k vertices each.
pub fn disc(r: f64, rings: usize, boundary: Label) -> Result<SimplicialComplex> {
    let mut v = vec![[0.0, 0.0]];
    let mut ring_ids: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..=rings {
        let n = 6 * k;
        let rad = r * k as f64 / rings as f64;
        let mut ids = Vec::with_capacity(n);
        for j in 0..n {
            let th = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            ids.push(v.len());
            v.push([rad * th.cos(), rad * th.sin()]);
        }
        ring_ids.push(ids);
    }
    let mut t = Vec::new();
    for k in 1..=rings {
        zip_rings(&v, &ring_ids[k - 1], &ring_ids[k], &mut t);
    }
    let outer = &ring_ids[rings];
    let lab: Vec<_> = (0..outer.len()).map(|j| (outer[j], outer[(j + 1) % outer.len()], boundary)).collect();
    SimplicialComplex::from_parts(v, t, &lab)
}

/// Annulus r_in ≤ |x| ≤ r_out with `nr` radial layers and `nt` angular cells.
pub fn annulus(r_in: f64, r_out: f64, nr: usize, nt: usize) -> Result<SimplicialComplex> {
    let mut v = Vec::new();
    let mut rings = Vec::new();
    for k in 0..=nr {
        let rad = r_in + (r_out - r_in) * k as f64 / nr as f64;
        let mut ids = Vec::new();
        for j in 0..nt {
            let th = 2.0 * std::f64::consts::PI * j as f64 / nt as f64;
            ids.push(v.len());
            v.push([rad * th.cos(), rad * th.sin()]);
        }
        rings.push(ids);
    }
    let mut t = Vec::new();
    for k in 0..nr {
        zip_rings(&v, &rings[k], &rings[k + 1], &mut t);
    }
    let mut lab = Vec::new();
    for j in 0..nt {
        lab.push((rings[0][j], rings[0][(j + 1) % nt], Label::Gamma));
        lab.push((rings[nr][j], rings[nr][(j + 1) % nt], Label::Gamma));
    }
    SimplicialComplex::from_parts(v, t, &lab)
}

pub fn two_triangles() -> Result<SimplicialComplex> {
    SimplicialComplex::from_parts(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [3.0, 0.0], [4.0, 0.0], [3.0, 1.0]],
        vec![[0, 1, 2], [3, 4, 5]],
        &[
            (0, 1, Label::Gamma),
            (1, 2, Label::Gamma),
            (2, 0, Label::Gamma),
            (3, 4, Label::Gamma),
            (4, 5, Label::Gamma),
            (5, 3, Label::Gamma),
        ],
    )
}

fn angle(p: [f64; 2]) -> f64 {
    let a = p[1].atan2(p[0]);
    if a < 0.0 {
        a + 2.0 * std::f64::consts::PI
    } else {
        a
    }
}

/// Triangulate the band between two concentric rings (angles ascending).
fn zip_rings(v: &[[f64; 2]], inner: &[usize], outer: &[usize], t: &mut Vec<[usize; 3]>) {
    let two_pi = 2.0 * std::f64::consts::PI;
    let (ni, no) = (inner.len(), outer.len());
    let ang = |ids: &[usize], k: usize| {
        let n = ids.len();
        angle(v[ids[k % n]]) + two_pi * (k / n) as f64
    };
    let mut push = |a: usize, b: usize, c: usize| {
        let tri = [a, b, c];
        if signed_area(v, &tri) > 0.0 {
            t.push(tri);
        } else {
            t.push([a, c, b]);
        }
    };
    if ni == 1 {
        for j in 0..no {
            push(inner[0], outer[j], outer[(j + 1) % no]);
        }
        return;
    }
    let (mut i, mut j) = (0usize, 0usize);
    while i < ni || j < no {
        let adv_outer = if i == ni {
            true
        } else if j == no {
            false
        } else {
            ang(outer, j + 1) <= ang(inner, i + 1)
        };
        if adv_outer {
            push(inner[i % ni], outer[j % no], outer[(j + 1) % no]);
            j += 1;
        } else {
            push(inner[i % ni], outer[j % no], inner[(i + 1) % ni]);
            i += 1;
        }
    }
}
