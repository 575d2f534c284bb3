//! Arbitrary Lagrangian-Eulerian mesh motion: boundary displacements are
//! carried into the interior by discrete harmonic extension.

use crate::complex::SimplicialComplex;
use crate::error::{PhError, Result};
use crate::forms::HodgeSystem;

/// Interior displacement from boundary displacements (traversal order).
pub fn extend_displacement(h: &HodgeSystem, bd: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    let c = h.complex();
    if bd.len() != c.boundary_vertices().len() {
        return Err(PhError::Dimension("displacement length differs from boundary vertex count".into()));
    }
    let mut out = vec![[0.0; 2]; c.n_vertices()];
    for (k, &v) in c.boundary_vertices().iter().enumerate() {
        out[v] = bd[k];
    }
    for comp in 0..2 {
        let x: Vec<f64> = out.iter().map(|d| d[comp]).collect();
        let kx = h.stiffness().mul_vec(&x);
        let rhs: Vec<f64> = c.interior_vertices().iter().map(|&i| -kx[i]).collect();
        let xi = h.solve_dirichlet(&rhs)?;
        for (k, &i) in c.interior_vertices().iter().enumerate() {
            out[i][comp] = xi[k];
        }
    }
    Ok(out)
}

/// New complex with boundary vertices moved by `bd` and the interior following.
pub fn deform(h: &HodgeSystem, bd: &[[f64; 2]]) -> Result<SimplicialComplex> {
    let disp = extend_displacement(h, bd)?;
    let c = h.complex();
    let pos = c.vertices().iter().zip(&disp).map(|(p, d)| [p[0] + d[0], p[1] + d[1]]).collect();
    c.with_positions(pos)
}
