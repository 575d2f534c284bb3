//! Port-Hamiltonian incompressible Euler flow with a free surface,
//! discretized with Whitney forms on 2D triangulations.

pub mod complex;
pub mod error;
pub mod forms;
pub mod linalg;
pub mod quadrature;

pub use complex::{load_mesh, Label, SimplicialComplex};
pub use error::{PhError, Result};
pub use forms::{Cochain, HodgeSystem};
pub mod elliptic;
pub mod meshgen;
pub mod ale;
pub mod energetics;
pub mod brackets;
pub mod dirac;
pub mod dynamics;
pub mod suites;
pub mod io;
pub mod cli;
