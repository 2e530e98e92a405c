//! Numerical laboratory for the conformally invariant fourth-order
//! Gross-Pitaevskii system on the punctured space.
//!
//! The Emden-Fowler change of variables turns radially symmetric solutions
//! into orbits of a fourth-order constant-coefficient ODE system on the
//! cylinder. This crate realizes the two classified solution families
//! (spherical / homoclinic and Delaunay / periodic), integrates the cylinder
//! system with event detection, tracks the conserved Hamiltonian and the
//! Pohozaev invariant, locates Delaunay orbits by topological shooting, and
//! classifies sampled radial profiles by the invariant's sign.

pub mod classify;
pub mod error;
pub mod invariants;
pub mod io;
pub mod model;
pub mod ode;
pub mod quad;
pub mod shooting;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use model::Params;
