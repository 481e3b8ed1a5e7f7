//! Symbolic-numeric toolkit for graph Laplacians with external kinematics:
//! Symanzik and spanning-forest polynomials, generalised Laplacian
//! determinant identities (complex and quaternionic), canonical bi-invariant
//! differential forms, and Monte Carlo evaluation of canonical integrals
//! with their contraction (Stokes) relations.

pub mod error;
pub mod forms;
pub mod graph;
pub mod integrator;
pub mod kinematics;
pub mod laplacian;
pub mod library;
pub mod numeric;
pub mod poly;
pub mod rat;
pub mod scalar;
pub mod stokes;
pub mod symanzik;

pub use error::{Error, Result};
