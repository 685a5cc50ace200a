//! Constrained-Hamiltonian treatment of the classical Dirac field.
//!
//! The crate mechanically derives the primary constraints, consistency
//! conditions, constraint matrices, Dirac brackets and reduced phase spaces
//! of the lattice Dirac field in three formalisms:
//!
//! * a spinorial track with factor-ordered Poisson and Dirac brackets,
//! * a Grassmann track built on left derivatives,
//! * a Grassmann track built on right derivatives,
//!
//! then second-quantizes each track on a finite fermionic Fock space and
//! checks that all three bracket-to-anticommutator recipes land on the same
//! fundamental anticommutator. A small RK4 integrator evolves the lattice
//! Dirac field and cross-checks energy, norm and dispersion against the
//! Hamiltonian machinery.
//!
//! Everything algebraic runs over exact Gaussian-rational scalars; float
//! mirrors exist where physics needs them (time evolution, rotations).

pub mod brackets;
pub mod bergmann;
pub mod dynamics;
pub mod error;
pub mod gamma;
pub mod grassmann;
pub mod matrix;
pub mod phase;
pub mod quantization;
pub mod report;
pub mod scalar;
pub mod spin;

pub use error::CoreError;
pub use scalar::{Constants, C64, CQ, Q};
