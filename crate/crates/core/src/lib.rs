//! Exact symbolic-numeric engine for dispersionless bihamiltonian
//! tau-symmetric hierarchies built from Frobenius manifold data.
//!
//! The crate is organized bottom-up:
//!
//! - [`jetring`]: exact coefficient ring and differential polynomials in jet
//!   variables with an `eps` grading.
//! - [`localfunc`]: local functionals modulo total derivatives (Euler operator,
//!   total-derivative test, homotopy antiderivative).
//! - [`poisson`]: delta-distribution Poisson operators, Hamiltonian flows and
//!   hydrodynamic (Dubrovin–Novikov) checks.
//! - [`frobenius`]: Frobenius manifolds from a potential.
//! - [`hierarchy`]: the densities `h_{alpha,p}` and the `Omega` matrix.
//! - [`pencil`]: bihamiltonian pencils, Magri recursion, KdV and Toda Casimirs.
//! - [`miura`]: Miura and quasi-Miura transformations.
//! - [`fourier`]: the formal Fourier mode algebra and the lift of densities.
//! - [`solver`]: numerical hodograph solutions and tau-function checks.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod fourier;
pub mod frobenius;
pub mod hierarchy;
pub mod jetring;
pub mod linalg;
pub mod localfunc;
pub mod miura;
pub mod par;
pub mod pencil;
pub mod poisson;
pub mod rat;
pub mod solver;

pub use error::{Error, Result};
pub use frobenius::FrobeniusManifold;
pub use hierarchy::Hierarchy;
pub use jetring::{CoeffFn, CoeffKey, DiffPoly, JetVar, RatDiffFn, Var};
pub use localfunc::LocalFunctional;
pub use poisson::{HydroBracket, PoissonOperator};
pub use rat::Rat;
