//! Coefficient ring and differential polynomial algebra.

mod coeff;
mod diffpoly;
mod ratfn;
pub mod render;

pub use coeff::{CoeffFn, CoeffKey};
pub use diffpoly::{DiffPoly, GradeReport, JetMono, JetPoint, JetVar, TermKey, Var};
pub use ratfn::RatDiffFn;
