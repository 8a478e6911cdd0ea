//! Exact rational computation engine for the rank-one lattice vertex
//! operator algebra `V_L` (`<α, α> = 2k`) and its charge-conjugation
//! orbifold `V_L^+`.
//!
//! The crate is layered bottom-up:
//!
//! - [`linalg`]: rationals, sparse vectors, row reduction, generalized eigenspaces
//! - [`fock`]: lattice labels, Fock monomials and states, weights, theta
//! - [`modes`]: Heisenberg, lattice and Virasoro modes; identity checkers
//! - [`zhu`]: Zhu's products, `O(V)` certificates, `Ω(M)` and the module axioms
//! - [`module`]: graded module truncations and their direct sums
//! - [`orbifold`]: the module catalogue, lowest weights, decomposition, submodules
//! - [`suites`]: seeded verification suites with JSON reports

pub mod error;
pub mod fock;
pub mod linalg;
pub mod modes;
pub mod module;
pub mod orbifold;
pub mod suites;
pub mod zhu;

pub use error::EngineError;
pub use fock::{FockMonomial, LatticeParams, Sector, Sign, State};
pub use linalg::{Rational, RationalMatrix, SparseVector};
pub use modes::{ModeIndex, VoaElement};
