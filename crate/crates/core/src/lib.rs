//! Computational toolkit for the finite-dimensional topological data of
//! rational conformal field theories: modular S/T matrices and their SL2(Z)
//! consistency conditions, Verlinde fusion rules and conformal-block
//! dimensions, characters as exact q-series with rational exponents, torus
//! modular invariants, four-point conformal blocks with branch-tracked
//! monodromy, Knizhnik-Zamolodchikov transport, braid-group representations,
//! and holomorphic-orbifold surface counting.
//!
//! The crate keeps every quantity that is exactly rational (conformal
//! weights, central charges, series exponents and coefficients) in exact
//! arithmetic, and confines floating point to genuinely transcendental
//! evaluations (S-matrix entries, phases, series evaluation, transport).

pub mod blocks;
pub mod characters;
pub mod error;
pub mod fusion;
pub mod invariants;
pub mod kz;
pub mod linalg;
pub mod mcg_reps;
pub mod modular_data;
pub mod orbifold;

pub use error::{Error, Result};
