//! Finite-dimensional noncommutative L^p laboratory.
//!
//! Matrix algebras stand in for noncommutative L^p spaces. The crate provides
//! Schatten and Hilbert-space-valued norms ([`matrix`], [`hvnorms`]), a
//! sectorial functional calculus for structured superoperators ([`funcalc`]),
//! estimators for Rademacher, column and row boundedness ([`rbound`]), square
//! functions ([`sqfn`]) and a set of concrete semigroup models ([`models`]).

pub mod convex;
pub mod error;
pub mod funcalc;
pub mod hvnorms;
pub mod matrix;
pub mod models;
pub mod random;
pub mod rbound;
pub mod sqfn;

pub use error::{Error, Result};
pub use matrix::{CMatrix, PExponent, C64};
