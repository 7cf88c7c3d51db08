//! Algebraic Bethe ansatz for so₃-invariant inhomogeneous spin chains.
//!
//! The crate is `no_std` (it needs `alloc`). It builds the monodromy matrix of
//! a chain of three-dimensional sites, its Gauss coordinates and the off-shell
//! Bethe vectors, and checks the operator identities, action formulas, Bethe
//! equations and transfer-matrix spectra as finite-dimensional statements.

#![no_std]
// index loops follow the T_{i,j} notation
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod action;
pub mod bethe;
pub mod chain;
pub mod error;
pub mod gauss;
pub mod gl2ref;
pub mod hilbert;
pub mod report;
pub mod rmat;
pub mod spectrum;

pub use bethe::{bethe_vector, BetheContext, BetheState, Method};
pub use chain::{monodromy, ChainSpec, MonodromyEval};
pub use error::{Error, Result};
pub use gauss::{gauss_at, gauss_decompose, GaussFrame};
pub use hilbert::{HVector, Operator, C64};
pub use report::Report;
