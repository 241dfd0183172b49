//! Marked chain-order polytopes, their polyptych lattices, and the
//! associated algebras.

pub mod acceptance;
pub mod algebra;
pub mod cox;
pub mod degeneration;
pub mod error;
pub mod geometry;
pub mod marked_poset;
pub mod mco;
pub mod polyptych;
pub mod rng;
pub mod semialgebra;

pub use error::{Code, Error, Result};
