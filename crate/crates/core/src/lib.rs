//! Restricted isometry experiments for structured measurement ensembles built
//! from group orbits of a single instrument.

pub mod error;
pub mod group_ops;
pub mod infdim;
pub mod instruments;
pub mod numerics;
pub mod rip;
pub mod rng;
pub mod sparsity;

pub use error::{Error, Result};
pub use numerics::{CMatrix, CVector, Exponent, C64};
pub use rng::{RngState, SeededRng};
