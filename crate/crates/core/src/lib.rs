//! Finite-dimensional quantum-mechanics workbench.

pub mod chain;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod hilbert;
pub mod io;
pub mod jointqp;
pub mod measurement;
pub mod mepacket;
pub mod povm;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;
