//! Quantum discord, information deficits and geometric discord for
//! bipartite states whose measured subsystem is a spin 1.
//!
//! Local projective measurements on the qutrit are parametrized by three
//! intrinsic angles and an SU(2) rotation; see [`measgeo`]. [`qmeasures`]
//! evaluates the measures at a fixed measurement and [`optim`] minimizes
//! them over measurement families.

pub mod error;
pub mod io;
pub mod matlib;
pub mod measgeo;
pub mod models;
pub mod optim;
pub mod qmeasures;
pub mod spinops;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
