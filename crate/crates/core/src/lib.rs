//! Random-length random walks, loop-erased walks, self-avoiding walks and the
//! Ising worm algorithm on `d`-dimensional discrete tori with periodic
//! boundary conditions, together with exact dynamic-programming evaluators,
//! asymptotic predictions and finite-size-scaling post-processing.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and parallel scheduling live in the `torwalk` crate.
#![no_std]

extern crate alloc;

pub mod asymptotics;
pub mod error;
pub mod fss;
pub mod ising;
pub mod lattice;
pub mod orbit;
pub mod rllerw;
pub mod rlrw;
pub mod rng;
pub mod saw;
pub mod stencil;
pub mod walklen;

pub use error::{Error, Result};
pub use lattice::{Site, Step, Torus};
pub use walklen::WalkLengthLaw;
